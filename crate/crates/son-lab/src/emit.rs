//! JSON, CSV and plain-text writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use son_core::report::{Datum, Status};

use crate::document::{Cell, ReportDocument, Table};
use crate::LabError;

pub fn to_json(doc: &ReportDocument) -> Result<String, LabError> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(s: &str) -> Result<ReportDocument, LabError> {
    Ok(serde_json::from_str(s)?)
}

/// 17 significant digits, `.` as decimal separator.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(k) => k.to_string(),
        Cell::Real(x) => format_real(*x),
        Cell::Text(t) => t.clone(),
    }
}

pub fn table_csv(t: &Table) -> Result<String, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn datum_text(d: &Datum) -> String {
    match d {
        Datum::Bool(b) => b.to_string(),
        Datum::Int(k) => k.to_string(),
        Datum::Real(x) => format_real(*x),
        Datum::Complex { re, im } => format!("{}{:+.16e}i", format_real(*re), im),
        Datum::Text(t) => t.clone(),
        Datum::Reals(v) => v.iter().map(|x| format_real(*x)).collect::<Vec<_>>().join(";"),
        Datum::Ints(v) => v.iter().map(i64::to_string).collect::<Vec<_>>().join(";"),
        Datum::Spectrum(v) => v.iter().map(|(x, m)| format!("{}x{m}", format_real(*x))).collect::<Vec<_>>().join(";"),
    }
}

/// One row per check and value, for the `checks.csv` file.
pub fn checks_table(doc: &ReportDocument) -> Table {
    let mut t = Table::new("checks", &["campaign", "check", "n", "l", "status", "key", "value"]);
    let opt = |x: Option<usize>| x.map(Cell::int).unwrap_or_else(|| Cell::text(""));
    for c in &doc.checks {
        let r = &c.report;
        let status = Cell::text(status_name(r.status));
        if r.values.is_empty() {
            t.push(vec![Cell::text(&c.campaign), Cell::text(&r.check), opt(r.n), opt(r.l), status.clone(), Cell::text(""), Cell::text("")]);
        }
        for (k, v) in &r.values {
            t.push(vec![
                Cell::text(&c.campaign),
                Cell::text(&r.check),
                opt(r.n),
                opt(r.l),
                status.clone(),
                Cell::text(k),
                Cell::Text(datum_text(v)),
            ]);
        }
    }
    t
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skip => "SKIP",
    }
}

pub fn to_text(doc: &ReportDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} (schema {}), campaign {}, seed {}", doc.tool, doc.version, doc.schema, doc.config.campaign.name(), doc.config.seed);
    for (c, secs) in doc.checks.iter().zip(doc.timing.check_seconds.iter().chain(std::iter::repeat(&0.0))) {
        let r = &c.report;
        let n = r.n.map(|n| format!(" n={n}")).unwrap_or_default();
        let l = r.l.map(|l| format!(" l={l}")).unwrap_or_default();
        let _ = writeln!(s, "{:<4} {}/{}{n}{l}  {}  [{secs:.2}s]", status_name(r.status), c.campaign, r.check, r.detail);
    }
    let m = doc.summary;
    let _ = writeln!(s, "{} checks: {} pass, {} fail, {} skip", m.total, m.pass, m.fail, m.skip);
    s
}

/// Writes `<dir>/<table>.csv` for every table plus `checks.csv`; returns the paths.
pub fn write_csv_dir(doc: &ReportDocument, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut paths = Vec::new();
    for t in doc.tables.iter().cloned().chain(std::iter::once(checks_table(doc))) {
        let p = dir.join(format!("{}.csv", t.name));
        fs::write(&p, table_csv(&t)?).map_err(|e| LabError::io(&p, e))?;
        paths.push(p);
    }
    Ok(paths)
}
