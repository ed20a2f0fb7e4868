use serde::{Deserialize, Serialize};
use son_core::report::{Status, VerificationReport};

use crate::config::CampaignConfig;

pub const SCHEMA: u32 = 1;

/// One table cell. Non-finite reals are stored as text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn real(x: f64) -> Self {
        if x.is_finite() {
            Cell::Real(x)
        } else {
            Cell::Text(format!("{x}"))
        }
    }

    pub fn int(x: usize) -> Self {
        Cell::Int(x as i64)
    }

    pub fn text(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A numeric table, written as one CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub campaign: String,
    pub report: VerificationReport,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

/// Everything that depends on the wall clock.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Seconds since the Unix epoch at the start of the run.
    pub timestamp: u64,
    pub total_seconds: f64,
    /// Wall-clock seconds per entry of `checks`, same order.
    pub check_seconds: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub config: CampaignConfig,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<Table>,
    pub timing: Timing,
}

impl ReportDocument {
    pub fn new(config: CampaignConfig) -> Self {
        Self {
            schema: SCHEMA,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            summary: Summary::default(),
            checks: Vec::new(),
            tables: Vec::new(),
            timing: Timing::default(),
        }
    }

    pub fn tally(&mut self) {
        let count = |s: Status| self.checks.iter().filter(|c| c.report.status == s).count();
        self.summary = Summary {
            total: self.checks.len(),
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            skip: count(Status::Skip),
        };
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail == 0 {
            0
        } else {
            1
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find(&self, campaign: &str, check: &str, n: Option<usize>, l: Option<usize>) -> Option<&VerificationReport> {
        self.checks
            .iter()
            .find(|c| c.campaign == campaign && c.report.check == check && c.report.n == n && c.report.l == l)
            .map(|c| &c.report)
    }
}
