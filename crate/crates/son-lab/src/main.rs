use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use son_lab::config::{parse_list, Campaign, CampaignConfig, Caps, Format, Tolerances};
use son_lab::{emit, run_campaign, LabError};

/// Numerical checks for SO(n) AKLT chains.
#[derive(Parser, Debug)]
#[command(name = "son-lab", version)]
struct Cli {
    campaign: Campaign,
    /// Ranks, e.g. `3,4,6` or `3-6`; empty for none.
    #[arg(long, default_value = "3,4,5,6")]
    n: String,
    /// Chain lengths; each campaign picks its own when omitted.
    #[arg(long)]
    l: Option<String>,
    #[arg(long, default_value_t = Tolerances::default().kernel)]
    tol_kernel: f64,
    #[arg(long, default_value_t = Tolerances::default().matching)]
    tol_match: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (json, text) or directory (csv); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = Caps::default().dense)]
    cap_dense: usize,
    #[arg(long, default_value_t = Caps::default().sparse)]
    cap_sparse: usize,
}

fn config(cli: Cli) -> Result<CampaignConfig, LabError> {
    let mut cfg = CampaignConfig::new(cli.campaign, parse_list(&cli.n)?);
    cfg.l_list = cli.l.as_deref().map(parse_list).transpose()?;
    cfg.tolerances = Tolerances { kernel: cli.tol_kernel, matching: cli.tol_match };
    cfg.caps = Caps { dense: cli.cap_dense, sparse: cli.cap_sparse };
    cfg.seed = cli.seed;
    cfg.format = cli.format;
    cfg.output = cli.out;
    cfg.validate()?;
    if cfg.format == Format::Csv && cfg.output.is_none() {
        return Err(LabError::Config("--format csv needs --out <directory>".into()));
    }
    Ok(cfg)
}

fn run(cfg: &CampaignConfig) -> Result<i32, LabError> {
    let doc = run_campaign(cfg);
    let text = match cfg.format {
        Format::Csv => {
            let dir = cfg.output.as_ref().expect("validated");
            emit::write_csv_dir(&doc, dir)?;
            return Ok(doc.exit_code());
        }
        Format::Json => emit::to_json(&doc)?,
        Format::Text => emit::to_text(&doc),
    };
    match &cfg.output {
        Some(p) => fs::write(p, text).map_err(|e| LabError::Io { path: p.clone(), source: e })?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| LabError::Io { path: "<stdout>".into(), source: e })?,
    }
    Ok(doc.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = config(cli).and_then(|cfg| run(&cfg)).unwrap_or_else(|e| {
        eprintln!("son-lab: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
