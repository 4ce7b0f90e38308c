//! Batch driver: runs verification suites and emits deterministic
//! reports. Exit codes: 0 all pass, 1 assertion failure, 2 bad
//! configuration.

use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ncg_cli::config::{RunConfig, ALL_SUITES};
use ncg_cli::suites::{decay_table_csv, hp_dims_json, run_all};

#[derive(Parser)]
#[command(
    name = "ncg",
    about = "verification workbench for deformed torus algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and report measured defects.
    Verify(VerifyArgs),
    /// Print the homology/K-rank data for one cyclic group as JSON.
    HpDims(HpDimsArgs),
    /// Emit a radius,value,fit_residual decay table as CSV.
    DecayTable(DecayTableArgs),
}

#[derive(Args)]
struct DecayTableArgs {
    /// Which table: sigma-ray, sigma-radial, commutator, or defect.
    #[arg(long)]
    kind: String,
    /// Axis for the sigma tables (1 or 2).
    #[arg(long, default_value = "1")]
    axis: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run (or "all"); also accepted via --suite.
    suites: Vec<String>,
    /// Suite to run; repeatable.
    #[arg(long = "suite")]
    suite_flags: Vec<String>,
    /// TOML-style configuration file layered over the defaults.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Grid half-width override.
    #[arg(long = "grid-L")]
    grid_l: Option<f64>,
    /// Grid step override.
    #[arg(long = "grid-h")]
    grid_h: Option<f64>,
    /// Group selector like Z4; repeatable.
    #[arg(long = "group")]
    groups: Vec<String>,
    /// Number of refinement resolutions (2..=4) for the refinement
    /// studies.
    #[arg(long)]
    refine: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Report format.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct HpDimsArgs {
    /// Group selector like Z6.
    #[arg(long)]
    group: String,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn parse_group(s: &str) -> Result<usize, String> {
    let t = s.trim();
    let digits = t
        .strip_prefix('Z')
        .or_else(|| t.strip_prefix('z'))
        .unwrap_or(t);
    digits
        .parse::<usize>()
        .map_err(|_| format!("bad group selector {s}; expected Z1, Z2, Z3, Z4, or Z6"))
}

fn emit(path: &Option<std::path::PathBuf>, bytes: &str) -> Result<(), String> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes.as_bytes())
                .map_err(|e| e.to_string())?;
            stdout.write_all(b"\n").map_err(|e| e.to_string())
        }
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| format!("cannot write {}: {e}", p.display()))
        }
    }
}

fn run_verify(args: VerifyArgs) -> Result<bool, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        cfg.apply_file(&text).map_err(|e| e.to_string())?;
    }
    if let Some(l) = args.grid_l {
        cfg.grid_l = l;
    }
    if let Some(h) = args.grid_h {
        cfg.grid_h = h;
    }
    if !args.groups.is_empty() {
        cfg.groups = args
            .groups
            .iter()
            .map(|g| parse_group(g))
            .collect::<Result<_, _>>()?;
    }
    if let Some(r) = args.refine {
        cfg.refine = r;
    }
    let mut requested: Vec<String> = args
        .suites
        .iter()
        .chain(args.suite_flags.iter())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if requested.iter().any(|s| s == "all") {
        requested = ALL_SUITES.iter().map(|s| s.to_string()).collect();
    }
    if !requested.is_empty() {
        cfg.suites = requested;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    if cfg.suites.is_empty() {
        return Err("no suites requested".into());
    }

    let reports = run_all(&cfg);
    let all_pass = reports.iter().all(|r| r.all_pass());
    let body = match args.format.as_str() {
        "json" => {
            let inner = reports
                .iter()
                .map(|r| r.to_json())
                .collect::<Vec<_>>()
                .join(",");
            format!(
                "{{\"config_hash\":\"{:016x}\",\"pass\":{},\"suites\":[{}]}}",
                cfg.hash(),
                all_pass,
                inner
            )
        }
        "csv" => reports
            .iter()
            .map(|r| r.to_csv())
            .collect::<Vec<_>>()
            .join(""),
        other => return Err(format!("unknown format {other}; expected json or csv")),
    };
    emit(&args.out, &body)?;
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(args) => match run_verify(args) {
            Ok(true) => ExitCode::from(0),
            Ok(false) => ExitCode::from(1),
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
        Command::DecayTable(args) => {
            match decay_table_csv(&args.kind, args.axis, &RunConfig::default()) {
                Ok(csv) => {
                    if let Err(msg) = emit(&args.out, &csv) {
                        eprintln!("error: {msg}");
                        return ExitCode::from(2);
                    }
                    ExitCode::from(0)
                }
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
            }
        }
        Command::HpDims(args) => match parse_group(&args.group).and_then(|k| hp_dims_json(k)) {
            Ok(json) => {
                if let Err(msg) = emit(&args.out, &json) {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
                ExitCode::from(0)
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}
