use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qndlab_cli::config::Times;
use qndlab_cli::emit::{format_float, QPD_HEADER};
use qndlab_cli::error::IoError;
use qndlab_cli::run::evaluate_point;
use qndlab_cli::{check, emit_csv, emit_figure, emit_json, parse_config, read_report, run_with, CliError, ExperimentConfig, Result};

#[derive(Parser, Debug)]
#[command(name = "qndlab", version, about = "Non-demolition quasi-probabilities and Leggett-Garg tests")]
struct Cli {
    /// Directory for report files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Tolerance for `check` and the identity output (overrides tolerances.validation).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to QNDLAB_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full pipeline and write a report.
    Run { config: PathBuf },
    /// Distribution at a single point; `--at x` uses times (0, x, 2x).
    Qpd {
        config: PathBuf,
        #[arg(long)]
        at: Option<f64>,
    },
    /// Invariant and identity suites; exits nonzero on any failure.
    Check { config: PathBuf },
    /// Render an SVG figure from a report (CSV or JSON).
    Fig {
        report: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Parameter values for distribution panels (repeatable).
        #[arg(long)]
        at: Vec<f64>,
    },
    /// Print the configuration with all defaults filled in.
    Echo { config: PathBuf },
}

fn load_config(path: &Path, cli: &Cli) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Read { path: path.to_path_buf(), source: e })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(CliError::validation("--tol", "must be a non-negative number"));
        }
        config.tolerances.validation = tol;
    }
    Ok(config)
}

fn threads(cli: &Cli) -> Result<Option<usize>> {
    let n = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("QNDLAB_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim().parse().map_err(|_| CliError::validation("QNDLAB_THREADS", format!("not a count: {v:?}")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::validation("threads", "must be at least 1"));
    }
    Ok(n)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| IoError::Write { path: dir.to_path_buf(), source: e }.into())
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Run { config } => {
            let config = load_config(config, cli)?;
            let report = run_with(&config, threads(cli)?)?;
            create_dir(&cli.out_dir)?;
            let path = match cli.format {
                Format::Csv => {
                    let path = cli.out_dir.join("report.csv");
                    emit_csv(&report, &path)?;
                    path
                }
                Format::Json => {
                    let path = cli.out_dir.join("report.json");
                    emit_json(&report, &path)?;
                    path
                }
            };
            println!("wrote {} records to {}", report.records.len(), path.display());
        }
        Command::Qpd { config, at } => {
            let mut config = load_config(config, cli)?;
            let param = match (at, &config.times) {
                (Some(x), _) => {
                    config.sweep = None;
                    config.times = Some(Times { t0: 0.0, t1: *x, t2: 2.0 * x });
                    *x
                }
                (None, Some(_)) => config.parameters()[0],
                (None, None) => return Err(CliError::validation("--at", "required for sweep configurations")),
            };
            if !config.wants(qndlab_cli::Output::Qpd) {
                config.outputs.push(qndlab_cli::Output::Qpd);
            }
            let record = evaluate_point(&config, param)?;
            match cli.format {
                Format::Csv => {
                    println!("{}", QPD_HEADER.join(","));
                    for e in &record.qpd {
                        println!("{},{},{},{}", format_float(param), format_float(e.delta), format_float(e.weight), e.kind.as_str());
                    }
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&record).expect("records serialize")),
            }
        }
        Command::Check { config } => {
            let config = load_config(config, cli)?;
            let summary = check(&config, config.tolerances.validation, threads(cli)?)?;
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&summary).expect("summaries serialize")),
                Format::Csv => {
                    for r in summary.results.iter().filter(|r| !r.passed) {
                        println!("FAIL {} [{}]: residual {:.3e} > {:.1e}", r.name, r.subject, r.residual, r.tolerance);
                    }
                    println!("{} checks, {} failed", summary.results.len(), summary.failures());
                }
            }
            if !summary.all_passed() {
                return Err(CliError::ChecksFailed { failed: summary.failures(), total: summary.results.len() });
            }
        }
        Command::Fig { report, output, at } => {
            let report = read_report(report)?;
            emit_figure(&report, output, at)?;
            println!("wrote {}", output.display());
        }
        Command::Echo { config } => print!("{}", load_config(config, cli)?.to_toml()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(err) => {
            let structured = serde_json::json!({ "error": { "kind": err.kind(), "message": err.to_string() } });
            eprintln!("{structured}");
            ExitCode::from(match err {
                CliError::ChecksFailed { .. } => 2,
                _ => 1,
            })
        }
    }
}
