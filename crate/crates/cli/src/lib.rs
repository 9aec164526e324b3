//! Configuration, sweep orchestration and report/figure output for the
//! `qndlab` command-line tool.

pub mod config;
pub mod emit;
pub mod error;
pub mod figure;
pub mod run;

pub use config::{parse_config, ExperimentConfig, Output};
pub use emit::{emit_csv, emit_json, read_report};
pub use error::{CliError, IoError, Result};
pub use figure::{emit_figure, render_svg};
pub use run::{check, run, run_with, CheckSummary, PointRecord, RunReport};
