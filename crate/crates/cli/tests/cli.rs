use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qndlab_cli::emit::{read_csv_report, MAIN_HEADER, QPD_HEADER};
use qndlab_cli::{emit_csv, emit_figure, parse_config, run, CliError, IoError, RunReport};

const BIN: &str = env!("CARGO_BIN_EXE_qndlab");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sweep(points: usize, extra: &str) -> String {
    format!(
        "observable = \"pauli-z\"\ninitial_state = \"paper-example\"\nhamiltonian = \"paper-example\"\n{extra}\n\
         [sweep]\nparameter = \"omega_tau\"\nstart = 0.5\nstop = 2.5\npoints = {points}\n"
    )
}

fn qndlab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("QNDLAB_THREADS").output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn three_point_sweep_writes_four_lines() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&parse_config(&sweep(3, "")).unwrap()).unwrap();
    let path = dir.path().join("r.csv");
    emit_csv(&report, &path).unwrap();
    let main = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = main.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], MAIN_HEADER.join(","));

    let qpd = fs::read_to_string(dir.path().join("r_qpd.csv")).unwrap();
    let mut rows = qpd.lines();
    assert_eq!(rows.next().unwrap(), QPD_HEADER.join(","));
    let mut deltas = std::collections::BTreeSet::new();
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert!(cols[3] == "classical" || cols[3] == "quantum");
        deltas.insert(cols[1].parse::<f64>().unwrap() as i64);
    }
    assert_eq!(deltas.into_iter().collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3]);

    let back = read_csv_report(&path).unwrap();
    assert_eq!(back.records.len(), 3);
    for (a, b) in back.records.iter().zip(&report.records) {
        assert_eq!(a.k, b.k);
        assert_eq!(a.negativity, b.negativity);
        assert_eq!(a.qpd, b.qpd);
    }
}

#[test]
fn unwritable_path_is_an_io_error() {
    let report = run(&parse_config(&sweep(2, "")).unwrap()).unwrap();
    let err = emit_csv(&report, Path::new("/nonexistent-dir/sub/r.csv")).unwrap_err();
    assert!(matches!(err, IoError::Write { .. }));
}

#[test]
fn empty_report_is_refused() {
    let mut report = run(&parse_config(&sweep(2, "")).unwrap()).unwrap();
    report.records.clear();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_figure(&report, &dir.path().join("f.svg"), &[]), Err(IoError::EmptyReport)));
    assert!(matches!(emit_csv(&report, &dir.path().join("r.csv")), Err(IoError::EmptyReport)));
}

#[test]
fn zero_hamiltonian_gives_trivial_k() {
    let text = sweep(5, "").replace("hamiltonian = \"paper-example\"", "hamiltonian = \"zero\"");
    let report = run(&parse_config(&text).unwrap()).unwrap();
    for r in &report.records {
        assert!((r.k.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.lgi_violated, Some(false));
        // Without dynamics only paths with i = j = k = l = m survive, so the
        // initial coherence never enters the distribution.
        assert!(r.negativity.abs() < 1e-15);
        let weights = r.total_weights();
        assert!((weights.iter().find(|w| w.0 == -3.0).unwrap().1 - 0.5).abs() < 1e-12);
        assert!((weights.iter().find(|w| w.0 == 3.0).unwrap().1 - 0.5).abs() < 1e-12);
    }
}

#[test]
fn run_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &sweep(40, "outputs = [\"qpd\", \"lg\", \"characteristic\"]"));
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = qndlab(&["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((fs::read(out.join("report.csv")).unwrap(), fs::read(out.join("report_qpd.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = sweep(7, "seed = 11\noutputs = [\"lg\"]\n[tolerances]\ngrouping = 1e-8\n")
        .replace("\"pauli-z\"", "[[1, [0.0, -0.5]], [[0.0, 0.5], -1]]");
    let original = parse_config(&text).unwrap();
    let cfg = write(dir.path(), "c.toml", &text);
    let o = qndlab(&["echo", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(parse_config(&String::from_utf8(o.stdout).unwrap()).unwrap(), original);
}

#[test]
fn errors_exit_nonzero_with_structured_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &sweep(3, "").replace("\"pauli-z\"", "[[1, 1], [0, 1]]"));
    let o = qndlab(&["run", bad.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "ValidationError");

    let broken = write(dir.path(), "broken.toml", "observable = [1, \n");
    let o = qndlab(&["check", broken.to_str().unwrap()]);
    assert!(!o.status.success());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "ParseError");

    // A three-level observable has no Leggett-Garg parameter.
    let three = "dimension = 3\nobservable = [[1,0,0],[0,0,0],[0,0,-1]]\ninitial_state = [1, 1, 1]\nhamiltonian = \"zero\"\n[times]\nt0 = 0\nt1 = 1\nt2 = 2\n";
    let cfg = write(dir.path(), "three.toml", three);
    let o = qndlab(&["run", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "ComputationError");
    assert!(err["error"]["message"].as_str().unwrap().contains("param = 1"));
}

#[test]
fn three_level_distribution_without_lg() {
    let text = "dimension = 3\nobservable = [[1,0,0],[0,0,0],[0,0,-1]]\ninitial_state = [1, [0, 1], 1]\n\
                hamiltonian = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]\noutputs = [\"qpd\", \"characteristic\"]\n\
                [times]\nt0 = 0\nt1 = 0.4\nt2 = 1.1\n";
    let report = run(&parse_config(text).unwrap()).unwrap();
    let r = &report.records[0];
    assert!(r.k.is_none() && r.lgi_violated.is_none());
    assert!(r.characteristic_deviation.unwrap() < 1e-10);
    assert!(r.inversion_error.unwrap() < 1e-8);
    assert!(r.negativity > 0.0);
}

#[test]
fn check_passes_on_shipped_configs() {
    for name in ["single-point.toml", "rabi-sweep.toml"] {
        let cfg = configs_dir().join(name);
        let o = qndlab(&["check", cfg.to_str().unwrap(), "--seed", "5"]);
        assert!(o.status.success(), "{name}: {}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn check_fails_when_tolerance_is_impossible() {
    let cfg = configs_dir().join("single-point.toml");
    let o = qndlab(&["check", cfg.to_str().unwrap(), "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn qpd_subcommand_prints_distribution() {
    let cfg = configs_dir().join("rabi-sweep.toml");
    let o = qndlab(&["qpd", cfg.to_str().unwrap(), "--at", "1.0"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 14);
    let total: f64 = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let o = qndlab(&["qpd", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn fig_from_json_and_csv_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &sweep(30, ""));
    for format in ["csv", "json"] {
        let out = dir.path().join(format);
        let o = qndlab(&["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--format", format]);
        assert!(o.status.success());
        let report = out.join(format!("report.{format}"));
        let svg = out.join("fig.svg");
        let o = qndlab(&["fig", report.to_str().unwrap(), "-o", svg.to_str().unwrap(), "--at", "1.0"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&svg).unwrap();
        assert!(text.starts_with("<svg") && text.contains("qpd-panel") && text.contains("k-panel"));
    }
    let json: RunReport = serde_json::from_str(&fs::read_to_string(dir.path().join("json/report.json")).unwrap()).unwrap();
    assert_eq!(json.records.len(), 30);
    assert_eq!(json.metadata.tool_version, env!("CARGO_PKG_VERSION"));
    assert_eq!(json.metadata.config_hash.len(), 64);
}

#[test]
fn json_mirror_uses_csv_field_names() {
    let report = run(&parse_config(&sweep(2, "")).unwrap()).unwrap();
    let value = serde_json::to_value(&report).unwrap();
    let record = &value["records"][0];
    for field in MAIN_HEADER {
        assert!(record.get(field).is_some(), "missing {field}");
    }
    for field in ["delta", "weight", "kind"] {
        assert!(record["qpd"][0].get(field).is_some(), "missing {field}");
    }
}

#[test]
fn threads_env_fallback_is_validated() {
    let cfg = configs_dir().join("single-point.toml");
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["run", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()])
        .env("QNDLAB_THREADS", "many")
        .output()
        .unwrap();
    assert!(!o.status.success());
    let o = Command::new(BIN)
        .args(["run", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()])
        .env("QNDLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn both_times_and_sweep_rejected() {
    let text = format!("{}\n[times]\nt0 = 0\nt1 = 1\nt2 = 2\n", sweep(3, ""));
    assert!(matches!(parse_config(&text), Err(CliError::Validation { .. })));
}
