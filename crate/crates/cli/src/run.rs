//! Pipeline orchestration: one record per parameter value.

use std::time::Instant;

use qndlab::detector::{characteristic_from_amplitudes, reduced_system_state};
use qndlab::lg::{correlator_operator, lg_breakdown_with, verify_identities};
use qndlab::linalg::CMatrix;
use qndlab::protocol::PathKind;
use qndlab::qpd::{conjugate_partner, marginal_final, marginal_initial, marginal_intermediate};
use qndlab::random::{random_instance, rng_from_seed};
use qndlab::{
    build_qpd, detect_lattice, enumerate_amplitudes, invert_to_qpd, sample_characteristic, AmplitudeSet,
    DetectorModel, Observable, ProtocolInstance, QuasiDistribution, TimePair, Tolerances,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Output};
use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Couplings used for the characteristic-function cross-check when the
/// spectrum has no Δ lattice.
const CHARACTERISTIC_SAMPLES: usize = 64;
/// Random instances drawn by `check` in addition to the configured points.
pub const RANDOM_CHECK_INSTANCES: usize = 20;
/// Weight accuracy promised by discrete Fourier inversion.
pub const INVERSION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Classical,
    Quantum,
}

impl WeightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightKind::Classical => "classical",
            WeightKind::Quantum => "quantum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpdEntry {
    pub delta: f64,
    pub weight: f64,
    pub kind: WeightKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub param: f64,
    pub times: [f64; 3],
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "K_cl")]
    pub k_cl: Option<f64>,
    #[serde(rename = "K_q1")]
    pub k_q1: Option<f64>,
    #[serde(rename = "K_q2")]
    pub k_q2: Option<f64>,
    pub negativity: f64,
    pub lgi_violated: Option<bool>,
    pub mrps_violated: bool,
    #[serde(default)]
    pub qpd: Vec<QpdEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characteristic_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_residual: Option<f64>,
}

impl PointRecord {
    /// Total (classical + quantum) weight per Δ, ascending in Δ.
    pub fn total_weights(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for e in &self.qpd {
            match out.last_mut() {
                Some((d, w)) if *d == e.delta => *w += e.weight,
                _ => out.push((e.delta, e.weight)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: Metadata,
    pub records: Vec<PointRecord>,
}

/// SHA-256 of the normalized configuration text.
pub fn config_hash(config: &ExperimentConfig) -> String {
    Sha256::digest(config.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn qpd_entries(qpd: &QuasiDistribution) -> Vec<QpdEntry> {
    match qpd.split() {
        Some(split) => qpd
            .support()
            .iter()
            .zip(split)
            .flat_map(|(bin, s)| {
                [
                    QpdEntry { delta: bin.delta, weight: s.classical, kind: WeightKind::Classical },
                    QpdEntry { delta: bin.delta, weight: s.quantum, kind: WeightKind::Quantum },
                ]
            })
            .collect(),
        None => Vec::new(),
    }
}

/// Largest `|G_λ(detector) − Σ P e^{iλΔ}|` and, when the spectrum lies on a
/// lattice, the largest weight error of the Fourier-inverted distribution.
pub fn characteristic_check(
    inst: &ProtocolInstance,
    amps: &AmplitudeSet,
    direct: &QuasiDistribution,
) -> qndlab::Result<(f64, Option<f64>)> {
    let det = DetectorModel::qubit();
    let lattice = detect_lattice(inst.observable());
    let lambdas = match lattice {
        Some(l) => l.sampling_grid(l.count.max(CHARACTERISTIC_SAMPLES)),
        None => (0..CHARACTERISTIC_SAMPLES)
            .map(|n| n as f64 * std::f64::consts::TAU / CHARACTERISTIC_SAMPLES as f64)
            .collect(),
    };
    let samples = sample_characteristic(inst, &det, &lambdas)?;
    let deviation = samples
        .lambdas
        .iter()
        .zip(&samples.values)
        .map(|(&l, g)| (g - characteristic_from_amplitudes(amps, l)).norm())
        .fold(0.0, f64::max);
    let inversion = match lattice {
        Some(l) => {
            let inverted = invert_to_qpd(&samples, l)?;
            Some(
                inverted
                    .support()
                    .iter()
                    .map(|b| (b.weight - direct.weight_at(b.delta, l.spacing * 1e-6)).abs())
                    .fold(0.0, f64::max),
            )
        }
        None => None,
    };
    Ok((deviation, inversion))
}

pub fn evaluate_point(config: &ExperimentConfig, param: f64) -> Result<PointRecord> {
    let ctx = || format!("at param = {param}");
    let tol = config.tolerances();
    let inst = config.instance_at(param)?;
    let amps = enumerate_amplitudes(&inst).map_err(CliError::core(ctx()))?;
    let qpd = build_qpd(&amps, tol.grouping).map_err(CliError::core(ctx()))?;
    let negativity = qpd.negativity();

    let lg = if config.wants(Output::Lg) {
        Some(lg_breakdown_with(&amps, &tol).map_err(CliError::core(ctx()))?)
    } else {
        None
    };
    let identity_residual = if config.wants(Output::Identities) {
        Some(verify_identities(&amps, tol.validation).map_err(CliError::core(ctx()))?.max_residual())
    } else {
        None
    };
    let (characteristic_deviation, inversion_error) = if config.wants(Output::Characteristic) {
        let (dev, inv) = characteristic_check(&inst, &amps, &qpd).map_err(CliError::core(ctx()))?;
        (Some(dev), inv)
    } else {
        (None, None)
    };

    Ok(PointRecord {
        param,
        times: config.times_at(param),
        k: lg.map(|b| b.k),
        k_cl: lg.map(|b| b.k_cl),
        k_q1: lg.map(|b| b.k_q1),
        k_q2: lg.map(|b| b.k_q2),
        negativity,
        lgi_violated: lg.map(|b| b.lgi_violated),
        mrps_violated: negativity > tol.negativity,
        qpd: if config.wants(Output::Qpd) { qpd_entries(&qpd) } else { Vec::new() },
        characteristic_deviation,
        inversion_error,
        identity_residual,
    })
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| {
                CliError::validation("threads", format!("cannot start {n} worker threads: {e}"))
            })?;
            Ok(pool.install(job))
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    run_with(config, None)
}

/// Evaluate every parameter value, in parallel, collecting in order.
pub fn run_with(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunReport> {
    let started = Instant::now();
    let params = config.parameters();
    let records = with_threads(threads, || {
        params.par_iter().map(|&p| evaluate_point(config, p)).collect::<Result<Vec<_>>>()
    })??;
    Ok(RunReport {
        metadata: Metadata {
            config_hash: config_hash(config),
            tool_version: TOOL_VERSION.to_string(),
            wall_time_seconds: started.elapsed().as_secs_f64(),
            seed: config.seed,
        },
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub subject: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub results: Vec<CheckResult>,
}

impl CheckSummary {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }
}

fn born(obs: &Observable, state: &CMatrix) -> Vec<f64> {
    (0..obs.dim()).map(|r| (obs.projector(r) * state).trace().re).collect()
}

fn max_marginal_error(marginal: &[(f64, f64)], expected: &[f64]) -> f64 {
    marginal.iter().zip(expected).map(|((_, p), q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Invariant and identity residuals for one instance.
fn instance_checks(inst: &ProtocolInstance, tol: &Tolerances, check_tol: f64) -> qndlab::Result<Vec<(String, f64, f64)>> {
    let amps = enumerate_amplitudes(inst)?;
    let qpd = build_qpd(&amps, tol.grouping)?;
    let split = qpd.split().expect("direct distributions carry the split");
    let classical: f64 = split.iter().map(|s| s.classical).sum();
    let quantum: f64 = split.iter().map(|s| s.quantum).sum();

    let obs = inst.observable();
    let u1 = inst.u1().matrix();
    let u = inst.u2().matrix() * u1;
    let rho = inst.rho0().matrix();

    let conjugate = amps
        .iter()
        .map(|p| (p.value - amps.value(conjugate_partner(p.indices)).conj()).norm())
        .fold(0.0, f64::max);
    let classical_imag = amps
        .iter()
        .filter(|p| p.kind == PathKind::Classical)
        .map(|p| p.value.im.abs().max((-p.value.re).max(0.0)))
        .fold(0.0, f64::max);

    let (deviation, inversion) = characteristic_check(inst, &amps, &qpd)?;
    let zero_coupling = qndlab::linalg::max_abs(
        &(reduced_system_state(inst, &DetectorModel::qubit(), 0.0) - &u * rho * u.adjoint()),
    );

    let mut out: Vec<(String, f64, f64)> = [
        ("classical weights sum to one", (classical - 1.0).abs()),
        ("quantum weights sum to zero", quantum.abs()),
        ("distribution is real", qpd.imag_residue()),
        ("conjugate-pair symmetry", conjugate),
        ("classical paths are probabilities", classical_imag),
        ("initial marginal is Born", max_marginal_error(&marginal_initial(&amps), &born(obs, rho))),
        (
            "intermediate marginal is Born",
            max_marginal_error(&marginal_intermediate(&amps), &born(obs, &(u1 * rho * u1.adjoint()))),
        ),
        ("final marginal is Born", max_marginal_error(&marginal_final(&amps), &born(obs, &(&u * rho * u.adjoint())))),
        ("detector characteristic matches path sum", deviation),
        ("zero coupling leaves system undisturbed", zero_coupling),
    ]
    .into_iter()
    .map(|(name, residual)| (name.to_string(), residual, check_tol))
    .collect();
    if let Some(err) = inversion {
        // Discrete inversion is only promised to 1e-8.
        out.push(("Fourier inversion recovers weights".to_string(), err, check_tol.max(INVERSION_TOL)));
    }

    if qndlab::lg::assert_binary(obs).is_ok() {
        let report = verify_identities(&amps, f64::INFINITY)?;
        out.extend(report.checks.iter().map(|c| (c.label.to_string(), c.residual, check_tol)));
        let lg = lg_breakdown_with(&amps, tol)?;
        let inst = qndlab::lg::binary_instance(inst)?;
        let operator_k = correlator_operator(&inst, TimePair::T01)? + correlator_operator(&inst, TimePair::T12)?
            - correlator_operator(&inst, TimePair::T02)?;
        out.push(("K equals operator correlators".to_string(), (lg.k - operator_k).abs(), check_tol));
        out.push(("K equals K_cl + K_q1 + K_q2".to_string(), (lg.k - (lg.k_cl + lg.k_q1 + lg.k_q2)).abs(), check_tol));
        out.push(("K_cl within [-3, 1]".to_string(), (lg.k_cl - 1.0).max(-3.0 - lg.k_cl).max(0.0), check_tol));
        let implied = if lg.lgi_violated && !lg.mrps_violated { 1.0 } else { 0.0 };
        out.push(("LGI violation implies negativity".to_string(), implied, 0.0));
    }
    Ok(out)
}

/// Invariant and identity suites on every configured point plus
/// [`RANDOM_CHECK_INSTANCES`] seeded random instances.
pub fn check(config: &ExperimentConfig, check_tol: f64, threads: Option<usize>) -> Result<CheckSummary> {
    let tol = config.tolerances();
    let obs = config.observable()?;
    let mut subjects: Vec<(String, ProtocolInstance)> = Vec::new();
    for p in config.parameters() {
        subjects.push((format!("param = {p}"), config.instance_at(p)?));
    }
    for n in 0..RANDOM_CHECK_INSTANCES as u64 {
        let seed = config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(n);
        let inst = random_instance(&obs, &mut rng_from_seed(seed));
        subjects.push((format!("random instance {n} (seed {seed})"), inst));
    }
    let per_subject = with_threads(threads, || {
        subjects
            .par_iter()
            .map(|(subject, inst)| {
                instance_checks(inst, &tol, check_tol).map_err(CliError::core(subject.clone())).map(|checks| {
                    checks
                        .into_iter()
                        .map(|(name, residual, tolerance)| CheckResult {
                            name,
                            subject: subject.clone(),
                            residual,
                            tolerance,
                            passed: residual <= tolerance,
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(CheckSummary { results: per_subject.into_iter().flatten().collect() })
}
