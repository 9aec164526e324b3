//! Experiment configuration: a TOML document describing one instance or a
//! sweep over `omega_tau`.
//!
//! ```toml
//! observable = "pauli-z"            # or a matrix literal
//! initial_state = "paper-example"   # or a vector literal
//! hamiltonian = "paper-example"     # "zero" or a matrix literal
//! outputs = ["qpd", "lg"]
//!
//! [sweep]
//! parameter = "omega_tau"
//! start = 0.0
//! stop = 6.283185307179586
//! points = 629
//! ```
//!
//! Complex entries are written either as a plain number or as `[re, im]`.

use std::f64::consts::FRAC_1_SQRT_2;

use qndlab::linalg::{
    c64, eigendecompose_hermitian_with, hermiticity_deviation, pauli_x, pauli_y, pauli_z, CMatrix, C64,
};
use qndlab::{evolve, pure_state, DensityOperator, Observable, ProtocolInstance, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SWEEP_PARAMETER: &str = "omega_tau";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> C64 {
        match self {
            Scalar::Int(n) => c64(n as f64, 0.0),
            Scalar::Real(x) => c64(x, 0.0),
            Scalar::Complex([re, im]) => c64(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Preset(String),
    Literal(Vec<Vec<Scalar>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Preset(String),
    Literal(Vec<Scalar>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Qpd,
    Lg,
    Characteristic,
    Identities,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Times {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Sweep over `omega_tau = x` with measurement times `(0, x, 2x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub hermitian: f64,
    pub validation: f64,
    pub grouping: f64,
    pub residue: f64,
    pub lgi: f64,
    pub negativity: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Tolerances::default().into()
    }
}

impl From<Tolerances> for ToleranceConfig {
    fn from(t: Tolerances) -> Self {
        Self {
            hermitian: t.hermitian,
            validation: t.validation,
            grouping: t.grouping,
            residue: t.residue,
            lgi: t.lgi,
            negativity: t.negativity,
        }
    }
}

impl From<ToleranceConfig> for Tolerances {
    fn from(t: ToleranceConfig) -> Self {
        Self {
            hermitian: t.hermitian,
            validation: t.validation,
            grouping: t.grouping,
            residue: t.residue,
            lgi: t.lgi,
            negativity: t.negativity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    pub observable: OperatorSpec,
    pub initial_state: StateSpec,
    pub hamiltonian: OperatorSpec,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Times>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

fn default_dimension() -> usize {
    2
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Qpd, Output::Lg]
}

/// Parse and validate a TOML experiment document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    config.validate()?;
    Ok(config)
}

fn parse_error(text: &str, err: &toml::de::Error) -> CliError {
    let offset = err.span().map(|s| s.start).unwrap_or(0).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map(|p| p + 1).unwrap_or(0);
    let column = before[line_start..].chars().count() + 1;
    let line_text = text[line_start..].lines().next().unwrap_or("");
    let field = line_text
        .split_once('=')
        .map(|(key, _)| key.trim().to_string())
        .filter(|k| !k.is_empty() && !k.starts_with('['));
    CliError::Parse { line, column, field, message: err.message().trim().to_string() }
}

fn finite(field: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::validation(field, format!("{x} is not finite")))
    }
}

fn matrix_literal(field: &str, rows: &[Vec<Scalar>], dim: usize) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::validation(field, format!("expected a {dim}×{dim} matrix")));
    }
    let m = CMatrix::from_fn(dim, dim, |r, c| rows[r][c].value());
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::validation(field, "entries must be finite"));
    }
    Ok(m)
}

fn preset_dim(field: &str, name: &str, dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(CliError::validation(field, format!("preset \"{name}\" is two-dimensional, dimension is {dim}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.into()
    }

    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    /// Every constraint of the schema; called by [`parse_config`].
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(CliError::validation("dimension", "must be at least 2"));
        }
        let t = &self.tolerances;
        for (name, value) in [
            ("hermitian", t.hermitian),
            ("validation", t.validation),
            ("grouping", t.grouping),
            ("residue", t.residue),
            ("lgi", t.lgi),
            ("negativity", t.negativity),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(CliError::validation(format!("tolerances.{name}"), "must be a non-negative number"));
            }
        }
        match (&self.times, &self.sweep) {
            (Some(_), Some(_)) => {
                return Err(CliError::validation("times/sweep", "give either fixed times or a sweep, not both"));
            }
            (None, None) => return Err(CliError::validation("times/sweep", "one of [times] or [sweep] is required")),
            (Some(times), None) => {
                let t0 = finite("times.t0", times.t0)?;
                let t1 = finite("times.t1", times.t1)?;
                let t2 = finite("times.t2", times.t2)?;
                if !(t0 <= t1 && t1 <= t2) {
                    return Err(CliError::validation("times", "require t0 ≤ t1 ≤ t2"));
                }
            }
            (None, Some(sweep)) => {
                if sweep.parameter != SWEEP_PARAMETER {
                    return Err(CliError::validation(
                        "sweep.parameter",
                        format!("unsupported parameter \"{}\" (expected \"{SWEEP_PARAMETER}\")", sweep.parameter),
                    ));
                }
                let start = finite("sweep.start", sweep.start)?;
                let stop = finite("sweep.stop", sweep.stop)?;
                if sweep.points < 2 {
                    return Err(CliError::validation("sweep.points", "a sweep needs at least 2 points"));
                }
                if !(start >= 0.0 && stop > start) {
                    return Err(CliError::validation("sweep", "require 0 ≤ start < stop"));
                }
            }
        }
        self.observable()?;
        self.initial_state()?;
        self.hamiltonian()?;
        Ok(())
    }

    pub fn observable(&self) -> Result<Observable> {
        let dim = self.dimension;
        let m = match &self.observable {
            OperatorSpec::Preset(name) => {
                let m = match name.as_str() {
                    "pauli-x" => pauli_x(),
                    "pauli-y" => pauli_y(),
                    "pauli-z" => pauli_z(),
                    other => {
                        return Err(CliError::validation(
                            "observable",
                            format!("unknown preset \"{other}\" (expected pauli-x, pauli-y or pauli-z)"),
                        ))
                    }
                };
                preset_dim("observable", name, dim)?;
                m
            }
            OperatorSpec::Literal(rows) => matrix_literal("observable", rows, dim)?,
        };
        eigendecompose_hermitian_with(&m, self.tolerances.hermitian)
            .map_err(|e| CliError::validation("observable", e.to_string()))
    }

    pub fn initial_state(&self) -> Result<DensityOperator> {
        let dim = self.dimension;
        let amps = match &self.initial_state {
            StateSpec::Preset(name) if name == "paper-example" => {
                preset_dim("initial_state", name, dim)?;
                vec![c64(FRAC_1_SQRT_2, 0.0), c64(0.0, FRAC_1_SQRT_2)]
            }
            StateSpec::Preset(other) => {
                return Err(CliError::validation(
                    "initial_state",
                    format!("unknown preset \"{other}\" (expected paper-example)"),
                ))
            }
            StateSpec::Literal(entries) => {
                if entries.len() != dim {
                    return Err(CliError::validation("initial_state", format!("expected {dim} amplitudes")));
                }
                entries.iter().map(|s| s.value()).collect()
            }
        };
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::validation("initial_state", "entries must be finite"));
        }
        pure_state(&amps).map_err(|e| CliError::validation("initial_state", e.to_string()))
    }

    pub fn hamiltonian(&self) -> Result<CMatrix> {
        let dim = self.dimension;
        let h = match &self.hamiltonian {
            OperatorSpec::Preset(name) => match name.as_str() {
                "paper-example" => {
                    preset_dim("hamiltonian", name, dim)?;
                    pauli_x() * c64(0.5, 0.0)
                }
                "zero" => CMatrix::zeros(dim, dim),
                other => {
                    return Err(CliError::validation(
                        "hamiltonian",
                        format!("unknown preset \"{other}\" (expected paper-example or zero)"),
                    ))
                }
            },
            OperatorSpec::Literal(rows) => matrix_literal("hamiltonian", rows, dim)?,
        };
        let deviation = hermiticity_deviation(&h);
        if deviation > self.tolerances.hermitian {
            return Err(CliError::validation("hamiltonian", format!("not Hermitian (deviation {deviation:.3e})")));
        }
        Ok(h)
    }

    /// Parameter values, ascending. A fixed-times config has the single
    /// parameter `t1 − t0`.
    pub fn parameters(&self) -> Vec<f64> {
        match (&self.sweep, &self.times) {
            (Some(s), _) => {
                let step = (s.stop - s.start) / (s.points - 1) as f64;
                (0..s.points).map(|n| if n + 1 == s.points { s.stop } else { s.start + n as f64 * step }).collect()
            }
            (None, Some(t)) => vec![t.t1 - t.t0],
            (None, None) => Vec::new(),
        }
    }

    /// Measurement times for a parameter value: the fixed times, or
    /// `(0, x, 2x)` when sweeping.
    pub fn times_at(&self, param: f64) -> [f64; 3] {
        match (&self.sweep, &self.times) {
            (None, Some(t)) => [t.t0, t.t1, t.t2],
            _ => [0.0, param, 2.0 * param],
        }
    }

    pub fn instance_at(&self, param: f64) -> Result<ProtocolInstance> {
        let ctx = format!("building instance at param = {param}");
        let [t0, t1, t2] = self.times_at(param);
        let h = self.hamiltonian()?;
        let u1 = evolve(&h, t1 - t0).map_err(CliError::core(ctx.clone()))?;
        let u2 = evolve(&h, t2 - t1).map_err(CliError::core(ctx.clone()))?;
        ProtocolInstance::new(self.initial_state()?, u1, u2, self.observable()?).map_err(CliError::core(ctx))
    }

    /// TOML rendering with all defaults spelled out; parses back to `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRESET: &str = r#"
observable = "pauli-z"
initial_state = "paper-example"
hamiltonian = "paper-example"

[sweep]
parameter = "omega_tau"
start = 0.0
stop = 6.283185307179586
points = 629
"#;

    #[test]
    fn preset_sweep_is_valid() {
        let cfg = parse_config(PRESET).unwrap();
        assert_eq!(cfg.dimension, 2);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.outputs, vec![Output::Qpd, Output::Lg]);
        let params = cfg.parameters();
        assert_eq!(params.len(), 629);
        assert_eq!(params[0], 0.0);
        assert_eq!(params[628], std::f64::consts::TAU);
        assert_eq!(cfg.tolerances(), Tolerances::default());
    }

    #[test]
    fn times_and_sweep_are_exclusive() {
        let doc = format!("{PRESET}\n[times]\nt0 = 0\nt1 = 1\nt2 = 2\n");
        assert!(matches!(parse_config(&doc), Err(CliError::Validation { .. })));
        let none = "observable = \"pauli-z\"\ninitial_state = \"paper-example\"\nhamiltonian = \"zero\"\n";
        assert!(matches!(parse_config(none), Err(CliError::Validation { .. })));
    }

    #[test]
    fn non_hermitian_observable_rejected() {
        let doc = PRESET.replace("observable = \"pauli-z\"", "observable = [[1, 1], [0, 1]]");
        match parse_config(&doc) {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "observable"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_literals() {
        let doc = PRESET
            .replace("observable = \"pauli-z\"", "observable = [[0, [0, -1]], [[0, 1], 0]]")
            .replace("initial_state = \"paper-example\"", "initial_state = [1, [0.0, 1.0]]");
        let cfg = parse_config(&doc).unwrap();
        assert_eq!(cfg.observable().unwrap().eigenvalues(), &[-1.0, 1.0]);
        let rho = cfg.initial_state().unwrap();
        assert!((rho.matrix()[(0, 1)] - c64(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_position() {
        let doc = "observable = \"pauli-z\"\ninitial_state = \"paper-example\"\nhamiltonian = \"zero\"\nseed = \"abc\"\n[times]\nt0=0\nt1=1\nt2=2\n";
        match parse_config(doc) {
            Err(CliError::Parse { line, field, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(field.as_deref(), Some("seed"));
            }
            other => panic!("{other:?}"),
        }
        match parse_config("observable = [1, 2\n") {
            Err(CliError::Parse { line, .. }) => assert!(line >= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_presets() {
        let doc = format!("colour = 3\n{PRESET}");
        assert!(matches!(parse_config(&doc), Err(CliError::Parse { .. })));
        let doc = PRESET.replace("\"pauli-z\"", "\"pauli-w\"");
        assert!(matches!(parse_config(&doc), Err(CliError::Validation { .. })));
        let doc = PRESET.replace("points = 629", "points = 1");
        assert!(matches!(parse_config(&doc), Err(CliError::Validation { .. })));
    }

    #[test]
    fn echo_round_trip() {
        let cfg = parse_config(PRESET).unwrap();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
        let doc = PRESET.replace("observable = \"pauli-z\"", "observable = [[1, [0.5, -0.25]], [[0.5, 0.25], -2.5]]");
        let cfg = parse_config(&doc).unwrap();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }
}
