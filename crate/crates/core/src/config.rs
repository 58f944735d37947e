//! JSON run configuration and the model assembled from it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{GeneratorBundle, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::lindblad::{gks_lindbladian, reservoir_lindbladian, AssumptionOptions, LindbladData};
use crate::linalg::{self, CMat, C64};
use crate::operator_core::{decompose_atom, gibbs_state, validate_pump, AtomSpec, DensityMatrix, PumpOperator};
use crate::reservoir::{FormFactor, ReservoirSpec, Term};

/// A complex entry: `[re, im]` or a bare real number.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Complex {
    Pair([f64; 2]),
    Real(f64),
}

impl Complex {
    fn value(self) -> C64 {
        match self {
            Complex::Pair([re, im]) => linalg::c(re, im),
            Complex::Real(re) => linalg::r(re),
        }
    }
}

/// Matrix as a list of rows.
pub type MatrixRows = Vec<Vec<Complex>>;

fn check_finite(name: &str, xs: impl IntoIterator<Item = f64>) -> Result<()> {
    if xs.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name}: non-finite value")))
    }
}

pub fn matrix_from_rows(name: &str, rows: &MatrixRows) -> Result<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config(format!("{name}: expected a non-empty square matrix")));
    }
    let vals: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|z| z.value()).collect()).collect();
    check_finite(name, vals.iter().flatten().flat_map(|z| [z.re, z.im]))?;
    Ok(linalg::from_rows(&vals))
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracies: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub h_p: MatrixRows,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub weight: Complex,
    pub exponent_p: u32,
    pub decay_c: f64,
}

/// A form factor: one term, or a sum of terms.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum FormFactorConfig {
    Single(TermConfig),
    Sum { terms: Vec<TermConfig> },
}

impl FormFactorConfig {
    fn build(&self) -> Result<FormFactor> {
        let terms = match self {
            FormFactorConfig::Single(t) => std::slice::from_ref(t),
            FormFactorConfig::Sum { terms } => terms.as_slice(),
        };
        FormFactor::new(terms.iter().map(|t| Term { weight: t.weight.value(), exponent_p: t.exponent_p, decay_c: t.decay_c }).collect())
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form_factors: Option<Vec<FormFactorConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings_q: Option<Vec<MatrixRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gks_jumps: Option<Vec<MatrixRows>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default = "default_n_out")]
    pub n_out: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Initial state; defaults to the normalized projection onto the ground level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<MatrixRows>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { t_end: None, n_out: default_n_out(), rtol: default_rtol(), atol: default_atol(), initial_state: None }
    }
}

fn default_n_out() -> usize {
    200
}
fn default_rtol() -> f64 {
    DEFAULT_RTOL
}
fn default_atol() -> f64 {
    DEFAULT_ATOL
}
fn default_modes() -> usize {
    16
}
fn default_points() -> usize {
    64
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetConfig {
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    #[serde(default = "default_points")]
    pub contour_points: usize,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self { n_modes: default_modes(), contour_points: default_points() }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionConfig {
    #[serde(default = "one")]
    pub pump_constant: f64,
    #[serde(default = "gap_floor")]
    pub gap_floor: f64,
}

fn one() -> f64 {
    1.0
}
fn gap_floor() -> f64 {
    1e-3
}

impl Default for AssumptionConfig {
    fn default() -> Self {
        Self { pump_constant: one(), gap_floor: gap_floor() }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub atom: AtomConfig,
    pub pump: PumpConfig,
    pub reservoir: ReservoirConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub floquet: FloquetConfig,
    #[serde(default)]
    pub assumptions: AssumptionConfig,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.atom;
        if a.energies.is_some() == a.matrix.is_some() {
            return Err(Error::Config("atom: give exactly one of `energies` or `matrix`".into()));
        }
        if a.matrix.is_some() && a.degeneracies.is_some() {
            return Err(Error::Config("atom: `degeneracies` only applies with `energies`".into()));
        }
        if let Some(e) = &a.energies {
            check_finite("atom.energies", e.iter().copied())?;
        }
        let r = &self.reservoir;
        let route_ff = r.form_factors.is_some() || r.couplings_q.is_some();
        if route_ff == r.gks_jumps.is_some() {
            return Err(Error::Config("reservoir: give exactly one of `form_factors`+`couplings_q` or `gks_jumps`".into()));
        }
        if route_ff && (r.form_factors.is_none() || r.couplings_q.is_none()) {
            return Err(Error::Config("reservoir: `form_factors` and `couplings_q` go together".into()));
        }
        if route_ff && r.beta.is_none() {
            return Err(Error::Config("reservoir: `beta` is required with form factors".into()));
        }
        check_finite("reservoir", [r.lambda, r.beta.unwrap_or(1.0), self.pump.eta, self.pump.omega.unwrap_or(1.0)])?;
        let s = &self.sim;
        check_finite("sim", [s.t_end.unwrap_or(1.0), s.rtol, s.atol])?;
        if !(s.rtol > 0.0 && s.atol > 0.0) {
            return Err(Error::Config("sim: tolerances must be positive".into()));
        }
        if s.t_end.is_some_and(|t| t <= 0.0) {
            return Err(Error::Config("sim: t_end must be positive".into()));
        }
        if self.floquet.n_modes < 2 || self.floquet.contour_points < 3 {
            return Err(Error::Config("floquet: need n_modes >= 2 and contour_points >= 3".into()));
        }
        Ok(())
    }

    /// Copy with one numeric parameter replaced, for sweeps.
    pub fn with_parameter(&self, key: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match key {
            "lambda" => c.reservoir.lambda = value,
            "eta" => c.pump.eta = value,
            "beta" => c.reservoir.beta = Some(value),
            "omega" => c.pump.omega = Some(value),
            "t_end" => c.sim.t_end = Some(value),
            _ => return Err(Error::Config(format!("cannot sweep over `{key}` (lambda, eta, beta, omega, t_end)"))),
        }
        c.validate()?;
        Ok(c)
    }
}

/// Everything derived from a configuration.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: RunConfig,
    pub atom: AtomSpec,
    pub pump: PumpOperator,
    pub reservoir: Option<ReservoirSpec>,
    pub data: LindbladData,
    pub lambda: f64,
    pub eta: f64,
    pub bundle: GeneratorBundle,
}

impl Model {
    pub fn build(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let mut atom = match (&config.atom.energies, &config.atom.matrix) {
            (Some(e), None) => {
                let deg = config.atom.degeneracies.clone().unwrap_or_else(|| vec![1; e.len()]);
                AtomSpec::from_levels(e, &deg)?
            }
            (None, Some(m)) => decompose_atom(&matrix_from_rows("atom.matrix", m)?, config.atom.cluster_tol)?,
            _ => unreachable!("validated"),
        };
        if let Some(w) = config.pump.omega {
            atom = atom.with_pump_frequency(w)?;
        }
        let pump = validate_pump(&atom, &matrix_from_rows("pump.h_p", &config.pump.h_p)?)?;
        let r = &config.reservoir;
        let lambda = r.lambda;
        let (reservoir, data) = if let Some(jumps) = &r.gks_jumps {
            let js = jumps.iter().enumerate().map(|(i, m)| matrix_from_rows(&format!("gks_jumps[{i}]"), m)).collect::<Result<Vec<_>>>()?;
            (None, gks_lindbladian(&atom, js)?)
        } else {
            let ffs = r.form_factors.as_ref().unwrap().iter().map(FormFactorConfig::build).collect::<Result<Vec<_>>>()?;
            let qs = r.couplings_q.as_ref().unwrap();
            let qs = qs.iter().enumerate().map(|(i, m)| matrix_from_rows(&format!("couplings_q[{i}]"), m)).collect::<Result<Vec<_>>>()?;
            let spec = ReservoirSpec::new(r.beta.unwrap(), lambda, ffs, qs)?;
            let data = reservoir_lindbladian(&atom, &spec)?;
            (Some(spec), data)
        };
        let eta = config.pump.eta;
        let bundle = GeneratorBundle::from_model(&atom, &pump, &data, lambda, eta)?;
        Ok(Self { config: config.clone(), atom, pump, reservoir, data, lambda, eta, bundle })
    }

    pub fn assumption_options(&self) -> AssumptionOptions {
        AssumptionOptions {
            pump_constant: self.config.assumptions.pump_constant,
            gap_floor: self.config.assumptions.gap_floor,
            seed: self.config.seed,
            ..AssumptionOptions::default()
        }
    }

    pub fn t_end(&self) -> f64 {
        self.config.sim.t_end.unwrap_or_else(|| if self.lambda != 0.0 { 50.0 / (self.lambda * self.lambda) } else { 50.0 })
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        match &self.config.sim.initial_state {
            Some(m) => DensityMatrix::new(matrix_from_rows("sim.initial_state", m)?),
            None => {
                let p = self.atom.projection(0);
                DensityMatrix::new(linalg::scale(p, linalg::r(1.0 / self.atom.levels()[0].degeneracy as f64)))
            }
        }
    }

    /// Faithful reference state for the conjugated picture: the Gibbs state
    /// at the reservoir temperature, or the maximally mixed state.
    pub fn reference_state(&self) -> Result<CMat> {
        match self.config.reservoir.beta {
            Some(b) if b > 0.0 => Ok(gibbs_state(&self.atom, b)?.into_matrix()),
            _ => Ok(DensityMatrix::maximally_mixed(self.atom.dim()).into_matrix()),
        }
    }

    /// Coupling used for the dilated order check: the first `Q`, or the
    /// Hermitian part of the first jump.
    pub fn probe_coupling(&self) -> CMat {
        match (&self.reservoir, &self.data.gks_jumps) {
            (Some(r), _) => r.couplings[0].clone(),
            (None, Some(j)) if !j.is_empty() => &j[0] + j[0].adjoint(),
            _ => linalg::zeros(self.atom.dim(), self.atom.dim()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_LEVEL: &str = r#"{
        "atom": {"energies": [0.0, 1.0]},
        "pump": {"h_p": [[0, 0], [1, 0]], "eta": 0.005},
        "reservoir": {"beta": 1.0, "lambda": 0.1,
                      "form_factors": [{"weight": 1.0, "exponent_p": 1, "decay_c": 1.0}],
                      "couplings_q": [[[0, 1], [1, 0]]]}
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = RunConfig::from_json(TWO_LEVEL).unwrap();
        assert_eq!(cfg.sim.rtol, 1e-8);
        assert_eq!(cfg.floquet.n_modes, 16);
        let m = Model::build(&cfg).unwrap();
        assert_eq!(m.atom.dim(), 2);
        assert!((m.t_end() - 5000.0).abs() < 1e-9);
        assert!((m.initial_state().unwrap().matrix()[(0, 0)].re - 1.0).abs() == 0.0);
    }

    #[test]
    fn complex_pairs_and_matrix_atom() {
        let text = TWO_LEVEL.replace(r#""energies": [0.0, 1.0]"#, r#""matrix": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]"#);
        let m = Model::build(&RunConfig::from_json(&text).unwrap()).unwrap();
        assert!((m.atom.energies()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_ambiguous_sections() {
        let both = TWO_LEVEL.replace(r#""energies": [0.0, 1.0]"#, r#""energies": [0.0, 1.0], "matrix": [[0, 0], [0, 1]]"#);
        assert!(matches!(RunConfig::from_json(&both), Err(Error::Config(_))));
        let gks = TWO_LEVEL.replace(r#""couplings_q""#, r#""gks_jumps": [[[0, 1], [0, 0]]], "couplings_q""#);
        assert!(matches!(RunConfig::from_json(&gks), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_json("{"), Err(Error::Config(_))));
        let unknown = TWO_LEVEL.replace(r#""seed""#, "x").replace(r#""atom""#, r#""bogus": 1, "atom""#);
        assert!(matches!(RunConfig::from_json(&unknown), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_override() {
        let cfg = RunConfig::from_json(TWO_LEVEL).unwrap();
        assert_eq!(cfg.with_parameter("lambda", 0.05).unwrap().reservoir.lambda, 0.05);
        assert!(cfg.with_parameter("nope", 1.0).is_err());
    }
}
