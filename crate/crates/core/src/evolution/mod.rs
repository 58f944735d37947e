//! Time evolution under the periodically pumped effective generator
//! `L_t = L_at + eta cos(omega t) L_p + lambda^2 L_R`.

mod dopri;
mod magnus;
mod stationary;

pub use dopri::{integrate, StepStats, Tolerances};
pub use magnus::{magnus_evolve, magnus_propagator};
pub use stationary::stationary_state;

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::LindbladData;
use crate::linalg::{self, CMat};
use crate::operator_core::{atomic_lindbladian, AtomSpec, DensityMatrix, PumpOperator, Superoperator};

pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;

/// The three generator parts with their couplings and the pump frequency.
#[derive(Clone, Debug)]
pub struct GeneratorBundle {
    pub l_at: Superoperator,
    pub l_p: Superoperator,
    pub l_r: Superoperator,
    pub lambda: f64,
    pub eta: f64,
    pub omega: f64,
}

impl GeneratorBundle {
    pub fn new(l_at: Superoperator, l_p: Superoperator, l_r: Superoperator, lambda: f64, eta: f64, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("pump frequency must be positive, got {omega}")));
        }
        if !lambda.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        for part in [&l_p, &l_r] {
            if part.dim() != l_at.dim() {
                return Err(Error::DimensionMismatch { expected: l_at.dim(), found: part.dim() });
            }
        }
        Ok(Self { l_at, l_p, l_r, lambda, eta, omega })
    }

    pub fn from_model(atom: &AtomSpec, pump: &PumpOperator, data: &LindbladData, lambda: f64, eta: f64) -> Result<Self> {
        Self::new(atomic_lindbladian(atom), pump.lindbladian.clone(), data.l_r.clone(), lambda, eta, atom.omega())
    }

    pub fn dim(&self) -> usize {
        self.l_at.dim()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Same bundle with different couplings.
    pub fn with_couplings(&self, lambda: f64, eta: f64) -> Self {
        Self { lambda, eta, ..self.clone() }
    }

    /// Time-independent part `L_at + lambda^2 L_R`.
    pub fn static_part(&self) -> Superoperator {
        &self.l_at + &self.l_r.scaled(linalg::r(self.lambda * self.lambda))
    }

    pub fn generator_at(&self, t: f64) -> Superoperator {
        &self.static_part() + &self.l_p.scaled(linalg::r(self.eta * (self.omega * t).cos()))
    }

    /// `(eta/2) L_p + lambda^2 L_R`.
    pub fn averaged_generator(&self) -> Superoperator {
        &self.l_p.scaled(linalg::r(self.eta / 2.0)) + &self.l_r.scaled(linalg::r(self.lambda * self.lambda))
    }

    fn rhs(&self) -> impl Fn(f64, &CMat) -> CMat + '_ {
        let a = self.static_part().into_matrix();
        let b = linalg::scale(self.l_p.matrix(), linalg::r(self.eta));
        let pumped = self.eta != 0.0;
        move |t, y| {
            let mut out = &a * y;
            if pumped {
                out += linalg::scale(&(&b * y), linalg::r((self.omega * t).cos()));
            }
            out
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: DEFAULT_RTOL, atol: DEFAULT_ATOL }
    }
}

/// Health of the state at one output time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepDiagnostics {
    pub trace_error: f64,
    pub min_eig: f64,
    pub purity: f64,
    /// Step size of the integrator step that produced this point (0 at the start).
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Raw integrator output; trace is never renormalized.
    pub states: Vec<CMat>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub stats: StepStats,
    pub options: EvolveOptions,
}

impl Trajectory {
    pub fn max_trace_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_error).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.min_eig).fold(f64::INFINITY, f64::min)
    }

    pub fn final_state(&self) -> &CMat {
        self.states.last().expect("trajectory has at least one point")
    }

    /// `t,pop_1..pop_N,trace,min_eig,purity` with 17 significant digits.
    pub fn to_csv(&self, atom: &AtomSpec) -> String {
        let pops = populations(atom, self);
        let mut s = String::from("t");
        for k in 1..=atom.n_levels() {
            let _ = write!(s, ",pop_{k}");
        }
        s.push_str(",trace,min_eig,purity\n");
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(s, "{t:.16e}");
            for p in &pops.populations[i] {
                let _ = write!(s, ",{p:.16e}");
            }
            let d = &self.diagnostics[i];
            let _ = writeln!(s, ",{:.16e},{:.16e},{:.16e}", pops.trace[i], d.min_eig, d.purity);
        }
        s
    }
}

/// `n + 1` equally spaced points on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| if i == n { t_end } else { t_end * i as f64 / n as f64 }).collect()
}

fn diagnose(rho: &CMat, step: f64) -> Result<StepDiagnostics> {
    let tr = linalg::trace(rho);
    Ok(StepDiagnostics {
        trace_error: (tr - linalg::ONE).norm(),
        min_eig: linalg::min_eigh(rho)?,
        purity: linalg::trace(&(rho * rho)).re,
        step,
    })
}

/// Integrates the master equation from `rho0` at `t = 0`, sampling on `grid`.
pub fn evolve(bundle: &GeneratorBundle, rho0: &DensityMatrix, t_end: f64, grid: &[f64], opts: EvolveOptions) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    if rho0.dim() != bundle.dim() {
        return Err(Error::DimensionMismatch { expected: bundle.dim(), found: rho0.dim() });
    }
    let d = bundle.dim();
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let mut diagnostics = Vec::with_capacity(grid.len());
    let f = bundle.rhs();
    let tol = Tolerances { rtol: opts.rtol, atol: opts.atol };
    let stats = integrate(|t, y| f(t, y), 0.0, linalg::vec_of(rho0.matrix()), t_end, grid, tol, |t, y, h| {
        let rho = linalg::unvec(y, d);
        let diag = diagnose(&rho, h)?;
        if diag.min_eig < -100.0 * opts.atol {
            return Err(Error::PositivityBreach { t, min_eig: diag.min_eig });
        }
        times.push(t);
        states.push(rho);
        diagnostics.push(diag);
        Ok(())
    })?;
    Ok(Trajectory { times, states, diagnostics, stats, options: opts })
}

/// Level populations `Tr(P_k rho(t))` with trace and purity.
#[derive(Clone, Debug, Serialize)]
pub struct Populations {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    pub purity: Vec<f64>,
}

pub fn level_populations(atom: &AtomSpec, rho: &CMat) -> Vec<f64> {
    (0..atom.n_levels()).map(|k| linalg::trace(&(atom.projection(k) * rho)).re).collect()
}

pub fn populations(atom: &AtomSpec, traj: &Trajectory) -> Populations {
    Populations {
        times: traj.times.clone(),
        populations: traj.states.iter().map(|rho| level_populations(atom, rho)).collect(),
        trace: traj.states.iter().map(|rho| linalg::trace(rho).re).collect(),
        purity: traj.diagnostics.iter().map(|d| d.purity).collect(),
    }
}

/// Smallest eigenvalue of the Choi matrix of `map`.
pub fn choi_min_eigenvalue(map: &Superoperator) -> Result<f64> {
    linalg::min_eigh(&map.choi())
}

/// `tau_{t,s}` by integrating `d/dt tau = L_t tau` from the identity; the
/// result is checked for complete positivity.
pub fn propagator(bundle: &GeneratorBundle, s: f64, t: f64, rtol: f64) -> Result<Superoperator> {
    if t < s {
        return Err(Error::InvalidParameter(format!("propagator needs t >= s, got s = {s}, t = {t}")));
    }
    let d = bundle.dim();
    let mut out = None;
    let f = bundle.rhs();
    let tol = Tolerances { rtol, atol: rtol * 1e-2 };
    integrate(|t, y| f(t, y), s, linalg::eye(d * d), t, &[t], tol, |_, y, _| {
        out = Some(y.clone());
        Ok(())
    })?;
    let map = Superoperator::from_matrix(d, out.expect("end point is on the grid"))?;
    let min_eig = choi_min_eigenvalue(&map)?;
    if min_eig < -(100.0 * rtol).max(1e-12) * d as f64 {
        return Err(Error::PositivityBreach { t, min_eig });
    }
    Ok(map)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lindblad::{gks_lindbladian, reservoir_lindbladian};
    use crate::linalg::{c, fro, r, unit};
    use crate::operator_core::{gibbs_state, validate_pump};
    use crate::reservoir::{FormFactor, ReservoirSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sx() -> CMat {
        &unit(2, 0, 1) + &unit(2, 1, 0)
    }

    fn two_level_parts(beta: f64, lambda: f64) -> (AtomSpec, PumpOperator, LindbladData) {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let res = ReservoirSpec::new(beta, lambda, vec![FormFactor::single(1.0, 1, 1.0).unwrap()], vec![sx()]).unwrap();
        let data = reservoir_lindbladian(&atom, &res).unwrap();
        let pump = validate_pump(&atom, &unit(2, 1, 0)).unwrap();
        (atom, pump, data)
    }

    pub(crate) fn pumped_two_level(lambda: f64, eta: f64) -> GeneratorBundle {
        let (atom, pump, data) = two_level_parts(1.0, lambda);
        GeneratorBundle::from_model(&atom, &pump, &data, lambda, eta).unwrap()
    }

    fn random_state(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let tr = linalg::trace(&m);
        DensityMatrix::new(linalg::hermitian_part(&linalg::scale(&m, linalg::ONE / tr))).unwrap()
    }

    /// Independent `pi F(x)` for `f(x) = x exp(-x^2)`.
    fn rate_oracle(beta: f64, x: f64) -> f64 {
        let f = x.abs() * (-x * x).exp();
        PI * 4.0 * PI * x * x * f * f / (1.0 + (-beta * x).exp())
    }

    #[test]
    fn generator_parts() {
        let b = pumped_two_level(0.1, 0.004);
        let quarter = b.generator_at(b.period() / 4.0);
        assert!((&quarter - &b.static_part()).norm() < 1e-15);
        let free = b.with_couplings(0.0, 0.0);
        assert!((&free.generator_at(0.3) - &free.l_at).norm() == 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let t = rng.random_range(0.0..20.0);
            let diff = (&b.generator_at(t) - &b.generator_at(t + b.period())).norm();
            assert!(diff < 1e-14 * b.generator_at(t).norm());
        }
        assert!((&b.with_couplings(0.1, 0.0).averaged_generator() - &b.l_r.scaled(r(0.1 * 0.1))).norm() == 0.0);
        assert!(b.averaged_generator().eigenvalues().unwrap().iter().any(|z| z.norm() < 1e-12));
    }

    #[test]
    fn zero_generator_keeps_diagonal_state() {
        let b = pumped_two_level(0.1, 0.0).with_couplings(0.0, 0.0);
        let rho0 = DensityMatrix::new(linalg::real_diag(&[0.3, 0.7])).unwrap();
        let traj = evolve(&b, &rho0, 10.0, &uniform_grid(10.0, 20), EvolveOptions::default()).unwrap();
        for s in &traj.states {
            assert!(fro(&(s - rho0.matrix())) < 1e-12);
        }
    }

    #[test]
    fn unitary_evolution_rotates_coherences() {
        let b = pumped_two_level(0.1, 0.0).with_couplings(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho0 = random_state(2, &mut rng);
        let opts = EvolveOptions { rtol: 1e-11, atol: 1e-13 };
        let traj = evolve(&b, &rho0, 30.0, &uniform_grid(30.0, 30), opts).unwrap();
        let c0 = rho0.matrix()[(0, 1)].norm();
        for s in &traj.states {
            assert!((s[(0, 1)].norm() - c0).abs() < 1e-9);
            assert!((s[(0, 0)] - rho0.matrix()[(0, 0)]).norm() < 1e-9);
        }
    }

    #[test]
    fn two_level_rate_equation() {
        let (lambda, beta) = (0.1, 1.0);
        let b = pumped_two_level(lambda, 0.0);
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let (down, up) = (rate_oracle(beta, 1.0), rate_oracle(beta, -1.0));
        let gamma = lambda * lambda * (down + up);
        let p_inf = up / (down + up);
        let p0 = 1.0;
        let t_end = 50.0 / (lambda * lambda);
        let rho0 = DensityMatrix::new(unit(2, 1, 1)).unwrap();
        let traj = evolve(&b, &rho0, t_end, &uniform_grid(t_end, 100), EvolveOptions { rtol: 1e-10, atol: 1e-12 }).unwrap();
        let pops = populations(&atom, &traj);
        for (i, t) in pops.times.iter().enumerate() {
            let exact = p_inf + (p0 - p_inf) * (-gamma * t).exp();
            assert!((pops.populations[i][1] - exact).abs() < 1e-6, "t = {t}");
            assert!((pops.populations[i].iter().sum::<f64>() - pops.trace[i]).abs() < 1e-12);
        }
        let gibbs = gibbs_state(&atom, beta).unwrap();
        assert!((pops.populations.last().unwrap()[1] - gibbs.matrix()[(1, 1)].re).abs() < 1e-9);
        assert!((p_inf - (-beta).exp() / (1.0 + (-beta).exp())).abs() < 1e-12);
        assert!(traj.max_trace_drift() <= 1e-9);
        assert!(traj.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn maximally_mixed_is_fixed_by_zero_generator() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0, 2.0], &[1, 2, 1]).unwrap();
        let d = atom.dim();
        let z = Superoperator::zero(d);
        let b = GeneratorBundle::new(z.clone(), z.clone(), z, 0.0, 0.0, 2.0).unwrap();
        let traj = evolve(&b, &DensityMatrix::maximally_mixed(d), 5.0, &uniform_grid(5.0, 5), EvolveOptions::default()).unwrap();
        for p in populations(&atom, &traj).populations {
            assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15 && (p[2] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn pumped_trajectory_is_healthy() {
        let b = pumped_two_level(0.1, 0.005);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho0 = random_state(2, &mut rng);
        let t_end = 50.0 / 0.01;
        let traj = evolve(&b, &rho0, t_end, &uniform_grid(t_end, 200), EvolveOptions { rtol: 1e-10, atol: 1e-12 }).unwrap();
        assert!(traj.max_trace_drift() <= 1e-9, "{}", traj.max_trace_drift());
        assert!(traj.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let b = pumped_two_level(0.3, 0.05);
        let rho0 = DensityMatrix::new(unit(2, 1, 1)).unwrap();
        let grid = uniform_grid(20.0, 40);
        let run = |rtol: f64| evolve(&b, &rho0, 20.0, &grid, EvolveOptions { rtol, atol: rtol * 1e-2 }).unwrap();
        let reference = run(1e-13);
        let err = |tr: &Trajectory| {
            tr.states.iter().zip(&reference.states).map(|(a, b)| fro(&(a - b))).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(&run(1e-7)), err(&run(5e-8)));
        assert!(e2 * 2.0 <= e1, "{e1} {e2}");
    }

    #[test]
    fn propagator_identities() {
        let b = pumped_two_level(0.2, 0.02);
        let id = propagator(&b, 1.3, 1.3, 1e-10).unwrap();
        assert!((&id - &Superoperator::identity(2)).norm() == 0.0);
        let free = b.with_couplings(0.0, 0.0);
        let tau = propagator(&free, 0.0, 4.0, 1e-11).unwrap();
        assert!((&tau - &free.l_at.exp(4.0).unwrap()).norm() < 1e-8);
        let rtol = 1e-10;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..3 {
            let mut pts = [rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)];
            pts.sort_by(f64::total_cmp);
            let [s, m, t] = pts;
            let whole = propagator(&b, s, t, rtol).unwrap();
            let split = &propagator(&b, m, t, rtol).unwrap() * &propagator(&b, s, m, rtol).unwrap();
            assert!((&whole - &split).norm() <= 10.0 * rtol, "{}", (&whole - &split).norm());
        }
        let p = b.period();
        let a = propagator(&b, 0.4, 2.9, 1e-11).unwrap();
        let shifted = propagator(&b, 0.4 + p, 2.9 + p, 1e-11).unwrap();
        assert!((&a - &shifted).norm() < 1e-7);
        assert!(choi_min_eigenvalue(&a).unwrap() > -1e-9);
    }

    #[test]
    fn gks_two_level_decays_to_ground() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let data = gks_lindbladian(&atom, vec![unit(2, 0, 1)]).unwrap();
        let rho = stationary_state(&data.l_r).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }
}
