//! Reservoir-induced generator: jump operators, rates, Lamb shift and
//! dissipator, plus an independent resolvent construction and the checks of
//! the standing assumptions.

mod assumptions;
mod commutant;
mod oracle;

pub use assumptions::{check_assumptions, AssumptionOptions};
pub use commutant::{commutant_dimension, commutant_dimension_blockwise, is_adjoint_closed};
pub use oracle::{oracle_convergence, resolvent_oracle, resolvent_scalar, OracleConvergence};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operator_core::{AtomSpec, Superoperator};
use crate::reservoir::{check_orthogonality, pv_coefficient, rate_coefficient, ReservoirSpec};

/// Rates below this are treated as exactly zero.
pub const RATE_FLOOR: f64 = 1e-14;

/// Level-pair jump `P_j Q_l P_k` with its rate and principal-value coefficient.
#[derive(Clone, Debug)]
pub struct Jump {
    pub v: CMat,
    pub rate: f64,
    pub pv: f64,
    /// `(j, k, l)`, 0-based.
    pub label: (usize, usize, usize),
}

/// Assembled reservoir generator and its parts.
#[derive(Clone, Debug)]
pub struct LindbladData {
    pub jumps: Vec<Jump>,
    pub lamb: CMat,
    pub l_d: Superoperator,
    pub l_r: Superoperator,
    /// Jump operators supplied directly in GKS form, if any.
    pub gks_jumps: Option<Vec<CMat>>,
}

impl LindbladData {
    /// Operators whose commutant decides irreducibility: the rated level-pair
    /// jumps, or the user's GKS list.
    pub fn irreducibility_set(&self) -> Vec<CMat> {
        match &self.gks_jumps {
            Some(v) => v.clone(),
            None => self
                .jumps
                .iter()
                .filter(|j| j.rate > 0.0)
                .map(|j| linalg::scale(&j.v, linalg::r(j.rate.sqrt())))
                .collect(),
        }
    }
}

/// `P_j Q P_k` for every level pair; pairs with `||V|| < 1e-14` are dropped.
pub fn jump_operators(atom: &AtomSpec, q: &CMat) -> Vec<((usize, usize), CMat)> {
    let n = atom.n_levels();
    let mut out = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let v = atom.projection(j) * q * atom.projection(k);
            if linalg::fro(&v) >= 1e-14 {
                out.push(((j, k), v));
            }
        }
    }
    out
}

fn check_dims(atom: &AtomSpec, res: &ReservoirSpec) -> Result<()> {
    if res.dim() != atom.dim() {
        return Err(Error::DimensionMismatch { expected: atom.dim(), found: res.dim() });
    }
    check_orthogonality(&res.form_factors)
}

/// All level-pair jumps with closed-form rates and principal-value coefficients.
pub fn rated_jumps(atom: &AtomSpec, res: &ReservoirSpec) -> Result<Vec<Jump>> {
    check_dims(atom, res)?;
    let e = atom.energies();
    let mut jumps = Vec::new();
    for (l, (ff, q)) in res.form_factors.iter().zip(&res.couplings).enumerate() {
        for ((j, k), v) in jump_operators(atom, q) {
            let eps = e[k] - e[j];
            let mut rate = rate_coefficient(ff, res.beta, eps);
            if rate < RATE_FLOOR {
                rate = 0.0;
            }
            let pv = if j != k { pv_coefficient(ff, res.beta, eps)? } else { 0.0 };
            jumps.push(Jump { v, rate, pv, label: (j, k, l) });
        }
    }
    Ok(jumps)
}

fn lamb_from(jumps: &[Jump], d: usize) -> CMat {
    let mut h = linalg::zeros(d, d);
    for jp in jumps.iter().filter(|jp| jp.label.0 != jp.label.1) {
        h += linalg::scale(&(jp.v.adjoint() * &jp.v), linalg::r(-0.5 * jp.pv));
    }
    linalg::hermitian_part(&h)
}

fn dissipator_from(jumps: &[Jump], d: usize) -> Superoperator {
    jumps
        .iter()
        .filter(|jp| jp.rate > 0.0)
        .fold(Superoperator::zero(d), |acc, jp| &acc + &Superoperator::dissipator(&jp.v).scaled(linalg::r(jp.rate)))
}

/// `H_Lamb = -1/2 sum_{j != k} sum_l d_jk V*V`.
pub fn lamb_shift(atom: &AtomSpec, res: &ReservoirSpec) -> Result<CMat> {
    Ok(lamb_from(&rated_jumps(atom, res)?, atom.dim()))
}

/// `L_d = 1/2 sum c (2 V rho V* - V*V rho - rho V*V)`.
pub fn dissipator(atom: &AtomSpec, res: &ReservoirSpec) -> Result<Superoperator> {
    Ok(dissipator_from(&rated_jumps(atom, res)?, atom.dim()))
}

fn verify(atom: &AtomSpec, data: &LindbladData) -> Result<()> {
    let lamb_norm = linalg::fro(&data.lamb);
    let comm = linalg::fro(&linalg::commutator(&data.lamb, &atom.h_levels()));
    if comm > 1e-10 * lamb_norm + 1e-14 {
        return Err(Error::InvariantViolation(format!("Lamb shift does not commute with H_at ({comm:.3e})")));
    }
    let unital = linalg::fro(&data.l_r.adjoint().apply(&linalg::eye(atom.dim())));
    if unital > 1e-12 * data.l_r.norm().max(1.0) {
        return Err(Error::InvariantViolation(format!("L_R* does not annihilate the identity ({unital:.3e})")));
    }
    Ok(())
}

/// `L_R = -i[H_Lamb, .] + L_d` from the closed forms, with invariants checked.
pub fn reservoir_lindbladian(atom: &AtomSpec, res: &ReservoirSpec) -> Result<LindbladData> {
    let jumps = rated_jumps(atom, res)?;
    let d = atom.dim();
    let lamb = lamb_from(&jumps, d);
    let l_d = dissipator_from(&jumps, d);
    let l_r = &Superoperator::hamiltonian(&lamb) + &l_d;
    let data = LindbladData { jumps, lamb, l_d, l_r, gks_jumps: None };
    verify(atom, &data)?;
    Ok(data)
}

/// `L_R = sum_a (2 V rho V* - V*V rho - rho V*V)` from user-supplied jumps.
pub fn gks_lindbladian(atom: &AtomSpec, jumps: Vec<CMat>) -> Result<LindbladData> {
    let d = atom.dim();
    for v in &jumps {
        if v.nrows() != d || v.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.nrows() });
        }
    }
    let l_d = jumps
        .iter()
        .fold(Superoperator::zero(d), |acc, v| &acc + &Superoperator::dissipator(v).scaled(linalg::r(2.0)));
    let data = LindbladData { jumps: Vec::new(), lamb: linalg::zeros(d, d), l_r: l_d.clone(), l_d, gks_jumps: Some(jumps) };
    verify(atom, &data)?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::stationary_state;
    use crate::linalg::{c, fro, r, unit};
    use crate::operator_core::gibbs_state;
    use crate::reservoir::{FormFactor, Term};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sx() -> CMat {
        &unit(2, 0, 1) + &unit(2, 1, 0)
    }

    fn two_level(beta: f64) -> (AtomSpec, ReservoirSpec) {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let res = ReservoirSpec::new(beta, 0.1, vec![FormFactor::single(1.0, 1, 1.0).unwrap()], vec![sx()]).unwrap();
        (atom, res)
    }

    #[test]
    fn two_level_jumps() {
        let (atom, _) = two_level(1.0);
        let js = jump_operators(&atom, &sx());
        assert_eq!(js.len(), 2);
        assert_eq!(js[0].0, (0, 1));
        assert!(fro(&(&js[0].1 - unit(2, 0, 1))) == 0.0);
        assert_eq!(js[1].0, (1, 0));
        let js = jump_operators(&atom, &linalg::real_diag(&[1.0, -1.0]));
        assert!(js.iter().all(|((j, k), _)| j == k));
    }

    #[test]
    fn jumps_resolve_coupling() {
        let atom = AtomSpec::from_levels(&[0.0, 0.4, 1.1, 2.0], &[1, 1, 1, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = CMat::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let sum = jump_operators(&atom, &q).into_iter().fold(linalg::zeros(4, 4), |acc, (_, v)| acc + v);
        assert!(fro(&(sum - q)) < 1e-15);
    }

    #[test]
    fn zero_form_factor_gives_zero_generator() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let ff = FormFactor::single(0.0, 1, 1.0).unwrap();
        let res = ReservoirSpec::new(1.0, 0.1, vec![ff], vec![sx()]).unwrap();
        let data = reservoir_lindbladian(&atom, &res).unwrap();
        assert!(data.l_r.is_zero());
        assert!(fro(&data.lamb) == 0.0);
    }

    #[test]
    fn two_level_lamb_is_diagonal() {
        let (atom, res) = two_level(1.0);
        let h = lamb_shift(&atom, &res).unwrap();
        assert!(h[(0, 1)].norm() == 0.0 && h[(1, 0)].norm() == 0.0);
        assert!(h[(0, 0)].norm() > 0.0);
    }

    #[test]
    fn detailed_balance_fixes_gibbs() {
        let (atom, res) = two_level(1.3);
        let ld = dissipator(&atom, &res).unwrap();
        let rho = stationary_state(&ld).unwrap();
        let g = gibbs_state(&atom, 1.3).unwrap();
        assert!(fro(&(rho.matrix() - g.matrix())) < 1e-10);
        let ratio = rho.matrix()[(1, 1)].re / rho.matrix()[(0, 0)].re;
        assert!((ratio - (-1.3f64).exp()).abs() < 1e-10);
        let data = reservoir_lindbladian(&atom, &res).unwrap();
        assert!(fro(&data.l_r.apply(g.matrix())) < 1e-8);
    }

    #[test]
    fn dissipator_is_traceless_and_jump_part_is_cp() {
        let atom = AtomSpec::from_levels(&[0.0, 0.35, 1.0], &[1, 1, 1]).unwrap();
        let q = CMat::from_fn(3, 3, |i, j| if i == j { r(0.0) } else { r(1.0) });
        let res = ReservoirSpec::new(0.7, 0.1, vec![FormFactor::single(1.0, 1, 1.0).unwrap()], vec![q]).unwrap();
        let data = reservoir_lindbladian(&atom, &res).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let a = CMat::from_fn(3, 3, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let rho = &a * a.adjoint();
            assert!(linalg::trace(&data.l_d.apply(&rho)).norm() < 1e-12);
        }
        let jump_map = data.jumps.iter().fold(Superoperator::zero(3), |acc, jp| {
            &acc + &Superoperator::sandwich(&jp.v, &linalg::adjoint(&jp.v)).scaled(r(jp.rate))
        });
        assert!(linalg::min_eigh(&jump_map.choi()).unwrap() >= -1e-10);
        for jp in &data.jumps {
            let (j, k, _) = jp.label;
            if j == k || jp.rate == 0.0 {
                continue;
            }
            let back = data.jumps.iter().find(|o| o.label == (k, j, 0)).unwrap();
            let eps = atom.energies()[k] - atom.energies()[j];
            assert!((jp.rate / back.rate / (0.7 * eps).exp() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn lamb_commutes_with_hamiltonian() {
        let atom = AtomSpec::from_levels(&[0.0, 0.35, 1.0], &[1, 1, 1]).unwrap();
        let q = CMat::from_fn(3, 3, |i, j| if i == j { r(0.2) } else { c(0.5, 0.1 * (i as f64 - j as f64)) });
        let res = ReservoirSpec::new(1.0, 0.1, vec![FormFactor::single(1.0, 1, 1.0).unwrap()], vec![q]).unwrap();
        let h = lamb_shift(&atom, &res).unwrap();
        assert!(fro(&linalg::commutator(&h, &atom.h_levels())) <= 1e-10);
        assert!(linalg::hermitian_deviation(&h) == 0.0);
    }

    #[test]
    fn reservoir_generator_has_kernel() {
        let (atom, res) = two_level(1.0);
        let data = reservoir_lindbladian(&atom, &res).unwrap();
        let w = data.l_r.eigenvalues().unwrap();
        assert!(w.iter().any(|z| z.norm() < 1e-12));
    }

    #[test]
    fn orthogonality_is_required() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let a = FormFactor::single(1.0, 1, 1.0).unwrap();
        let b = FormFactor::new(vec![Term { weight: c(1.0, 0.0), exponent_p: 1, decay_c: 2.0 }]).unwrap();
        let res = ReservoirSpec { beta: 1.0, lambda: 0.1, form_factors: vec![a, b], couplings: vec![sx(), sx()] };
        assert!(matches!(lamb_shift(&atom, &res), Err(Error::NonOrthogonalFamily { .. })));
    }

    #[test]
    fn gks_form_matches_rated_form() {
        let (atom, res) = two_level(1.0);
        let data = reservoir_lindbladian(&atom, &res).unwrap();
        let vs: Vec<CMat> = data.jumps.iter().map(|j| linalg::scale(&j.v, r((j.rate / 2.0).sqrt()))).collect();
        let gks = gks_lindbladian(&atom, vs).unwrap();
        assert!(fro(&(gks.l_d.matrix() - data.l_d.matrix())) < 1e-13);
    }
}
