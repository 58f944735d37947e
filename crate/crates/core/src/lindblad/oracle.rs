//! Regularized-resolvent construction of the reservoir generator.
//!
//! For a linear (odd) coupling to an orthogonal family of form factors, the
//! reservoir resolvent at regularization `e > 0` reduces, per level pair and
//! form factor, to the scalar
//!
//! `Gamma(e) = int F(p) / (e + i (E_j - E_k + p)) dp`,
//!
//! whose limit `e -> 0+` is `pi F(E_k - E_j) - i PV int F(x + E_k - E_j) / x dx`
//! (Sokhotski-Plemelj). The generator is then
//! `1/2 sum [Gamma (V rho V* - V*V rho) + conj(Gamma) (V rho V* - rho V*V)]`,
//! sandwiched by the Bohr projections. Diagonal pairs (`j = k`) keep only
//! `Re Gamma`, matching the closed form whose Lamb shift runs over nonzero
//! Bohr frequencies.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, C64};
use crate::operator_core::{bohr_spectrum, spectral_projection, AtomSpec, Superoperator};
use crate::reservoir::quadrature::integrate_vec;
use crate::reservoir::{spectral_density, FormFactor, ReservoirSpec};

use super::{jump_operators, reservoir_lindbladian};

/// `int F(p) / (e + i (eps' + p)) dp` with the singular part integrated in
/// closed form.
pub fn resolvent_scalar(ff: &FormFactor, beta: f64, eps_prime: f64, e: f64) -> Result<C64> {
    if ff.is_zero() {
        return Ok(linalg::ZERO);
    }
    let y_max = eps_prime.abs() + ff.cutoff();
    let f0 = spectral_density(ff, beta, -eps_prime);
    let integrand = |y: f64, out: &mut [f64]| {
        let num = spectral_density(ff, beta, y - eps_prime) - f0;
        let den = e * e + y * y;
        out[0] = num * e / den;
        out[1] = -num * y / den;
    };
    let mut breaks = vec![0.0, -e, e, -10.0 * e, 10.0 * e, -100.0 * e, 100.0 * e];
    for p in ff.peaks() {
        breaks.push(p + eps_prime);
        breaks.push(-p + eps_prime);
    }
    let scale = f0.max(spectral_density(ff, beta, ff.peaks()[0]));
    let q = integrate_vec(integrand, 2, -y_max, y_max, &breaks, 1e-14 * scale, 1e-13)?;
    let singular = f0 * 2.0 * (y_max / e).atan();
    Ok(linalg::c(q.value[0] + singular, q.value[1]))
}

/// Reservoir generator at regularization `e`, built from resolvent scalars.
pub fn resolvent_oracle(atom: &AtomSpec, res: &ReservoirSpec, e: f64) -> Result<Superoperator> {
    let d = atom.dim();
    let en = atom.energies();
    let mut k_op = Superoperator::zero(d);
    for (ff, q) in res.form_factors.iter().zip(&res.couplings) {
        for ((j, k), v) in jump_operators(atom, q) {
            let mut gamma = resolvent_scalar(ff, res.beta, en[j] - en[k], e)?;
            if j == k {
                gamma.im = 0.0;
            }
            let vd = linalg::adjoint(&v);
            let vv = &vd * &v;
            let jump = Superoperator::sandwich(&v, &vd).scaled(linalg::r(gamma.re));
            let left = Superoperator::left(&vv).scaled(gamma * -0.5);
            let right = Superoperator::right(&vv).scaled(gamma.conj() * -0.5);
            k_op = &(&(&k_op + &jump) + &left) + &right;
        }
    }
    let bohr = bohr_spectrum(atom)?;
    let mut out = Superoperator::zero(d);
    for eps in bohr.frequencies() {
        let p = spectral_projection(atom, &bohr, eps)?;
        out = &out + &(&(&p * &k_op) * &p);
    }
    Ok(out)
}

/// Errors of the resolvent construction against the closed form.
#[derive(Clone, Debug, Serialize)]
pub struct OracleConvergence {
    pub regularizations: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log2(err_i / err_{i+1})` for successive halvings.
    pub observed_orders: Vec<f64>,
    /// Distance of the quadratic extrapolation to zero regularization.
    pub extrapolated_error: f64,
}

/// Evaluates the oracle at `e, e/2, e/4` and compares with the closed form.
pub fn oracle_convergence(atom: &AtomSpec, res: &ReservoirSpec, e: f64) -> Result<OracleConvergence> {
    let closed = reservoir_lindbladian(atom, res)?.l_r;
    let regs = vec![e, e / 2.0, e / 4.0];
    let ops: Vec<Superoperator> = regs.iter().map(|&x| resolvent_oracle(atom, res, x)).collect::<Result<_>>()?;
    let errors: Vec<f64> = ops.iter().map(|o| (o - &closed).norm()).collect();
    let observed_orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let extrap = linalg::lincomb(&[
        (linalg::r(1.0 / 3.0), ops[0].matrix()),
        (linalg::r(-2.0), ops[1].matrix()),
        (linalg::r(8.0 / 3.0), ops[2].matrix()),
    ]);
    let extrapolated_error = linalg::fro(&(extrap - closed.matrix()));
    Ok(OracleConvergence { regularizations: regs, errors, observed_orders, extrapolated_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;
    use crate::reservoir::{pv_coefficient, rate_coefficient};

    fn ff() -> FormFactor {
        FormFactor::single(1.0, 1, 1.0).unwrap()
    }

    #[test]
    fn scalar_core_reproduces_rate_and_pv() {
        let beta = 1e-12;
        let g1 = resolvent_scalar(&ff(), beta, -1.0, 1e-3).unwrap();
        let g2 = resolvent_scalar(&ff(), beta, -1.0, 5e-4).unwrap();
        let lim = g2 * 2.0 - g1;
        assert!((lim.re - rate_coefficient(&ff(), beta, 1.0)).abs() < 1e-5, "{}", lim.re);
        let beta = 1.0;
        let g1 = resolvent_scalar(&ff(), beta, -0.5, 1e-3).unwrap();
        let g2 = resolvent_scalar(&ff(), beta, -0.5, 5e-4).unwrap();
        let lim = g2 * 2.0 - g1;
        assert!((lim.re - rate_coefficient(&ff(), beta, 0.5)).abs() < 1e-5);
        assert!((lim.im + pv_coefficient(&ff(), beta, 0.5).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn zero_form_factor_is_zero() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let sx = &unit(2, 0, 1) + &unit(2, 1, 0);
        let res = ReservoirSpec::new(1.0, 0.1, vec![FormFactor::single(0.0, 1, 1.0).unwrap()], vec![sx]).unwrap();
        for e in [1e-1, 1e-3] {
            assert!(resolvent_oracle(&atom, &res, e).unwrap().is_zero());
        }
    }

    #[test]
    fn first_order_convergence() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let sx = &unit(2, 0, 1) + &unit(2, 1, 0);
        let res = ReservoirSpec::new(1.0, 0.1, vec![ff()], vec![sx]).unwrap();
        let conv = oracle_convergence(&atom, &res, 2e-3).unwrap();
        for o in &conv.observed_orders {
            assert!((o - 1.0).abs() <= 0.25, "{o}");
        }
        assert!(conv.extrapolated_error < 1e-5);
    }
}
