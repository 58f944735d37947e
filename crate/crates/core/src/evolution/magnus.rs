//! Fixed-step fourth-order commutator-free exponential integrator.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operator_core::Superoperator;

use super::GeneratorBundle;

/// One-step map `exp(h(a1 A1 + a2 A2)) exp(h(a2 A1 + a1 A2))`, with `A1`, `A2`
/// the generator at the two Gauss nodes.
fn step(bundle: &GeneratorBundle, t: f64, h: f64) -> Result<CMat> {
    let s3 = 3f64.sqrt();
    let a1 = (3.0 - 2.0 * s3) / 12.0;
    let a2 = (3.0 + 2.0 * s3) / 12.0;
    let g1 = bundle.generator_at(t + (0.5 - s3 / 6.0) * h);
    let g2 = bundle.generator_at(t + (0.5 + s3 / 6.0) * h);
    let first = linalg::lincomb(&[(linalg::r(h * a2), g1.matrix()), (linalg::r(h * a1), g2.matrix())]);
    let second = linalg::lincomb(&[(linalg::r(h * a1), g1.matrix()), (linalg::r(h * a2), g2.matrix())]);
    Ok(linalg::expm(&second)? * linalg::expm(&first)?)
}

/// `tau_{t,s}` from `n` equal commutator-free steps.
pub fn magnus_propagator(bundle: &GeneratorBundle, s: f64, t: f64, n: usize) -> Result<Superoperator> {
    if t < s || n == 0 {
        return Err(Error::InvalidParameter("need t >= s and at least one step".into()));
    }
    let d = bundle.dim();
    let h = (t - s) / n as f64;
    let mut acc = linalg::eye(d * d);
    for i in 0..n {
        acc = step(bundle, s + i as f64 * h, h)? * acc;
    }
    Superoperator::from_matrix(d, acc)
}

/// State at `t_end` from `rho0` at time zero, with `n` steps.
pub fn magnus_evolve(bundle: &GeneratorBundle, rho0: &CMat, t_end: f64, n: usize) -> Result<CMat> {
    Ok(magnus_propagator(bundle, 0.0, t_end, n)?.apply(rho0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{propagator, tests::pumped_two_level};

    #[test]
    fn agrees_with_runge_kutta_at_fourth_order() {
        let b = pumped_two_level(0.2, 0.03);
        let reference = propagator(&b, 0.0, 3.0, 1e-12).unwrap();
        let e1 = (&magnus_propagator(&b, 0.0, 3.0, 20).unwrap() - &reference).norm();
        let e2 = (&magnus_propagator(&b, 0.0, 3.0, 40).unwrap() - &reference).norm();
        assert!(e2 < 1e-6, "{e2}");
        let order = (e1 / e2).log2();
        assert!(order > 3.5 && order < 4.6, "{order}");
    }
}
