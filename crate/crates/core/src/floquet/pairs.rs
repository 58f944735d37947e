//! Similarity between two nearby projections.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

const MIN_SIGMA: f64 = 1e-6;
const SERIES_RADIUS: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct PairTransform {
    /// `U` with `Q = U P V`.
    pub u: CMat,
    pub v: CMat,
    /// `||(P - Q)^2||_2`.
    pub r_norm: f64,
    /// Distance between the eigendecomposition and binomial-series values of
    /// `(1 - R)^{-1/2}`, when the series converges fast enough to be used.
    pub series_discrepancy: Option<f64>,
}

fn spectral_norm(a: &CMat) -> Result<f64> {
    Ok(linalg::singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// `sum_n binom(2n, n) / 4^n R^n`.
pub fn inverse_sqrt_series(r: &CMat) -> CMat {
    let n = r.nrows();
    let mut term = linalg::eye(n);
    let mut sum = term.clone();
    for k in 1..2000 {
        let coef = (2 * k - 1) as f64 / (2 * k) as f64;
        term = linalg::scale(&(&term * r), linalg::r(coef));
        sum += &term;
        if linalg::fro(&term) <= 1e-17 * linalg::fro(&sum) {
            break;
        }
    }
    sum
}

/// `U = (QP + (1-Q)(1-P))(1-R)^{-1/2}` and `V = (PQ + (1-P)(1-Q))(1-R)^{-1/2}`
/// with `R = (P - Q)^2`.
pub fn pair_transform(p: &CMat, q: &CMat) -> Result<PairTransform> {
    let n = p.nrows();
    let id = linalg::eye(n);
    let diff = p - q;
    let r = &diff * &diff;
    let one_minus = &id - &r;
    let sigma_min = linalg::singular_values(&one_minus)?.last().copied().unwrap_or(0.0);
    if sigma_min <= MIN_SIGMA {
        return Err(Error::NearSingularPair { sigma_min });
    }
    let r_norm = spectral_norm(&r)?;
    let by_eig = linalg::matrix_function(&one_minus, |z| linalg::ONE / z.sqrt())?;
    let (inv_sqrt, series_discrepancy) = if r_norm < SERIES_RADIUS {
        let series = inverse_sqrt_series(&r);
        let gap = linalg::fro(&(&series - &by_eig));
        if gap > 1e-9 {
            log::warn!("eigendecomposition of 1 - R is ill-conditioned (discrepancy {gap:.3e}); using the series");
            (series, Some(gap))
        } else {
            (by_eig, Some(gap))
        }
    } else {
        (by_eig, None)
    };
    let qc = &id - q;
    let pc = &id - p;
    let u = (q * p + &qc * &pc) * &inv_sqrt;
    let v = (p * q + &pc * &qc) * &inv_sqrt;
    Ok(PairTransform { u, v, r_norm, series_discrepancy })
}
