//! Semigroups as inverse Laplace transforms of the resolvent.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Clone, Debug, Serialize)]
pub struct BromwichResult {
    #[serde(skip)]
    pub value: CMat,
    pub abscissa: f64,
    pub half_height: f64,
    pub points: usize,
    /// Frobenius distance to the scaling-and-squaring exponential.
    pub error: f64,
}

/// `e^{sigma A}` from `(1/2 pi i) \int_{w - iH}^{w + iH} e^{sigma z} (z - A)^{-1} dz`
/// on `n` Simpson intervals. The Laurent terms `1/z` and `A/z^2` are
/// integrated exactly, leaving an `O(|z|^{-3})` remainder.
pub fn bromwich_expm(a: &CMat, sigma: f64, w: f64, half_height: f64, n: usize) -> Result<BromwichResult> {
    let bound = linalg::eigvals(a)?.iter().map(|z| z.re).fold(0.0, f64::max);
    if !(w > bound) {
        return Err(Error::AbscissaTooLow { w, bound });
    }
    if n == 0 || n % 2 == 1 || !(half_height > 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidParameter("need sigma > 0, H > 0 and an even positive number of intervals".into()));
    }
    let d = a.nrows();
    let id = linalg::eye(d);
    let a2 = a * a;
    let h = 2.0 * half_height / n as f64;
    let mut acc = linalg::zeros(d, d);
    for j in 0..=n {
        let y = -half_height + j as f64 * h;
        let z = linalg::c(w, y);
        let weight = if j == 0 || j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
        // (z - A)^{-1} - 1/z - A/z^2 = A^2 (z - A)^{-1} / z^2
        let rem = linalg::solve(&(linalg::scale(&id, z) - a), &a2)?;
        let f = (z * sigma).exp() / (z * z) * (weight * h / 3.0);
        acc += linalg::scale(&rem, f);
    }
    let value = &id + linalg::scale(a, linalg::r(sigma)) + linalg::scale(&acc, linalg::r(1.0 / (2.0 * PI)));
    let exact = linalg::expm(&linalg::scale(a, linalg::r(sigma)))?;
    let error = linalg::fro(&(&value - exact));
    Ok(BromwichResult { value, abscissa: w, half_height, points: n, error })
}
