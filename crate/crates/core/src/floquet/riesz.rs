use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

pub const DEFAULT_CONTOUR_POINTS: usize = 64;
const IDEMPOTENCY_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RieszProjection {
    pub matrix: CMat,
    pub center: C64,
    pub radius: f64,
    pub points: usize,
    /// `||P^2 - P||_F`.
    pub idempotency_defect: f64,
    /// Rounded trace.
    pub rank: usize,
    /// Eigenvalues strictly inside the circle, per the supplied spectrum.
    pub enclosed: usize,
}

/// Default contour radius `min(0.45 * isolation, 0.45)`, where isolation is
/// the distance from `center` to the nearest eigenvalue farther than `inner`.
pub fn isolation_radius(eigenvalues: &[C64], center: C64, inner: f64) -> f64 {
    let iso = eigenvalues.iter().map(|&z| (z - center).norm()).filter(|&r| r > inner).fold(f64::INFINITY, f64::min);
    (0.45 * iso).min(0.45)
}

/// `(1/2 pi i) \oint (z - F)^{-1} dz` by the trapezoid rule on `m` points of
/// the circle `|z - center| = radius`.
pub fn riesz_projection(f: &CMat, eigenvalues: &[C64], center: C64, radius: f64, m: usize) -> Result<RieszProjection> {
    if m < 3 || radius <= 0.0 {
        return Err(Error::InvalidParameter("contour needs a positive radius and at least 3 points".into()));
    }
    let distance = eigenvalues
        .iter()
        .map(|&z| ((z - center).norm() - radius).abs())
        .fold(f64::INFINITY, f64::min);
    if distance <= 0.5 * radius {
        return Err(Error::ContourHitsSpectrum { distance });
    }
    let n = f.nrows();
    let id = linalg::eye(n);
    let mut p = linalg::zeros(n, n);
    for j in 0..m {
        let th = 2.0 * PI * j as f64 / m as f64;
        let e = linalg::c(th.cos(), th.sin()) * radius;
        let z = center + e;
        let res = linalg::solve(&(linalg::scale(&id, z) - f), &id)?;
        p += linalg::scale(&res, e / m as f64);
    }
    let defect = linalg::fro(&(&p * &p - &p));
    if defect > IDEMPOTENCY_LIMIT {
        return Err(Error::IdempotencyFailure { defect });
    }
    let rank = linalg::trace(&p).re.round().max(0.0) as usize;
    let enclosed = eigenvalues.iter().filter(|&&z| (z - center).norm() < radius).count();
    Ok(RieszProjection { matrix: p, center, radius, points: m, idempotency_defect: defect, rank, enclosed })
}

/// Spectral projection `V diag(1_S) V^{-1}` onto the eigenvalues inside the
/// circle, from a full eigendecomposition.
pub fn eigenvector_projection(eigenvalues: &[C64], vectors: &CMat, center: C64, radius: f64) -> Result<CMat> {
    let inv = linalg::inverse(vectors)?;
    let n = vectors.nrows();
    let sel: Vec<usize> = (0..eigenvalues.len()).filter(|&j| (eigenvalues[j] - center).norm() < radius).collect();
    let vs = CMat::from_fn(n, sel.len(), |i, a| vectors[(i, sel[a])]);
    let ws = CMat::from_fn(sel.len(), n, |a, i| inv[(sel[a], i)]);
    Ok(vs * ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{build_howland, floquet_spectrum, tests::bundle, Picture};
    use crate::linalg::c;

    #[test]
    fn diagonal_case_is_exact() {
        let b = bundle(0.1, 0.0).with_couplings(0.0, 0.0);
        let f = build_howland(&b, 3, Picture::State).unwrap();
        let w = linalg::eigvals(&f.matrix).unwrap();
        let center = c(0.0, 1.0);
        let p = riesz_projection(&f.matrix, &w, center, 0.4, 64).unwrap();
        let exact = CMat::from_fn(f.dim(), f.dim(), |i, j| {
            if i == j && (f.matrix[(i, i)] - center).norm() < 0.4 { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        assert!(linalg::fro(&(&p.matrix - exact)) < 1e-10);
        assert_eq!(p.rank, p.enclosed);
    }

    #[test]
    fn contour_matches_eigenvectors_and_refines() {
        let b = bundle(0.1, 0.006);
        let f = build_howland(&b, 4, Picture::State).unwrap();
        let spec = floquet_spectrum(&f).unwrap();
        let center = c(0.0, 0.0);
        let r = isolation_radius(&spec.eigenvalues, center, 0.2);
        let p32 = riesz_projection(&f.matrix, &spec.eigenvalues, center, r, 32).unwrap();
        let p64 = riesz_projection(&f.matrix, &spec.eigenvalues, center, r, 64).unwrap();
        assert!(p64.idempotency_defect <= 1e-8);
        assert!(p64.idempotency_defect <= (p32.idempotency_defect / 10.0).max(1e-13));
        assert_eq!(p64.rank, p64.enclosed);
        let pe = eigenvector_projection(&spec.eigenvalues, &spec.vectors, center, r).unwrap();
        assert!(linalg::fro(&(&p64.matrix - pe)) <= 1e-7);
    }

    #[test]
    fn contour_on_eigenvalue_is_rejected() {
        let b = bundle(0.1, 0.0).with_couplings(0.0, 0.0);
        let f = build_howland(&b, 2, Picture::State).unwrap();
        let w = linalg::eigvals(&f.matrix).unwrap();
        assert!(matches!(riesz_projection(&f.matrix, &w, c(0.0, 0.0), 1.0, 64), Err(Error::ContourHitsSpectrum { .. })));
    }
}
