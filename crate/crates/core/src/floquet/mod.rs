//! Truncated Fourier-space (Howland) generator of the periodic dynamics and
//! the spectral tools built on it.

mod bromwich;
mod kato;
mod monodromy;
mod pairs;
mod riesz;

pub use bromwich::{bromwich_expm, BromwichResult};
pub use kato::{dilated_order_check, kato_block, DilatedModel, KatoBlock, OrderCheck};
pub use monodromy::{monodromy, monodromy_match, MonodromyMatch};
pub use pairs::{pair_transform, PairTransform};
pub use riesz::{eigenvector_projection, isolation_radius, riesz_projection, RieszProjection, DEFAULT_CONTOUR_POINTS};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::GeneratorBundle;
use crate::linalg::{self, CMat, C64};
use crate::operator_core::Superoperator;

/// Eigenvalues within this distance of `i p omega` count as resonances.
pub const RESONANCE_DISC: f64 = 1e-8;

/// Which side the Howland operator acts on.
#[derive(Clone, Debug)]
pub enum Picture {
    /// Generators acting on density matrices.
    State,
    /// Hilbert-Schmidt adjoints, acting on observables.
    Heisenberg,
    /// Heisenberg picture conjugated by right multiplication with `rho^{1/2}`
    /// for the given faithful reference state.
    Conjugated(CMat),
}

impl Picture {
    pub fn name(&self) -> &'static str {
        match self {
            Picture::State => "state",
            Picture::Heisenberg => "heisenberg",
            Picture::Conjugated(_) => "conjugated",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FloquetOperator {
    pub n_modes: usize,
    pub omega: f64,
    /// Block size `d^2`.
    pub block: usize,
    pub picture: Picture,
    pub matrix: CMat,
}

impl FloquetOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Fourier modes `-N..=N` in block order.
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.n_modes as i64;
        -n..=n
    }

    fn block_index(&self, k: i64) -> usize {
        (k + self.n_modes as i64) as usize
    }

    /// Vector supported on mode `k` with block content `v`.
    pub fn mode_vector(&self, k: i64, v: &CMat) -> CMat {
        let mut out = linalg::zeros(self.dim(), 1);
        let off = self.block_index(k) * self.block;
        for i in 0..self.block {
            out[(off + i, 0)] = v[(i, 0)];
        }
        out
    }

    /// Relative weight of each mode in column `j` of `vectors`.
    pub fn mode_weights(&self, vectors: &CMat, j: usize) -> Vec<f64> {
        let nb = 2 * self.n_modes + 1;
        let mut w = vec![0.0; nb];
        for (b, wb) in w.iter_mut().enumerate() {
            for i in 0..self.block {
                *wb += vectors[(b * self.block + i, j)].norm_sqr();
            }
        }
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|x| *x /= total);
        }
        w
    }
}

fn sqrt_pd(rho: &CMat) -> Result<(CMat, CMat)> {
    let min = linalg::min_eigh(rho)?;
    if min <= 1e-12 {
        return Err(Error::InvalidParameter(format!("reference state must be faithful (minimum eigenvalue {min:.3e})")));
    }
    Ok((linalg::hermitian_function(rho, f64::sqrt)?, linalg::hermitian_function(rho, |x| 1.0 / x.sqrt())?))
}

/// Block-tridiagonal Howland operator on modes `-N..=N`: diagonal blocks
/// `i k omega + L_at + lambda^2 L_R`, neighbours coupled by `(eta/2) L_p`.
pub fn build_howland(bundle: &GeneratorBundle, n_modes: usize, picture: Picture) -> Result<FloquetOperator> {
    if n_modes < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 Fourier modes, got {n_modes}")));
    }
    let stat = bundle.static_part();
    let pump = bundle.l_p.scaled(linalg::r(bundle.eta / 2.0));
    let (diag, off): (Superoperator, Superoperator) = match &picture {
        Picture::State => (stat, pump),
        Picture::Heisenberg => (stat.adjoint(), pump.adjoint()),
        Picture::Conjugated(rho) => {
            if rho.nrows() != bundle.dim() {
                return Err(Error::DimensionMismatch { expected: bundle.dim(), found: rho.nrows() });
            }
            let (s, si) = sqrt_pd(rho)?;
            let z = Superoperator::right(&s);
            let zi = Superoperator::right(&si);
            (&(&zi * &stat.adjoint()) * &z, &(&zi * &pump.adjoint()) * &z)
        }
    };
    let m = diag.matrix().nrows();
    let nb = 2 * n_modes + 1;
    let mut out = linalg::zeros(nb * m, nb * m);
    let omega = bundle.omega;
    for b in 0..nb {
        let k = b as f64 - n_modes as f64;
        for i in 0..m {
            for j in 0..m {
                out[(b * m + i, b * m + j)] = diag.matrix()[(i, j)];
            }
            out[(b * m + i, b * m + i)] += linalg::c(0.0, k * omega);
        }
        for nbk in [b.wrapping_sub(1), b + 1] {
            if nbk < nb {
                for i in 0..m {
                    for j in 0..m {
                        out[(b * m + i, nbk * m + j)] = off.matrix()[(i, j)];
                    }
                }
            }
        }
    }
    Ok(FloquetOperator { n_modes, omega, block: m, picture, matrix: out })
}

/// Dense eigendecomposition with per-eigenvector mode bookkeeping.
#[derive(Clone, Debug)]
pub struct FloquetSpectrum {
    pub eigenvalues: Vec<C64>,
    pub vectors: CMat,
    /// Mode carrying the largest weight of each eigenvector.
    pub dominant: Vec<i64>,
    /// Weight-averaged mode of each eigenvector.
    pub centers: Vec<f64>,
    pub n_modes: usize,
    pub omega: f64,
}

impl FloquetSpectrum {
    /// Eigenvalues whose eigenvectors live away from the truncation boundary.
    pub fn is_interior(&self, j: usize) -> bool {
        self.dominant[j].unsigned_abs() as usize + 2 <= self.n_modes
    }

    pub fn interior(&self) -> Vec<C64> {
        (0..self.eigenvalues.len()).filter(|&j| self.is_interior(j)).map(|j| self.eigenvalues[j]).collect()
    }

    /// Interior eigenvalues in the fundamental strip `|Im mu| <= omega/2`.
    pub fn fundamental(&self) -> Vec<C64> {
        let mut v: Vec<C64> = self.interior().into_iter().filter(|z| z.im.abs() <= self.omega / 2.0).collect();
        v.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        v
    }

    /// Distance of `mu` to the lattice `i omega Z`.
    pub fn lattice_distance(&self, mu: C64) -> f64 {
        let p = (mu.im / self.omega).round();
        (mu - linalg::c(0.0, p * self.omega)).norm()
    }

    /// Number of eigenvalues within [`RESONANCE_DISC`] of `i p omega`.
    pub fn resonance_count(&self, p: i64) -> usize {
        let z = linalg::c(0.0, p as f64 * self.omega);
        self.eigenvalues.iter().filter(|&&mu| (mu - z).norm() <= RESONANCE_DISC).count()
    }

    /// `min |Re mu|` over interior eigenvalues off the lattice `i omega Z`.
    pub fn gap(&self) -> Option<f64> {
        self.interior()
            .into_iter()
            .filter(|&mu| self.lattice_distance(mu) > RESONANCE_DISC)
            .map(|mu| mu.re.abs())
            .reduce(f64::min)
    }
}

pub fn floquet_spectrum(f: &FloquetOperator) -> Result<FloquetSpectrum> {
    let (w, v) = linalg::eig(&f.matrix)?;
    let mut dominant = Vec::with_capacity(w.len());
    let mut centers = Vec::with_capacity(w.len());
    for j in 0..w.len() {
        let wts = f.mode_weights(&v, j);
        let (bmax, _) = wts.iter().enumerate().fold((0, -1.0), |acc, (b, &x)| if x > acc.1 { (b, x) } else { acc });
        dominant.push(bmax as i64 - f.n_modes as i64);
        centers.push(wts.iter().enumerate().map(|(b, x)| (b as f64 - f.n_modes as f64) * x).sum());
    }
    Ok(FloquetSpectrum { eigenvalues: w, vectors: v, dominant, centers, n_modes: f.n_modes, omega: f.omega })
}

/// Summary of the resonance structure and gap.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub picture: String,
    pub n_modes: usize,
    /// `(p, count)` for `|p| <= N - 1`.
    pub resonance_counts: Vec<(i64, usize)>,
    pub all_simple: bool,
    pub gap: Option<f64>,
    pub gap_over_lambda_squared: Option<f64>,
    /// Set when the gap vanishes or a resonance is not simple.
    pub degenerate: bool,
}

pub fn gap_report(f: &FloquetOperator, spec: &FloquetSpectrum, lambda: f64) -> GapReport {
    let n = f.n_modes as i64;
    let resonance_counts: Vec<(i64, usize)> = (-(n - 1)..=(n - 1)).map(|p| (p, spec.resonance_count(p))).collect();
    let all_simple = resonance_counts.iter().all(|&(_, c)| c == 1);
    let gap = spec.gap();
    let l2 = lambda * lambda;
    GapReport {
        picture: f.picture.name().into(),
        n_modes: f.n_modes,
        all_simple,
        gap,
        gap_over_lambda_squared: gap.filter(|_| l2 > 0.0).map(|g| g / l2),
        degenerate: !all_simple || gap.is_none_or(|g| g <= 1e-12),
        resonance_counts,
    }
}

/// Residual `||(F - i p omega) (delta_p (x) vec(1))||` of the candidate
/// resonance eigenvectors, for `|p| <= N - 1`.
pub fn heisenberg_resonance_residuals(f: &FloquetOperator, d: usize) -> Vec<(i64, f64)> {
    let one = linalg::vec_of(&linalg::eye(d));
    let n = f.n_modes as i64;
    (-(n - 1)..=(n - 1))
        .map(|p| {
            let v = f.mode_vector(p, &one);
            let r = &f.matrix * &v - linalg::scale(&v, linalg::c(0.0, p as f64 * f.omega));
            (p, linalg::fro(&r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::reservoir_lindbladian;
    use crate::linalg::{matched_distance, unit};
    use crate::operator_core::{gibbs_state, validate_pump, AtomSpec};
    use crate::reservoir::{FormFactor, ReservoirSpec};

    pub(crate) fn bundle(lambda: f64, eta: f64) -> GeneratorBundle {
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let sx = &unit(2, 0, 1) + &unit(2, 1, 0);
        let res = ReservoirSpec::new(1.0, lambda, vec![FormFactor::single(1.0, 1, 1.0).unwrap()], vec![sx]).unwrap();
        let data = reservoir_lindbladian(&atom, &res).unwrap();
        let pump = validate_pump(&atom, &unit(2, 1, 0)).unwrap();
        GeneratorBundle::from_model(&atom, &pump, &data, lambda, eta).unwrap()
    }

    #[test]
    fn free_spectrum_is_shifted_bohr_lattice() {
        let b = bundle(0.1, 0.0).with_couplings(0.0, 0.0);
        let f = build_howland(&b, 3, Picture::State).unwrap();
        assert_eq!(f.dim(), 7 * 4);
        let w = linalg::eigvals(&f.matrix).unwrap();
        let bohr = b.l_at.eigenvalues().unwrap();
        let expected: Vec<C64> = (-3..=3).flat_map(|k| bohr.iter().map(move |e| e + linalg::c(0.0, k as f64 * b.omega))).collect();
        assert!(matched_distance(&w, &expected) < 1e-10);
        let spec = floquet_spectrum(&f).unwrap();
        let rep = gap_report(&f, &spec, 0.0);
        assert!(rep.degenerate);
    }

    #[test]
    fn heisenberg_identity_vectors_are_exact() {
        let b = bundle(0.1, 0.006);
        let f = build_howland(&b, 4, Picture::Heisenberg).unwrap();
        for (_, r) in heisenberg_resonance_residuals(&f, 2) {
            assert!(r <= 1e-12, "{r}");
        }
    }

    #[test]
    fn no_pump_is_block_diagonal() {
        let b = bundle(0.1, 0.0);
        let f = build_howland(&b, 3, Picture::State).unwrap();
        let spec = floquet_spectrum(&f).unwrap();
        let base = b.static_part().eigenvalues().unwrap();
        let expected: Vec<C64> = (-3..=3).flat_map(|k| base.iter().map(move |e| e + linalg::c(0.0, k as f64 * b.omega))).collect();
        assert!(matched_distance(&spec.eigenvalues, &expected) < 1e-10);
        let direct = base.iter().filter(|&&z| spec.lattice_distance(z) > RESONANCE_DISC).map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
        assert!((spec.gap().unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn pictures_share_spectrum() {
        let b = bundle(0.1, 0.006);
        let atom = AtomSpec::from_levels(&[0.0, 1.0], &[1, 1]).unwrap();
        let g = gibbs_state(&atom, 1.0).unwrap().into_matrix();
        let s = linalg::eigvals(&build_howland(&b, 4, Picture::State).unwrap().matrix).unwrap();
        let h = linalg::eigvals(&build_howland(&b, 4, Picture::Heisenberg).unwrap().matrix).unwrap();
        let c = linalg::eigvals(&build_howland(&b, 4, Picture::Conjugated(g)).unwrap().matrix).unwrap();
        assert!(matched_distance(&s, &h) < 1e-9);
        assert!(matched_distance(&h, &c) < 1e-9);
    }

    #[test]
    fn gap_scales_with_lambda_squared() {
        let mut ratios = Vec::new();
        for lambda in [0.1, 0.05] {
            let b = bundle(lambda, 0.5 * lambda * lambda);
            let f = build_howland(&b, 6, Picture::Heisenberg).unwrap();
            let spec = floquet_spectrum(&f).unwrap();
            let rep = gap_report(&f, &spec, lambda);
            assert!(rep.all_simple, "{:?}", rep.resonance_counts);
            ratios.push(rep.gap_over_lambda_squared.unwrap());
        }
        assert!((ratios[1] / ratios[0] - 1.0).abs() < 0.2, "{ratios:?}");
    }

    #[test]
    fn truncation_converges() {
        let b = bundle(0.1, 0.006);
        let a = floquet_spectrum(&build_howland(&b, 8, Picture::State).unwrap()).unwrap().fundamental();
        let c = floquet_spectrum(&build_howland(&b, 16, Picture::State).unwrap()).unwrap().fundamental();
        assert_eq!(a.len(), c.len());
        assert!(matched_distance(&a, &c) <= 1e-8, "{}", matched_distance(&a, &c));
    }

    #[test]
    fn rejects_too_few_modes() {
        assert!(build_howland(&bundle(0.1, 0.0), 1, Picture::State).is_err());
    }
}
