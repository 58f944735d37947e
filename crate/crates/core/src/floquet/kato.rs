//! Perturbative block of a Howland operator on an unperturbed eigenspace,
//! and an order-of-accuracy check on a finite dilation of the reservoir.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::stationary_state;
use crate::linalg::{self, CMat, C64};
use crate::operator_core::Superoperator;

use super::pairs::pair_transform;
use super::riesz::{isolation_radius, riesz_projection};

#[derive(Clone, Debug)]
pub struct KatoBlock {
    /// `F` restricted to `Ran P`, transported to `Ran P0`.
    pub k: CMat,
    /// First-order block `P0 (F - F0) P0` (or the supplied effective block).
    pub lambda_block: CMat,
    /// `||K - c 1 - Lambda||_F`.
    pub residual: f64,
    pub rank: usize,
    /// `||(P - P0)^2||_2`.
    pub pair_norm: f64,
    pub radius: f64,
}

/// Orthonormal range basis `B` of a projection and the dual rows `B* P`.
fn range_basis(p: &CMat) -> Result<(CMat, CMat)> {
    let (w, v) = linalg::eigh(&(p * p.adjoint()))?;
    let cols: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.5).collect();
    let n = p.nrows();
    let b = CMat::from_fn(n, cols.len(), |i, a| v[(i, cols[a])]);
    let bd = b.adjoint() * p;
    Ok((b, bd))
}

struct Projections {
    p0: CMat,
    p: CMat,
    radius: f64,
}

fn projections(f: &CMat, f0: &CMat, center: C64, radius: Option<f64>, m: usize) -> Result<Projections> {
    let w0 = linalg::eigvals(f0)?;
    let w = linalg::eigvals(f)?;
    let radius = radius.unwrap_or_else(|| isolation_radius(&w0, center, 1e-9));
    let p0 = riesz_projection(f0, &w0, center, radius, m)?.matrix;
    let p = riesz_projection(f, &w, center, radius, m)?.matrix;
    Ok(Projections { p0, p, radius })
}

fn block_from(pr: &Projections, f: &CMat, center: C64, lambda_full: &CMat) -> Result<KatoBlock> {
    let diff = &pr.p - &pr.p0;
    let pair_norm = linalg::singular_values(&(&diff * &diff))?.first().copied().unwrap_or(0.0);
    if pair_norm >= 1.0 {
        return Err(Error::ProjectionPairTooFar { norm: pair_norm });
    }
    let t = pair_transform(&pr.p0, &pr.p)?;
    let (b, bd) = range_basis(&pr.p0)?;
    let k = &bd * &t.v * f * &t.u * &b;
    let lambda_block = &bd * lambda_full * &b;
    let r = b.ncols();
    let residual = linalg::fro(&(&k - linalg::scale(&linalg::eye(r), center) - &lambda_block));
    Ok(KatoBlock { k, lambda_block, residual, rank: r, pair_norm, radius: pr.radius })
}

/// Kato block of `f` at the eigenvalue `center` of `f0`, with
/// `Lambda = P0 (f - f0) P0`. The radius defaults to the isolation radius of
/// `center` in the spectrum of `f0`.
pub fn kato_block(f: &CMat, f0: &CMat, center: C64, radius: Option<f64>, m: usize) -> Result<KatoBlock> {
    let pr = projections(f, f0, center, radius, m)?;
    block_from(&pr, f, center, &(f - f0))
}

/// Atom coupled through `Q (x) B` to one damped two-level mode, standing in
/// for the reservoir. The mode Hamiltonian `(w/2) sz + g sx` breaks the parity
/// that would otherwise cancel all odd orders; `B = sx - <sx>` has zero mean
/// in the mode's stationary state.
#[derive(Clone, Debug)]
pub struct DilatedModel {
    pub h_at: CMat,
    pub h_pump: CMat,
    pub q: CMat,
    pub omega: f64,
    pub mode_frequency: f64,
    pub mode_field: f64,
    pub mode_damping: f64,
    pub mode_occupation: f64,
}

impl DilatedModel {
    pub fn new(h_at: CMat, h_pump: CMat, q: CMat, omega: f64) -> Self {
        Self { h_at, h_pump, q, omega, mode_frequency: 0.7, mode_field: 0.4, mode_damping: 2.0, mode_occupation: 0.3 }
    }

    fn lifted(&self) -> Result<(Superoperator, Superoperator, Superoperator)> {
        let d = self.h_at.nrows();
        let sx = &linalg::unit(2, 0, 1) + &linalg::unit(2, 1, 0);
        let sz = linalg::real_diag(&[1.0, -1.0]);
        let h_mode = &linalg::scale(&sz, linalg::r(self.mode_frequency / 2.0)) + &linalg::scale(&sx, linalg::r(self.mode_field));
        let lower = linalg::unit(2, 1, 0);
        let raise = linalg::unit(2, 0, 1);
        let g = self.mode_damping;
        let n = self.mode_occupation;
        let jumps = [linalg::scale(&lower, linalg::r((g * (1.0 + n)).sqrt())), linalg::scale(&raise, linalg::r((g * n).sqrt()))];
        let l_mode = jumps.iter().fold(Superoperator::hamiltonian(&h_mode), |acc, j| &acc + &Superoperator::dissipator(j));
        let rho_mode = stationary_state(&l_mode)?;
        let mean = linalg::trace(&(&sx * rho_mode.matrix()));
        let b = &sx - linalg::scale(&linalg::eye(2), mean);
        let i_at = linalg::eye(d);
        let i_mode = linalg::eye(2);
        let mut l0 = Superoperator::hamiltonian(&(linalg::kron(&self.h_at, &i_mode) + linalg::kron(&i_at, &h_mode)));
        for j in &jumps {
            l0 = &l0 + &Superoperator::dissipator(&linalg::kron(&i_at, j));
        }
        let w = Superoperator::hamiltonian(&linalg::kron(&self.q, &b));
        let lp = Superoperator::hamiltonian(&linalg::kron(&self.h_pump, &i_mode));
        Ok((l0, w, lp))
    }
}

fn howland(diag: &CMat, off: &CMat, n_modes: usize, omega: f64) -> CMat {
    let m = diag.nrows();
    let nb = 2 * n_modes + 1;
    let mut out = linalg::zeros(nb * m, nb * m);
    for b in 0..nb {
        let k = b as f64 - n_modes as f64;
        for i in 0..m {
            for j in 0..m {
                out[(b * m + i, b * m + j)] = diag[(i, j)];
                if b + 1 < nb {
                    out[(b * m + i, (b + 1) * m + j)] = off[(i, j)];
                    out[((b + 1) * m + i, b * m + j)] = off[(i, j)];
                }
            }
            out[(b * m + i, b * m + i)] += linalg::c(0.0, k * omega);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderCheck {
    pub lambdas: [f64; 2],
    pub eta_over_lambda_squared: f64,
    /// Dilated model: full block against the second-order effective block.
    pub residuals: [f64; 2],
    /// `residual(lambda_2) / residual(lambda_1)`.
    pub ratio: f64,
    /// Effective Howland operator against its own first-order block; absent
    /// when no contour isolates the cluster of the effective operator.
    pub effective_residuals: Option<[f64; 2]>,
    pub effective_ratio: Option<f64>,
    pub effective_error: Option<String>,
    pub rank: usize,
    pub radius: f64,
}

impl DilatedModel {
    /// Kato residual of the dilated Howland operator at `lambda`, with
    /// `Lambda = P0 (eta/2 pump) P0 + lambda^2 P0 W S W P0` and `S` the reduced
    /// resolvent of the unperturbed operator at `center`.
    pub fn kato_residual(&self, lambda: f64, eta: f64, n_modes: usize, center: C64, m: usize) -> Result<KatoBlock> {
        let (l0, w, lp) = self.lifted()?;
        let dd = l0.matrix().nrows();
        let zero = linalg::zeros(dd, dd);
        let f0 = howland(l0.matrix(), &zero, n_modes, self.omega);
        let diag = l0.matrix() + linalg::scale(w.matrix(), linalg::r(lambda));
        let f = howland(&diag, &linalg::scale(lp.matrix(), linalg::r(eta / 2.0)), n_modes, self.omega);
        let wh = howland(w.matrix(), &zero, n_modes, 0.0);
        let pr = projections(&f, &f0, center, None, m)?;
        let n = f.nrows();
        let id = linalg::eye(n);
        let s = linalg::inverse(&(linalg::scale(&id, center) - &f0 + &pr.p0))? - &pr.p0;
        let first = &f - &f0 - linalg::scale(&wh, linalg::r(lambda));
        let second = linalg::scale(&(&wh * &s * &wh), linalg::r(lambda * lambda));
        block_from(&pr, &f, center, &(first + second))
    }
}

/// Kato residuals at `lambda` and `lambda/2` with `eta = c lambda^2`, on the
/// dilated model (the order check proper) and on the effective Howland
/// operators built by `effective(lambda, eta)`.
pub fn dilated_order_check<F>(model: &DilatedModel, lambda: f64, eta_ratio: f64, n_modes: usize, m: usize, effective: F) -> Result<OrderCheck>
where
    F: Fn(f64, f64) -> Result<(CMat, CMat)>,
{
    let lams = [lambda, lambda / 2.0];
    let center = linalg::ZERO;
    let mut residuals = [0.0; 2];
    let mut eff = Some([0.0; 2]);
    let mut effective_error = None;
    let mut rank = 0;
    let mut radius = 0.0;
    for (i, &l) in lams.iter().enumerate() {
        let eta = eta_ratio * l * l;
        let kb = model.kato_residual(l, eta, n_modes, center, m)?;
        residuals[i] = kb.residual;
        rank = kb.rank;
        radius = kb.radius;
        let (f, f0) = effective(l, eta)?;
        match kato_block(&f, &f0, center, None, m) {
            Ok(kb) => {
                if let Some(e) = eff.as_mut() {
                    e[i] = kb.residual;
                }
            }
            Err(e @ (Error::ContourHitsSpectrum { .. } | Error::IdempotencyFailure { .. } | Error::NearSingularPair { .. })) => {
                eff = None;
                effective_error = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OrderCheck {
        lambdas: lams,
        eta_over_lambda_squared: eta_ratio,
        residuals,
        ratio: residuals[1] / residuals[0],
        effective_residuals: eff,
        effective_ratio: eff.map(|e| e[1] / e[0]),
        effective_error,
        rank,
        radius,
    })
}
