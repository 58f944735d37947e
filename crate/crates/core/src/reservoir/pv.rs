//! Principal-value integrals `PV int f^(beta)(x + eps) / x dx`.
//!
//! The principal value is folded onto the half line,
//! `int_0^inf (F(eps + x) - F(eps - x)) / x dx`, whose integrand is smooth.
//! Two rules evaluate it: adaptive Gauss-Kronrod, and a trapezoid sum on the
//! offset grid `(i + 1/2) h` that never samples the origin.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::form_factor::{glued_g, spectral_density, FormFactor};
use super::quadrature::integrate;

/// Both estimates of a principal-value coefficient.
#[derive(Clone, Debug)]
pub struct PvEstimate {
    pub value: f64,
    pub adaptive: f64,
    pub trapezoid: f64,
    /// Largest `|Im|` met while summing the complex trapezoid integrand.
    pub imag_residue: f64,
    pub cutoff: f64,
}

fn breakpoints(ff: &FormFactor, eps: f64) -> Vec<f64> {
    let mut b = vec![eps.abs()];
    for p in ff.peaks() {
        b.push((p - eps).abs());
        b.push(p + eps.abs());
    }
    b
}

/// Total spectral weight `int F`, used to scale absolute tolerances.
fn weight_scale(ff: &FormFactor, beta: f64) -> f64 {
    let x = ff.cutoff();
    integrate(|y| spectral_density(ff, beta, y), -x, x, &[0.0], 0.0, 1e-10)
        .map(|v| v.0)
        .unwrap_or(1.0)
}

fn adaptive_rule(ff: &FormFactor, beta: f64, eps: f64, cutoff: f64, scale: f64) -> Result<f64> {
    let f = |x: f64| (spectral_density(ff, beta, eps + x) - spectral_density(ff, beta, eps - x)) / x;
    let (v, _) = integrate(f, 0.0, cutoff, &breakpoints(ff, eps), 1e-14 * scale, 1e-13)?;
    Ok(v)
}

fn trapezoid_rule(ff: &FormFactor, beta: f64, eps: f64, cutoff: f64, scale: f64) -> Result<(f64, f64)> {
    let density = |y: f64| {
        let g = glued_g(ff, beta, y);
        g * g.conj() * (4.0 * PI)
    };
    let sum = |h: f64| {
        let n = (cutoff / h).ceil() as usize;
        let mut s = crate::linalg::ZERO;
        let mut residue: f64 = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let term = (density(eps + x) - density(eps - x)) / x;
            residue = residue.max(term.im.abs());
            s += term;
        }
        (s.re * h, (s.im * h).abs().max(residue * h))
    };
    let strip = if beta > 0.0 { PI / beta } else { f64::INFINITY };
    let mut h = (0.25 / ff.max_decay().sqrt()).min(strip / 8.0);
    let (mut prev, mut residue) = sum(h);
    for _ in 0..14 {
        h /= 2.0;
        let (next, res) = sum(h);
        residue = residue.max(res);
        if (next - prev).abs() <= 1e-14 * scale + 1e-13 * next.abs() {
            return Ok((next, residue));
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergence(format!("offset trapezoid did not settle at eps = {eps}")))
}

/// Principal-value coefficient with both quadrature estimates.
///
/// Fails with [`Error::DisagreementBetweenRules`] when the two rules differ
/// by more than `1e-7` relative.
pub fn pv_estimate(ff: &FormFactor, beta: f64, eps: f64) -> Result<PvEstimate> {
    if ff.is_zero() {
        return Ok(PvEstimate { value: 0.0, adaptive: 0.0, trapezoid: 0.0, imag_residue: 0.0, cutoff: 0.0 });
    }
    let cutoff = eps.abs() + ff.cutoff();
    let scale = weight_scale(ff, beta);
    let adaptive = adaptive_rule(ff, beta, eps, cutoff, scale)?;
    let (trapezoid, imag_residue) = trapezoid_rule(ff, beta, eps, cutoff, scale)?;
    if (adaptive - trapezoid).abs() > 1e-7 * adaptive.abs().max(trapezoid.abs()) + 1e-12 * scale {
        return Err(Error::DisagreementBetweenRules { first: adaptive, second: trapezoid });
    }
    Ok(PvEstimate { value: adaptive, adaptive, trapezoid, imag_residue, cutoff })
}

/// Cauchy principal value `PV int f^(beta)(x + eps) / x dx`.
pub fn pv_coefficient(ff: &FormFactor, beta: f64, eps: f64) -> Result<f64> {
    pv_estimate(ff, beta, eps).map(|e| e.value)
}
