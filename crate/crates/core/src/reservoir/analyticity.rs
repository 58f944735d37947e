//! Strip integrability of the glued functions.
//!
//! For real weights, `g(z) = W(z) (1 + e^{-beta z})^{-1/2}` with
//! `W(z) = sum w z^(2p) e^{-C z^2}`, and
//! `e^{-beta z/2} g#(z) = i W(z) e^{-beta z/2} (1 + e^{beta z})^{-1/2}`.
//! Both are analytic for `|Im z| < pi / beta`. Complex weights break the
//! gluing at the origin.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

use super::form_factor::FormFactor;
use super::quadrature::integrate;

/// Outcome of the strip-integrability check.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyticityReport {
    pub finite: bool,
    pub r_max: f64,
    /// `(y, integral along Im z = y)`; `None` marks an overflow.
    pub lines: Vec<(f64, Option<f64>)>,
    pub max_value: Option<f64>,
    pub argmax_y: f64,
    /// Change of the `y = 0` integral when the cutoff is doubled.
    pub cutoff_delta: f64,
    pub reason: Option<String>,
}

fn w_of(ff: &FormFactor, z: C64) -> C64 {
    ff.terms().iter().fold(c(0.0, 0.0), |acc, t| {
        acc + t.weight * z.powi(2 * t.exponent_p as i32) * (-(z * z) * t.decay_c).exp()
    })
}

/// `|g(z)| + |e^{-beta z/2} g#(z)|` for real-weight form factors.
pub fn strip_integrand(ff: &FormFactor, beta: f64, z: C64) -> f64 {
    let w = w_of(ff, z).norm();
    let one = c(1.0, 0.0);
    let g = w / (one + (-z * beta).exp()).sqrt().norm();
    let sharp = w * (-z * (beta / 2.0)).exp().norm() / (one + (z * beta).exp()).sqrt().norm();
    g + sharp
}

/// Integral of the squared integrand along `Im z = y` over `|x| <= x_max`.
/// Returns `None` once any sample exceeds `ceiling`.
pub fn line_integral(ff: &FormFactor, beta: f64, y: f64, x_max: f64, ceiling: f64) -> Result<Option<f64>> {
    let mut overflow = false;
    let f = |x: f64| {
        let v = strip_integrand(ff, beta, c(x, y)).powi(2);
        if !v.is_finite() || v > ceiling {
            overflow = true;
            0.0
        } else {
            v
        }
    };
    let mut breaks = vec![0.0];
    for p in ff.peaks() {
        breaks.push(p);
        breaks.push(-p);
    }
    let (v, _) = integrate(f, -x_max, x_max, &breaks, 1e-300, 1e-11)?;
    if overflow || v > ceiling {
        return Ok(None);
    }
    Ok(Some(v))
}

/// Radius where the line integrand has decayed to `1e-18` of its largest
/// sampled value; `None` when no such radius is found before overflow.
fn line_cutoff(ff: &FormFactor, beta: f64, y: f64, ceiling: f64) -> Option<f64> {
    let mut x = ff.cutoff().max(1.0);
    let sample = |x: f64| {
        let n = 400;
        (0..=n)
            .map(|i| -x + 2.0 * x * i as f64 / n as f64)
            .map(|t| strip_integrand(ff, beta, c(t, y)).powi(2))
            .fold(0.0, f64::max)
    };
    for _ in 0..40 {
        let peak = sample(x);
        if !peak.is_finite() || peak > ceiling {
            return None;
        }
        let edge = strip_integrand(ff, beta, c(x, y)).powi(2).max(strip_integrand(ff, beta, c(-x, y)).powi(2));
        if !edge.is_finite() || edge > ceiling {
            return None;
        }
        if edge <= 1e-18 * peak.max(f64::MIN_POSITIVE) {
            return Some(x);
        }
        x *= 1.5;
    }
    None
}

/// Samples `n_lines` horizontal lines in `(-r_max, r_max)` and reports the
/// supremum of the squared strip integrals.
pub fn check_strip_analyticity(ff: &FormFactor, beta: f64, r_max: f64, n_lines: usize, ceiling: f64) -> Result<AnalyticityReport> {
    if !(r_max > 0.0) || n_lines == 0 || !(beta > 0.0) {
        return Err(Error::InvalidParameter("r_max, n_lines and beta must be positive".into()));
    }
    let mut report = AnalyticityReport {
        finite: false,
        r_max,
        lines: Vec::new(),
        max_value: None,
        argmax_y: 0.0,
        cutoff_delta: 0.0,
        reason: None,
    };
    if !ff.is_real() {
        report.reason = Some("complex weights: the glued function is not analytic at the origin".into());
        return Ok(report);
    }
    if r_max >= PI / beta {
        report.reason = Some(format!("strip reaches the branch point of the Fermi factor at Im z = pi/beta = {}", PI / beta));
        return Ok(report);
    }
    let mut ys: Vec<f64> = (0..n_lines).map(|i| -r_max + (i as f64 + 0.5) * 2.0 * r_max / n_lines as f64).collect();
    ys.push(0.0);
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut sup: Option<f64> = Some(0.0);
    for &y in &ys {
        let value = match line_cutoff(ff, beta, y, ceiling) {
            Some(x) => line_integral(ff, beta, y, x, ceiling)?,
            None => None,
        };
        report.lines.push((y, value));
        match (value, sup) {
            (Some(v), Some(s)) if v > s => {
                sup = Some(v);
                report.argmax_y = y;
            }
            (None, _) => {
                if sup.is_some() {
                    report.argmax_y = y;
                }
                sup = None;
            }
            _ => {}
        }
    }
    report.max_value = sup;
    report.finite = sup.is_some();
    if !report.finite {
        report.reason = Some(format!("line integral exceeds the overflow guard {ceiling:e}"));
        return Ok(report);
    }
    if let Some(x) = line_cutoff(ff, beta, 0.0, ceiling) {
        let a = line_integral(ff, beta, 0.0, x, ceiling)?.unwrap_or(f64::NAN);
        let b = line_integral(ff, beta, 0.0, 2.0 * x, ceiling)?.unwrap_or(f64::NAN);
        report.cutoff_delta = (a - b).abs();
    }
    Ok(report)
}

/// Largest sampled half-width `r < pi/beta` whose strip bound stays below
/// `ceiling`.
pub fn admissible_strip_width(ff: &FormFactor, beta: f64, ceiling: f64, samples: usize) -> Result<f64> {
    let limit = PI / beta;
    let mut best = 0.0;
    for k in 1..=samples {
        let r = limit * k as f64 / (samples + 1) as f64;
        let ok = [r, -r].iter().all(|&y| {
            line_cutoff(ff, beta, y, ceiling)
                .map(|x| matches!(line_integral(ff, beta, y, x, ceiling), Ok(Some(_))))
                .unwrap_or(false)
        });
        if !ok {
            break;
        }
        best = r;
    }
    Ok(best)
}
