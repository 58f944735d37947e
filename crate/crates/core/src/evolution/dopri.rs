//! Dormand-Prince 5(4) with the Hairer dense-output polynomial, on matrix-valued states.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

fn comb(base: &CMat, terms: &[(f64, &CMat)], h: f64) -> CMat {
    let mut out = base.clone();
    for &(a, k) in terms {
        if a != 0.0 {
            out += linalg::scale(k, linalg::r(a * h));
        }
    }
    out
}

fn err_norm(err: &CMat, y0: &CMat, y1: &CMat, tol: Tolerances) -> f64 {
    let mut acc = 0.0;
    let n = (err.nrows() * err.ncols()) as f64;
    for j in 0..err.ncols() {
        for i in 0..err.nrows() {
            let sk = tol.atol + tol.rtol * y0[(i, j)].norm().max(y1[(i, j)].norm());
            let q = err[(i, j)].norm() / sk;
            acc += q * q;
        }
    }
    (acc / n).sqrt()
}

fn initial_step<F: FnMut(f64, &CMat) -> CMat>(f: &mut F, t0: f64, y0: &CMat, f0: &CMat, tol: Tolerances, span: f64) -> f64 {
    let zero = linalg::zeros(y0.nrows(), y0.ncols());
    let d0 = err_norm(y0, y0, y0, tol);
    let d1 = err_norm(f0, y0, y0, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = comb(y0, &[(1.0, f0)], h0);
    let f1 = f(t0 + h0, &y1);
    let d2 = err_norm(&(&f1 - f0), y0, &zero, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, calling `on_output(t, y, h)`
/// at every point of `grid` (ascending, inside `[t0, t_end]`) through dense output.
pub fn integrate<F, G>(mut f: F, t0: f64, y0: CMat, t_end: f64, grid: &[f64], tol: Tolerances, mut on_output: G) -> Result<StepStats>
where
    F: FnMut(f64, &CMat) -> CMat,
    G: FnMut(f64, &CMat, f64) -> Result<()>,
{
    if !(t_end >= t0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("output grid must be strictly increasing".into()));
    }
    if grid.first().is_some_and(|&g| g < t0) || grid.last().is_some_and(|&g| g > t_end) {
        return Err(Error::InvalidParameter("output grid outside the integration interval".into()));
    }
    let mut stats = StepStats { min_step: f64::INFINITY, ..Default::default() };
    let mut next = 0;
    while next < grid.len() && grid[next] == t0 {
        on_output(t0, &y0, 0.0)?;
        next += 1;
    }
    if t_end == t0 {
        return Ok(stats);
    }
    let span = t_end - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t, &y, &k1, tol, span);
    let mut last_rejected = false;
    loop {
        if h < 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = f(t + C2 * h, &comb(&y, &[(A21, &k1)], h));
        let k3 = f(t + C3 * h, &comb(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(t + C4 * h, &comb(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(t + C5 * h, &comb(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = f(t + h, &comb(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
        let y1 = comb(&y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
        let t1 = if last { t_end } else { t + h };
        let k7 = f(t1, &y1);
        let zero = linalg::zeros(y.nrows(), y.ncols());
        let err = comb(&zero, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)], h);
        let en = err_norm(&err, &y, &y1, tol);
        if !en.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite state at t = {t}")));
        }
        if en <= 1.0 {
            stats.accepted += 1;
            stats.min_step = stats.min_step.min(h);
            stats.max_step = stats.max_step.max(h);
            if next < grid.len() && grid[next] <= t1 {
                let r2 = &y1 - &y;
                let r3 = linalg::scale(&k1, linalg::r(h)) - &r2;
                let r4 = &r2 - linalg::scale(&k7, linalg::r(h)) - &r3;
                let r5 = comb(&zero, &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)], h);
                while next < grid.len() && grid[next] <= t1 {
                    let tg = grid[next];
                    if tg == t1 {
                        on_output(tg, &y1, h)?;
                    } else {
                        let th = (tg - t) / h;
                        let th1 = 1.0 - th;
                        let inner = &r4 + linalg::scale(&r5, linalg::r(th1));
                        let inner = &r3 + linalg::scale(&inner, linalg::r(th));
                        let inner = &r2 + linalg::scale(&inner, linalg::r(th1));
                        on_output(tg, &(&y + linalg::scale(&inner, linalg::r(th))), h)?;
                    }
                    next += 1;
                }
            }
            t = t1;
            y = y1;
            k1 = k7;
            if last {
                break;
            }
            let mut fac = (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * en.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};

    #[test]
    fn exponential_growth_and_dense_output() {
        let tol = Tolerances { rtol: 1e-10, atol: 1e-12 };
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let mut out = Vec::new();
        let y0 = linalg::from_rows(&[vec![r(1.0)]]);
        integrate(|_, y| linalg::scale(y, c(-0.5, 2.0)), 0.0, y0, 2.0, &grid, tol, |t, y, _| {
            out.push((t, y[(0, 0)]));
            Ok(())
        })
        .unwrap();
        assert_eq!(out.len(), grid.len());
        for (t, v) in out {
            let exact = (c(-0.5, 2.0) * t).exp();
            assert!((v - exact).norm() < 1e-8, "{t}: {}", (v - exact).norm());
        }
    }

    #[test]
    fn fifth_order_convergence() {
        // Error over a fixed interval should fall roughly like rtol.
        let run = |rtol: f64| {
            let mut last = linalg::ZERO;
            let y0 = linalg::from_rows(&[vec![r(1.0)]]);
            integrate(|t, y| linalg::scale(y, r(t.cos())), 0.0, y0, 10.0, &[10.0], Tolerances { rtol, atol: rtol * 1e-3 }, |_, y, _| {
                last = y[(0, 0)];
                Ok(())
            })
            .unwrap();
            (last.re - 10f64.sin().exp()).abs()
        };
        let (e1, e2) = (run(1e-6), run(1e-9));
        assert!(e2 < e1 / 50.0, "{e1} {e2}");
    }

    #[test]
    fn rejects_bad_grid() {
        let y0 = linalg::eye(1);
        let tol = Tolerances { rtol: 1e-8, atol: 1e-10 };
        assert!(integrate(|_, y| y.clone(), 0.0, y0.clone(), 1.0, &[0.5, 0.2], tol, |_, _, _| Ok(())).is_err());
        assert!(integrate(|_, y| y.clone(), 0.0, y0, 1.0, &[2.0], tol, |_, _, _| Ok(())).is_err());
    }
}
