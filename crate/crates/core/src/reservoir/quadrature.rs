#![allow(clippy::excessive_precision)]

//! Adaptive Gauss-Kronrod (7/15) and composite Simpson rules.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate and `|Kronrod - Gauss|` on one interval, for a
/// vector-valued integrand of fixed length.
fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, buf: &mut [f64], k: &mut [f64], g: &mut [f64]) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    k.iter_mut().for_each(|x| *x = 0.0);
    g.iter_mut().for_each(|x| *x = 0.0);
    f(center, buf);
    for i in 0..buf.len() {
        k[i] += WGK[7] * buf[i];
        g[i] += WG[3] * buf[i];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        for x in [center - dx, center + dx] {
            f(x, buf);
            for i in 0..buf.len() {
                k[i] += WGK[j] * buf[i];
                if j % 2 == 1 {
                    g[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..k.len() {
        k[i] *= half;
        g[i] *= half;
        err = err.max((k[i] - g[i]).abs());
    }
    err
}

struct Piece {
    err: f64,
    a: f64,
    b: f64,
    val: Vec<f64>,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub value: Vec<f64>,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand
/// over `[a, b]`, split initially at `breaks`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol * |I|)`
/// in the max norm.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    let mut points = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    points.extend(inner);
    points.push(b);
    let mut buf = vec![0.0; dim];
    let mut kv = vec![0.0; dim];
    let mut gv = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let err = gk15(&mut f, w[0], w[1], &mut buf, &mut kv, &mut gv);
            heap.push(Piece { err, a: w[0], b: w[1], val: kv.clone() });
        }
    }
    const MAX_INTERVALS: usize = 20_000;
    let mut total = vec![0.0; dim];
    let mut err = 0.0;
    for p in heap.iter() {
        for (t, v) in total.iter_mut().zip(&p.val) {
            *t += v;
        }
        err += p.err;
    }
    loop {
        if !err.is_finite() || total.iter().any(|x| !x.is_finite()) {
            return Err(Error::QuadratureNonConvergence("non-finite integrand".into()));
        }
        let scale = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if err <= abs_tol.max(rel_tol * scale) {
            // Re-sum to shed the drift of the running totals.
            let mut value = vec![0.0; dim];
            let mut error = 0.0;
            for p in heap.iter() {
                for (t, v) in value.iter_mut().zip(&p.val) {
                    *t += v;
                }
                error += p.err;
            }
            return Ok(Quadrature { value, error, intervals: heap.len() });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence(format!(
                "error estimate {err:.3e} after {MAX_INTERVALS} intervals on [{a}, {b}]"
            )));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureNonConvergence(format!("interval collapsed near {mid}")));
        }
        for (t, v) in total.iter_mut().zip(&worst.val) {
            *t -= v;
        }
        err -= worst.err;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let e = gk15(&mut f, lo, hi, &mut buf, &mut kv, &mut gv);
            for i in 0..dim {
                total[i] += kv[i];
            }
            err += e;
            heap.push(Piece { err: e, a: lo, b: hi, val: kv.clone() });
        }
        err = err.max(0.0);
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let q = integrate_vec(|x, out| out[0] = f(x), 1, a, b, breaks, abs_tol, rel_tol)?;
    Ok((q.value[0], q.error))
}

/// Composite Simpson rule with `n` (even) subintervals.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n.is_multiple_of(2), "Simpson needs an even number of subintervals");
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
