//! Dense complex linear algebra on top of `faer`.
//!
//! Matrices are vectorized by stacking columns: entry `(i, j)` of a `d x d`
//! matrix sits at index `i + j*d`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{Error, Result};

pub type C64 = faer::c64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(n: usize, m: usize) -> CMat {
    CMat::zeros(n, m)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn diag(entries: &[C64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
}

pub fn real_diag(entries: &[f64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| if i == j { r(entries[i]) } else { ZERO })
}

/// `|i><j|` in dimension `n`.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    CMat::from_fn(n, n, |a, b| if a == i && b == j { ONE } else { ZERO })
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

/// `sum_k coeff_k * mat_k`; all matrices must share a shape.
pub fn lincomb(terms: &[(C64, &CMat)]) -> CMat {
    let (n, m) = (terms[0].1.nrows(), terms[0].1.ncols());
    CMat::from_fn(n, m, |i, j| {
        terms.iter().fold(ZERO, |acc, (s, a)| acc + *s * a[(i, j)])
    })
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).fold(ZERO, |acc, i| acc + a[(i, i)])
}

/// Frobenius norm.
pub fn fro(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.norm_max()
}

/// Induced 1-norm (maximum column sum).
pub fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn hermitian_deviation(a: &CMat) -> f64 {
    fro(&(a - a.adjoint()))
}

pub fn hermitian_part(a: &CMat) -> CMat {
    scale(&(a + a.adjoint()), r(0.5))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Column-stacking vectorization, returned as an `n*m x 1` matrix.
pub fn vec_of(a: &CMat) -> CMat {
    let n = a.nrows();
    CMat::from_fn(n * a.ncols(), 1, |k, _| a[(k % n, k / n)])
}

pub fn unvec(v: &CMat, d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| v[(i + j * d, 0)])
}

pub fn unvec_slice(v: &[C64], d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| v[i + j * d])
}

pub fn column(a: &CMat, j: usize) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

/// General eigendecomposition `A = V diag(w) V^{-1}`.
pub fn eig(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let e = a
        .eigen()
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
    let w: Vec<C64> = e.S().column_vector().iter().copied().collect();
    let v = e.U().to_owned();
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigensolverFailure("non-finite eigenvalue".into()));
    }
    Ok((w, v))
}

pub fn eigvals(a: &CMat) -> Result<Vec<C64>> {
    let w = a
        .eigenvalues()
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigensolverFailure("non-finite eigenvalue".into()));
    }
    Ok(w)
}

/// Eigendecomposition of the Hermitian part of `a`, eigenvalues ascending.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let h = hermitian_part(a);
    let e = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
    let w = e.S().column_vector().iter().map(|z| z.re).collect();
    Ok((w, e.U().to_owned()))
}

pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    hermitian_part(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))
}

pub fn min_eigh(a: &CMat) -> Result<f64> {
    Ok(eigvalsh(a)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))
}

/// Orthonormal basis (as columns) of the numerical kernel of `a`.
///
/// A singular value counts as zero when it is at most `rel_tol * s_max`.
pub fn null_space(a: &CMat, rel_tol: f64) -> Result<CMat> {
    let svd = a
        .svd()
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > rel_tol * smax.max(f64::MIN_POSITIVE)).count();
    let v = svd.V();
    let n = a.ncols();
    Ok(CMat::from_fn(n, n - rank, |i, j| v[(i, rank + j)]))
}

/// Solves `A X = B` by partial-pivoting LU.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let x = a.partial_piv_lu().solve(b);
    if (0..x.nrows()).any(|i| (0..x.ncols()).any(|j| !x[(i, j)].re.is_finite() || !x[(i, j)].im.is_finite())) {
        return Err(Error::EigensolverFailure("singular linear system".into()));
    }
    Ok(x)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &eye(a.nrows()))
}

/// `f(A) = V diag(f(w)) V^{-1}` for a diagonalizable `A`.
pub fn matrix_function(a: &CMat, f: impl Fn(C64) -> C64) -> Result<CMat> {
    let (w, v) = eig(a)?;
    let fw: Vec<C64> = w.into_iter().map(f).collect();
    let vinv = inverse(&v)?;
    Ok(&v * diag(&fw) * vinv)
}

/// `f(A)` for Hermitian `A` through its spectral decomposition.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (w, v) = eigh(a)?;
    let fw: Vec<f64> = w.into_iter().map(f).collect();
    Ok(&v * real_diag(&fw) * v.adjoint())
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::InvalidParameter("expm of a non-finite matrix".into()));
    }
    let theta13 = 5.371920351148152;
    let s = if norm > theta13 { (norm / theta13).log2().ceil() as i32 } else { 0 };
    let a = scale(a, r(2f64.powi(-s)));
    let id = eye(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| r(PADE13[k]);
    let u_inner = lincomb(&[(b(13), &a6), (b(11), &a4), (b(9), &a2)]);
    let u_tail = lincomb(&[(b(7), &a6), (b(5), &a4), (b(3), &a2), (b(1), &id)]);
    let u = &a * (&a6 * u_inner + u_tail);
    let v_inner = lincomb(&[(b(12), &a6), (b(10), &a4), (b(8), &a2)]);
    let v_tail = lincomb(&[(b(6), &a6), (b(4), &a4), (b(2), &a2), (b(0), &id)]);
    let v = &a6 * v_inner + v_tail;
    let mut x = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns `assignment[row] = col`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Largest pointwise distance after optimally matching two equally sized
/// point sets in the complex plane.
pub fn matched_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let assign = hungarian(&cost);
    assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max)
}
