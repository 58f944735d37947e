//! Commutant dimension of a set of matrices, by two independent routes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{self, CMat, C64};

const REL_TOL: f64 = 1e-10;

/// Dimension of `{X : V X = X V for all V}` from the null space of the
/// stacked linear system `(1 (x) V - V^T (x) 1) vec(X) = 0`.
pub fn commutant_dimension(set: &[CMat]) -> Result<usize> {
    let Some(first) = set.first() else { return Ok(0) };
    let d = first.nrows();
    if set.iter().all(|v| linalg::fro(v) == 0.0) {
        return Ok(d * d);
    }
    let id = linalg::eye(d);
    let blocks: Vec<CMat> = set
        .iter()
        .map(|v| linalg::kron(&id, v) - linalg::kron(&linalg::transpose(v), &id))
        .collect();
    let dd = d * d;
    let stacked = CMat::from_fn(blocks.len() * dd, dd, |i, j| blocks[i / dd][(i % dd, j)]);
    Ok(linalg::null_space(&stacked, REL_TOL)?.ncols())
}

pub fn is_adjoint_closed(set: &[CMat]) -> bool {
    set.iter().all(|v| {
        let va = linalg::adjoint(v);
        let s = linalg::fro(v).max(1.0);
        set.iter().any(|w| linalg::fro(&(w - &va)) <= 1e-12 * s)
    })
}

fn inner(a: &CMat, b: &CMat) -> C64 {
    linalg::trace(&(a.adjoint() * b))
}

/// Orthonormal (Hilbert-Schmidt) basis of the unital *-algebra generated by `set`.
fn generated_algebra(set: &[CMat]) -> Vec<CMat> {
    let d = set[0].nrows();
    let mut gens: Vec<CMat> = Vec::new();
    for v in set {
        gens.push(v.clone());
        gens.push(linalg::adjoint(v));
    }
    let mut basis: Vec<CMat> = Vec::new();
    let add = |basis: &mut Vec<CMat>, m: CMat| -> bool {
        let n0 = linalg::fro(&m);
        if n0 == 0.0 {
            return false;
        }
        let mut w = m;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = inner(b, &w);
                w = &w - linalg::scale(b, p);
            }
        }
        let n = linalg::fro(&w);
        if n <= 1e-9 * n0 {
            return false;
        }
        basis.push(linalg::scale(&w, linalg::r(1.0 / n)));
        true
    };
    add(&mut basis, linalg::eye(d));
    let mut frontier = 0;
    while frontier < basis.len() && basis.len() < d * d {
        let b = basis[frontier].clone();
        for g in &gens {
            add(&mut basis, g * &b);
        }
        frontier += 1;
    }
    basis
}

/// Commutant dimension of the *-algebra generated by `set`, computed by
/// block-diagonalizing a random self-adjoint element of that algebra and
/// solving the commutation constraints within its eigenspaces.
///
/// Agrees with [`commutant_dimension`] whenever `set` is closed under adjoints.
pub fn commutant_dimension_blockwise(set: &[CMat], seed: u64) -> Result<usize> {
    let Some(first) = set.first() else { return Ok(0) };
    let d = first.nrows();
    let algebra = generated_algebra(set);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = linalg::zeros(d, d);
    for b in &algebra {
        let z = linalg::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        h += linalg::scale(b, z);
    }
    let h = linalg::hermitian_part(&h);
    let (w, u) = linalg::eigh(&h)?;
    let spread = w.last().unwrap() - w[0];
    let tol = 1e-8 * spread.max(1.0);
    let mut spaces: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..d {
        if w[i] - w[i - 1] > tol {
            spaces.push(vec![i]);
        } else {
            spaces.last_mut().unwrap().push(i);
        }
    }
    // Parametrize X = sum_s U_s Y_s U_s^* with Y_s free on each eigenspace.
    let mut params: Vec<CMat> = Vec::new();
    for s in &spaces {
        for &a in s {
            for &b in s {
                let ua = CMat::from_fn(d, 1, |i, _| u[(i, a)]);
                let ub = CMat::from_fn(d, 1, |i, _| u[(i, b)]);
                params.push(&ua * ub.adjoint());
            }
        }
    }
    let mut gens: Vec<CMat> = Vec::new();
    for v in set {
        gens.push(v.clone());
        gens.push(linalg::adjoint(v));
    }
    let dd = d * d;
    let np = params.len();
    let mut system = linalg::zeros(gens.len() * dd, np);
    for (p, x) in params.iter().enumerate() {
        for (g, v) in gens.iter().enumerate() {
            let c = linalg::commutator(v, x);
            for i in 0..d {
                for j in 0..d {
                    system[(g * dd + i + j * d, p)] = c[(i, j)];
                }
            }
        }
    }
    if system.norm_max() == 0.0 {
        return Ok(np);
    }
    Ok(linalg::null_space(&system, REL_TOL)?.ncols())
}
