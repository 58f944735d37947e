use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

/// Linear map on `d x d` matrices, stored as a `d^2 x d^2` matrix acting on
/// column-stacked vectors.
#[derive(Clone, Debug)]
pub struct Superoperator {
    d: usize,
    matrix: CMat,
}

impl Superoperator {
    pub fn from_matrix(d: usize, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: matrix.nrows() });
        }
        Ok(Self { d, matrix })
    }

    pub fn zero(d: usize) -> Self {
        Self { d, matrix: linalg::zeros(d * d, d * d) }
    }

    pub fn identity(d: usize) -> Self {
        Self { d, matrix: linalg::eye(d * d) }
    }

    /// `B -> A B`.
    pub fn left(a: &CMat) -> Self {
        let d = a.nrows();
        Self { d, matrix: linalg::kron(&linalg::eye(d), a) }
    }

    /// `B -> B A`.
    pub fn right(a: &CMat) -> Self {
        let d = a.nrows();
        Self { d, matrix: linalg::kron(&linalg::transpose(a), &linalg::eye(d)) }
    }

    /// `B -> A B A'` for two matrices of equal size.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        Self { d: a.nrows(), matrix: linalg::kron(&linalg::transpose(b), a) }
    }

    /// Hamiltonian part `B -> -i [H, B]`.
    pub fn hamiltonian(h: &CMat) -> Self {
        let comm = &Self::left(h) - &Self::right(h);
        comm.scaled(linalg::c(0.0, -1.0))
    }

    /// Dissipator `B -> V B V* - (V*V B + B V*V)/2`, without a rate.
    pub fn dissipator(v: &CMat) -> Self {
        let vv = v.adjoint() * v;
        let jump = Self::sandwich(v, &linalg::adjoint(v));
        let anti = &Self::left(&vv) + &Self::right(&vv);
        &jump - &anti.scaled(linalg::r(0.5))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn apply(&self, a: &CMat) -> CMat {
        linalg::unvec(&(&self.matrix * linalg::vec_of(a)), self.d)
    }

    /// Adjoint with respect to the Hilbert-Schmidt product.
    pub fn adjoint(&self) -> Self {
        Self { d: self.d, matrix: linalg::adjoint(&self.matrix) }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { d: self.d, matrix: linalg::scale(&self.matrix, s) }
    }

    pub fn norm(&self) -> f64 {
        linalg::fro(&self.matrix)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.norm_max() == 0.0
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        linalg::eigvals(&self.matrix)
    }

    pub fn exp(&self, t: f64) -> Result<Self> {
        Ok(Self { d: self.d, matrix: linalg::expm(&linalg::scale(&self.matrix, linalg::r(t)))? })
    }

    /// Choi matrix `sum_ij |i><j| (x) Phi(|i><j|)`, ordered with the output
    /// factor first.
    pub fn choi(&self) -> CMat {
        let d = self.d;
        let mut out = linalg::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let img = self.apply(&linalg::unit(d, i, j));
                for a in 0..d {
                    for b in 0..d {
                        out[(a * d + i, b * d + j)] = img[(a, b)];
                    }
                }
            }
        }
        out
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator { d: self.d, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator { d: self.d, matrix: &self.matrix - &rhs.matrix }
    }
}

/// Composition: `(a * b)(X) = a(b(X))`.
impl Mul for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: &Superoperator) -> Superoperator {
        Superoperator { d: self.d, matrix: &self.matrix * &rhs.matrix }
    }
}

/// Left, right and commutator superoperators of a fixed matrix.
#[derive(Clone, Debug)]
pub struct MultiplicationOps {
    pub left: Superoperator,
    pub right: Superoperator,
    /// Plain commutator `B -> AB - BA`.
    pub commutator: Superoperator,
    /// Lindbladian form `B -> -i(AB - BA)`.
    pub lindbladian: Superoperator,
}

pub fn multiplication_superops(a: &CMat) -> Result<MultiplicationOps> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let left = Superoperator::left(a);
    let right = Superoperator::right(a);
    let commutator = &left - &right;
    let lindbladian = commutator.scaled(linalg::c(0.0, -1.0));
    Ok(MultiplicationOps { left, right, commutator, lindbladian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, fro, unit};
    use proptest::prelude::*;

    fn mat3(v: &[f64]) -> CMat {
        CMat::from_fn(3, 3, |i, j| c(v[2 * (3 * i + j)], v[2 * (3 * i + j) + 1]))
    }

    #[test]
    fn identity_gives_trivial_ops() {
        let ops = multiplication_superops(&linalg::eye(3)).unwrap();
        assert!(fro(&(ops.left.matrix() - Superoperator::identity(3).matrix())) == 0.0);
        assert!(fro(&(ops.right.matrix() - Superoperator::identity(3).matrix())) == 0.0);
        assert!(ops.commutator.is_zero());
    }

    #[test]
    fn ladder_relation() {
        let a = linalg::real_diag(&[0.0, 1.0]);
        let b = unit(2, 0, 1);
        let ops = multiplication_superops(&a).unwrap();
        let out = ops.commutator.apply(&b);
        assert!(fro(&(&out + &b)) < 1e-15);
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            multiplication_superops(&linalg::zeros(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn left_right_sandwich(va in prop::collection::vec(-1.0f64..1.0, 18), vb in prop::collection::vec(-1.0f64..1.0, 18)) {
            let (a, b) = (mat3(&va), mat3(&vb));
            let ops = multiplication_superops(&a).unwrap();
            let lr = &ops.left * &ops.right;
            let direct = &a * &b * &a;
            prop_assert!(fro(&(lr.apply(&b) - direct)) < 1e-13);
        }

        #[test]
        fn adjoint_is_involutive_and_hs_consistent(va in prop::collection::vec(-1.0f64..1.0, 18), vb in prop::collection::vec(-1.0f64..1.0, 18), vx in prop::collection::vec(-1.0f64..1.0, 18)) {
            let (a, b, x) = (mat3(&va), mat3(&vb), mat3(&vx));
            let l = &Superoperator::sandwich(&a, &b) + &Superoperator::left(&x);
            let back = l.adjoint().adjoint();
            prop_assert!(fro(&(back.matrix() - l.matrix())) == 0.0);
            let lhs = linalg::trace(&(a.adjoint() * l.apply(&b)));
            let rhs = linalg::trace(&(l.adjoint().apply(&a).adjoint() * &b));
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
