use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Validated density matrix: Hermitian and unit trace to `1e-12`, smallest
/// eigenvalue at least `-1e-9`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    rho: CMat,
}

impl DensityMatrix {
    pub fn new(rho: CMat) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::DimensionMismatch { expected: rho.nrows(), found: rho.ncols() });
        }
        let herm = linalg::hermitian_deviation(&rho);
        if herm > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("Hermiticity defect {herm:.3e}")));
        }
        let tr = linalg::trace(&rho);
        if (tr - linalg::ONE).norm() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min = linalg::min_eigh(&rho)?;
        if min < -1e-9 {
            return Err(Error::InvalidDensityMatrix(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(Self { rho })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { rho: linalg::scale(&linalg::eye(d), linalg::r(1.0 / d as f64)) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn into_matrix(self) -> CMat {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.rho * &self.rho)).re
    }
}
