use crate::error::{Error, Result};
use crate::linalg;
use crate::operator_core::{DensityMatrix, Superoperator};

const KERNEL_TOL: f64 = 1e-9;

/// Unique normalized kernel element of `l`.
pub fn stationary_state(l: &Superoperator) -> Result<DensityMatrix> {
    let d = l.dim();
    let ns = linalg::null_space(l.matrix(), KERNEL_TOL)?;
    if ns.ncols() != 1 {
        return Err(Error::DegenerateKernel { dim: ns.ncols() });
    }
    let rho = linalg::unvec(&ns, d);
    let tr = linalg::trace(&rho);
    if tr.norm() < 1e-12 {
        return Err(Error::NonPositiveKernel { min_eig: 0.0 });
    }
    let rho = linalg::hermitian_part(&linalg::scale(&rho, linalg::ONE / tr));
    let min_eig = linalg::min_eigh(&rho)?;
    if min_eig < -1e-10 {
        return Err(Error::NonPositiveKernel { min_eig });
    }
    let residual = linalg::fro(&l.apply(&rho));
    if residual > 1e-10 {
        return Err(Error::InvariantViolation(format!("stationary residual {residual:.3e}")));
    }
    DensityMatrix::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro, r, unit};
    use crate::operator_core::{atomic_lindbladian, AtomSpec};

    #[test]
    fn atomic_generator_is_degenerate() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0, 2.5], &[1, 1, 1]).unwrap();
        assert!(matches!(stationary_state(&atomic_lindbladian(&atom)), Err(Error::DegenerateKernel { dim: 3 })));
    }

    #[test]
    fn amplitude_damping_and_scaling() {
        let l = Superoperator::dissipator(&unit(2, 0, 1));
        let rho = stationary_state(&l).unwrap();
        assert!(fro(&(rho.matrix() - unit(2, 0, 0))) < 1e-12);
        let rho3 = stationary_state(&l.scaled(r(3.0))).unwrap();
        assert!(fro(&(rho3.matrix() - rho.matrix())) < 1e-12);
    }
}
