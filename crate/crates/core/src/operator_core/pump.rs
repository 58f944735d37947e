use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

use super::atom::AtomSpec;
use super::superop::Superoperator;

/// Validated pump coupling `H_p = h_p + h_p*` with its Lindbladian `-i[H_p, .]`.
#[derive(Clone, Debug)]
pub struct PumpOperator {
    pub h_p: CMat,
    pub hamiltonian: CMat,
    pub lindbladian: Superoperator,
}

/// Accepts `h_p` iff it maps the ground level into the top level:
/// `||(1 - P_1) h_p*|| <= 1e-10` and `||(1 - P_N) h_p|| <= 1e-10`.
pub fn validate_pump(atom: &AtomSpec, h_p: &CMat) -> Result<PumpOperator> {
    let d = atom.dim();
    if h_p.nrows() != d || h_p.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: h_p.nrows() });
    }
    let id = linalg::eye(d);
    let p1 = atom.projection(0);
    let pn = atom.projection(atom.n_levels() - 1);
    let support = linalg::fro(&((&id - p1) * h_p.adjoint()));
    if support > 1e-10 {
        return Err(Error::PumpSupportViolation(format!(
            "orthogonal complement of the kernel is not inside the ground level (defect {support:.3e})"
        )));
    }
    let range = linalg::fro(&((&id - pn) * h_p));
    if range > 1e-10 {
        return Err(Error::PumpSupportViolation(format!(
            "range is not inside the top level (defect {range:.3e})"
        )));
    }
    let hamiltonian = h_p + h_p.adjoint();
    let lindbladian = Superoperator::hamiltonian(&hamiltonian);
    Ok(PumpOperator { h_p: h_p.clone(), hamiltonian, lindbladian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro, r, unit};

    #[test]
    fn top_to_ground_pump_is_valid() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0, 2.0], &[1, 1, 1]).unwrap();
        let p = validate_pump(&atom, &unit(3, 2, 0)).unwrap();
        assert!(fro(&(&p.hamiltonian - (unit(3, 2, 0) + unit(3, 0, 2)))) == 0.0);
        assert!(fro(&p.lindbladian.adjoint().apply(&linalg::eye(3))) < 1e-15);
    }

    #[test]
    fn wrong_range_is_rejected() {
        let atom = AtomSpec::from_levels(&[0.0, 1.0, 2.0], &[1, 1, 1]).unwrap();
        match validate_pump(&atom, &unit(3, 1, 0)) {
            Err(Error::PumpSupportViolation(msg)) => assert!(msg.contains("range")),
            other => panic!("unexpected {other:?}"),
        }
        match validate_pump(&atom, &unit(3, 2, 1)) {
            Err(Error::PumpSupportViolation(msg)) => assert!(msg.contains("kernel")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_ground_level() {
        let atom = AtomSpec::from_levels(&[0.0, 1.5], &[2, 1]).unwrap();
        let h = linalg::scale(&unit(3, 2, 0), r(0.6)) + linalg::scale(&unit(3, 2, 1), r(0.8));
        let p1 = atom.projection(0);
        let pn = atom.projection(1);
        let id = linalg::eye(3);
        assert!(fro(&((&id - p1) * h.adjoint())) < 1e-12);
        assert!(fro(&((&id - pn) * &h)) < 1e-12);
        assert!(validate_pump(&atom, &h).is_ok());
    }
}
