//! Form factors, thermal spectral densities and the integrals built from them.

mod analyticity;
mod form_factor;
mod pv;
pub mod quadrature;

pub use analyticity::{admissible_strip_width, check_strip_analyticity, line_integral, strip_integrand, AnalyticityReport};
pub use form_factor::{
    check_orthogonality, effective_beta, g_sharp, glued_g, l2_inner, logistic, rate_coefficient,
    spectral_density, FormFactor, Term,
};
pub use pv::{pv_coefficient, pv_estimate, PvEstimate};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Reservoir data: temperature, coupling strength, form factors and the
/// atomic coupling matrices `Q_l` (one per form factor).
#[derive(Clone, Debug)]
pub struct ReservoirSpec {
    pub beta: f64,
    pub lambda: f64,
    pub form_factors: Vec<FormFactor>,
    pub couplings: Vec<CMat>,
}

impl ReservoirSpec {
    /// Validates shapes, that the coupling family is closed under adjoints,
    /// and that the form factors are pairwise orthogonal.
    pub fn new(beta: f64, lambda: f64, form_factors: Vec<FormFactor>, couplings: Vec<CMat>) -> Result<Self> {
        let beta = effective_beta(beta)?;
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("coupling must be finite".into()));
        }
        if form_factors.is_empty() || form_factors.len() != couplings.len() {
            return Err(Error::DimensionMismatch { expected: form_factors.len().max(1), found: couplings.len() });
        }
        let d = couplings[0].nrows();
        for q in &couplings {
            if q.nrows() != d || q.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: q.nrows() });
            }
        }
        for (l, q) in couplings.iter().enumerate() {
            let qa = linalg::adjoint(q);
            let scale = linalg::fro(q).max(1.0);
            if !couplings.iter().any(|p| linalg::fro(&(p - &qa)) <= 1e-12 * scale) {
                return Err(Error::InvalidParameter(format!("the adjoint of coupling {l} is missing from the family")));
            }
        }
        check_orthogonality(&form_factors)?;
        Ok(Self { beta, lambda, form_factors, couplings })
    }

    pub fn dim(&self) -> usize {
        self.couplings[0].nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, unit};

    #[test]
    fn adjoint_closure_is_enforced() {
        let ff = FormFactor::single(1.0, 1, 1.0).unwrap();
        let sx = &unit(2, 0, 1) + &unit(2, 1, 0);
        assert!(ReservoirSpec::new(1.0, 0.1, vec![ff.clone()], vec![sx]).is_ok());
        let up = unit(2, 1, 0);
        assert!(ReservoirSpec::new(1.0, 0.1, vec![ff.clone()], vec![up]).is_err());
        let g = FormFactor::new(vec![Term { weight: c(1.0, 0.0), exponent_p: 1, decay_c: 2.0 }]).unwrap();
        let r = ReservoirSpec::new(1.0, 0.1, vec![ff, g], vec![unit(2, 0, 1), unit(2, 1, 0)]);
        assert!(matches!(r, Err(Error::NonOrthogonalFamily { .. })));
    }

    #[test]
    fn zero_temperature_parameter_is_regularized() {
        let ff = FormFactor::single(1.0, 1, 1.0).unwrap();
        let sx = &unit(2, 0, 1) + &unit(2, 1, 0);
        let r = ReservoirSpec::new(0.0, 0.1, vec![ff], vec![sx]).unwrap();
        assert_eq!(r.beta, 1e-12);
    }
}
