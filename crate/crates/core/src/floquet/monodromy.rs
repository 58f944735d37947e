use serde::Serialize;

use crate::error::Result;
use crate::evolution::{propagator, GeneratorBundle};
use crate::linalg::{self, C64};
use crate::operator_core::Superoperator;

use super::FloquetSpectrum;

/// One-period propagator `tau_{T,0}`.
pub fn monodromy(bundle: &GeneratorBundle, rtol: f64) -> Result<Superoperator> {
    propagator(bundle, 0.0, bundle.period(), rtol)
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyMatch {
    /// Largest matched distance `|eig(tau) - exp(T mu)|`.
    pub max_error: f64,
    pub monodromy_eigenvalues: Vec<(f64, f64)>,
    pub floquet_multipliers: Vec<(f64, f64)>,
    /// Howland eigenvalues selected as one representative per Floquet exponent.
    pub selected: usize,
    pub expected: usize,
}

/// Chooses one copy of each Floquet exponent: the interior eigenvector whose
/// weight-averaged mode falls in a unit window, with the window edge placed
/// as far as possible from every center.
fn representatives(spec: &FloquetSpectrum) -> Vec<C64> {
    let idx: Vec<usize> = (0..spec.eigenvalues.len()).filter(|&j| spec.is_interior(j)).collect();
    let fracs: Vec<f64> = idx.iter().map(|&j| spec.centers[j].rem_euclid(1.0)).collect();
    let mut best = (0.0, -1.0);
    for s in 0..64 {
        let a = s as f64 / 64.0;
        let sep = fracs.iter().map(|&f| {
            let d = (f - a).rem_euclid(1.0);
            d.min(1.0 - d)
        });
        let sep = sep.fold(f64::INFINITY, f64::min);
        if sep > best.1 {
            best = (a, sep);
        }
    }
    let lo = best.0;
    idx.into_iter()
        .filter(|&j| spec.centers[j] >= lo && spec.centers[j] < lo + 1.0)
        .map(|j| spec.eigenvalues[j])
        .collect()
}

/// Hungarian-matched comparison of the monodromy spectrum with `exp(T mu)`
/// for the Howland eigenvalues `mu` (state picture).
pub fn monodromy_match(tau: &Superoperator, spec: &FloquetSpectrum) -> Result<MonodromyMatch> {
    let period = 2.0 * std::f64::consts::PI / spec.omega;
    let w = tau.eigenvalues()?;
    let reps = representatives(spec);
    let mult: Vec<C64> = reps.iter().map(|&mu| (mu * period).exp()).collect();
    let expected = w.len();
    let max_error = if mult.len() == expected { linalg::matched_distance(&w, &mult) } else { f64::INFINITY };
    let pairs = |v: &[C64]| v.iter().map(|z| (z.re, z.im)).collect();
    Ok(MonodromyMatch {
        max_error,
        monodromy_eigenvalues: pairs(&w),
        floquet_multipliers: pairs(&mult),
        selected: mult.len(),
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{build_howland, floquet_spectrum, tests::bundle, Picture};

    #[test]
    fn resonant_free_atom_has_trivial_monodromy() {
        let b = bundle(0.1, 0.0).with_couplings(0.0, 0.0);
        let m = monodromy(&b, 1e-12).unwrap();
        assert!((&m - &Superoperator::identity(2)).norm() < 1e-9);
    }

    #[test]
    fn unpumped_monodromy_is_exponential() {
        let b = bundle(0.1, 0.0);
        let m = monodromy(&b, 1e-12).unwrap();
        let e = b.static_part().exp(b.period()).unwrap();
        assert!((&m - &e).norm() < 1e-8);
    }

    #[test]
    fn pumped_spectra_agree() {
        let b = bundle(0.1, 0.006);
        let m = monodromy(&b, 1e-12).unwrap();
        let spec = floquet_spectrum(&build_howland(&b, 10, Picture::State).unwrap()).unwrap();
        let rep = monodromy_match(&m, &spec).unwrap();
        assert_eq!(rep.selected, rep.expected);
        assert!(rep.max_error <= 1e-6, "{}", rep.max_error);
    }
}
