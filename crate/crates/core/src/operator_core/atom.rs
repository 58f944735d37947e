use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

use super::density::DensityMatrix;
use super::superop::Superoperator;

/// One clustered eigenlevel of the atomic Hamiltonian.
#[derive(Clone, Debug)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: usize,
    pub projection: CMat,
}

/// Atomic Hamiltonian together with its clustered spectral decomposition.
#[derive(Clone, Debug)]
pub struct AtomSpec {
    h_at: CMat,
    levels: Vec<Level>,
    omega: f64,
    cluster_tol: f64,
}

impl AtomSpec {
    /// Diagonal Hamiltonian with the given level energies and degeneracies.
    pub fn from_levels(energies: &[f64], degeneracies: &[usize]) -> Result<Self> {
        if energies.len() != degeneracies.len() {
            return Err(Error::DimensionMismatch { expected: energies.len(), found: degeneracies.len() });
        }
        let diag: Vec<f64> = energies
            .iter()
            .zip(degeneracies)
            .flat_map(|(&e, &n)| std::iter::repeat_n(e, n))
            .collect();
        decompose_atom(&linalg::real_diag(&diag), None)
    }

    pub fn dim(&self) -> usize {
        self.h_at.nrows()
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn projection(&self, k: usize) -> &CMat {
        &self.levels[k].projection
    }

    /// Hamiltonian as supplied.
    pub fn h_at(&self) -> &CMat {
        &self.h_at
    }

    /// `sum_k E_k P_k`, the Hamiltonian rebuilt from the clustered levels.
    pub fn h_levels(&self) -> CMat {
        let d = self.dim();
        self.levels
            .iter()
            .fold(linalg::zeros(d, d), |acc, l| acc + linalg::scale(&l.projection, linalg::r(l.energy)))
    }

    /// Pump frequency, `E_N - E_1` unless overridden.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// Overrides the pump frequency; detuning from `E_N - E_1` is logged.
    pub fn with_pump_frequency(mut self, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("pump frequency must be positive, got {omega}")));
        }
        let natural = self.levels.last().unwrap().energy - self.levels[0].energy;
        if (omega - natural).abs() > 1e-12 * natural {
            log::warn!("pump frequency {omega} is detuned from E_N - E_1 = {natural}");
        }
        self.omega = omega;
        Ok(self)
    }

    /// Bohr-frequency tolerance `1e-9 * max |E|`.
    pub fn bohr_tol(&self) -> f64 {
        1e-9 * self.levels.iter().map(|l| l.energy.abs()).fold(0.0, f64::max)
    }
}

/// Diagonalizes `h_at` and groups eigenvalues into levels separated by more
/// than `cluster_tol` (default `1e-8 * ||h_at||`).
pub fn decompose_atom(h_at: &CMat, cluster_tol: Option<f64>) -> Result<AtomSpec> {
    if h_at.nrows() != h_at.ncols() {
        return Err(Error::DimensionMismatch { expected: h_at.nrows(), found: h_at.ncols() });
    }
    let deviation = linalg::hermitian_deviation(h_at);
    if deviation > 1e-12 * linalg::fro(h_at).max(1.0) {
        return Err(Error::NonHermitian { deviation });
    }
    let (w, v) = linalg::eigh(h_at)?;
    let norm = w.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = cluster_tol.unwrap_or(1e-8 * norm).max(f64::MIN_POSITIVE);

    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..w.len() {
        let gap = w[i] - w[i - 1];
        if gap > tol / 2.0 && gap <= 2.0 * tol {
            return Err(Error::ClusterAmbiguity(format!(
                "eigenvalue gap {gap:.3e} is within a factor 2 of the tolerance {tol:.3e}"
            )));
        }
        if gap > tol {
            clusters.push(vec![i]);
        } else {
            clusters.last_mut().unwrap().push(i);
        }
    }
    if clusters.len() < 2 {
        return Err(Error::ScalarHamiltonian);
    }

    let d = h_at.nrows();
    let levels: Vec<Level> = clusters
        .iter()
        .map(|idx| {
            let energy = idx.iter().map(|&i| w[i]).sum::<f64>() / idx.len() as f64;
            let basis = CMat::from_fn(d, idx.len(), |a, b| v[(a, idx[b])]);
            Level { energy, degeneracy: idx.len(), projection: &basis * basis.adjoint() }
        })
        .collect();
    let omega = levels.last().unwrap().energy - levels[0].energy;
    let atom = AtomSpec { h_at: h_at.clone(), levels, omega, cluster_tol: tol };
    let recon = linalg::fro(&(h_at - atom.h_levels()));
    if recon > tol {
        return Err(Error::ClusterAmbiguity(format!(
            "reconstruction error {recon:.3e} exceeds the tolerance {tol:.3e}"
        )));
    }
    Ok(atom)
}

/// Bohr frequencies `E_j - E_k` with their level-pair sets (0-based labels).
#[derive(Clone, Debug)]
pub struct BohrIndex {
    entries: Vec<(f64, Vec<(usize, usize)>)>,
    tol: f64,
}

impl BohrIndex {
    /// Entries sorted by increasing frequency.
    pub fn entries(&self) -> &[(f64, Vec<(usize, usize)>)] {
        &self.entries
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn pairs(&self, eps: f64) -> Option<&[(usize, usize)]> {
        self.entries
            .iter()
            .find(|(e, _)| (e - eps).abs() <= self.tol)
            .map(|(_, p)| p.as_slice())
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

pub fn bohr_spectrum(atom: &AtomSpec) -> Result<BohrIndex> {
    let e = atom.energies();
    let tol = atom.bohr_tol();
    let mut diffs: Vec<(f64, (usize, usize))> = Vec::new();
    for j in 0..e.len() {
        for k in 0..e.len() {
            diffs.push((e[j] - e[k], (j, k)));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut groups: Vec<Vec<(f64, (usize, usize))>> = vec![vec![diffs[0]]];
    for w in diffs.windows(2) {
        let gap = w[1].0 - w[0].0;
        if gap > tol && gap <= 100.0 * tol {
            return Err(Error::ClusterAmbiguity(format!(
                "Bohr frequencies {} and {} are nearly degenerate",
                w[0].0, w[1].0
            )));
        }
        if gap > tol {
            groups.push(vec![w[1]]);
        } else {
            groups.last_mut().unwrap().push(w[1]);
        }
    }
    let entries = groups
        .into_iter()
        .map(|g| {
            let has_diag = g.iter().any(|(_, (j, k))| j == k);
            let eps = if has_diag { 0.0 } else { g.iter().map(|x| x.0).sum::<f64>() / g.len() as f64 };
            let mut pairs: Vec<(usize, usize)> = g.into_iter().map(|x| x.1).collect();
            pairs.sort();
            (eps, pairs)
        })
        .collect();
    Ok(BohrIndex { entries, tol })
}

/// `L_at = -i[H_at, .]`, built from the clustered levels.
pub fn atomic_lindbladian(atom: &AtomSpec) -> Superoperator {
    Superoperator::hamiltonian(&atom.h_levels())
}

/// `A -> sum_{(j,k) in t_eps} P_j A P_k`.
pub fn spectral_projection(atom: &AtomSpec, bohr: &BohrIndex, eps: f64) -> Result<Superoperator> {
    let pairs = bohr.pairs(eps).ok_or(Error::NotABohrFrequency(eps))?;
    let d = atom.dim();
    Ok(pairs.iter().fold(Superoperator::zero(d), |acc, &(j, k)| {
        &acc + &Superoperator::sandwich(atom.projection(j), atom.projection(k))
    }))
}

/// Projection onto block-diagonal matrices, `A -> sum_k P_k A P_k`.
pub fn block_diag_projection(atom: &AtomSpec) -> Superoperator {
    let d = atom.dim();
    atom.levels().iter().fold(Superoperator::zero(d), |acc, l| {
        &acc + &Superoperator::sandwich(&l.projection, &l.projection)
    })
}

/// `exp(-beta H) / Tr exp(-beta H)`.
pub fn gibbs_state(atom: &AtomSpec, beta: f64) -> Result<DensityMatrix> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("inverse temperature must be >= 0, got {beta}")));
    }
    let e0 = atom.levels()[0].energy;
    let weights: Vec<f64> = atom.levels().iter().map(|l| (-beta * (l.energy - e0)).exp()).collect();
    let z: f64 = atom.levels().iter().zip(&weights).map(|(l, w)| w * l.degeneracy as f64).sum();
    let d = atom.dim();
    let rho = atom
        .levels()
        .iter()
        .zip(&weights)
        .fold(linalg::zeros(d, d), |acc, (l, w)| acc + linalg::scale(&l.projection, linalg::r(w / z)));
    DensityMatrix::new(rho)
}
