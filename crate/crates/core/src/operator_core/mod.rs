//! Atomic model and superoperator algebra.

mod atom;
mod density;
mod pump;
mod superop;

pub use atom::{
    atomic_lindbladian, block_diag_projection, bohr_spectrum, decompose_atom, gibbs_state,
    spectral_projection, AtomSpec, BohrIndex, Level,
};
pub use density::DensityMatrix;
pub use pump::{validate_pump, PumpOperator};
pub use superop::{multiplication_superops, MultiplicationOps, Superoperator};
