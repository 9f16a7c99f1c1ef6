//! Exact-diagonalization checks of energy-localization bounds for k-local
//! spin Hamiltonians.

pub mod bounds;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod series;
pub mod spectral;
pub mod truncation;

pub use error::{Error, Result};
pub use hamiltonian::{
    assemble, compute_g, compute_lambda, decompose, shift_to_psd, term_set_for_operator,
    InteractionTerm, RegionDecomposition, SpinModel,
};
pub use linalg::Matrix;
pub use model::{build_lattice, Boundary, Lattice, ModelFamily, ModelSpec};
pub use bounds::{BoundId, BoundParams, BoundReport, GridSpec, Instance, Needs};
pub use harness::{run, RunConfig, RunOptions, RunRecord, Suite};
pub use spectral::{diagonalize, EnergyInterval, SpectralData};
pub use truncation::{TauSetting, Truncated};
