//! Transfer-matrix iteration, spectra and pseudospectra for operator-growth models.
//!
//! The crate builds the transfer matrices of a random-circuit operator-spreading model
//! (open and periodic boundaries, a biased random walk and several Toeplitz variants),
//! iterates them in exact or high-precision arithmetic, and compares observed
//! relaxation rates against spectral gaps and pseudospectral edges.

pub mod analysis;
pub mod closedform;
pub mod error;
pub mod numerics;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use analysis::{CompareReport, OrderingVerdict, PairKind, RateProfile};
pub use numerics::{Backend, ComplexScalar, Scalar};
pub use transfer::{Boundary, DecaySeries, ModelParams, Rates, TransferMatrix, VectorPair};
