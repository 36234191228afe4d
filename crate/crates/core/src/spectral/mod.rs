//! Analytic eigensystems, ε-pseudospectra and analytic pseudospectral curves.

mod banded;
mod eigen;
mod fourier;
mod pseudo;

pub use banded::{sigma_min, BandedC64, BandedLu, SigmaMinOptions};
pub use eigen::{
    extend_to_a, obc_eigensystem, obc_lambda2, pbc_eigensystem, pbc_eigenvalues, pbc_lambda2,
    EigenSource, EigenSystem,
};
pub use fourier::{
    pbc_fourier_block, pbc_fourier_blocks_banded, pbc_fourier_coefficients, pbc_fourier_factors,
    CMat,
};
pub use pseudo::{
    ellipse_distance, obc_pseudo_curve, pbc_pseudo_conjecture, pseudospectrum_grid,
    ConjectureRegion, CurveSamples, GridRegion, PseudoOperator, PseudospectrumField,
};

#[cfg(test)]
mod tests;
