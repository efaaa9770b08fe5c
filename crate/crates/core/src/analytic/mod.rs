//! Closed-form oracles: Bessel functions, the Jüttner equilibrium, transition
//! kernels, radial eigenfunctions and spherical harmonics.

pub mod bessel;
pub mod eigen;
pub mod juttner;
pub mod kernels;
pub mod quad;

pub use bessel::{bessel_k, bessel_k_integral, bessel_k_scaled};
pub use eigen::{eigen_residual, eigen_residual_with, eigenfunction_g, spherical_harmonic, EigenmodeIndex};
pub use juttner::{
    juttner_pdf_alpha, measure_integrals, sample_juttner, JuttnerMarginal, JuttnerParams, JuttnerSampler, Measure,
    MeasureIntegrals,
};
pub use kernels::{
    chapman_kolmogorov, heat_kernel, heat_kernel_shared_constant, kernel_pde_residual, radial_cdf_table,
    radial_marginal, KernelQuery, KernelVariant, PhotonRadialTerm,
};
pub use quad::TabulatedCdf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
