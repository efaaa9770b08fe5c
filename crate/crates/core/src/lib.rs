//! Markovian diffusion of massive particles in special relativity.
//!
//! The velocity of a particle lives on the unit hyperboloid `u0^2 - |u|^2 = 1`,
//! a Riemannian manifold of constant negative curvature. This crate samples the
//! Langevin process driven by an orthonormal-frame lift of 3D white noise,
//! solves the isotropic Fokker-Planck equation on a radial grid, and carries
//! the closed-form results (Jüttner equilibrium, hyperbolic heat kernel,
//! eigenfunctions) the numerics are checked against.
//!
//! Conventions: `c = 1`, unit rest mass, and the generator of force-free
//! motion is `D * Laplace-Beltrami`, so Wiener increments have covariance
//! `2 D dtau` per component and the equilibrium under friction `nu` is
//! Jüttner with `chi = nu / D`.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops read more naturally for small symmetric tensors
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod ensemble;
pub mod fokker_planck;
pub mod geometry;
pub mod langevin;
pub mod lorentz;
pub mod noise;
