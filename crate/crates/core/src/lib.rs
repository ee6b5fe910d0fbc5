//! Numerical spectral toolkit for the operator −4Δ + R on compact manifolds
//! with isolated conical singularities.
//!
//! The manifold is a warped product g = dr² + φ(r)² h₀ over a cross-section
//! (N, h₀). Separation of variables over the eigenmodes μ_i of −4Δ_{h₀} + R_{h₀}
//! reduces everything to singular Sturm–Liouville problems in r with
//! inverse-square potentials; the crates here discretize those problems with a
//! Friedrichs-selecting boundary condition, assemble global spectra, evaluate
//! the λ-functional (lowest eigenvalue of −4Δ + R, with ground state u = e^{−f/2}),
//! verify closed-form mode solutions and tip asymptotics, and monitor λ along
//! rotationally symmetric Ricci flow.

pub mod asymptotics;
pub mod cross_section;
pub mod error;
pub mod geometry;
pub mod lambda_variation;
pub mod radial_modes;
pub mod ricci_flow;
pub mod special_fn;
pub mod spectrum;
pub mod tridiag_eig;
pub mod weighted_sobolev;

pub use error::{Error, Result};
