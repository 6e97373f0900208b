//! Pseudospectral simulation of the two-dimensional Boussinesq system with
//! fractional dissipation on a periodic square, and numerical checks of the
//! a priori estimates that control it.
//!
//! The equations, in vorticity form, are
//!
//! ```text
//! ∂_t ω + u·∇ω + ν Λ^α ω = ∂_1 θ,    u = ∇⊥Δ^{-1} ω,
//! ∂_t θ + u·∇θ + κ Λ^β θ = 0,
//! ```
//!
//! with `Λ = (-Δ)^{1/2}`. Most of the analysis runs through the combined
//! quantity `G = ω - R_α θ`, `R_α = Λ^{-α} ∂_1`.

pub mod app;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod lp_besov;
pub mod monitors;
pub mod oss;
pub mod solver;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
pub use field::{PhysicalField, SpectralField};
pub use grid::{FlowParams, GridSpec};
