//! Exact and first-order adiabatic dynamics of a driven Ising chain with
//! local dephasing.
//!
//! The chain obeys `dρ/dt = −i[H(t), ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`
//! with `L_k = √γ n_k` and
//! `H(t) = Σ_k [Δ n_k + Ω(t) σ_k^x] + ½ Σ_km V_km n_k n_m`.
//! A pulse `Ω(t) = g(t/T)/T` of duration `T` drives it, and everything is
//! parametrized by `s = t/T`.
//!
//! * [`exact`] integrates the master equation.
//! * [`spectral`] exposes the analytic eigen-decomposition of the rotating
//!   frame generator.
//! * [`adiabatic`] builds the first-order generator `𝒜(s)` and the maps
//!   derived from it.
//! * [`observables`] evaluates populations, coherences and distances.

pub mod adiabatic;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod ode;
pub mod pulse;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMatrix, DensityMatrix};
pub use model::{Axis, ClassicalConfig, ClassicalMixture, SpinChainModel};
pub use pulse::PulseProfile;
