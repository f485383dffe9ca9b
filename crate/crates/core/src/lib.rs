//! Proximity operators of spectral matrix functions and the covariance
//! estimators built on them.
//!
//! The layers, bottom up:
//!
//! * [`symlin`]: symmetric matrices and a Jacobi eigensolver.
//! * [`scalarprox`]: one-dimensional kernels `prox_{γ(φ+ψ)}`.
//! * [`spectralprox`]: those kernels lifted to symmetric matrices, plus
//!   Bregman divergences and proximity operators.
//! * [`splitting`]: Douglas–Rachford for `f − ⟨T,·⟩ + g0 + μ1‖·‖₁`.
//! * [`mm_glasso`]: majorize–minimize for the noisy precision problem.
//! * [`experiments`]: synthetic data, metrics and seeded sampling.
//! * [`cli`]: the `matprox` command line.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod mm_glasso;
pub mod scalarprox;
pub mod spectralprox;
pub mod splitting;
pub mod symlin;

pub use error::{Error, Result};
pub use symlin::SymMatrix;
