//! Spectral analysis of the two-dimensional operator
//!
//! ```text
//! H = -d²/dx² + (1/2)(-d²/dy² + y²) + (β/y) δ'(x)
//! ```
//!
//! where the δ′ term is the interface condition
//! `Ψ(0+,y) − Ψ(0−,y) = (β/y) ∂ₓΨ(0+,y)`, `∂ₓΨ(0+,y) = ∂ₓΨ(0−,y)`.
//!
//! Expanding in the oscillator basis reduces the eigenvalue problem to a
//! three-term recurrence in the level index. The crate provides
//!
//! - [`hermite`]: normalized Hermite functions,
//! - [`jacobi`]: finite Jacobi matrices, Sturm counting and bisection,
//! - [`solver`]: the discrete spectrum below `1/2` for `β > 2√2` via a
//!   backward minimal-solution shooting method, plus eigenfunction sampling,
//! - [`forms`]: closed-form quadratic-form evaluation on exponential trial states,
//! - [`asymptotics`]: leading-order laws for both coupling limits,
//! - [`verify`]: the invariant suite behind the `verify` subcommand.
//!
//! Batch work (Λ scans, β grids, random sweeps) runs on rayon when the
//! `parallel` feature is on and falls back to plain iteration otherwise.

pub mod asymptotics;
pub mod error;
pub mod forms;
pub mod hermite;
pub mod jacobi;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use par::Execution;
pub use solver::{CouplingParams, Regime};
