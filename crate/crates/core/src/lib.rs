//! Numerical toolkit for ultraparabolic operators with coupled linear drift.
//!
//! The operator under study is
//!
//! ```text
//! P = ∂t + (B1 v + B2 w)·∇w + div_v(A(t,v) ∇v),   (t,v,w) ∈ (0,T) × R^m × R^n,
//! ```
//!
//! with diffusion only in the `v` variables and a linear drift coupling the
//! degenerate `w` variables. The crate provides:
//!
//! * [`linalg`] — dense matrix kernels: matrix exponentials, the Kalman
//!   controllability matrix and its numerical rank, exact drift characteristics,
//!   and the frequency decay function `G(ρ)` with its sphere minimum `c2`;
//! * [`operator`] — operator data ([`operator::OperatorSpec`]), grids and
//!   fields, discrete application of `P`, its frequency conjugate, and the
//!   skew/self-adjoint split;
//! * [`spectral`] — the Fourier transform in `w`, the invariant frequency
//!   `ρ = e^{tB2ᵀ}η`, the unitary transform `T`, the low-frequency region
//!   `U_R` and the projection `S_R`, plus conjugation/commutation checks;
//! * [`carleman`] — test-function generation, overflow-safe weighted
//!   seminorms, and numerical verification of the weighted energy
//!   inequalities and identities behind the backward-uniqueness argument;
//! * [`jerk`] — the jerk-model error equation: semi-Lagrangian transport plus
//!   implicit diffusion splitting, time reversal, and residual reporting;
//! * [`report`] — the structured pass/fail record shared by all checks.

pub mod carleman;
pub mod error;
pub mod jerk;
pub mod linalg;
pub mod operator;
pub mod report;
pub mod spectral;

pub use error::{CoreError, Result};
pub use report::{CheckStatus, VerificationReport};
