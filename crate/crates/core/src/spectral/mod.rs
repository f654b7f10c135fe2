//! Fourier machinery in the degenerate variables: the unitary transform in
//! `w`, the invariant frequency, the low-frequency region and projection,
//! and the lattice identity checks.

pub mod fft;
pub mod plan;
pub mod region;
pub mod rho;
pub mod verify;

pub use fft::Direction;
pub use plan::{apply_s_r, apply_t, fourier_w, TransformPlan};
pub use region::{FrequencyRegion, Membership};
pub use rho::{invariance_check, rho_map, RhoDirection};
pub use verify::{verify_commutation, verify_conjugation};
