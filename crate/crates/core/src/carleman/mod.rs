//! Test-function generation, weighted seminorms, and numerical verification
//! of the weighted energy inequalities, their technical lemmas, and the
//! decay consequence on simulated solutions.

pub mod checks;
pub mod decay;
pub mod gen;
pub mod params;
pub mod seminorms;
pub mod sweep;

pub use checks::{verify_global, verify_identities, verify_lemma1, verify_lemma2, verify_local};
pub use decay::{chi_profile, verify_solution_decay, DecayCheck};
pub use gen::{gen_field, gen_slice, gen_test_function, GenOptions, TestFnKind};
pub use params::CarlemanParams;
pub use seminorms::{weighted_seminorms_field, weighted_seminorms_slice, SeminormBundle};
pub use sweep::{alpha_sweep, SweepConfig, SweepMode};
