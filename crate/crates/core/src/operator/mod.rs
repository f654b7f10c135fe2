//! Operator data, grids, fields, and discrete operator applications.

pub mod apply;
pub mod coeff;
pub mod field;
pub mod grid;
pub(crate) mod kernels;
pub mod spec;
pub mod validate;

pub use apply::{apply_k_split, apply_lower_order, apply_p, apply_p_tilde, apply_p_tilde0, apply_p_unchecked};
pub use coeff::{DiffusionCoeff, ScalarCoeff};
pub use field::{Field, SliceField, Space};
pub use grid::GridSpec;
pub use spec::OperatorSpec;
pub use validate::validate_assumptions;
