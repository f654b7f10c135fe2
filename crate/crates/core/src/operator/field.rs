//! Complex-valued samples on a structured grid.

use ndarray::ArrayD;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::operator::GridSpec;

/// Which representation the degenerate axes are in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Samples of `u(t, v, w)` on the periodic `w` box.
    Physical,
    /// Samples of the discrete transform on the dual `η` lattice
    /// (standard wraparound layout).
    Frequency,
    /// Output of the transform `T`: η-lattice data relabeled as carrying the
    /// invariant frequency `ρ = e^{t B2ᵀ} η`, scaled by `e^{-½ t·tr B2}`.
    InvariantFrequency,
}

/// A full field over `(t, v^m, w^n)`.
///
/// Values are never mutated in place by operator applications; every
/// operation returns a new field.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    values: ArrayD<Complex64>,
    space: Space,
}

impl Field {
    pub fn new(grid: GridSpec, values: ArrayD<Complex64>, space: Space) -> Result<Self> {
        if values.shape() != grid.shape().as_slice() {
            return Err(CoreError::Dimension(format!(
                "field shape {:?} does not match grid shape {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CoreError::NonFinite("field contains NaN or infinite samples".into()));
        }
        Ok(Self { grid, values, space })
    }

    pub fn zeros(grid: GridSpec, space: Space) -> Self {
        let shape = grid.shape();
        Self {
            grid,
            values: ArrayD::zeros(shape),
            space,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Consumes the field, returning its raw values.
    pub fn into_values(self) -> ArrayD<Complex64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.values
    }

    pub(crate) fn set_space(&mut self, space: Space) {
        self.space = space;
    }

    /// Discrete `L²` norm with measure `dt · dv^m · dw^n`; the unitary
    /// transform in `w` preserves it, so the same formula serves both spaces.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (sum * self.grid.dt() * self.grid.cell_volume()).sqrt()
    }

    /// `L²` norm of the time slice `it`, measure `dv^m · dw^n`.
    pub fn slice_l2_norm(&self, it: usize) -> f64 {
        let slab = self.grid.slab_len();
        let flat = self.values.as_slice().expect("fields are standard layout");
        let sum: f64 = flat[it * slab..(it + 1) * slab].iter().map(|z| z.norm_sqr()).sum();
        (sum * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// A time-v slice field `h(t, v)` with no degenerate axes; the object the
/// frequency-local operator acts on.
#[derive(Debug, Clone)]
pub struct SliceField {
    grid: GridSpec,
    values: ArrayD<Complex64>,
}

impl SliceField {
    pub fn new(grid: GridSpec, values: ArrayD<Complex64>) -> Result<Self> {
        if values.shape() != grid.slice_shape().as_slice() {
            return Err(CoreError::Dimension(format!(
                "slice shape {:?} does not match grid slice shape {:?}",
                values.shape(),
                grid.slice_shape()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CoreError::NonFinite("slice field contains NaN or infinite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let shape = grid.slice_shape();
        Self {
            grid,
            values: ArrayD::zeros(shape),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> ArrayD<Complex64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.values
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (sum * self.grid.dt() * self.grid.v_cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_nan_checks() {
        let g = GridSpec::new(1, 1, 1.0, 16, 1.0, 16, 1.0, 16).unwrap();
        let wrong = ArrayD::zeros(vec![16, 16, 8]);
        assert!(Field::new(g.clone(), wrong, Space::Physical).is_err());
        let mut vals = ArrayD::zeros(g.shape());
        vals[[0, 0, 0]] = Complex64::new(f64::NAN, 0.0);
        assert!(Field::new(g.clone(), vals, Space::Physical).is_err());
        let ok = ArrayD::zeros(g.shape());
        assert!(Field::new(g, ok, Space::Physical).is_ok());
    }
}
