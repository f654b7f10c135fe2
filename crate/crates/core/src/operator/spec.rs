//! The operator data `(m, n, B1, B2, A, c, d, λ)` and the standard presets.

use nalgebra::DMatrix;

use crate::error::{CoreError, Result};
use crate::linalg::DriftPair;
use crate::operator::coeff::{DiffusionCoeff, ScalarCoeff};

/// Full data of the operator
/// `P = ∂t + (B1 v + B2 w)·∇w + div_v(A(t,v) ∇v)` together with the
/// lower-order coefficients `c`, `d` and the ellipticity constant `λ > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    drift: DriftPair,
    a: DiffusionCoeff,
    c: ScalarCoeff,
    d: Vec<ScalarCoeff>,
    lambda: f64,
}

impl OperatorSpec {
    pub fn new(drift: DriftPair, a: DiffusionCoeff, c: ScalarCoeff, d: Vec<ScalarCoeff>, lambda: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(CoreError::Validation(format!("lambda must exceed 1, got {lambda}")));
        }
        if d.len() != drift.m() {
            return Err(CoreError::Dimension(format!(
                "d must have one component per diffusive axis: expected {}, got {}",
                drift.m(),
                d.len()
            )));
        }
        if let DiffusionCoeff::ConstantMatrix { entries } = &a {
            let m = drift.m();
            if entries.len() != m || entries.iter().any(|r| r.len() != m) {
                return Err(CoreError::Dimension("diffusion matrix must be m×m".into()));
            }
            for i in 0..m {
                for j in 0..m {
                    if (entries[i][j] - entries[j][i]).abs() > 1e-12 * entries[i][j].abs().max(1.0) {
                        return Err(CoreError::Validation("diffusion matrix must be symmetric".into()));
                    }
                }
            }
        }
        Ok(Self { drift, a, c, d, lambda })
    }

    pub fn drift(&self) -> &DriftPair {
        &self.drift
    }

    pub fn m(&self) -> usize {
        self.drift.m()
    }

    pub fn n(&self) -> usize {
        self.drift.n()
    }

    pub fn a(&self) -> &DiffusionCoeff {
        &self.a
    }

    pub fn c(&self) -> &ScalarCoeff {
        &self.c
    }

    pub fn d(&self) -> &[ScalarCoeff] {
        &self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a_at(&self, t: f64, v: &[f64]) -> DMatrix<f64> {
        self.a.eval(t, v, self.m())
    }

    pub fn c_at(&self, t: f64, v: &[f64]) -> f64 {
        self.c.eval(t, v)
    }

    pub fn d_at(&self, t: f64, v: &[f64]) -> Vec<f64> {
        self.d.iter().map(|coeff| coeff.eval(t, v)).collect()
    }

    /// Heat-type operator: `m = n = 1`, `B1 = B2 = 0`, `A = I`, `c = d = 0`.
    pub fn heat() -> Self {
        let drift = DriftPair::new(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).expect("static dims");
        Self::new(drift, DiffusionCoeff::identity(), ScalarCoeff::zero(), vec![ScalarCoeff::zero()], 2.0)
            .expect("valid preset")
    }

    /// The operator `∂t + x∂y + y∂z + ∂x²`: unit diffusion on the L1 pair.
    pub fn l1() -> Self {
        Self::new(
            DriftPair::l1(),
            DiffusionCoeff::identity(),
            ScalarCoeff::zero(),
            vec![ScalarCoeff::zero()],
            2.0,
        )
        .expect("valid preset")
    }

    /// Jerk-model operator with unit diffusion and no lower-order terms.
    pub fn jerk() -> Self {
        Self::new(
            DriftPair::jerk(),
            DiffusionCoeff::identity(),
            ScalarCoeff::zero(),
            vec![ScalarCoeff::zero()],
            2.0,
        )
        .expect("valid preset")
    }

    /// The `m = 1` full-rank family from the drift examples, unit diffusion.
    pub fn example1(n: usize) -> Result<Self> {
        Self::new(
            DriftPair::example1(n)?,
            DiffusionCoeff::identity(),
            ScalarCoeff::zero(),
            vec![ScalarCoeff::zero()],
            2.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_construct() {
        assert_eq!(OperatorSpec::heat().n(), 1);
        assert_eq!(OperatorSpec::l1().n(), 2);
        assert_eq!(OperatorSpec::jerk().n(), 3);
        assert_eq!(OperatorSpec::example1(5).unwrap().n(), 5);
    }

    #[test]
    fn lambda_must_exceed_one() {
        let err = OperatorSpec::new(
            DriftPair::l1(),
            DiffusionCoeff::identity(),
            ScalarCoeff::zero(),
            vec![ScalarCoeff::zero()],
            1.0,
        );
        assert!(err.is_err());
    }
}
