//! Named coefficient families loadable from configuration.
//!
//! Coefficients are pure functions of `(t, v)`; they never see the degenerate
//! variable `w`. Arbitrary user code is out of scope — every coefficient is
//! one of the built-in families below with numeric parameters.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Scalar coefficient family `(t, v) → R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarCoeff {
    Constant { value: f64 },
    /// `base + t_slope·t + v_slope·v`
    Affine {
        base: f64,
        #[serde(default)]
        t_slope: f64,
        #[serde(default)]
        v_slope: Vec<f64>,
    },
    /// `base + amp·sin(freq·v[axis] + phase)`
    SinPerturb {
        base: f64,
        amp: f64,
        freq: f64,
        #[serde(default)]
        axis: usize,
        #[serde(default)]
        phase: f64,
    },
    /// `omega·sin(omega·(t-shift)) / (2 + cos(omega·(t-shift))) + offset`,
    /// the logarithmic derivative of `1/(2 + cos)`; bounded, time-only.
    CosineRate {
        omega: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl ScalarCoeff {
    pub fn zero() -> Self {
        ScalarCoeff::Constant { value: 0.0 }
    }

    pub fn eval(&self, t: f64, v: &[f64]) -> f64 {
        match self {
            ScalarCoeff::Constant { value } => *value,
            ScalarCoeff::Affine { base, t_slope, v_slope } => {
                base + t_slope * t + v_slope.iter().zip(v).map(|(s, x)| s * x).sum::<f64>()
            }
            ScalarCoeff::SinPerturb { base, amp, freq, axis, phase } => {
                base + amp * (freq * v.get(*axis).copied().unwrap_or(0.0) + phase).sin()
            }
            ScalarCoeff::CosineRate { omega, shift, offset } => {
                let th = omega * (t - shift);
                omega * th.sin() / (2.0 + th.cos()) + offset
            }
        }
    }
}

/// Diffusion coefficient family `(t, v) → symmetric m×m matrix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiffusionCoeff {
    /// `f(t,v)·I_m` for a scalar family `f`.
    Isotropic { scalar: ScalarCoeff },
    /// A constant symmetric matrix, row-major entries.
    ConstantMatrix { entries: Vec<Vec<f64>> },
}

impl DiffusionCoeff {
    pub fn identity() -> Self {
        DiffusionCoeff::Isotropic {
            scalar: ScalarCoeff::Constant { value: 1.0 },
        }
    }

    pub fn eval(&self, t: f64, v: &[f64], m: usize) -> DMatrix<f64> {
        match self {
            DiffusionCoeff::Isotropic { scalar } => DMatrix::identity(m, m) * scalar.eval(t, v),
            DiffusionCoeff::ConstantMatrix { entries } => {
                DMatrix::from_fn(m, m, |i, j| entries[i][j])
            }
        }
    }

    /// Entry `(i, j)` without building the matrix; the hot path for fluxes.
    pub fn eval_entry(&self, t: f64, v: &[f64], i: usize, j: usize) -> f64 {
        match self {
            DiffusionCoeff::Isotropic { scalar } => {
                if i == j {
                    scalar.eval(t, v)
                } else {
                    0.0
                }
            }
            DiffusionCoeff::ConstantMatrix { entries } => entries[i][j],
        }
    }

    /// True when all off-diagonal entries vanish identically.
    pub fn is_diagonal(&self) -> bool {
        match self {
            DiffusionCoeff::Isotropic { .. } => true,
            DiffusionCoeff::ConstantMatrix { entries } => entries
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, &x)| i == j || x == 0.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        let c = ScalarCoeff::Constant { value: 3.0 };
        assert_eq!(c.eval(0.5, &[1.0]), 3.0);

        let a = ScalarCoeff::Affine { base: 1.0, t_slope: 2.0, v_slope: vec![0.5] };
        assert_eq!(a.eval(1.0, &[2.0]), 1.0 + 2.0 + 1.0);

        let s = ScalarCoeff::SinPerturb { base: 2.0, amp: 1.0, freq: 1.0, axis: 0, phase: 0.0 };
        assert!((s.eval(0.0, &[std::f64::consts::FRAC_PI_2]) - 3.0).abs() < 1e-12);

        // CosineRate is -d/dt log(2 + cos(omega t)) + offset
        let r = ScalarCoeff::CosineRate { omega: 2.0, shift: 0.0, offset: 0.0 };
        let h = 1e-6f64;
        let lhs = r.eval(0.3, &[]);
        let log_beta = |t: f64| (2.0 + (2.0 * t).cos()).ln();
        let num = -((log_beta(0.3 + h) - log_beta(0.3 - h)) / (2.0 * h));
        assert!((lhs - num).abs() < 1e-6);
    }

    #[test]
    fn diffusion_matrix_shapes() {
        let iso = DiffusionCoeff::identity();
        let m = iso.eval(0.0, &[0.0, 0.0], 2);
        assert_eq!(m, DMatrix::identity(2, 2));
        assert!(iso.is_diagonal());

        let full = DiffusionCoeff::ConstantMatrix {
            entries: vec![vec![2.0, 0.5], vec![0.5, 1.0]],
        };
        assert!(!full.is_diagonal());
        assert_eq!(full.eval_entry(0.0, &[0.0, 0.0], 0, 1), 0.5);
    }
}
