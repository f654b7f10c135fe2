//! Parameters of the weighted energy inequalities and their regime gates.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{g_sup, DriftPair, G_SUP_SAMPLES_DEFAULT};

/// Default floor for the exponent `α`.
pub const ALPHA0_DEFAULT: f64 = 4.0;
/// Default smallness constant gating the horizon `t2 ≤ c0 λ⁻²`.
pub const C0_DEFAULT: f64 = 0.05;
/// Default smallness constant in the frequency admissibility bound.
pub const EPS0_DEFAULT: f64 = 0.05;
/// Default coupling `C* ≥ 1/ε0` between `α` and the region size `R`.
pub const C_STAR_DEFAULT: f64 = 20.0;

/// Parameters `(α, b, t1, t2, R, ε0)` plus the configured floors and the
/// ellipticity constant; admissibility of the two estimates is derived, not
/// stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanParams {
    pub alpha: f64,
    /// Weight shift in `(t + b)^{-2α}`, `0 < b ≤ t2`.
    pub b: f64,
    /// Inner time for the decay consequence, `0 < t1 < t2`.
    pub t1: f64,
    pub t2: f64,
    /// Low-frequency region size.
    pub r: f64,
    pub eps0: f64,
    pub alpha0: f64,
    pub c0: f64,
    pub c_star: f64,
    pub lambda: f64,
}

impl CarlemanParams {
    pub fn new(alpha: f64, b: f64, t1: f64, t2: f64, r: f64, lambda: f64) -> Result<Self> {
        let params = Self {
            alpha,
            b,
            t1,
            t2,
            r,
            eps0: EPS0_DEFAULT,
            alpha0: ALPHA0_DEFAULT,
            c0: C0_DEFAULT,
            c_star: C_STAR_DEFAULT,
            lambda,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b <= self.t2) {
            return Err(CoreError::Validation(format!("need 0 < b <= t2, got b = {}, t2 = {}", self.b, self.t2)));
        }
        if !(self.t1 > 0.0 && self.t1 < self.t2) {
            return Err(CoreError::Validation(format!("need 0 < t1 < t2, got t1 = {}, t2 = {}", self.t1, self.t2)));
        }
        if !(self.alpha >= self.alpha0) {
            return Err(CoreError::Validation(format!(
                "alpha = {} below the configured floor alpha0 = {}",
                self.alpha, self.alpha0
            )));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) || !(self.c0 > 0.0 && self.c0 < 1.0) {
            return Err(CoreError::Validation("eps0 and c0 must lie in (0,1)".into()));
        }
        if !(self.r >= 0.0) || !(self.lambda > 1.0) {
            return Err(CoreError::Validation("need R >= 0 and lambda > 1".into()));
        }
        Ok(())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..self.clone() }
    }

    /// Horizon smallness `t2 ≤ c0 λ⁻²` required by both estimates.
    pub fn horizon_ok(&self) -> bool {
        self.t2 <= self.c0 / (self.lambda * self.lambda)
    }

    /// The frequency admissibility bound for a fixed `ρ`:
    /// `sup_{0<t<t2} (t+b)^3 |B1ᵀ e^{-tB2ᵀ} ρ|^2 ≤ ε0 α`.
    pub fn local_regime(&self, drift: &DriftPair, rho: &DVector<f64>) -> Result<bool> {
        let sup = g_sup(drift, rho, self.t2, self.b, G_SUP_SAMPLES_DEFAULT)?.g_value;
        Ok(sup <= self.eps0 * self.alpha)
    }

    /// Admissibility of the frequency-localized estimate:
    /// `α ≥ α0 + C*·R` with `C* ≥ 1/ε0`.
    pub fn global_regime(&self) -> bool {
        self.c_star >= 1.0 / self.eps0 && self.alpha >= self.alpha0 + self.c_star * self.r
    }

    /// Normalized weight `((t+b)/b)^{-2α}`: the common factor `b^{2α}` is
    /// divided out of every compared pair, so no intermediate value overflows
    /// for `α ≤ 512` on `t2 ≤ 1`.
    pub fn weight(&self, t: f64) -> f64 {
        (((t + self.b) / self.b).ln() * (-2.0 * self.alpha)).exp()
    }

    /// `-2α·ln b`, the logarithm of the factor divided out of the weights.
    pub fn log_normalization(&self) -> f64 {
        -2.0 * self.alpha * self.b.ln()
    }
}
