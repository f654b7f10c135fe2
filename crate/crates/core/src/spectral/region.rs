//! The low-frequency region `U_R` in the invariant variable.

use nalgebra::DVector;

use crate::error::{CoreError, Result};
use crate::linalg::{c2_lower_bound, DecaySampler, DriftPair, G_SUP_REFINE_DEFAULT, G_SUP_SAMPLES_DEFAULT};

/// `U_R = { ρ : sup_{0<t<t2} (t+b)^3 |B1ᵀ e^{-tB2ᵀ} ρ|^2 ≤ R }`.
///
/// The region caches a decay sampler for the sup evaluation and, when the
/// rank condition holds, the sphere minimum `c2` together with the implied
/// bounding radius `(R/c2)^{1/2}`.
pub struct FrequencyRegion {
    drift: DriftPair,
    r: f64,
    b: f64,
    t2: f64,
    sampler: DecaySampler,
    c2_estimate: f64,
    rank_deficient: bool,
}

/// Membership verdict with the margin `R - sup_fn(ρ)`.
#[derive(Debug, Clone, Copy)]
pub struct Membership {
    pub member: bool,
    pub margin: f64,
    pub sup_value: f64,
}

impl FrequencyRegion {
    pub fn new(drift: DriftPair, r: f64, b: f64, t2: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(CoreError::Validation(format!("R must be nonnegative, got {r}")));
        }
        if !(t2 > 0.0) || !(b > 0.0 && b <= t2) {
            return Err(CoreError::Validation(format!("need 0 < b <= t2, got b = {b}, t2 = {t2}")));
        }
        let sampler = DecaySampler::new(&drift, t2, b, G_SUP_SAMPLES_DEFAULT)?;
        let profile = c2_lower_bound(&drift, t2, (100 * drift.n()).max(1000), 60)?;
        let c2 = profile.c2_estimate.unwrap_or(0.0);
        Ok(Self {
            drift,
            r,
            b,
            t2,
            sampler,
            c2_estimate: c2,
            rank_deficient: profile.rank_deficient,
        })
    }

    pub fn drift(&self) -> &DriftPair {
        &self.drift
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn c2_estimate(&self) -> f64 {
        self.c2_estimate
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    /// `(R / c2)^{1/2}`; present when the rank condition holds.
    pub fn bounding_radius(&self) -> Option<f64> {
        (self.c2_estimate > 0.0).then(|| (self.r / self.c2_estimate).sqrt())
    }

    /// Full membership evaluation with refined sup and margin.
    pub fn membership(&self, rho: &DVector<f64>) -> Result<Membership> {
        if rho.len() != self.drift.n() {
            return Err(CoreError::Dimension(format!(
                "rho must have length n = {}, got {}",
                self.drift.n(),
                rho.len()
            )));
        }
        let (sup, _) = self.sampler.sup(rho, G_SUP_REFINE_DEFAULT);
        Ok(Membership {
            member: sup <= self.r,
            margin: self.r - sup,
            sup_value: sup,
        })
    }

    /// Classification-only membership used for mask construction: the golden
    /// refinement step is skipped when the coarse sup is far from the
    /// threshold, where it cannot change the verdict.
    pub(crate) fn member_fast(&self, rho: &DVector<f64>) -> bool {
        let coarse = self.sampler.sup_coarse(rho);
        if coarse > self.r * 1.2 {
            return false;
        }
        if coarse < self.r * 0.8 {
            // refinement can only increase the sup, and near-sample maxima of
            // the smooth integrand exceed the sampled max by far less than 20%
            return coarse <= self.r;
        }
        let (sup, _) = self.sampler.sup(rho, G_SUP_REFINE_DEFAULT);
        sup <= self.r
    }
}
