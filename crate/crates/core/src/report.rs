//! Structured pass/fail records emitted by every verification operation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of a single check.
///
/// `Pass`/`Fail` are ordinary outcomes. The remaining variants mark runs in
/// which the hypothesis of the corresponding statement did not hold, so the
/// inequality is not evidence either way:
///
/// * `OutOfRegime` — a parameter precondition (admissibility of `α`, the
///   frequency bound, ...) was violated; the check was not evaluated.
/// * `Inconclusive` — both sides of the inequality fell below the
///   degenerate-mass guard; `0 ≤ 0` carries no information.
/// * `DegeneratePass` — the inequality holds because the field is
///   identically zero (the expected outcome for a zero trajectory).
/// * `HypothesisViolated` — a contrast experiment that deliberately breaks
///   the hypothesis; recorded, never counted as pass or fail.
/// * `Skipped` — a sweep point excluded by its regime gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    OutOfRegime,
    Inconclusive,
    DegeneratePass,
    HypothesisViolated,
    Skipped,
}

/// Pass/fail record with the computed quantities behind the verdict.
///
/// Reports are plain data: serialization order is fixed (maps are ordered) so
/// that identical runs produce byte-identical serialized bodies. Wall-clock
/// runtime is deliberately not part of the serialized body; callers that want
/// it read [`VerificationReport::runtime_ms`] and store it separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Check identifier, e.g. `"carleman-local"` or `"lemma1"`.
    pub name: String,
    /// Left-hand side of the checked inequality or identity.
    pub lhs: f64,
    /// Right-hand side of the checked inequality or identity.
    pub rhs: f64,
    /// lhs-vs-rhs ratio arranged so the underlying statement predicts
    /// boundedness (orientation documented per check).
    pub empirical_constant: f64,
    /// True exactly when `status` is `Pass` or `DegeneratePass`.
    pub pass: bool,
    pub status: CheckStatus,
    /// Carleman exponent for sweep points, when applicable.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    /// RNG seed of the test function, when applicable.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Invariant frequency of the run, when applicable.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho: Option<Vec<f64>>,
    /// Grid description, e.g. `"t128 v64 w16^3"`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<String>,
    /// Named scalar parameters of the run (tolerances, ceilings, margins).
    pub params: BTreeMap<String, f64>,
    /// Additional named results (margins, orders, per-term values).
    pub details: BTreeMap<String, f64>,
    /// Wall-clock time of the run; excluded from serialized bodies.
    #[serde(skip)]
    pub runtime_ms: Option<f64>,
}

impl VerificationReport {
    /// New report with the given verdict; `pass` is derived from `status`.
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, empirical_constant: f64, status: CheckStatus) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            empirical_constant,
            pass: matches!(status, CheckStatus::Pass | CheckStatus::DegeneratePass),
            status,
            alpha: None,
            seed: None,
            rho: None,
            grid: None,
            params: BTreeMap::new(),
            details: BTreeMap::new(),
            runtime_ms: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_rho(mut self, rho: &[f64]) -> Self {
        self.rho = Some(rho.to_vec());
        self
    }

    pub fn with_grid(mut self, grid: impl Into<String>) -> Self {
        self.grid = Some(grid.into());
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// A check counts toward failure only when it genuinely ran and failed.
    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }

    /// True when the run produced no pass/fail information.
    pub fn indeterminate(&self) -> bool {
        matches!(
            self.status,
            CheckStatus::OutOfRegime | CheckStatus::Inconclusive | CheckStatus::Skipped | CheckStatus::HypothesisViolated
        )
    }
}
