//! The invariant frequency `ρ = e^{t B2ᵀ} η` and its transport check.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::linalg::{mat_exp, DriftPair};
use crate::report::{CheckStatus, VerificationReport};

/// Which way to map between the original frequency `η` and the invariant `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoDirection {
    /// `ρ = e^{t B2ᵀ} η`
    ToRho,
    /// `η = e^{-t B2ᵀ} ρ`
    ToEta,
}

/// Map between `η` and the invariant frequency at time `t`; the two
/// directions are mutually inverse.
pub fn rho_map(d: &DriftPair, t: f64, vec: &DVector<f64>, direction: RhoDirection) -> Result<DVector<f64>> {
    if vec.len() != d.n() {
        return Err(CoreError::Dimension(format!("vector must have length n = {}, got {}", d.n(), vec.len())));
    }
    let sign = match direction {
        RhoDirection::ToRho => 1.0,
        RhoDirection::ToEta => -1.0,
    };
    Ok(mat_exp(&d.b2().transpose(), sign * t)? * vec)
}

/// Adaptive Dormand–Prince RK45 for the linear frequency transport
/// `η' = -B2ᵀ η`; dense enough output at the requested report times.
fn integrate_transport(b2t: &DMatrix<f64>, eta0: &DVector<f64>, report_times: &[f64], rtol: f64) -> Vec<DVector<f64>> {
    let rhs = |eta: &DVector<f64>| -(b2t * eta);
    let mut out = Vec::with_capacity(report_times.len());
    let mut t = 0.0;
    let mut eta = eta0.clone();
    let mut h = (report_times.last().copied().unwrap_or(1.0) / 64.0).max(1e-9);

    for &t_target in report_times {
        while t < t_target {
            let step = h.min(t_target - t);
            let (next, err_est) = dopri_step(&rhs, &eta, step);
            let scale = 1.0 + eta.norm();
            if err_est <= rtol * scale || step < 1e-12 {
                t += step;
                eta = next;
                // grow cautiously
                let factor = if err_est > 0.0 { 0.9 * (rtol * scale / err_est).powf(0.2) } else { 2.0 };
                h = (step * factor.clamp(0.2, 2.0)).max(1e-12);
            } else {
                h = step * 0.9 * (rtol * scale / err_est).powf(0.2).clamp(0.1, 1.0);
            }
        }
        out.push(eta.clone());
    }
    out
}

/// One Dormand–Prince 5(4) step; returns the 5th-order solution and an error
/// estimate.
fn dopri_step(rhs: &impl Fn(&DVector<f64>) -> DVector<f64>, y: &DVector<f64>, h: f64) -> (DVector<f64>, f64) {
    let k1 = rhs(y);
    let k2 = rhs(&(y + &k1 * (h * 1.0 / 5.0)));
    let k3 = rhs(&(y + &k1 * (h * 3.0 / 40.0) + &k2 * (h * 9.0 / 40.0)));
    let k4 = rhs(&(y + &k1 * (h * 44.0 / 45.0) - &k2 * (h * 56.0 / 15.0) + &k3 * (h * 32.0 / 9.0)));
    let k5 = rhs(&(y + &k1 * (h * 19372.0 / 6561.0) - &k2 * (h * 25360.0 / 2187.0) + &k3 * (h * 64448.0 / 6561.0)
        - &k4 * (h * 212.0 / 729.0)));
    let k6 = rhs(&(y + &k1 * (h * 9017.0 / 3168.0) - &k2 * (h * 355.0 / 33.0) + &k3 * (h * 46732.0 / 5247.0)
        + &k4 * (h * 49.0 / 176.0)
        - &k5 * (h * 5103.0 / 18656.0)));
    let y5 = y + &k1 * (h * 35.0 / 384.0) + &k3 * (h * 500.0 / 1113.0) + &k4 * (h * 125.0 / 192.0)
        - &k5 * (h * 2187.0 / 6784.0)
        + &k6 * (h * 11.0 / 84.0);
    let k7 = rhs(&y5);
    let y4 = y + &k1 * (h * 5179.0 / 57600.0) + &k3 * (h * 7571.0 / 16695.0) + &k4 * (h * 393.0 / 640.0)
        - &k5 * (h * 92097.0 / 339200.0)
        + &k6 * (h * 187.0 / 2100.0)
        + &k7 * (h * 1.0 / 40.0);
    let err = (&y5 - y4).norm();
    (y5, err)
}

/// Integrate the characteristic ODE `η' = -B2ᵀ η` from `η(0) = ρ0` and verify
/// that `ρ(t) = e^{t B2ᵀ} η(t)` stays constant; reports the max drift
/// (normalized by `max(1, |ρ0|)`).
pub fn invariance_check(d: &DriftPair, rho0: &DVector<f64>, t2: f64, nt: usize) -> Result<VerificationReport> {
    if nt < 64 {
        return Err(CoreError::Validation(format!("nt must be at least 64, got {nt}")));
    }
    if t2 <= 0.0 {
        return Err(CoreError::Validation(format!("t2 must be positive, got {t2}")));
    }
    if rho0.len() != d.n() {
        return Err(CoreError::Dimension(format!("rho0 must have length n = {}, got {}", d.n(), rho0.len())));
    }
    let times: Vec<f64> = (1..=nt).map(|k| t2 * k as f64 / nt as f64).collect();
    let b2t = d.b2().transpose();
    let etas = integrate_transport(&b2t, rho0, &times, 1e-12);
    let mut max_drift = 0.0f64;
    for (t, eta) in times.iter().zip(&etas) {
        let rho_t = rho_map(d, *t, eta, RhoDirection::ToRho)?;
        max_drift = max_drift.max((rho_t - rho0).norm());
    }
    let normalized = max_drift / rho0.norm().max(1.0);
    let status = if normalized <= 1e-10 { CheckStatus::Pass } else { CheckStatus::Fail };
    Ok(VerificationReport::new("rho-invariance", normalized, 1e-10, normalized, status)
        .with_rho(rho0.as_slice())
        .with_param("t2", t2)
        .with_param("nt", nt as f64)
        .with_detail("max_drift_abs", max_drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rho_map_trivial_cases() {
        // B2 = 0 and t = 0 both reduce to the identity
        let d0 = DriftPair::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), DMatrix::zeros(2, 2)).unwrap();
        let eta = DVector::from_vec(vec![0.3, -0.7]);
        assert_relative_eq!(rho_map(&d0, 1.7, &eta, RhoDirection::ToRho).unwrap(), eta, epsilon = 1e-15);
        let l1 = DriftPair::l1();
        assert_relative_eq!(rho_map(&l1, 0.0, &eta, RhoDirection::ToRho).unwrap(), eta, epsilon = 1e-15);
    }

    #[test]
    fn rho_map_l1_closed_form() {
        // e^{tB2ᵀ} = [[1, t], [0, 1]] for the L1 pair
        let l1 = DriftPair::l1();
        let eta = DVector::from_vec(vec![2.0, -1.0]);
        let t = 0.7;
        let rho = rho_map(&l1, t, &eta, RhoDirection::ToRho).unwrap();
        assert_relative_eq!(rho, DVector::from_vec(vec![2.0 + t * -1.0, -1.0]), epsilon = 1e-14);
    }

    #[test]
    fn rho_map_directions_are_mutually_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=4);
            let d = DriftPair::new(
                DMatrix::from_fn(n, 1, |_, _| rng.gen_range(-1.0..1.0)),
                DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)),
            )
            .unwrap();
            let eta = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let t = rng.gen_range(-1.0..1.0);
            let rho = rho_map(&d, t, &eta, RhoDirection::ToRho).unwrap();
            let back = rho_map(&d, t, &rho, RhoDirection::ToEta).unwrap();
            assert!((back - &eta).norm() <= 1e-12 * (1.0 + eta.norm()));
        }
    }

    #[test]
    fn invariance_zero_coupling_is_exact() {
        let d0 = DriftPair::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), DMatrix::zeros(2, 2)).unwrap();
        let report = invariance_check(&d0, &DVector::from_vec(vec![1.0, 2.0]), 1.0, 64).unwrap();
        assert!(report.pass);
        assert_eq!(report.details["max_drift_abs"], 0.0);
    }

    #[test]
    fn invariance_jerk_and_l1() {
        let report = invariance_check(&DriftPair::jerk(), &DVector::from_vec(vec![1.0, 1.0, 1.0]), 1.0, 64).unwrap();
        assert!(report.pass, "jerk drift = {}", report.lhs);
        let report = invariance_check(&DriftPair::l1(), &DVector::from_vec(vec![0.0, 1.0]), 1.0, 64).unwrap();
        assert!(report.pass, "l1 drift = {}", report.lhs);
    }
}
