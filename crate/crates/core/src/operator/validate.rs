//! Sampling validation of the standing assumptions on the coefficients.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::operator::{GridSpec, OperatorSpec};
use crate::report::{CheckStatus, VerificationReport};

fn symmetric_eig_bounds(a: &DMatrix<f64>) -> (f64, f64) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Check symmetry of `A`, the two-sided ellipticity with constant `λ`, and
/// finite-difference bounds on `|∂t a_ij|`, `|∇_v a_ij|`, `|c|`, `|d|`
/// against `λ`, on grid nodes plus seeded random interior points.
///
/// The report records the worst margin per condition (nonnegative = satisfied)
/// and passes only when every margin is nonnegative.
pub fn validate_assumptions(spec: &OperatorSpec, grid: &GridSpec, samples: usize) -> Result<VerificationReport> {
    if samples < 1000 {
        return Err(CoreError::Validation(format!("need at least 1000 samples, got {samples}")));
    }
    let m = spec.m();
    let lambda = spec.lambda();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a11_da7e);

    // deterministic node subsample + random interior points
    let mut points: Vec<(f64, Vec<f64>)> = Vec::with_capacity(2 * samples);
    let node_budget = samples;
    let nt = grid.nt();
    let nv = grid.nv();
    let node_total = nt * nv;
    let stride = (node_total / node_budget).max(1);
    for flat in (0..node_total).step_by(stride) {
        let it = flat / nv;
        let iv = flat % nv;
        let mut v = vec![grid.v_at(iv); m];
        for (ax, val) in v.iter_mut().enumerate().skip(1) {
            *val = grid.v_at((iv + ax * 7) % nv);
        }
        points.push((grid.t_at(it), v));
    }
    for _ in 0..samples {
        let t = rng.gen_range(0.0..grid.t2());
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-grid.lv()..grid.lv())).collect();
        points.push((t, v));
    }

    let ht = grid.t2() * 1e-6;
    let hv = grid.lv() * 1e-6;
    let mut margin_sym = f64::INFINITY;
    let mut margin_lower = f64::INFINITY;
    let mut margin_upper = f64::INFINITY;
    let mut margin_dta = f64::INFINITY;
    let mut margin_grada = f64::INFINITY;
    let mut margin_c = f64::INFINITY;
    let mut margin_d = f64::INFINITY;

    for (t, v) in &points {
        let a = spec.a_at(*t, v);
        if a.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::Validation(format!(
                "diffusion coefficient returned non-finite value at t = {t}, v = {v:?}"
            )));
        }
        let norm = a.norm().max(f64::MIN_POSITIVE);
        let asym = (&a - a.transpose()).norm();
        margin_sym = margin_sym.min(1e-12 - asym / norm);

        let (emin, emax) = symmetric_eig_bounds(&a);
        margin_lower = margin_lower.min(emin - 1.0 / lambda);
        margin_upper = margin_upper.min(lambda - emax);

        // centered finite differences for the Lipschitz-type bounds
        let t_lo = (*t - ht).max(0.0);
        let t_hi = (*t + ht).min(grid.t2());
        let dta = (spec.a_at(t_hi, v) - spec.a_at(t_lo, v)) / (t_hi - t_lo);
        let dta_max = dta.iter().map(|x| x.abs()).fold(0.0, f64::max);
        margin_dta = margin_dta.min(lambda - dta_max);

        for ax in 0..m {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[ax] += hv;
            vm[ax] -= hv;
            let grada = (spec.a_at(*t, &vp) - spec.a_at(*t, &vm)) / (2.0 * hv);
            let grada_max = grada.iter().map(|x| x.abs()).fold(0.0, f64::max);
            margin_grada = margin_grada.min(lambda - grada_max);
        }

        let c = spec.c_at(*t, v);
        let d = spec.d_at(*t, v);
        if !c.is_finite() || d.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::Validation(format!(
                "lower-order coefficient returned non-finite value at t = {t}, v = {v:?}"
            )));
        }
        margin_c = margin_c.min(lambda - c.abs());
        let d_norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        margin_d = margin_d.min(lambda - d_norm);
    }

    let worst = [margin_sym, margin_lower, margin_upper, margin_dta, margin_grada, margin_c, margin_d]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let status = if worst >= 0.0 { CheckStatus::Pass } else { CheckStatus::Fail };
    Ok(VerificationReport::new("assumptions", worst, 0.0, worst, status)
        .with_grid(grid.label())
        .with_param("lambda", lambda)
        .with_param("samples", points.len() as f64)
        .with_detail("margin_symmetry", margin_sym)
        .with_detail("margin_ellipticity_lower", margin_lower)
        .with_detail("margin_ellipticity_upper", margin_upper)
        .with_detail("margin_dt_a", margin_dta)
        .with_detail("margin_grad_a", margin_grada)
        .with_detail("margin_c", margin_c)
        .with_detail("margin_d", margin_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DriftPair;
    use crate::operator::coeff::{DiffusionCoeff, ScalarCoeff};

    fn grid() -> GridSpec {
        GridSpec::new(1, 1, 0.5, 32, 2.0, 32, 1.0, 16).unwrap()
    }

    #[test]
    fn identity_diffusion_passes_with_half_margin() {
        let spec = OperatorSpec::heat();
        let report = validate_assumptions(&spec, &grid(), 1000).unwrap();
        assert!(report.pass);
        // lambda = 2: eigenvalue 1 sits exactly 1/2 above the lower bound
        assert!((report.details["margin_ellipticity_lower"] - 0.5).abs() < 1e-12);
        assert!((report.details["margin_ellipticity_upper"] - 1.0).abs() < 1e-12);
    }

    fn sin_spec(lambda: f64) -> OperatorSpec {
        let drift = DriftPair::new(nalgebra::DMatrix::zeros(1, 1), nalgebra::DMatrix::zeros(1, 1)).unwrap();
        OperatorSpec::new(
            drift,
            DiffusionCoeff::Isotropic {
                scalar: ScalarCoeff::SinPerturb { base: 2.0, amp: 1.0, freq: 1.0, axis: 0, phase: 0.0 },
            },
            ScalarCoeff::zero(),
            vec![ScalarCoeff::zero()],
            lambda,
        )
        .unwrap()
    }

    #[test]
    fn sin_perturbation_pass_and_fail() {
        // extrema of 2 + sin are 1 and 3: lambda = 3.01 passes, 2.5 fails on the upper bound
        let report = validate_assumptions(&sin_spec(3.01), &grid(), 1000).unwrap();
        assert!(report.pass, "margins: {:?}", report.details);
        let report = validate_assumptions(&sin_spec(2.5), &grid(), 1000).unwrap();
        assert!(!report.pass);
        assert!(report.details["margin_ellipticity_upper"] < 0.0);
    }
}
