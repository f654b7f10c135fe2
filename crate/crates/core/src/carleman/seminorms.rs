//! Overflow-safe weighted seminorms.
//!
//! Every integral carries the normalized weight `((t+b)/b)^{-2α}`; the
//! common factor `b^{2α}` is divided out of both sides of every inequality,
//! leaving all ratios invariant. Quadrature is trapezoidal in `t` and
//! midpoint in `v` and `w`.

use ndarray::ArrayD;
use num_complex::Complex64;

use crate::carleman::params::CarlemanParams;
use crate::error::{CoreError, Result};
use crate::operator::kernels::grad_v_slab;
use crate::operator::{Field, GridSpec, SliceField};

/// The three weighted integrals entering the energy inequalities, all
/// normalized by the same `b^{2α}` (recorded as a logarithm).
#[derive(Debug, Clone, Copy)]
pub struct SeminormBundle {
    /// `∫∫ ω |∇_v h|²`
    pub grad_term: f64,
    /// `∫∫ ω (t+b)^{-1} |h|²`
    pub zero_term: f64,
    /// `∫∫ ω (t+b) |Lh|²`
    pub rhs_term: f64,
    /// `ln` of the factor divided out of the raw weights (`2α ln b`).
    pub log_normalization: f64,
}

/// Trapezoid weights in time.
pub(crate) fn t_weights(grid: &GridSpec) -> Vec<f64> {
    let nt = grid.nt();
    let dt = grid.dt();
    (0..nt)
        .map(|k| if k == 0 || k == nt - 1 { 0.5 * dt } else { dt })
        .collect()
}

fn check_finite(name: &str, values: &[(usize, f64)]) -> Result<()> {
    for (it, x) in values {
        if !x.is_finite() {
            return Err(CoreError::NonFinite(format!("{name}: non-finite integrand at time index {it}")));
        }
    }
    Ok(())
}

/// Shared implementation over the flat layout `[nt, spatial…]`.
fn seminorms_impl(
    h: &ArrayD<Complex64>,
    op: &ArrayD<Complex64>,
    grid: &GridSpec,
    params: &CarlemanParams,
    w_block: usize,
    cell: f64,
) -> Result<SeminormBundle> {
    if h.shape() != op.shape() {
        return Err(CoreError::Dimension("field and operator output must share a shape".into()));
    }
    let nt = grid.nt();
    let slab = h.len() / nt;
    let hf = h.as_slice().expect("standard layout");
    let of = op.as_slice().expect("standard layout");
    let tw = t_weights(grid);

    let mut grad_term = 0.0;
    let mut zero_term = 0.0;
    let mut rhs_term = 0.0;
    let mut slices = Vec::with_capacity(nt);
    for it in 0..nt {
        let t = grid.t_at(it);
        let omega = params.weight(t);
        let hslab = &hf[it * slab..(it + 1) * slab];
        let oslab = &of[it * slab..(it + 1) * slab];
        let mut grad2 = 0.0;
        for axis in 0..grid.m() {
            let g = grad_v_slab(hslab, grid, axis, w_block);
            grad2 += g.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let h2: f64 = hslab.iter().map(|z| z.norm_sqr()).sum();
        let o2: f64 = oslab.iter().map(|z| z.norm_sqr()).sum();
        let tb = t + params.b;
        let contrib_g = tw[it] * omega * grad2 * cell;
        let contrib_z = tw[it] * omega / tb * h2 * cell;
        let contrib_r = tw[it] * omega * tb * o2 * cell;
        slices.push((it, contrib_g + contrib_z + contrib_r));
        grad_term += contrib_g;
        zero_term += contrib_z;
        rhs_term += contrib_r;
    }
    check_finite("weighted_seminorms", &slices)?;
    Ok(SeminormBundle {
        grad_term,
        zero_term,
        rhs_term,
        log_normalization: params.log_normalization(),
    })
}

/// Weighted seminorms of a slice field and an operator output on it.
pub fn weighted_seminorms_slice(h: &SliceField, params: &CarlemanParams, op: &SliceField) -> Result<SeminormBundle> {
    let grid = h.grid();
    seminorms_impl(h.values(), op.values(), grid, params, 1, grid.v_cell_volume())
}

/// Weighted seminorms of a full field and an operator output on it.
pub fn weighted_seminorms_field(h: &Field, params: &CarlemanParams, op: &Field) -> Result<SeminormBundle> {
    let grid = h.grid();
    seminorms_impl(
        h.values(),
        op.values(),
        grid,
        params,
        grid.nw().pow(grid.n() as u32),
        grid.cell_volume(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleman::gen::{gen_slice, GenOptions, TestFnKind};

    fn params(alpha: f64) -> CarlemanParams {
        CarlemanParams::new(alpha, 0.0125, 0.006, 0.0125, 0.0, 2.0).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::new(1, 1, 0.0125, 48, 1.0, 48, 1.0, 16).unwrap()
    }

    #[test]
    fn zero_field_gives_zero_bundle() {
        let g = grid();
        let h = SliceField::zeros(g.clone());
        let b = weighted_seminorms_slice(&h, &params(8.0), &SliceField::zeros(g)).unwrap();
        assert_eq!(b.grad_term, 0.0);
        assert_eq!(b.zero_term, 0.0);
        assert_eq!(b.rhs_term, 0.0);
    }

    #[test]
    fn alpha_zero_weight_collapses_to_plain_norms() {
        // with b = t2 and alpha -> 0 the weight is ((t+b)/b)^0 = 1; compare
        // grad_term against a directly computed unweighted seminorm
        let g = grid();
        let h = gen_slice(&g, &GenOptions::new(TestFnKind::BumpProduct), 5).unwrap();
        let mut p = params(8.0);
        p.alpha0 = 0.0;
        p.alpha = 0.0;
        let b = weighted_seminorms_slice(&h, &p, &SliceField::zeros(g.clone())).unwrap();
        let tw = t_weights(&g);
        let flat = h.values().as_slice().unwrap();
        let mut plain = 0.0;
        for it in 0..g.nt() {
            let slab = &flat[it * g.nv()..(it + 1) * g.nv()];
            let gr = grad_v_slab(slab, &g, 0, 1);
            plain += tw[it] * gr.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dv();
        }
        assert!((b.grad_term - plain).abs() <= 1e-12 * plain);
    }

    #[test]
    fn weight_normalization_leaves_ratios_invariant() {
        // at alpha <= 16 the raw weight is representable: computing with raw
        // weights and with normalized weights must give identical ratios
        let g = grid();
        let h = gen_slice(&g, &GenOptions::new(TestFnKind::ModulatedBump), 2).unwrap();
        let p = params(16.0);
        let op = crate::operator::apply_p_tilde(&crate::operator::OperatorSpec::heat(), &h, &nalgebra::DVector::zeros(1)).unwrap();
        let bundle = weighted_seminorms_slice(&h, &p, &op).unwrap();
        let normalized_ratio = (bundle.grad_term + p.alpha * bundle.zero_term) / bundle.rhs_term;

        // raw weights
        let tw = t_weights(&g);
        let hf = h.values().as_slice().unwrap();
        let of = op.values().as_slice().unwrap();
        let (mut grad, mut zero, mut rhs) = (0.0, 0.0, 0.0);
        for it in 0..g.nt() {
            let t = g.t_at(it);
            let w_raw = (t + p.b).powf(-2.0 * p.alpha);
            let hs = &hf[it * g.nv()..(it + 1) * g.nv()];
            let os = &of[it * g.nv()..(it + 1) * g.nv()];
            let gr = grad_v_slab(hs, &g, 0, 1);
            grad += tw[it] * w_raw * gr.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dv();
            zero += tw[it] * w_raw / (t + p.b) * hs.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dv();
            rhs += tw[it] * w_raw * (t + p.b) * os.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dv();
        }
        let raw_ratio = (grad + p.alpha * zero) / rhs;
        assert!(
            ((normalized_ratio - raw_ratio) / raw_ratio).abs() < 1e-12,
            "normalized {normalized_ratio} vs raw {raw_ratio}"
        );
    }

    #[test]
    fn no_overflow_at_alpha_512() {
        let g = grid();
        let h = gen_slice(&g, &GenOptions::new(TestFnKind::BumpProduct), 1).unwrap();
        let mut p = params(8.0);
        p.alpha = 512.0;
        let b = weighted_seminorms_slice(&h, &p, &SliceField::zeros(g)).unwrap();
        assert!(b.grad_term.is_finite() && b.zero_term.is_finite() && b.rhs_term.is_finite());
    }
}
