//! Discrete application of `P`, its frequency conjugate, and the K-split.

use nalgebra::DVector;
use ndarray::parallel::prelude::*;
use ndarray::Axis;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::linalg;
use crate::operator::kernels::{add_div_v_slab, support_check, time_derivative};
use crate::operator::{Field, GridSpec, OperatorSpec, SliceField, Space};
use crate::spectral::fft::{Direction, WFft};

fn check_grid(spec: &OperatorSpec, grid: &GridSpec) -> Result<()> {
    if grid.m() != spec.m() || grid.n() != spec.n() {
        return Err(CoreError::Dimension(format!(
            "grid dimensions (m={}, n={}) do not match operator (m={}, n={})",
            grid.m(),
            grid.n(),
            spec.m(),
            spec.n()
        )));
    }
    Ok(())
}

/// Drift coefficients `(B1 v + B2 w)_a` over one time slab, one flat array
/// per degenerate axis (time independent).
fn drift_coefficients(spec: &OperatorSpec, grid: &GridSpec) -> Vec<Vec<f64>> {
    let m = grid.m();
    let n = grid.n();
    let nv = grid.nv();
    let nw = grid.nw();
    let slab = grid.slab_len();
    let b1 = spec.drift().b1();
    let b2 = spec.drift().b2();
    let v_vals: Vec<f64> = (0..nv).map(|i| grid.v_at(i)).collect();
    let w_vals: Vec<f64> = (0..nw).map(|k| grid.w_at(k)).collect();
    (0..n)
        .map(|a| {
            let mut coeff = vec![0.0f64; slab];
            for (idx, c) in coeff.iter_mut().enumerate() {
                // decode (v multi, w multi) from the flat slab index, C-order
                let mut rem = idx;
                let mut acc = 0.0;
                for ax in (0..m + n).rev() {
                    if ax >= m {
                        let k = rem % nw;
                        rem /= nw;
                        acc += b2[(a, ax - m)] * w_vals[k];
                    } else {
                        let i = rem % nv;
                        rem /= nv;
                        acc += b1[(a, ax)] * v_vals[i];
                    }
                }
                *c = acc;
            }
            coeff
        })
        .collect()
}

/// Apply the full operator
/// `P u = ∂t u + (B1 v + B2 w)·∇w u + div_v(A ∇_v u)`.
///
/// `∂t` is 4th-order central in the interior, `∇w` is the spectral derivative
/// on the periodic box, and the diffusion is in conservative flux form with
/// 2nd-order centered differences. The input must be in physical space and
/// satisfy the compact-support precondition.
pub fn apply_p(spec: &OperatorSpec, u: &Field) -> Result<Field> {
    if u.space() != Space::Physical {
        return Err(CoreError::State("apply_p expects a physical-space field".into()));
    }
    check_grid(spec, u.grid())?;
    support_check(u.values(), u.grid(), u.grid().n())?;
    apply_p_unchecked(spec, u)
}

/// `apply_p` without the support gate; used for residuals of simulated
/// trajectories whose time slices do not vanish at the endpoints. Values at
/// the first/last two time slices come from one-sided stencils.
pub fn apply_p_unchecked(spec: &OperatorSpec, u: &Field) -> Result<Field> {
    check_grid(spec, u.grid())?;
    let grid = u.grid().clone();
    let mut out = time_derivative(u.values(), grid.dt());

    let coeffs = drift_coefficients(spec, &grid);
    let wfft = WFft::new(grid.n(), grid.nw());
    let eta_factors: Vec<Complex64> = (0..grid.nw()).map(|k| Complex64::new(0.0, grid.eta_at(k))).collect();

    let m = grid.m();
    let n = grid.n();
    out.axis_chunks_iter_mut(Axis(0), 1)
        .into_par_iter()
        .zip(u.values().axis_chunks_iter(Axis(0), 1).into_par_iter())
        .enumerate()
        .for_each(|(it, (mut oslice, uslice))| {
            let t = grid.t_at(it);
            // drift: one spectral derivative per degenerate axis
            let mut scratch = uslice.to_owned().into_dyn();
            for a in 0..n {
                scratch.assign(&uslice);
                let axis = 1 + m + a;
                wfft.transform_axis(&mut scratch, axis, Direction::Forward);
                WFft::scale_axis(&mut scratch, axis, &eta_factors);
                wfft.transform_axis(&mut scratch, axis, Direction::Inverse);
                let o = oslice.as_slice_mut().expect("contiguous time slab");
                let s = scratch.as_slice().expect("contiguous scratch");
                let c = &coeffs[a];
                for i in 0..o.len() {
                    o[i] += c[i] * s[i];
                }
            }
            // diffusion in flux form
            let o = oslice.as_slice_mut().expect("contiguous time slab");
            let us = uslice.to_slice().expect("contiguous time slab");
            add_div_v_slab(o, us, spec, &grid, t, grid.nw().pow(grid.n() as u32));
        });

    Field::new(grid, out, Space::Physical)
}

/// The lower-order right-hand side `c u + d·∇_v u` of the equation
/// `P u = c u + d·∇_v u`.
pub fn apply_lower_order(spec: &OperatorSpec, u: &Field) -> Result<Field> {
    if u.space() != Space::Physical {
        return Err(CoreError::State("apply_lower_order expects a physical-space field".into()));
    }
    check_grid(spec, u.grid())?;
    let grid = u.grid().clone();
    let mut out = ndarray::ArrayD::<Complex64>::zeros(u.values().raw_dim());
    let w_block = grid.nw().pow(grid.n() as u32);
    let m = grid.m();
    let nv = grid.nv();
    out.axis_chunks_iter_mut(Axis(0), 1)
        .into_par_iter()
        .zip(u.values().axis_chunks_iter(Axis(0), 1).into_par_iter())
        .enumerate()
        .for_each(|(it, (mut oslice, uslice))| {
            let t = grid.t_at(it);
            let o = oslice.as_slice_mut().expect("contiguous");
            let us = uslice.to_slice().expect("contiguous");
            let n_blocks = nv.pow(m as u32);
            let mut vidx = vec![0usize; m];
            for b in 0..n_blocks {
                let mut rem = b;
                for ax in (0..m).rev() {
                    vidx[ax] = rem % nv;
                    rem /= nv;
                }
                let v: Vec<f64> = vidx.iter().map(|&i| grid.v_at(i)).collect();
                let c = spec.c_at(t, &v);
                let d = spec.d_at(t, &v);
                let base = b * w_block;
                for q in 0..w_block {
                    o[base + q] = c * us[base + q];
                }
                for (axis, d_ax) in d.iter().enumerate() {
                    if *d_ax == 0.0 {
                        continue;
                    }
                    let s = nv.pow((m - 1 - axis) as u32) * w_block;
                    let j = vidx[axis];
                    let inv_2dv = 1.0 / (2.0 * grid.dv());
                    for q in 0..w_block {
                        let hi = if j + 1 < nv { us[base + s + q] } else { Complex64::default() };
                        let lo = if j > 0 { us[base - s + q] } else { Complex64::default() };
                        o[base + q] += *d_ax * (hi - lo) * inv_2dv;
                    }
                }
            }
        });
    Field::new(grid, out, Space::Physical)
}

/// Coefficients `β(t) = B1ᵀ e^{-t B2ᵀ} ρ` for every time node.
pub(crate) fn beta_profile(spec: &OperatorSpec, grid: &GridSpec, rho: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let b2t = spec.drift().b2().transpose();
    let b1t = spec.drift().b1().transpose();
    (0..grid.nt())
        .map(|it| {
            let e = linalg::mat_exp(&b2t, -grid.t_at(it))?;
            Ok(&b1t * (e * rho))
        })
        .collect()
}

fn p_tilde_impl(spec: &OperatorSpec, h: &SliceField, rho: &DVector<f64>, include_trace: bool) -> Result<SliceField> {
    check_grid(spec, h.grid())?;
    if rho.len() != spec.n() {
        return Err(CoreError::Dimension(format!("rho must have length n = {}, got {}", spec.n(), rho.len())));
    }
    support_check(h.values(), h.grid(), 0)?;
    let grid = h.grid().clone();
    let betas = beta_profile(spec, &grid, rho)?;
    let trace = if include_trace { spec.drift().tr_b2() } else { 0.0 };

    let mut out = time_derivative(h.values(), grid.dt());
    let m = grid.m();
    let nv = grid.nv();
    out.axis_chunks_iter_mut(Axis(0), 1)
        .into_par_iter()
        .zip(h.values().axis_chunks_iter(Axis(0), 1).into_par_iter())
        .enumerate()
        .for_each(|(it, (mut oslice, hslice))| {
            let t = grid.t_at(it);
            let beta = &betas[it];
            let o = oslice.as_slice_mut().expect("contiguous");
            let hs = hslice.to_slice().expect("contiguous");
            add_div_v_slab(o, hs, spec, &grid, t, 1);
            let n_blocks = nv.pow(m as u32);
            let mut vidx = vec![0usize; m];
            for b in 0..n_blocks {
                let mut rem = b;
                for ax in (0..m).rev() {
                    vidx[ax] = rem % nv;
                    rem /= nv;
                }
                let beta_dot_v: f64 = (0..m).map(|ax| beta[ax] * grid.v_at(vidx[ax])).sum();
                o[b] += Complex64::new(0.0, beta_dot_v) * hs[b] - 0.5 * trace * hs[b];
            }
        });
    SliceField::new(grid, out)
}

/// The conjugated operator on a fixed invariant frequency:
/// `P̃_ρ h = ∂t h + i(B1ᵀ e^{-tB2ᵀ} ρ)·v h + div_v(A ∇_v h) - ½(tr B2) h`.
pub fn apply_p_tilde(spec: &OperatorSpec, h: &SliceField, rho: &DVector<f64>) -> Result<SliceField> {
    p_tilde_impl(spec, h, rho, true)
}

/// `P̃⁰_ρ`, the conjugated operator without the trace term; the object the
/// energy decomposition is stated for.
pub fn apply_p_tilde0(spec: &OperatorSpec, h: &SliceField, rho: &DVector<f64>) -> Result<SliceField> {
    p_tilde_impl(spec, h, rho, false)
}

/// The split of `P̃⁰` conjugated by the weight: returns
/// `K1 h = ∂t h + i(B1ᵀ e^{-tB2ᵀ} ρ)·v h` (formally skew-symmetric) and
/// `K2 h = (α/(t+b)) h + div_v(A ∇_v h)` (formally self-adjoint).
pub fn apply_k_split(
    spec: &OperatorSpec,
    h: &SliceField,
    rho: &DVector<f64>,
    alpha: f64,
    b: f64,
) -> Result<(SliceField, SliceField)> {
    check_grid(spec, h.grid())?;
    if !(alpha >= 1.0) {
        return Err(CoreError::Validation(format!("alpha must be at least 1, got {alpha}")));
    }
    let grid = h.grid().clone();
    if !(b > 0.0 && b <= grid.t2()) {
        return Err(CoreError::Validation(format!("need 0 < b <= t2, got b = {b}")));
    }
    if rho.len() != spec.n() {
        return Err(CoreError::Dimension(format!("rho must have length n = {}, got {}", spec.n(), rho.len())));
    }
    support_check(h.values(), h.grid(), 0)?;
    let betas = beta_profile(spec, &grid, rho)?;

    let mut k1 = time_derivative(h.values(), grid.dt());
    let mut k2 = ndarray::ArrayD::<Complex64>::zeros(h.values().raw_dim());
    let m = grid.m();
    let nv = grid.nv();
    k1.axis_chunks_iter_mut(Axis(0), 1)
        .into_par_iter()
        .zip(k2.axis_chunks_iter_mut(Axis(0), 1).into_par_iter())
        .zip(h.values().axis_chunks_iter(Axis(0), 1).into_par_iter())
        .enumerate()
        .for_each(|(it, ((mut k1s, mut k2s), hslice))| {
            let t = grid.t_at(it);
            let beta = &betas[it];
            let k1f = k1s.as_slice_mut().expect("contiguous");
            let k2f = k2s.as_slice_mut().expect("contiguous");
            let hs = hslice.to_slice().expect("contiguous");
            add_div_v_slab(k2f, hs, spec, &grid, t, 1);
            let weight = alpha / (t + b);
            let n_blocks = nv.pow(m as u32);
            let mut vidx = vec![0usize; m];
            for bix in 0..n_blocks {
                let mut rem = bix;
                for ax in (0..m).rev() {
                    vidx[ax] = rem % nv;
                    rem /= nv;
                }
                let beta_dot_v: f64 = (0..m).map(|ax| beta[ax] * grid.v_at(vidx[ax])).sum();
                k1f[bix] += Complex64::new(0.0, beta_dot_v) * hs[bix];
                k2f[bix] += weight * hs[bix];
            }
        });
    Ok((SliceField::new(grid.clone(), k1)?, SliceField::new(grid, k2)?))
}
