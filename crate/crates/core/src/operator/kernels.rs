//! Low-level discrete kernels shared by the operator applications.
//!
//! All kernels operate on flat slices in standard (C) layout. A "slab" is one
//! time slice, shape `[nv^m, W]` flattened, where `W` is the product of the
//! trailing degenerate axes (1 for time-v slice fields).

use ndarray::ArrayD;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::operator::{GridSpec, OperatorSpec};

/// Fourth-order finite difference in time along axis 0, one-sided closures at
/// the four edge samples.
pub(crate) fn time_derivative(values: &ArrayD<Complex64>, dt: f64) -> ArrayD<Complex64> {
    let nt = values.shape()[0];
    assert!(nt >= 5, "time stencil needs at least 5 samples");
    let chunk = values.len() / nt;
    let inp = values.as_slice().expect("standard layout");
    let mut out = ArrayD::<Complex64>::zeros(values.raw_dim());
    let h12 = 1.0 / (12.0 * dt);
    out.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(k, dst)| {
            let row = |j: usize| &inp[j * chunk..(j + 1) * chunk];
            match k {
                0 => {
                    let (f0, f1, f2, f3, f4) = (row(0), row(1), row(2), row(3), row(4));
                    for i in 0..chunk {
                        dst[i] = (-25.0 * f0[i] + 48.0 * f1[i] - 36.0 * f2[i] + 16.0 * f3[i] - 3.0 * f4[i]) * h12;
                    }
                }
                1 => {
                    let (f0, f1, f2, f3, f4) = (row(0), row(1), row(2), row(3), row(4));
                    for i in 0..chunk {
                        dst[i] = (-3.0 * f0[i] - 10.0 * f1[i] + 18.0 * f2[i] - 6.0 * f3[i] + f4[i]) * h12;
                    }
                }
                k if k == nt - 2 => {
                    let (f0, f1, f2, f3, f4) = (row(nt - 1), row(nt - 2), row(nt - 3), row(nt - 4), row(nt - 5));
                    for i in 0..chunk {
                        dst[i] = -(-3.0 * f0[i] - 10.0 * f1[i] + 18.0 * f2[i] - 6.0 * f3[i] + f4[i]) * h12;
                    }
                }
                k if k == nt - 1 => {
                    let (f0, f1, f2, f3, f4) = (row(nt - 1), row(nt - 2), row(nt - 3), row(nt - 4), row(nt - 5));
                    for i in 0..chunk {
                        dst[i] = -(-25.0 * f0[i] + 48.0 * f1[i] - 36.0 * f2[i] + 16.0 * f3[i] - 3.0 * f4[i]) * h12;
                    }
                }
                k => {
                    let (fm2, fm1, fp1, fp2) = (row(k - 2), row(k - 1), row(k + 1), row(k + 2));
                    for i in 0..chunk {
                        dst[i] = (-fp2[i] + 8.0 * fp1[i] - 8.0 * fm1[i] + fm2[i]) * h12;
                    }
                }
            }
        });
    out
}

pub(crate) const SUPPORT_MARGIN_CELLS: usize = 4;
pub(crate) const SUPPORT_REL_TOL: f64 = 1e-12;

/// Enforce the compact-support precondition: the field must decay below
/// `1e-12` of its max within 4 cells of every diffusive boundary and near
/// `t ∈ {0, t2}`. Violating fields are rejected, never silently truncated.
pub(crate) fn support_check(values: &ArrayD<Complex64>, grid: &GridSpec, n_w_axes: usize) -> Result<()> {
    let max = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(());
    }
    let tol = SUPPORT_REL_TOL * max;
    let nt = grid.nt();
    let chunk = values.len() / nt;
    let flat = values.as_slice().expect("standard layout");
    for k in (0..SUPPORT_MARGIN_CELLS).chain(nt - SUPPORT_MARGIN_CELLS..nt) {
        let worst = flat[k * chunk..(k + 1) * chunk].iter().map(|z| z.norm()).fold(0.0, f64::max);
        if worst > tol {
            return Err(CoreError::Support(format!(
                "time margin violated at slice {k}: |u| = {worst:.3e} > {tol:.3e} (1e-12 of max)"
            )));
        }
    }
    let ndim = values.ndim();
    let m = ndim - 1 - n_w_axes;
    for axis in 0..m {
        let nv = grid.nv();
        for j in (0..SUPPORT_MARGIN_CELLS).chain(nv - SUPPORT_MARGIN_CELLS..nv) {
            let view = values.index_axis(ndarray::Axis(1 + axis), j);
            let worst = view.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if worst > tol {
                return Err(CoreError::Support(format!(
                    "v-axis {axis} margin violated at cell {j}: |u| = {worst:.3e} > {tol:.3e} (1e-12 of max)"
                )));
            }
        }
    }
    Ok(())
}

/// Face coefficient `a_{ii}` on the staggered face `f` of axis `axis`
/// (face `f` sits between cells `f-1` and `f`, at `v = -lv + f·dv`).
pub(crate) fn face_coefficient(spec: &OperatorSpec, grid: &GridSpec, t: f64, vidx: &[usize], axis: usize, f: usize) -> f64 {
    let mut v: Vec<f64> = vidx.iter().map(|&i| grid.v_at(i)).collect();
    v[axis] = -grid.lv() + f as f64 * grid.dv();
    spec.a().eval_entry(t, &v, axis, axis)
}

/// Add `div_v(A ∇_v u)` for one time slab: conservative flux form per axis
/// with zero extension outside the box (fluxes at the domain faces use ghost
/// value 0), plus centered cross terms for non-diagonal constant matrices.
pub(crate) fn add_div_v_slab(
    out: &mut [Complex64],
    u: &[Complex64],
    spec: &OperatorSpec,
    grid: &GridSpec,
    t: f64,
    w_block: usize,
) {
    let m = grid.m();
    let nv = grid.nv();
    let dv = grid.dv();
    let inv_dv2 = 1.0 / (dv * dv);
    let n_blocks = nv.pow(m as u32);
    debug_assert_eq!(out.len(), n_blocks * w_block);

    // fast path m = 1: one face array per slab
    if m == 1 {
        let faces: Vec<f64> = (0..=nv)
            .map(|f| {
                let v = -grid.lv() + f as f64 * grid.dv();
                spec.a().eval_entry(t, &[v], 0, 0)
            })
            .collect();
        for j in 0..nv {
            let base = j * w_block;
            let a_lo = faces[j];
            let a_hi = faces[j + 1];
            for q in 0..w_block {
                let u_c = u[base + q];
                let u_lo = if j > 0 { u[base - w_block + q] } else { Complex64::default() };
                let u_hi = if j + 1 < nv { u[base + w_block + q] } else { Complex64::default() };
                out[base + q] += (a_hi * (u_hi - u_c) - a_lo * (u_c - u_lo)) * inv_dv2;
            }
        }
        return;
    }

    let diagonal_only = spec.a().is_diagonal();
    let mut vidx = vec![0usize; m];
    let stride = |axis: usize| nv.pow((m - 1 - axis) as u32) * w_block;
    for b in 0..n_blocks {
        // decode multi-index
        let mut rem = b;
        for axis in (0..m).rev() {
            vidx[axis] = rem % nv;
            rem /= nv;
        }
        let base = b * w_block;
        for axis in 0..m {
            let j = vidx[axis];
            let s = stride(axis);
            let a_lo = face_coefficient(spec, grid, t, &vidx, axis, j);
            let a_hi = face_coefficient(spec, grid, t, &vidx, axis, j + 1);
            for q in 0..w_block {
                let u_c = u[base + q];
                let u_lo = if j > 0 { u[base - s + q] } else { Complex64::default() };
                let u_hi = if j + 1 < nv { u[base + s + q] } else { Complex64::default() };
                out[base + q] += (a_hi * (u_hi - u_c) - a_lo * (u_c - u_lo)) * inv_dv2;
            }
        }
        if !diagonal_only {
            let v: Vec<f64> = vidx.iter().map(|&i| grid.v_at(i)).collect();
            for i_ax in 0..m {
                for j_ax in 0..m {
                    if i_ax == j_ax {
                        continue;
                    }
                    let a_ij = spec.a().eval_entry(t, &v, i_ax, j_ax);
                    if a_ij == 0.0 {
                        continue;
                    }
                    let si = stride(i_ax);
                    let sj = stride(j_ax);
                    let ji = vidx[i_ax];
                    let jj = vidx[j_ax];
                    let fetch = |di: isize, dj: isize, q: usize| -> Complex64 {
                        let ni = ji as isize + di;
                        let nj = jj as isize + dj;
                        if ni < 0 || ni >= nv as isize || nj < 0 || nj >= nv as isize {
                            Complex64::default()
                        } else {
                            let idx = (base as isize + di * si as isize + dj * sj as isize) as usize;
                            u[idx + q]
                        }
                    };
                    let c = a_ij / (4.0 * dv * dv);
                    for q in 0..w_block {
                        out[base + q] += (fetch(1, 1, q) - fetch(1, -1, q) - fetch(-1, 1, q) + fetch(-1, -1, q)) * c;
                    }
                }
            }
        }
    }
}

/// Centered second-order gradient of one slab along v-axis `axis`, zero
/// extension at the box faces.
pub(crate) fn grad_v_slab(u: &[Complex64], grid: &GridSpec, axis: usize, w_block: usize) -> Vec<Complex64> {
    let m = grid.m();
    let nv = grid.nv();
    let s = nv.pow((m - 1 - axis) as u32) * w_block;
    let inv_2dv = 1.0 / (2.0 * grid.dv());
    let n = u.len();
    let mut out = vec![Complex64::default(); n];
    for i in 0..n {
        let j = (i / s) % nv;
        let hi = if j + 1 < nv { u[i + s] } else { Complex64::default() };
        let lo = if j > 0 { u[i - s] } else { Complex64::default() };
        out[i] = (hi - lo) * inv_2dv;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Field, Space};
    use ndarray::IxDyn;

    #[test]
    fn time_derivative_exact_on_quartics() {
        // 4th-order stencils differentiate t^4 exactly
        let g = GridSpec::new(1, 1, 2.0, 21, 1.0, 16, 1.0, 16).unwrap();
        let vals = ArrayD::from_shape_fn(IxDyn(&[21, 16, 16]), |ix| {
            let t = g.t_at(ix[0]);
            Complex64::new(t.powi(4) - 2.0 * t.powi(2) + 3.0, 0.5 * t.powi(3))
        });
        let d = time_derivative(&vals, g.dt());
        for k in 0..21 {
            let t = g.t_at(k);
            let expect = Complex64::new(4.0 * t.powi(3) - 4.0 * t, 1.5 * t.powi(2));
            let got = d[[k, 0, 0]];
            assert!((got - expect).norm() < 1e-10, "k={k}: got {got}, want {expect}");
        }
    }

    #[test]
    fn support_check_flags_axis_and_location() {
        let g = GridSpec::new(1, 1, 1.0, 16, 1.0, 16, 1.0, 16).unwrap();
        let mut f = Field::zeros(g.clone(), Space::Physical);
        f.values_mut()[[8, 8, 0]] = Complex64::new(1.0, 0.0);
        assert!(support_check(f.values(), &g, 1).is_ok());
        f.values_mut()[[8, 1, 0]] = Complex64::new(0.5, 0.0);
        let err = support_check(f.values(), &g, 1).unwrap_err();
        assert!(format!("{err}").contains("v-axis 0"));
    }

    #[test]
    fn div_v_symmetric_negative() {
        // <div(A grad u), u> = -sum of face energies: check sign and symmetry
        let spec = OperatorSpec::heat();
        let g = GridSpec::new(1, 1, 1.0, 16, 1.0, 32, 1.0, 16).unwrap();
        let nv = 32;
        let u: Vec<Complex64> = (0..nv)
            .map(|j| Complex64::new((std::f64::consts::PI * g.v_at(j)).sin(), 0.3 * (2.0 * g.v_at(j)).cos()))
            .collect();
        let mut lu = vec![Complex64::default(); nv];
        add_div_v_slab(&mut lu, &u, &spec, &g, 0.0, 1);
        let quad: f64 = lu.iter().zip(&u).map(|(a, b)| (a * b.conj()).re).sum();
        assert!(quad < 0.0, "diffusion quadratic form must be negative, got {quad}");
    }
}
