//! Lattice checks of the frequency-side identities: the conjugation of `P`
//! by the Fourier transform in `w`, and commutation of `S_R` with the
//! operator and the lower-order terms.

use ndarray::parallel::prelude::*;
use ndarray::{ArrayD, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::operator::kernels::{add_div_v_slab, time_derivative};
use crate::operator::{apply_lower_order, apply_p, Field, GridSpec, OperatorSpec, Space};
use crate::report::{CheckStatus, VerificationReport};
use crate::spectral::fft::Direction;
use crate::spectral::plan::{apply_s_r, fourier_w, TransformPlan};

/// Mass fraction on the Nyquist shell (any axis index with `|k̃| ≥ nw/2 - 1`).
fn nyquist_fraction(hat: &Field) -> f64 {
    let grid = hat.grid();
    let nw = grid.nw();
    let n = grid.n();
    let lattice = nw.pow(n as u32);
    let slab = grid.slab_len();
    let v_blocks = slab / lattice;
    let flat = hat.values().as_slice().expect("standard layout");
    let mut shell = 0.0;
    let mut total = 0.0;
    let is_shell: Vec<bool> = (0..nw)
        .map(|k| {
            let kt = grid.eta_index(k).unsigned_abs() as usize;
            kt >= nw / 2 - 1
        })
        .collect();
    for (i, z) in flat.iter().enumerate() {
        let mut rem = i % slab;
        rem %= lattice * v_blocks;
        let mut k = i % lattice;
        let mut on_shell = false;
        for _ in 0..n {
            if is_shell[k % nw] {
                on_shell = true;
                break;
            }
            k /= nw;
        }
        let _ = rem;
        let e = z.norm_sqr();
        total += e;
        if on_shell {
            shell += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        shell / total
    }
}

/// Fourth-order finite difference along η-axis `axis` (a degenerate axis of a
/// frequency-space array), computed in monotone η ordering with one-sided
/// closures at the lattice edges.
fn eta_derivative(values: &ArrayD<Complex64>, grid: &GridSpec, axis: usize) -> ArrayD<Complex64> {
    let nw = grid.nw();
    let d_eta = std::f64::consts::PI / grid.lw();
    // permutation from monotone position to storage index: negative k̃ first
    let perm: Vec<usize> = (nw / 2..nw).chain(0..nw / 2).collect();
    let mut out = ArrayD::<Complex64>::zeros(values.raw_dim());
    let h12 = 1.0 / (12.0 * d_eta);

    let apply_lane = |lane_in: &[Complex64], lane_out: &mut [Complex64]| {
        // gather to monotone order
        let g: Vec<Complex64> = perm.iter().map(|&p| lane_in[p]).collect();
        let mut d = vec![Complex64::default(); nw];
        for k in 0..nw {
            d[k] = match k {
                0 => (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) * h12,
                1 => (-3.0 * g[0] - 10.0 * g[1] + 18.0 * g[2] - 6.0 * g[3] + g[4]) * h12,
                k if k == nw - 2 => {
                    -(-3.0 * g[nw - 1] - 10.0 * g[nw - 2] + 18.0 * g[nw - 3] - 6.0 * g[nw - 4] + g[nw - 5]) * h12
                }
                k if k == nw - 1 => {
                    -(-25.0 * g[nw - 1] + 48.0 * g[nw - 2] - 36.0 * g[nw - 3] + 16.0 * g[nw - 4] - 3.0 * g[nw - 5])
                        * h12
                }
                _ => (-g[k + 2] + 8.0 * g[k + 1] - 8.0 * g[k - 1] + g[k - 2]) * h12,
            };
        }
        // scatter back to storage order
        for (mono, &p) in perm.iter().enumerate() {
            lane_out[p] = d[mono];
        }
    };

    // axis is never 0 (time); parallelize over time chunks
    out.axis_chunks_iter_mut(Axis(0), 1)
        .into_par_iter()
        .zip(values.axis_chunks_iter(Axis(0), 1).into_par_iter())
        .for_each(|(mut oc, ic)| {
            let mut lane_buf = vec![Complex64::default(); nw];
            ndarray::Zip::from(oc.lanes_mut(Axis(axis)))
                .and(ic.lanes(Axis(axis)))
                .for_each(|mut lo, li| {
                    let lin: Vec<Complex64> = li.iter().copied().collect();
                    apply_lane(&lin, &mut lane_buf);
                    for (dst, src) in lo.iter_mut().zip(&lane_buf) {
                        *dst = *src;
                    }
                });
        });
    out
}

/// Check the conjugation identity on the lattice: the transform of `P u`
/// against `[∂t - (B2ᵀη)·∇η + i(B1ᵀη)·v + div_v(A∇_v) - tr B2] û`.
///
/// The input must be band-limited (Nyquist-shell mass ≤ 1e-6 of total) so
/// the `∇η` stencil acts on resolved data; everything except the
/// `(B2ᵀη)·∇η` term cancels exactly in the discrete setting, so the reported
/// discrepancy isolates the frequency-transport approximation.
pub fn verify_conjugation(spec: &OperatorSpec, u: &Field, tol: f64) -> Result<VerificationReport> {
    if u.space() != Space::Physical {
        return Err(CoreError::State("verify_conjugation expects a physical-space field".into()));
    }
    let grid = u.grid().clone();
    let hat = fourier_w(u, Direction::Forward)?;
    let shell = nyquist_fraction(&hat);
    if shell > 1e-6 {
        return Err(CoreError::Validation(format!(
            "band-limitation precondition failed: Nyquist-shell mass fraction {shell:.3e} > 1e-6"
        )));
    }

    let lhs = fourier_w(&apply_p(spec, u)?, Direction::Forward)?;

    // right side, assembled on the η lattice
    let mut rhs = time_derivative(hat.values(), grid.dt());
    let n = grid.n();
    let m = grid.m();
    let nw = grid.nw();
    let nv = grid.nv();
    let b1 = spec.drift().b1();
    let b2 = spec.drift().b2();
    let tr_b2 = spec.drift().tr_b2();

    // -(B2ᵀ η)·∇η û: component a of B2ᵀη is Σ_b B2[b,a] η_b
    let lattice = nw.pow(n as u32);
    for a in 0..n {
        if (0..n).all(|b| b2[(b, a)] == 0.0) {
            continue;
        }
        let deriv = eta_derivative(hat.values(), &grid, 1 + m + a);
        let coeff: Vec<f64> = (0..lattice)
            .map(|k| {
                let mut rem = k;
                let mut acc = 0.0;
                for ax in (0..n).rev() {
                    acc += b2[(ax, a)] * grid.eta_at(rem % nw);
                    rem /= nw;
                }
                acc
            })
            .collect();
        let flat_rhs = rhs.as_slice_mut().expect("standard layout");
        let flat_d = deriv.as_slice().expect("standard layout");
        flat_rhs
            .par_chunks_mut(lattice)
            .zip(flat_d.par_chunks(lattice))
            .for_each(|(rc, dc)| {
                for k in 0..lattice {
                    rc[k] -= coeff[k] * dc[k];
                }
            });
    }

    // + i (B1ᵀ η)·v û - tr B2 · û
    {
        let flat_rhs = rhs.as_slice_mut().expect("standard layout");
        let flat_hat = hat.values().as_slice().expect("standard layout");
        let lattice = nw.pow(n as u32);
        let v_cells = nv.pow(m as u32);
        let slab = grid.slab_len();
        flat_rhs
            .par_chunks_mut(slab)
            .zip(flat_hat.par_chunks(slab))
            .for_each(|(rc, hc)| {
                for vb in 0..v_cells {
                    // decode v multi-index
                    let mut rem = vb;
                    let mut v = vec![0.0f64; m];
                    for ax in (0..m).rev() {
                        v[ax] = grid.v_at(rem % nv);
                        rem /= nv;
                    }
                    for k in 0..lattice {
                        let mut kk = k;
                        let mut b1tv = 0.0;
                        for ax in (0..n).rev() {
                            let ki = kk % nw;
                            kk /= nw;
                            let eta = grid.eta_at(ki);
                            // (B1ᵀ η)·v = Σ_j (Σ_a B1[a,j] η_a) v_j
                            for j in 0..m {
                                b1tv += b1[(ax, j)] * eta * v[j];
                            }
                        }
                        let idx = vb * lattice + k;
                        rc[idx] += Complex64::new(0.0, b1tv) * hc[idx] - tr_b2 * hc[idx];
                    }
                }
            });
    }

    // + div_v(A ∇_v û)
    {
        let flat_rhs = rhs.as_slice_mut().expect("standard layout");
        let flat_hat = hat.values().as_slice().expect("standard layout");
        let slab = grid.slab_len();
        let w_block = nw.pow(n as u32);
        flat_rhs
            .par_chunks_mut(slab)
            .zip(flat_hat.par_chunks(slab))
            .enumerate()
            .for_each(|(it, (rc, hc))| {
                add_div_v_slab(rc, hc, spec, &grid, grid.t_at(it), w_block);
            });
    }

    let num: f64 = lhs
        .values()
        .iter()
        .zip(rhs.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let rel = if den == 0.0 { 0.0 } else { num / den };
    let status = if rel <= tol { CheckStatus::Pass } else { CheckStatus::Fail };
    Ok(VerificationReport::new("conjugation", num, den, rel, status)
        .with_grid(grid.label())
        .with_param("tol", tol)
        .with_detail("nyquist_fraction", shell))
}

/// Check that `S_R` commutes with `P`, with `∇_v`, and with the lower-order
/// coefficients; spectral-in-`w` parts commute to machine precision while the
/// time-derivative cross term converges only with the time step (the mask is
/// time dependent on the lattice).
pub fn verify_commutation(spec: &OperatorSpec, u: &Field, plan: &TransformPlan, tol_exact: f64) -> Result<VerificationReport> {
    if u.space() != Space::Physical {
        return Err(CoreError::State("verify_commutation expects a physical-space field".into()));
    }
    let grid = u.grid().clone();

    let s_u = apply_s_r(u, plan)?;
    let p_s_u = apply_p(spec, &s_u)?;
    let s_p_u = apply_s_r(&apply_p(spec, u)?, plan)?;
    let rel_p = relative_diff(p_s_u.values(), s_p_u.values());

    let grad_s = grad_v_field(&s_u)?;
    let s_grad = apply_s_r(&grad_v_field(u)?, plan)?;
    let rel_grad = relative_diff(grad_s.values(), s_grad.values());

    let low_s = apply_lower_order(spec, &s_u)?;
    let s_low = apply_s_r(&apply_lower_order(spec, u)?, plan)?;
    let rel_low = relative_diff(low_s.values(), s_low.values());

    // the v- and coefficient-parts must commute to machine precision; the
    // P-commutator carries the O(dt) mask cross term and is reported only
    let exact_ok = rel_grad <= tol_exact && rel_low <= tol_exact;
    let status = if exact_ok { CheckStatus::Pass } else { CheckStatus::Fail };
    Ok(VerificationReport::new("commutation", rel_p, tol_exact, rel_p.max(rel_grad).max(rel_low), status)
        .with_grid(grid.label())
        .with_param("tol_exact", tol_exact)
        .with_detail("rel_p_commutator", rel_p)
        .with_detail("rel_grad_commutator", rel_grad)
        .with_detail("rel_lower_order_commutator", rel_low))
}

/// First diffusive-axis gradient of a full field (centered differences),
/// returned as a field; enough for the commutation diagnostics.
fn grad_v_field(u: &Field) -> Result<Field> {
    let grid = u.grid().clone();
    let w_block = grid.nw().pow(grid.n() as u32);
    let mut out = ArrayD::<Complex64>::zeros(u.values().raw_dim());
    let slab = grid.slab_len();
    out.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(slab)
        .zip(u.values().as_slice().expect("standard layout").par_chunks(slab))
        .for_each(|(oc, uc)| {
            let g = crate::operator::kernels::grad_v_slab(uc, &grid, 0, w_block);
            oc.copy_from_slice(&g);
        });
    Field::new(grid, out, Space::Physical)
}

fn relative_diff(a: &ArrayD<Complex64>, b: &ArrayD<Complex64>) -> f64 {
    let num: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}
