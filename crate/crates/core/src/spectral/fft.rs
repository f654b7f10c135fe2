//! Unitary discrete Fourier transform along the degenerate axes.
//!
//! Conventions. With `w_j = -L + j·dw` and `η_k = (π/L)·k̃` (wraparound signed
//! index `k̃`), the samples of the continuum transform with kernel
//! `e^{-i w·η}` differ from the plain DFT by the per-axis phase `(-1)^k̃`
//! and a positive constant. The forward transform here is the plain DFT
//! scaled by `1/√N` per axis followed by that sign flip, so transformed
//! values are honest samples of the continuum transform up to one positive
//! constant. The transform is exactly unitary on the lattice, and — unlike
//! the phase-free variant — derivative stencils in `η` act on smooth data.

use std::sync::Arc;

use ndarray::parallel::prelude::*;
use ndarray::{ArrayD, ArrayViewMut1, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

/// Forward or inverse transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Planned unitary DFT over the trailing `n_axes` axes, each of length `size`.
pub struct WFft {
    n_axes: usize,
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl WFft {
    pub fn new(n_axes: usize, size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n_axes,
            size,
            fwd: planner.plan_fft(size, FftDirection::Forward),
            inv: planner.plan_fft(size, FftDirection::Inverse),
        }
    }

    pub fn n_axes(&self) -> usize {
        self.n_axes
    }

    /// Transform all `n_axes` trailing axes of `arr` in place.
    pub fn transform(&self, arr: &mut ArrayD<Complex64>, dir: Direction) {
        let ndim = arr.ndim();
        assert!(ndim >= self.n_axes, "array has fewer axes than the transform");
        for i in 0..self.n_axes {
            let axis = ndim - self.n_axes + i;
            self.transform_axis(arr, axis, dir);
        }
    }

    /// Transform one axis of `arr` in place.
    pub fn transform_axis(&self, arr: &mut ArrayD<Complex64>, axis: usize, dir: Direction) {
        let n = self.size;
        assert_eq!(arr.shape()[axis], n, "axis length mismatch");
        let scale = 1.0 / (n as f64).sqrt();
        let fft = match dir {
            Direction::Forward => &self.fwd,
            Direction::Inverse => &self.inv,
        };
        let apply = |mut lane: ArrayViewMut1<Complex64>, buf: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>| {
            buf.clear();
            buf.extend(lane.iter().copied());
            match dir {
                Direction::Forward => {
                    fft.process_with_scratch(buf, scratch);
                    for (k, x) in buf.iter_mut().enumerate() {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        *x *= sign * scale;
                    }
                }
                Direction::Inverse => {
                    for (k, x) in buf.iter_mut().enumerate() {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        *x *= sign * scale;
                    }
                    fft.process_with_scratch(buf, scratch);
                }
            }
            for (dst, src) in lane.iter_mut().zip(buf.iter()) {
                *dst = *src;
            }
        };

        if axis == 0 {
            let mut buf = Vec::with_capacity(n);
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for lane in arr.lanes_mut(Axis(axis)) {
                apply(lane, &mut buf, &mut scratch);
            }
        } else {
            // parallel over leading-axis chunks; lanes within a chunk are disjoint
            arr.axis_chunks_iter_mut(Axis(0), 1).into_par_iter().for_each(|mut chunk| {
                let mut buf = Vec::with_capacity(n);
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                for lane in chunk.lanes_mut(Axis(axis)) {
                    apply(lane, &mut buf, &mut scratch);
                }
            });
        }
    }

    /// Multiply every lane element along `axis` by `factors[k]` in place.
    pub fn scale_axis(arr: &mut ArrayD<Complex64>, axis: usize, factors: &[Complex64]) {
        assert_eq!(arr.shape()[axis], factors.len());
        if axis == 0 {
            for mut lane in arr.lanes_mut(Axis(axis)) {
                for (x, f) in lane.iter_mut().zip(factors) {
                    *x *= *f;
                }
            }
        } else {
            arr.axis_chunks_iter_mut(Axis(0), 1).into_par_iter().for_each(|mut chunk| {
                for mut lane in chunk.lanes_mut(Axis(axis)) {
                    for (x, f) in lane.iter_mut().zip(factors) {
                        *x *= *f;
                    }
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(shape: &[usize], seed: u64) -> ArrayD<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ArrayD::from_shape_fn(IxDyn(shape), |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    /// Direct O(N²) unitary transform with the e^{-i w·η} kernel sampled on
    /// the lattice, for a 1-D lane starting at w = -L.
    fn direct_dft(lane: &[Complex64]) -> Vec<Complex64> {
        let n = lane.len();
        let scale = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| {
                let ktilde = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
                let mut acc = Complex64::default();
                for (j, &u) in lane.iter().enumerate() {
                    // w_j·η_k with w_j = -L + j·dw, η = π k̃/L: phase = -π k̃ + 2π jk̃/N
                    let phase = -(std::f64::consts::PI) * ktilde as f64
                        + 2.0 * std::f64::consts::PI * (j as f64) * (ktilde as f64) / (n as f64);
                    acc += u * Complex64::from_polar(1.0, -phase);
                }
                acc * scale
            })
            .collect()
    }

    #[test]
    fn matches_direct_transform_on_16_points() {
        let mut arr = random_field(&[16], 7);
        let lane: Vec<Complex64> = arr.iter().copied().collect();
        let expected = direct_dft(&lane);
        let w = WFft::new(1, 16);
        w.transform(&mut arr, Direction::Forward);
        for (got, want) in arr.iter().zip(&expected) {
            assert!((got - want).norm() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn roundtrip_and_plancherel() {
        let w = WFft::new(2, 16);
        let orig = random_field(&[4, 8, 16, 16], 8);
        let mut arr = orig.clone();
        w.transform(&mut arr, Direction::Forward);
        let norm_freq: f64 = arr.iter().map(|z| z.norm_sqr()).sum();
        let norm_phys: f64 = orig.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm_freq - norm_phys).abs() <= 1e-12 * norm_phys);
        w.transform(&mut arr, Direction::Inverse);
        let err: f64 = arr.iter().zip(orig.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * norm_phys.sqrt());
    }

    #[test]
    fn constant_maps_to_dc_delta() {
        let w = WFft::new(1, 32);
        let mut arr = ArrayD::from_elem(IxDyn(&[32]), Complex64::new(1.0, 0.0));
        w.transform(&mut arr, Direction::Forward);
        assert!((arr[[0]].re - 32f64.sqrt()).abs() < 1e-12);
        for k in 1..32 {
            assert!(arr[[k]].norm() < 1e-12);
        }
    }

    #[test]
    fn lattice_mode_maps_to_single_bin() {
        // u = e^{i k·w} on the lattice lands on bin k (orthogonality)
        let n = 16;
        let l = 2.0;
        let dw = 2.0 * l / n as f64;
        let kt = 3i64;
        let eta = std::f64::consts::PI / l * kt as f64;
        let mut arr = ArrayD::from_shape_fn(IxDyn(&[n]), |ix| {
            let wj = -l + ix[0] as f64 * dw;
            Complex64::from_polar(1.0, eta * wj)
        });
        let w = WFft::new(1, n);
        w.transform(&mut arr, Direction::Forward);
        for k in 0..n {
            let expect = if k == kt as usize { (n as f64).sqrt() } else { 0.0 };
            assert!(
                (arr[[k]].norm() - expect).abs() < 1e-10,
                "bin {k}: {}",
                arr[[k]]
            );
        }
        // and the surviving bin carries no spurious phase
        assert!((arr[[kt as usize]].re - (n as f64).sqrt()).abs() < 1e-10);
        assert!(arr[[kt as usize]].im.abs() < 1e-10);
    }
}
