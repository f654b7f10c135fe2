//! The unitary transform `T`, the projection `S_R`, and their lattice plan.

use std::io::Write;

use nalgebra::DVector;
use ndarray::parallel::prelude::*;
use ndarray::Axis;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::operator::{Field, GridSpec, Space};
use crate::spectral::fft::{Direction, WFft};
use crate::spectral::region::FrequencyRegion;

/// Precomputed per-time masks realizing `S_R` as a Fourier multiplier in the
/// original `η` variable with symbol `1_{U_R}(e^{t B2ᵀ} η)` — identical to
/// conjugating the sharp cutoff by `T`, but needing no frequency resampling.
pub struct TransformPlan {
    grid: GridSpec,
    region: FrequencyRegion,
    tr_b2: f64,
    /// `masks[it][flat η index]`
    masks: Vec<Vec<bool>>,
}

impl TransformPlan {
    pub fn new(grid: GridSpec, region: FrequencyRegion) -> Result<Self> {
        if grid.n() != region.drift().n() {
            return Err(CoreError::Dimension(format!(
                "grid has n = {}, region drift has n = {}",
                grid.n(),
                region.drift().n()
            )));
        }
        if (grid.t2() - region.t2()).abs() > 1e-12 * grid.t2() {
            return Err(CoreError::Validation(format!(
                "region horizon t2 = {} must match grid t2 = {}",
                region.t2(),
                grid.t2()
            )));
        }
        let n = grid.n();
        let nw = grid.nw();
        let lattice = nw.pow(n as u32);
        let b2t = region.drift().b2().transpose();

        let masks: Vec<Vec<bool>> = (0..grid.nt())
            .into_par_iter()
            .map(|it| {
                let t = grid.t_at(it);
                let flow = crate::linalg::mat_exp(&b2t, t).expect("drift matrices are finite");
                let mut mask = vec![false; lattice];
                let mut eta = DVector::zeros(n);
                for (k, slot) in mask.iter_mut().enumerate() {
                    let mut rem = k;
                    for ax in (0..n).rev() {
                        eta[ax] = grid.eta_at(rem % nw);
                        rem /= nw;
                    }
                    let rho = &flow * &eta;
                    *slot = region.member_fast(&rho);
                }
                mask
            })
            .collect();

        Ok(Self {
            tr_b2: region.drift().tr_b2(),
            grid,
            region,
            masks,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn region(&self) -> &FrequencyRegion {
        &self.region
    }

    pub fn tr_b2(&self) -> f64 {
        self.tr_b2
    }

    pub fn mask(&self, it: usize) -> &[bool] {
        &self.masks[it]
    }

    /// Fraction of lattice points kept at time index `it`.
    pub fn mask_fill(&self, it: usize) -> f64 {
        let kept = self.masks[it].iter().filter(|&&b| b).count();
        kept as f64 / self.masks[it].len() as f64
    }

    /// Invariant frequency carried by lattice point `k` (flat index) at time
    /// index `it`: `ρ = e^{t B2ᵀ} η_k`.
    pub fn rho_at(&self, it: usize, k: usize) -> Result<DVector<f64>> {
        let n = self.grid.n();
        let nw = self.grid.nw();
        let mut eta = DVector::zeros(n);
        let mut rem = k;
        for ax in (0..n).rev() {
            eta[ax] = self.grid.eta_at(rem % nw);
            rem /= nw;
        }
        let flow = crate::linalg::mat_exp(&self.region.drift().b2().transpose(), self.grid.t_at(it))?;
        Ok(flow * eta)
    }

    /// CSV dump of the masks: `t_index, eta_0, …, eta_{n-1}, bit`.
    pub fn dump_masks_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let n = self.grid.n();
        let nw = self.grid.nw();
        let mut header = String::from("t_index");
        for ax in 0..n {
            header.push_str(&format!(",eta_{ax}"));
        }
        header.push_str(",bit");
        writeln!(out, "{header}")?;
        for (it, mask) in self.masks.iter().enumerate() {
            for (k, &bit) in mask.iter().enumerate() {
                let mut rem = k;
                let mut idx = vec![0usize; n];
                for ax in (0..n).rev() {
                    idx[ax] = rem % nw;
                    rem /= nw;
                }
                write!(out, "{it}")?;
                for ax in 0..n {
                    write!(out, ",{}", self.grid.eta_index(idx[ax]))?;
                }
                writeln!(out, ",{}", if bit { 1 } else { 0 })?;
            }
        }
        Ok(())
    }

    /// `L²` norm of one time slice of a `T`-transformed field in the ρ-space
    /// measure: the relabeling Jacobian `e^{t·tr B2}` weights each cell.
    pub fn t_slice_norm(&self, field: &Field, it: usize) -> f64 {
        let jac = (self.grid.t_at(it) * self.tr_b2).exp();
        field.slice_l2_norm(it) * jac.sqrt()
    }
}

/// Unitary Fourier transform in the degenerate variables; forward requires a
/// physical-space field, inverse a frequency-space one.
pub fn fourier_w(u: &Field, direction: Direction) -> Result<Field> {
    match (direction, u.space()) {
        (Direction::Forward, Space::Physical) | (Direction::Inverse, Space::Frequency) => {}
        (Direction::Forward, other) => {
            return Err(CoreError::State(format!("fourier_w forward expects a physical-space field, got {other:?}")))
        }
        (Direction::Inverse, other) => {
            return Err(CoreError::State(format!("fourier_w inverse expects a frequency-space field, got {other:?}")))
        }
    }
    let grid = u.grid().clone();
    let wfft = WFft::new(grid.n(), grid.nw());
    let mut values = u.values().clone();
    wfft.transform(&mut values, direction);
    let space = match direction {
        Direction::Forward => Space::Frequency,
        Direction::Inverse => Space::Physical,
    };
    Field::new(grid, values, space)
}

/// Apply the unitary transform `T`: per-slice Fourier transform in `w`
/// scaled by `e^{-½ t·tr B2}`, with the η-lattice point `η` relabeled as
/// carrying the value at `ρ = e^{t B2ᵀ} η` (no resampling — the relabeling
/// map lives in the plan). The inverse undoes both.
pub fn apply_t(u: &Field, plan: &TransformPlan, direction: Direction) -> Result<Field> {
    let grid = u.grid();
    if grid != plan.grid() {
        return Err(CoreError::Dimension("field grid does not match plan grid".into()));
    }
    match direction {
        Direction::Forward => {
            if u.space() != Space::Physical {
                return Err(CoreError::State("apply_t forward expects a physical-space field".into()));
            }
            let mut out = fourier_w(u, Direction::Forward)?;
            scale_slices(&mut out, |t| (-0.5 * t * plan.tr_b2).exp());
            out.set_space(Space::InvariantFrequency);
            Ok(out)
        }
        Direction::Inverse => {
            if u.space() != Space::InvariantFrequency {
                return Err(CoreError::State("apply_t inverse expects an invariant-frequency field".into()));
            }
            let mut scaled = u.clone();
            scale_slices(&mut scaled, |t| (0.5 * t * plan.tr_b2).exp());
            scaled.set_space(Space::Frequency);
            fourier_w(&scaled, Direction::Inverse)
        }
    }
}

fn scale_slices(field: &mut Field, factor: impl Fn(f64) -> f64 + Sync) {
    let grid = field.grid().clone();
    field
        .values_mut()
        .axis_chunks_iter_mut(Axis(0), 1)
        .into_par_iter()
        .enumerate()
        .for_each(|(it, mut slice)| {
            let f = factor(grid.t_at(it));
            for x in slice.iter_mut() {
                *x *= f;
            }
        });
}

/// Apply the low-frequency projection `S_R`.
///
/// Physical input: Fourier forward, multiply by the time-dependent mask,
/// Fourier inverse. Frequency input: mask only (kept modes bit-identical,
/// killed modes set to zero), so the projection law `S_R² = S_R` is exact.
pub fn apply_s_r(u: &Field, plan: &TransformPlan) -> Result<Field> {
    let grid = u.grid();
    if grid != plan.grid() {
        return Err(CoreError::Dimension("field grid does not match plan grid".into()));
    }
    match u.space() {
        Space::Physical => {
            let mut freq = fourier_w(u, Direction::Forward)?;
            mask_in_place(&mut freq, plan);
            fourier_w(&freq, Direction::Inverse)
        }
        Space::Frequency => {
            let mut out = u.clone();
            mask_in_place(&mut out, plan);
            Ok(out)
        }
        Space::InvariantFrequency => Err(CoreError::State(
            "apply_s_r expects a physical or plain frequency field; invert T first".into(),
        )),
    }
}

fn mask_in_place(freq: &mut Field, plan: &TransformPlan) {
    let slab = freq.grid().slab_len();
    let lattice = plan.masks[0].len();
    let v_blocks = slab / lattice;
    freq.values_mut()
        .as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(slab)
        .enumerate()
        .for_each(|(it, chunk)| {
            let mask = &plan.masks[it];
            for vb in 0..v_blocks {
                let base = vb * lattice;
                for (k, &keep) in mask.iter().enumerate() {
                    if !keep {
                        chunk[base + k] = Complex64::default();
                    }
                }
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DriftPair;
    use ndarray::IxDyn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_physical(grid: &GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = ndarray::ArrayD::from_shape_fn(IxDyn(&grid.shape()), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        Field::new(grid.clone(), values, Space::Physical).unwrap()
    }

    fn jerk_plan(r: f64) -> (GridSpec, TransformPlan) {
        let grid = GridSpec::new(1, 3, 0.4, 16, 1.0, 16, 1.0, 8).unwrap();
        let region = FrequencyRegion::new(DriftPair::jerk(), r, 0.1, 0.4).unwrap();
        let plan = TransformPlan::new(grid.clone(), region).unwrap();
        (grid, plan)
    }

    #[test]
    fn fourier_roundtrip_on_random_fields() {
        let grid = GridSpec::new(1, 2, 0.5, 16, 1.0, 16, 1.0, 16).unwrap();
        for seed in 0..5 {
            let u = random_physical(&grid, seed);
            let hat = fourier_w(&u, Direction::Forward).unwrap();
            let back = fourier_w(&hat, Direction::Inverse).unwrap();
            let num: f64 = back
                .values()
                .iter()
                .zip(u.values().iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(num <= 1e-12 * u.l2_norm() / (grid.dt() * grid.cell_volume()).sqrt());
            assert!((hat.l2_norm() - u.l2_norm()).abs() <= 1e-12 * u.l2_norm());
        }
    }

    #[test]
    fn t_is_unitary_per_slice() {
        let (grid, plan) = jerk_plan(0.5);
        let u = random_physical(&grid, 3);
        let tu = apply_t(&u, &plan, Direction::Forward).unwrap();
        for it in 0..grid.nt() {
            let phys = u.slice_l2_norm(it);
            let trans = plan.t_slice_norm(&tu, it);
            assert!((phys - trans).abs() <= 1e-10 * phys.max(1e-300), "slice {it}: {phys} vs {trans}");
        }
        let back = apply_t(&tu, &plan, Direction::Inverse).unwrap();
        let err: f64 = back
            .values()
            .iter()
            .zip(u.values().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-10 * u.max_abs() * (u.values().len() as f64).sqrt());
    }

    #[test]
    fn s_r_idempotent_bitwise_in_frequency_space() {
        let (grid, plan) = jerk_plan(0.3);
        let u = random_physical(&grid, 4);
        let freq = fourier_w(&u, Direction::Forward).unwrap();
        let once = apply_s_r(&freq, &plan).unwrap();
        let twice = apply_s_r(&once, &plan).unwrap();
        for (a, b) in once.values().iter().zip(twice.values().iter()) {
            assert!(a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
        }
    }

    #[test]
    fn s_r_norm_nonincreasing_and_near_idempotent_in_physical_space() {
        let (grid, plan) = jerk_plan(0.3);
        let u = random_physical(&grid, 5);
        let once = apply_s_r(&u, &plan).unwrap();
        assert!(once.l2_norm() <= u.l2_norm() * (1.0 + 1e-12));
        let twice = apply_s_r(&once, &plan).unwrap();
        let err: f64 = once
            .values()
            .iter()
            .zip(twice.values().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = once.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn s_r_saturates_to_identity_at_large_r() {
        // choose R above the lattice maximum of the sup function
        let grid = GridSpec::new(1, 2, 0.4, 16, 1.0, 16, 1.0, 8).unwrap();
        let drift = DriftPair::l1();
        let mut worst: f64 = 0.0;
        let probe_region = FrequencyRegion::new(drift.clone(), 1.0, 0.1, 0.4).unwrap();
        for it in 0..grid.nt() {
            for k in 0..64 {
                let eta = DVector::from_vec(vec![grid.eta_at(k / 8), grid.eta_at(k % 8)]);
                let rho = crate::spectral::rho::rho_map(&drift, grid.t_at(it), &eta, crate::spectral::rho::RhoDirection::ToRho)
                    .unwrap();
                worst = worst.max(probe_region.membership(&rho).unwrap().sup_value);
            }
        }
        let region = FrequencyRegion::new(drift, worst * 2.0, 0.1, 0.4).unwrap();
        let plan = TransformPlan::new(grid.clone(), region).unwrap();
        let u = random_physical(&grid, 6);
        let projected = apply_s_r(&u, &plan).unwrap();
        let err: f64 = projected
            .values()
            .iter()
            .zip(u.values().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = u.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * scale, "S_R at saturating R must be the identity up to roundtrip");
        for it in 0..grid.nt() {
            assert_eq!(plan.mask_fill(it), 1.0);
        }
    }

    #[test]
    fn dc_mode_survives_tiny_r() {
        let (_, plan) = jerk_plan(1e-12);
        for it in 0..plan.grid().nt() {
            assert!(plan.mask(it)[0], "DC mode has sup_fn = 0 and always survives");
        }
    }
}
