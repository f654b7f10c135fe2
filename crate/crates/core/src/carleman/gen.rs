//! Seeded smooth compactly supported test functions.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::operator::{Field, GridSpec, SliceField, Space};

/// Test-function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFnKind {
    /// Product of the standard flat bump `e^{-1/(1-s²)}` per axis.
    BumpProduct,
    /// Bump product modulated by plane waves in `v` and on the `w` lattice.
    ModulatedBump,
    /// Bump envelope times a band-limited random Fourier sum with a smooth
    /// spectral taper.
    RandomBandLimited,
}

/// Generation options beyond the kind; the defaults reproduce the plain
/// spec'd form of each kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenOptions {
    pub kind: TestFnKind,
    /// Wavenumber of the `e^{iκ v₁}` modulation (modulated kind only).
    pub v_wavenumber: f64,
    /// Whether `w` axes carry a compact bump envelope (otherwise the field is
    /// merely smooth and periodic in `w`).
    pub w_envelope: bool,
    /// Largest lattice mode (per axis) of the `w` modulation.
    pub w_mode_max: i64,
    /// Relative amplitude of the seeded low-mode shape dressing.
    pub dressing: f64,
    /// Fraction of each axis containing the support (`0.6` = middle 60%).
    pub support_frac: f64,
}

impl GenOptions {
    pub fn new(kind: TestFnKind) -> Self {
        Self {
            kind,
            v_wavenumber: match kind {
                TestFnKind::ModulatedBump => 40.0,
                _ => 0.0,
            },
            w_envelope: true,
            w_mode_max: 3,
            dressing: match kind {
                TestFnKind::BumpProduct => 0.0,
                _ => 0.15,
            },
            support_frac: 0.6,
        }
    }

    pub fn with_v_wavenumber(mut self, k: f64) -> Self {
        self.v_wavenumber = k;
        self
    }

    pub fn with_w_envelope(mut self, on: bool) -> Self {
        self.w_envelope = on;
        self
    }

    pub fn with_support_frac(mut self, frac: f64) -> Self {
        self.support_frac = frac;
        self
    }
}

/// The standard flat bump, `e^{-1/(1-s²)}` inside `|s| < 1`, zero outside.
pub fn std_bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn check_resolution(grid: &GridSpec, frac: f64, with_w_envelope: bool) -> Result<()> {
    let min_cells = 12.0;
    if frac * grid.nt() as f64 * 0.85 < min_cells {
        return Err(CoreError::Validation(format!(
            "grid too coarse: support covers fewer than 12 time samples (nt = {})",
            grid.nt()
        )));
    }
    if frac * grid.nv() as f64 * 0.85 < min_cells {
        return Err(CoreError::Validation(format!(
            "grid too coarse: support covers fewer than 12 v cells (nv = {})",
            grid.nv()
        )));
    }
    if with_w_envelope && frac * grid.nw() as f64 * 0.85 < min_cells {
        return Err(CoreError::Validation(format!(
            "grid too coarse: support covers fewer than 12 w cells (nw = {})",
            grid.nw()
        )));
    }
    Ok(())
}

struct AxisProfiles {
    t: Vec<Complex64>,
    v: Vec<Vec<Complex64>>,
    w: Vec<Vec<Complex64>>,
}

/// Per-axis profiles whose outer product is the test function; every kind is
/// separable, which keeps generation cheap and the support exact.
fn build_profiles(grid: &GridSpec, opts: &GenOptions, seed: u64, with_w: bool) -> Result<AxisProfiles> {
    check_resolution(grid, opts.support_frac, with_w && opts.w_envelope)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = 0.5 + rng.gen_range(0.0..1.0);
    let width = opts.support_frac * (0.85 + 0.15 * rng.gen_range(0.0..1.0));

    // time envelope
    let half_t = width * grid.t2() / 2.0;
    let mut t_profile: Vec<Complex64> = (0..grid.nt())
        .map(|k| {
            let s = (grid.t_at(k) - grid.t2() / 2.0) / half_t;
            Complex64::new(amp * std_bump(s), 0.0)
        })
        .collect();

    // v profiles
    let mut v_profiles: Vec<Vec<Complex64>> = (0..grid.m())
        .map(|_| {
            (0..grid.nv())
                .map(|i| Complex64::new(std_bump(grid.v_at(i) / (width * grid.lv())), 0.0))
                .collect()
        })
        .collect();

    // w profiles
    let mut w_profiles: Vec<Vec<Complex64>> = if with_w {
        (0..grid.n())
            .map(|_| {
                (0..grid.nw())
                    .map(|k| {
                        if opts.w_envelope {
                            Complex64::new(std_bump(grid.w_at(k) / (width * grid.lw())), 0.0)
                        } else {
                            Complex64::new(1.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };

    match opts.kind {
        TestFnKind::BumpProduct => {}
        TestFnKind::ModulatedBump => {
            let phase = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            if opts.v_wavenumber != 0.0 {
                let kappa = opts.v_wavenumber / grid.lv();
                for (i, x) in v_profiles[0].iter_mut().enumerate() {
                    *x *= Complex64::from_polar(1.0, kappa * grid.v_at(i) + phase);
                }
            }
            if with_w {
                for profile in w_profiles.iter_mut() {
                    let mode = rng.gen_range(-opts.w_mode_max..=opts.w_mode_max) as f64;
                    let eta = std::f64::consts::PI / grid.lw() * mode;
                    for (k, x) in profile.iter_mut().enumerate() {
                        *x *= Complex64::from_polar(1.0, eta * grid.w_at(k));
                    }
                }
            }
            if opts.dressing > 0.0 {
                dress(&mut t_profile, grid.t2(), opts.dressing, &mut rng);
                dress_axis_v(&mut v_profiles[0], grid, opts.dressing, &mut rng);
            }
        }
        TestFnKind::RandomBandLimited => {
            // random low-mode sums with Gaussian taper, on the bump envelope
            for profile in v_profiles.iter_mut() {
                let mut sum = vec![Complex64::default(); grid.nv()];
                for mode in -3i64..=3 {
                    let taper = (-((mode as f64 / 2.0).powi(2))).exp();
                    let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * taper;
                    let k = std::f64::consts::PI / grid.lv() * mode as f64;
                    for (i, s) in sum.iter_mut().enumerate() {
                        *s += c * Complex64::from_polar(1.0, k * grid.v_at(i));
                    }
                }
                for (i, x) in profile.iter_mut().enumerate() {
                    *x *= Complex64::new(1.0, 0.0) + 0.5 * sum[i];
                }
            }
            for profile in w_profiles.iter_mut() {
                let mut sum = vec![Complex64::default(); grid.nw()];
                for mode in -opts.w_mode_max..=opts.w_mode_max {
                    let taper = (-((mode as f64 / 2.0).powi(2))).exp();
                    let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * taper;
                    let eta = std::f64::consts::PI / grid.lw() * mode as f64;
                    for (k, s) in sum.iter_mut().enumerate() {
                        *s += c * Complex64::from_polar(1.0, eta * grid.w_at(k));
                    }
                }
                for (k, x) in profile.iter_mut().enumerate() {
                    *x *= Complex64::new(1.0, 0.0) + 0.5 * sum[k];
                }
            }
            dress(&mut t_profile, grid.t2(), opts.dressing, &mut rng);
        }
    }

    Ok(AxisProfiles { t: t_profile, v: v_profiles, w: w_profiles })
}

/// Multiply a time profile by a seeded low-mode dressing `1 + a·Σ c_j cos`.
fn dress(profile: &mut [Complex64], t2: f64, amp: f64, rng: &mut ChaCha8Rng) {
    let coeffs: Vec<(f64, f64)> = (1..=2).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.28))).collect();
    let nt = profile.len();
    for (k, x) in profile.iter_mut().enumerate() {
        let t = t2 * k as f64 / (nt - 1) as f64;
        let mut d = 0.0;
        for (j, (c, ph)) in coeffs.iter().enumerate() {
            d += c * ((j as f64 + 1.0) * std::f64::consts::PI * t / t2 + ph).cos();
        }
        *x *= 1.0 + amp * d;
    }
}

fn dress_axis_v(profile: &mut [Complex64], grid: &GridSpec, amp: f64, rng: &mut ChaCha8Rng) {
    let coeffs: Vec<(f64, f64)> = (1..=2).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.28))).collect();
    for (i, x) in profile.iter_mut().enumerate() {
        let v = grid.v_at(i);
        let mut d = 0.0;
        for (j, (c, ph)) in coeffs.iter().enumerate() {
            d += c * ((j as f64 + 1.0) * std::f64::consts::PI * v / grid.lv() + ph).cos();
        }
        *x *= 1.0 + amp * d;
    }
}

/// Generate a full field (deterministic per seed).
pub fn gen_field(grid: &GridSpec, opts: &GenOptions, seed: u64) -> Result<Field> {
    let p = build_profiles(grid, opts, seed, true)?;
    let shape = grid.shape();
    let m = grid.m();
    let values = ArrayD::from_shape_fn(IxDyn(&shape), |ix| {
        let mut val = p.t[ix[0]];
        for ax in 0..m {
            val *= p.v[ax][ix[1 + ax]];
        }
        for ax in 0..grid.n() {
            val *= p.w[ax][ix[1 + m + ax]];
        }
        val
    });
    Field::new(grid.clone(), values, Space::Physical)
}

/// Generate a time-v slice field (deterministic per seed).
pub fn gen_slice(grid: &GridSpec, opts: &GenOptions, seed: u64) -> Result<SliceField> {
    let p = build_profiles(grid, opts, seed, false)?;
    let shape = grid.slice_shape();
    let m = grid.m();
    let values = ArrayD::from_shape_fn(IxDyn(&shape), |ix| {
        let mut val = p.t[ix[0]];
        for ax in 0..m {
            val *= p.v[ax][ix[1 + ax]];
        }
        val
    });
    SliceField::new(grid.clone(), values)
}

/// Spec'd entry point: `kind` + `seed` + `with_w` with default options.
pub fn gen_test_function(grid: &GridSpec, kind: TestFnKind, seed: u64, with_w: bool) -> Result<(Option<Field>, Option<SliceField>)> {
    let opts = GenOptions::new(kind);
    if with_w {
        Ok((Some(gen_field(grid, &opts, seed)?), None))
    } else {
        Ok((None, Some(gen_slice(grid, &opts, seed)?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(1, 2, 0.0125, 32, 1.0, 32, 1.0, 32).unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        let g = grid();
        let opts = GenOptions::new(TestFnKind::RandomBandLimited);
        let a = gen_field(&g, &opts, 42).unwrap();
        let b = gen_field(&g, &opts, 42).unwrap();
        for (x, y) in a.values().iter().zip(b.values().iter()) {
            assert!(x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
        }
        let c = gen_field(&g, &opts, 43).unwrap();
        assert!(a.values().iter().zip(c.values().iter()).any(|(x, y)| x != y));
    }

    #[test]
    fn compact_support_at_time_endpoints() {
        let g = grid();
        for kind in [TestFnKind::BumpProduct, TestFnKind::ModulatedBump, TestFnKind::RandomBandLimited] {
            let f = gen_field(&g, &GenOptions::new(kind), 7).unwrap();
            assert_eq!(f.slice_l2_norm(0), 0.0);
            assert_eq!(f.slice_l2_norm(g.nt() - 1), 0.0);
        }
    }

    #[test]
    fn bump_l2_norm_matches_quadrature_oracle() {
        // 1-D: ∫ bump(s)² ds on [-1, 1] by adaptive-ish dense Simpson
        let n = 20001usize;
        let h = 2.0 / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s = -1.0 + i as f64 * h;
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * std_bump(s).powi(2);
        }
        let oracle = acc * h / 3.0;

        // unit-amplitude bump sampled on 128 points over [-1, 1]
        let m = 128usize;
        let dv = 2.0 / m as f64;
        let num: f64 = (0..m)
            .map(|i| {
                let v = -1.0 + (i as f64 + 0.5) * dv;
                std_bump(v).powi(2) * dv
            })
            .sum();
        assert!((num - oracle).abs() < 1e-6, "midpoint {num} vs oracle {oracle}");
    }

    #[test]
    fn too_coarse_grid_rejected() {
        let g = GridSpec::new(1, 1, 0.0125, 16, 1.0, 16, 1.0, 16).unwrap();
        // 0.6 * 16 * 0.85 ≈ 8 points across support: too few
        assert!(gen_slice(&g, &GenOptions::new(TestFnKind::BumpProduct), 0).is_err());
    }

    #[test]
    fn support_margins_satisfy_operator_preconditions() {
        let g = grid();
        let f = gen_field(&g, &GenOptions::new(TestFnKind::ModulatedBump), 3).unwrap();
        assert!(crate::operator::apply::apply_p(&crate::operator::OperatorSpec::l1(), &f).is_ok());
    }
}
