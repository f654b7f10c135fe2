//! Dense matrix kernels for the coupled-drift machinery.
//!
//! Everything here operates on small matrices (`n ≤ 10` in practice): the
//! matrix exponential `e^{sM}`, the Kalman controllability block matrix
//! `[B1, B2 B1, …, B2^{n-1} B1]` and its numerical rank, exact drift
//! characteristics for `w' = B1 v + B2 w`, and the decay function
//!
//! ```text
//! ρ ↦ sup_t (t+b)^3 |B1ᵀ e^{-t B2ᵀ} ρ|^2
//! ```
//!
//! whose positivity on the unit sphere quantifies the rank condition.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

/// The coupled drift `(B1 v + B2 w)·∇w`: `B1` is `n×m`, `B2` is `n×n`.
///
/// Immutable after construction; dimensions are validated once.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftPair {
    m: usize,
    n: usize,
    b1: DMatrix<f64>,
    b2: DMatrix<f64>,
}

impl DriftPair {
    pub fn new(b1: DMatrix<f64>, b2: DMatrix<f64>) -> Result<Self> {
        let n = b1.nrows();
        let m = b1.ncols();
        if n == 0 || m == 0 {
            return Err(CoreError::Dimension("B1 must be a nonempty n×m matrix".into()));
        }
        if b2.nrows() != n || b2.ncols() != n {
            return Err(CoreError::Dimension(format!(
                "B2 must be {n}×{n} to match B1 with {n} rows, got {}×{}",
                b2.nrows(),
                b2.ncols()
            )));
        }
        if b1.iter().chain(b2.iter()).any(|x| !x.is_finite()) {
            return Err(CoreError::NonFinite("B1/B2 entries must be finite".into()));
        }
        Ok(Self { m, n, b1, b2 })
    }

    /// Diffusive dimension (columns of `B1`).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Degenerate dimension (rows of `B1`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b1(&self) -> &DMatrix<f64> {
        &self.b1
    }

    pub fn b2(&self) -> &DMatrix<f64> {
        &self.b2
    }

    pub fn tr_b2(&self) -> f64 {
        self.b2.diagonal().sum()
    }

    /// `B1ᵀ e^{-t B2ᵀ} ρ`, the coefficient of the imaginary potential in the
    /// conjugated operator.
    pub fn decay_coefficient(&self, t: f64, rho: &DVector<f64>) -> Result<DVector<f64>> {
        let e = mat_exp(&self.b2.transpose(), -t)?;
        Ok(self.b1.transpose() * (e * rho))
    }

    /// The operator `L1 = ∂t + x∂y + y∂z + ∂x²`: `m = 1`, `n = 2`.
    pub fn l1() -> Self {
        Self::new(
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        )
        .expect("static dims")
    }

    /// The jerk-model pair: `m = 1`, `n = 3`,
    /// `B1 = (-1,0,0)ᵀ`, `B2 = [[0,0,0],[-1,0,0],[0,-1,0]]`.
    pub fn jerk() -> Self {
        Self::new(
            DMatrix::from_column_slice(3, 1, &[-1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0]),
        )
        .expect("static dims")
    }

    /// The `m = 1` family with ones on the diagonal and subdiagonal of `B2`
    /// and a one in the upper-right corner; full Kalman rank for every `n`.
    pub fn example1(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::Validation("example1 requires n >= 2".into()));
        }
        let b1 = DMatrix::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let mut b2 = DMatrix::zeros(n, n);
        for i in 0..n {
            b2[(i, i)] = 1.0;
            if i > 0 {
                b2[(i, i - 1)] = 1.0;
            }
        }
        b2[(0, n - 1)] = 1.0;
        Self::new(b1, b2)
    }
}

/// Report of a numerical rank computation by singular-value thresholding.
#[derive(Debug, Clone)]
pub struct RankReport {
    /// The matrix the rank was computed for (Kalman matrix in the main use).
    pub kalman: DMatrix<f64>,
    /// Singular values, sorted nonincreasing.
    pub singular_values: Vec<f64>,
    /// Count of singular values above `tol_used · σ_max`.
    pub rank: usize,
    pub tol_used: f64,
}

/// Sampled decay profile of `t ↦ (t+b)^3 |B1ᵀ e^{-t B2ᵀ} ρ|^2`.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    /// Time horizon the profile was computed for.
    pub t2: f64,
    /// `(t, value)` samples used in the search for the supremum.
    pub samples: Vec<(f64, f64)>,
    /// The supremum (after local refinement); `≥` every sampled value.
    pub g_value: f64,
    /// Minimum of `G` over the unit sphere; present only on sphere sweeps.
    pub c2_estimate: Option<f64>,
    /// Unit vector achieving `c2_estimate`, when present.
    pub argmin_rho: Option<DVector<f64>>,
    /// Set when the Kalman matrix is rank deficient, in which case
    /// `c2_estimate = 0` is the correct degenerate answer.
    pub rank_deficient: bool,
}

const MAT_EXP_NORM_GUARD: f64 = 600.0;

/// Matrix exponential `e^{sM}` by scaling-and-squaring with a diagonal Padé
/// approximant; nilpotent inputs (detected by `M^n = 0`) use the exact finite
/// series instead, so the triangular drift examples are reproduced exactly.
///
/// Rejects non-square or non-finite input, and `|s|·‖M‖₁ > 600` (the scaled
/// entries of `e^{sM}` would overflow well before `exp` itself does).
pub fn mat_exp(m: &DMatrix<f64>, s: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(CoreError::Dimension(format!("mat_exp needs a square matrix, got {}×{}", m.nrows(), m.ncols())));
    }
    if !s.is_finite() || m.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::NonFinite("mat_exp input must be finite".into()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let a = m * s;
    let norm1 = one_norm(&a);
    if norm1 > MAT_EXP_NORM_GUARD {
        return Err(CoreError::Validation(format!(
            "mat_exp overflow guard: |s|·‖M‖₁ = {norm1:.3e} exceeds {MAT_EXP_NORM_GUARD}"
        )));
    }

    if let Some(deg) = nilpotency_degree(m) {
        // finite series, exact up to rounding of the few products involved
        let mut term = DMatrix::identity(n, n);
        let mut sum = DMatrix::identity(n, n);
        for k in 1..deg {
            term = (&term * &a) / (k as f64);
            sum += &term;
        }
        return Ok(sum);
    }

    Ok(pade13_expm(&a, norm1))
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest `k ≤ n` with `M^k = 0` exactly, if any.
fn nilpotency_degree(m: &DMatrix<f64>) -> Option<usize> {
    let n = m.nrows();
    let mut p = m.clone();
    for k in 1..=n {
        if p.iter().all(|&x| x == 0.0) {
            return Some(k);
        }
        p = &p * m;
    }
    if p.iter().all(|&x| x == 0.0) {
        return Some(n + 1);
    }
    None
}

/// [13/13] Padé with scaling and squaring (Higham's coefficients).
fn pade13_expm(a: &DMatrix<f64>, norm1: f64) -> DMatrix<f64> {
    const THETA_13: f64 = 4.25;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ];
    let n = a.nrows();
    let squarings = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings as i32);

    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (B[13] * &a6 + B[11] * &a4 + B[9] * &a2) + B[7] * &a6 + B[5] * &a4 + B[3] * &a2 + B[1] * &eye;
    let u = &a * u_inner;
    let v = &a6 * (B[12] * &a6 + B[10] * &a4 + B[8] * &a2) + B[6] * &a6 + B[4] * &a4 + B[2] * &a2 + B[0] * &eye;

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// The Kalman controllability block matrix `[B1, B2 B1, …, B2^{n-1} B1]`,
/// blocks in that exact order, shape `n × (n·m)`.
pub fn kalman_matrix(d: &DriftPair) -> DMatrix<f64> {
    let (n, m) = (d.n, d.m);
    let mut out = DMatrix::zeros(n, n * m);
    let mut block = d.b1.clone();
    for k in 0..n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        if k + 1 < n {
            block = &d.b2 * block;
        }
    }
    out
}

/// Numerical rank by singular-value thresholding at `tol_rel · σ_max`.
///
/// Deterministic for fixed input; `tol_rel` must lie in `(0, 1)`.
pub fn numerical_rank(m: &DMatrix<f64>, tol_rel: f64) -> Result<RankReport> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(CoreError::Validation("numerical_rank of an empty matrix".into()));
    }
    if !(0.0..1.0).contains(&tol_rel) || tol_rel == 0.0 {
        return Err(CoreError::Validation(format!("tol_rel must be in (0,1), got {tol_rel}")));
    }
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 { 0 } else { sv.iter().filter(|&&s| s > tol_rel * smax).count() };
    Ok(RankReport {
        kalman: m.clone(),
        singular_values: sv,
        rank,
        tol_used: tol_rel,
    })
}

/// Default rank tolerance: the rank condition is exact and desk matrices are
/// small and well scaled.
pub const RANK_TOL_DEFAULT: f64 = 1e-10;

/// Exact characteristic flow of the drift with `v` frozen: returns `w(dt)`
/// solving `w' = B1 v + B2 w`, `w(0) = w0`, via the exponential of the
/// augmented `(n+1)×(n+1)` matrix `[[B2, B1 v], [0, 0]]`.
pub fn drift_flow(d: &DriftPair, v: &DVector<f64>, w0: &DVector<f64>, dt: f64) -> Result<DVector<f64>> {
    if v.len() != d.m {
        return Err(CoreError::Dimension(format!("v must have length m = {}, got {}", d.m, v.len())));
    }
    if w0.len() != d.n {
        return Err(CoreError::Dimension(format!("w0 must have length n = {}, got {}", d.n, w0.len())));
    }
    if !dt.is_finite() || v.iter().chain(w0.iter()).any(|x| !x.is_finite()) {
        return Err(CoreError::NonFinite("drift_flow input must be finite".into()));
    }
    let n = d.n;
    let forcing = &d.b1 * v;
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&d.b2);
    aug.view_mut((0, n), (n, 1)).copy_from(&forcing);
    let e = mat_exp(&aug, dt)?;
    let mut state = DVector::zeros(n + 1);
    state.rows_mut(0, n).copy_from(w0);
    state[n] = 1.0;
    let out = e * state;
    Ok(out.rows(0, n).into_owned())
}

/// Precomputed samples of `t ↦ B1ᵀ e^{-t B2ᵀ}` on a uniform grid, shared by
/// every `ρ` evaluation in a sweep.
pub struct DecaySampler {
    drift: DriftPair,
    b: f64,
    ts: Vec<f64>,
    mats: Vec<DMatrix<f64>>,
}

impl DecaySampler {
    /// Uniform samples of the decay integrand on `[0, window]`.
    pub fn new(d: &DriftPair, window: f64, b: f64, nt: usize) -> Result<Self> {
        if window <= 0.0 {
            return Err(CoreError::Validation("sampling window must be positive".into()));
        }
        let b2t = d.b2.transpose();
        let b1t = d.b1.transpose();
        let mut ts = Vec::with_capacity(nt);
        let mut mats = Vec::with_capacity(nt);
        for i in 0..nt {
            let t = window * (i as f64) / ((nt - 1) as f64);
            ts.push(t);
            mats.push(&b1t * mat_exp(&b2t, -t)?);
        }
        Ok(Self { drift: d.clone(), b, ts, mats })
    }

    fn integrand_at(&self, t: f64, rho: &DVector<f64>) -> f64 {
        let coeff = self
            .drift
            .decay_coefficient(t, rho)
            .expect("sampler drift is valid");
        (t + self.b).powi(3) * coeff.norm_squared()
    }

    /// Max over the uniform samples followed by golden-section refinement
    /// around the best sample. Returns `(sup, samples)`.
    pub fn sup(&self, rho: &DVector<f64>, refine_iters: usize) -> (f64, Vec<(f64, f64)>) {
        let mut samples = Vec::with_capacity(self.ts.len());
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (i, (t, m)) in self.ts.iter().zip(&self.mats).enumerate() {
            let val = (t + self.b).powi(3) * (m * rho).norm_squared();
            samples.push((*t, val));
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        // bracket around the best sample and polish
        let lo = if best == 0 { self.ts[0] } else { self.ts[best - 1] };
        let hi = if best + 1 == self.ts.len() { self.ts[best] } else { self.ts[best + 1] };
        let refined = golden_max(|t| self.integrand_at(t, rho), lo, hi, refine_iters);
        (refined.max(best_val), samples)
    }

    /// Cheap max over the uniform samples only (used inside sphere descent).
    pub fn sup_coarse(&self, rho: &DVector<f64>) -> f64 {
        self.ts
            .iter()
            .zip(&self.mats)
            .map(|(t, m)| (t + self.b).powi(3) * (m * rho).norm_squared())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b <= a {
        return f(a);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

pub const G_SUP_SAMPLES_DEFAULT: usize = 1024;
pub const G_SUP_REFINE_DEFAULT: usize = 40;

/// Supremum of the shifted decay integrand.
///
/// For `b > 0` this is `sup_{t ∈ [0, t2]} (t+b)^3 |B1ᵀ e^{-t B2ᵀ} ρ|^2`, the
/// quantity defining the low-frequency region; for `b = 0` it is the
/// unshifted `G(ρ) = max_{t ∈ [0, t2/2]} t^3 |B1ᵀ e^{-t B2ᵀ} ρ|^2` whose
/// sphere minimum is `c2`. The supremum over the open interval agrees with
/// the max over the closed one (continuous integrand).
///
/// `nt ≥ 64` uniform samples followed by golden-section refinement around the
/// best sample.
pub fn g_sup(d: &DriftPair, rho: &DVector<f64>, t2: f64, b: f64, nt: usize) -> Result<DecayProfile> {
    if t2 <= 0.0 {
        return Err(CoreError::Validation(format!("t2 must be positive, got {t2}")));
    }
    if !(0.0..=t2).contains(&b) {
        return Err(CoreError::Validation(format!("need 0 <= b <= t2, got b = {b}")));
    }
    if nt < 64 {
        return Err(CoreError::Validation(format!("nt must be at least 64, got {nt}")));
    }
    if rho.len() != d.n {
        return Err(CoreError::Dimension(format!("rho must have length n = {}, got {}", d.n, rho.len())));
    }
    let window = if b == 0.0 { t2 / 2.0 } else { t2 };
    let sampler = DecaySampler::new(d, window, b, nt)?;
    let (g_value, samples) = sampler.sup(rho, G_SUP_REFINE_DEFAULT);
    Ok(DecayProfile {
        t2,
        samples,
        g_value,
        c2_estimate: None,
        argmin_rho: None,
        rank_deficient: false,
    })
}

/// Quasi-uniform unit vectors: uniform angles (n=2), Fibonacci lattice (n=3),
/// seeded Gaussian-normalized samples otherwise. Deterministic.
fn sphere_points(n: usize, count: usize) -> Vec<DVector<f64>> {
    match n {
        1 => vec![DVector::from_vec(vec![1.0]), DVector::from_vec(vec![-1.0])],
        2 => (0..count)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * (i as f64) / (count as f64);
                DVector::from_vec(vec![th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * ((i as f64) + 0.5) / (count as f64);
                    let r = (1.0 - z * z).sqrt();
                    let th = 2.0 * std::f64::consts::PI * (i as f64) / golden;
                    DVector::from_vec(vec![r * th.cos(), r * th.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0_5fe4_au64 ^ (n as u64));
            (0..count)
                .map(|_| {
                    loop {
                        let v = DVector::from_fn(n, |_, _| {
                            // Box-Muller from uniforms keeps the dependency surface small
                            let u1: f64 = rng.gen_range(1e-12..1.0);
                            let u2: f64 = rng.gen_range(0.0..1.0);
                            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                        });
                        let norm = v.norm();
                        if norm > 1e-8 {
                            return v / norm;
                        }
                    }
                })
                .collect()
        }
    }
}

/// Nelder–Mead on the scale-invariant objective `x ↦ G(x/|x|)`; returns the
/// polished unit minimizer and its value.
fn polish_min(sampler: &DecaySampler, start: &DVector<f64>, iters: usize) -> (DVector<f64>, f64) {
    let n = start.len();
    let f = |x: &DVector<f64>| {
        let norm = x.norm();
        if norm < 1e-12 {
            return f64::INFINITY;
        }
        sampler.sup_coarse(&(x / norm))
    };
    // initial simplex around the start point
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.clone(), f(start)));
    for i in 0..n {
        let mut p = start.clone();
        p[i] += 0.05;
        let fp = f(&p);
        simplex.push((p, fp));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
        let centroid: DVector<f64> = simplex[..n].iter().map(|(p, _)| p.clone()).sum::<DVector<f64>>() / (n as f64);
        let worst = simplex[n].clone();
        let refl = &centroid + (&centroid - &worst.0);
        let f_refl = f(&refl);
        if f_refl < simplex[0].1 {
            let expand = &centroid + 2.0 * (&centroid - &worst.0);
            let f_exp = f(&expand);
            simplex[n] = if f_exp < f_refl { (expand, f_exp) } else { (refl, f_refl) };
        } else if f_refl < simplex[n - 1].1 {
            simplex[n] = (refl, f_refl);
        } else {
            let contract = &centroid + 0.5 * (&worst.0 - &centroid);
            let f_con = f(&contract);
            if f_con < worst.1 {
                simplex[n] = (contract, f_con);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    entry.0 = (&best + &entry.0) * 0.5;
                    entry.1 = f(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    let best = simplex[0].0.clone();
    let unit = &best / best.norm();
    let value = sampler.sup_coarse(&unit);
    (unit, value)
}

/// Empirical lower-bound constant `c2 = min_{|ρ|=1} G(ρ)` by quasi-uniform
/// sphere sampling plus local descent.
///
/// The estimate is an upper bound on the true minimum (no global
/// certification); with the rank condition it is strictly positive, and for
/// a rank-deficient pair the correct degenerate answer `c2 = 0` is returned
/// with the `rank_deficient` flag set rather than an error.
pub fn c2_lower_bound(d: &DriftPair, t2: f64, sphere_samples: usize, refine_iters: usize) -> Result<DecayProfile> {
    if t2 <= 0.0 {
        return Err(CoreError::Validation(format!("t2 must be positive, got {t2}")));
    }
    if sphere_samples == 0 || refine_iters == 0 {
        return Err(CoreError::Validation("sphere_samples and refine_iters must be positive".into()));
    }
    let rank = numerical_rank(&kalman_matrix(d), RANK_TOL_DEFAULT)?;
    if rank.rank < d.n {
        return Ok(DecayProfile {
            t2,
            samples: Vec::new(),
            g_value: 0.0,
            c2_estimate: Some(0.0),
            argmin_rho: None,
            rank_deficient: true,
        });
    }

    let window = t2 / 2.0;
    let sampler = DecaySampler::new(d, window, 0.0, G_SUP_SAMPLES_DEFAULT)?;
    let mut best_rho = None;
    let mut best_val = f64::INFINITY;
    for p in sphere_points(d.n, sphere_samples) {
        let val = sampler.sup_coarse(&p);
        if val < best_val {
            best_val = val;
            best_rho = Some(p);
        }
    }
    let start = best_rho.expect("at least one sphere point");
    let (unit, polished) = polish_min(&sampler, &start, refine_iters);
    let (g_value, samples) = sampler.sup(&unit, G_SUP_REFINE_DEFAULT);
    let c2 = polished.min(g_value).min(best_val);
    Ok(DecayProfile {
        t2,
        samples,
        g_value,
        c2_estimate: Some(c2),
        argmin_rho: Some(unit),
        rank_deficient: false,
    })
}
