//! Structured grid over `(t, v, w)`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Uniform grid: `nt` time samples on `[0, t2]` (endpoints included),
/// `nv` cell-centered points per diffusive axis on `(-lv, lv)`, and `nw`
/// periodic points per degenerate axis on `[-lw, lw)`.
///
/// Spacings are always derived: `dv = 2 lv / nv`, `dw = 2 lw / nw`,
/// `dt = t2 / (nt - 1)`. The dual lattice of the periodic box has spacing
/// `π / lw` per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    m: usize,
    n: usize,
    t2: f64,
    nt: usize,
    lv: f64,
    nv: usize,
    lw: f64,
    nw: usize,
}

impl GridSpec {
    pub fn new(m: usize, n: usize, t2: f64, nt: usize, lv: f64, nv: usize, lw: f64, nw: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(CoreError::Validation("grid needs m >= 1 and n >= 1".into()));
        }
        if !(t2 > 0.0) || !(lv > 0.0) || !(lw > 0.0) {
            return Err(CoreError::Validation("t2, lv, lw must be positive".into()));
        }
        if nt < 16 {
            return Err(CoreError::Validation(format!("nt must be at least 16, got {nt}")));
        }
        if nv < 16 {
            return Err(CoreError::Validation(format!("nv must be at least 16, got {nv}")));
        }
        if nw == 0 || !nw.is_power_of_two() {
            return Err(CoreError::Validation(format!("nw must be a power of two, got {nw}")));
        }
        Ok(Self { m, n, t2, nt, lv, nv, lw, nw })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn lv(&self) -> f64 {
        self.lv
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn lw(&self) -> f64 {
        self.lw
    }

    pub fn nw(&self) -> usize {
        self.nw
    }

    pub fn dt(&self) -> f64 {
        self.t2 / (self.nt - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.lv / self.nv as f64
    }

    pub fn dw(&self) -> f64 {
        2.0 * self.lw / self.nw as f64
    }

    pub fn t_at(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Cell-centered diffusive coordinate.
    pub fn v_at(&self, i: usize) -> f64 {
        -self.lv + (i as f64 + 0.5) * self.dv()
    }

    /// Periodic degenerate coordinate.
    pub fn w_at(&self, k: usize) -> f64 {
        -self.lw + k as f64 * self.dw()
    }

    /// Signed wraparound index of the dual lattice: `0, 1, …, nw/2-1, -nw/2, …, -1`.
    pub fn eta_index(&self, k: usize) -> i64 {
        if k < self.nw / 2 {
            k as i64
        } else {
            k as i64 - self.nw as i64
        }
    }

    /// Dual lattice frequency `η = (π / lw) · k̃` in standard wraparound layout.
    pub fn eta_at(&self, k: usize) -> f64 {
        std::f64::consts::PI / self.lw * self.eta_index(k) as f64
    }

    /// Shape of a full field: `[nt, nv^m…, nw^n…]`.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(1 + self.m + self.n);
        s.push(self.nt);
        s.extend(std::iter::repeat(self.nv).take(self.m));
        s.extend(std::iter::repeat(self.nw).take(self.n));
        s
    }

    /// Shape of a time-v slice field: `[nt, nv^m…]`.
    pub fn slice_shape(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(1 + self.m);
        s.push(self.nt);
        s.extend(std::iter::repeat(self.nv).take(self.m));
        s
    }

    /// Number of points per time slice of a full field.
    pub fn slab_len(&self) -> usize {
        self.nv.pow(self.m as u32) * self.nw.pow(self.n as u32)
    }

    /// Volume element `dv^m · dw^n` (full field) .
    pub fn cell_volume(&self) -> f64 {
        self.dv().powi(self.m as i32) * self.dw().powi(self.n as i32)
    }

    /// Volume element `dv^m` (slice field).
    pub fn v_cell_volume(&self) -> f64 {
        self.dv().powi(self.m as i32)
    }

    /// Compact description, e.g. `t128 v64 w16^3`.
    pub fn label(&self) -> String {
        format!("t{} v{}^{} w{}^{}", self.nt, self.nv, self.m, self.nw, self.n)
    }
}
