use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform space-time grid: `dim` spatial axes sharing one spacing `dx`,
/// plus `nt` time levels spaced by `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub nt: usize,
    pub dx: f64,
    pub dt: f64,
    pub origin_x: Vec<f64>,
    pub origin_t: f64,
}

impl SpaceTimeGrid {
    pub fn new(shape: Vec<usize>, nt: usize, dx: f64, dt: f64, origin_x: Vec<f64>, origin_t: f64) -> Result<Self> {
        let dim = shape.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::Grid(format!("dimension {dim} not supported (1 or 2)")));
        }
        if origin_x.len() != dim {
            return Err(Error::Grid("origin_x length differs from dimension".into()));
        }
        if shape.iter().any(|&n| n < 2) || nt < 2 {
            return Err(Error::Grid("all counts must be at least 2".into()));
        }
        if !(dx > 0.0 && dx.is_finite()) || !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Grid(format!("spacings must be positive (dx = {dx}, dt = {dt})")));
        }
        if origin_x.iter().any(|o| !o.is_finite()) || !origin_t.is_finite() {
            return Err(Error::Grid("non-finite origin".into()));
        }
        Ok(SpaceTimeGrid { dim, shape, nt, dx, dt, origin_x, origin_t })
    }

    /// 1D grid with `n` nodes on `[x_lo, x_hi]` and `nt` levels on `[t_lo, t_hi]`.
    pub fn line(n: usize, x_lo: f64, x_hi: f64, nt: usize, t_lo: f64, t_hi: f64) -> Result<Self> {
        if n < 2 || nt < 2 {
            return Err(Error::Grid("all counts must be at least 2".into()));
        }
        let dx = (x_hi - x_lo) / (n - 1) as f64;
        let dt = (t_hi - t_lo) / (nt - 1) as f64;
        Self::new(vec![n], nt, dx, dt, vec![x_lo], t_lo)
    }

    /// 2D grid with `n x n` nodes on `[lo, hi]^2`.
    pub fn square(n: usize, lo: f64, hi: f64, nt: usize, t_lo: f64, t_hi: f64) -> Result<Self> {
        if n < 2 || nt < 2 {
            return Err(Error::Grid("all counts must be at least 2".into()));
        }
        let dx = (hi - lo) / (n - 1) as f64;
        let dt = (t_hi - t_lo) / (nt - 1) as f64;
        Self::new(vec![n, n], nt, dx, dt, vec![lo, lo], t_lo)
    }

    pub fn n_space(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn len(&self) -> usize {
        self.n_space() * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.origin_t + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.nt - 1)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin_x[axis] + i as f64 * self.dx
    }

    pub fn x_hi(&self, axis: usize) -> f64 {
        self.coord(axis, self.shape[axis] - 1)
    }

    /// Row-major flattening (last axis fastest).
    pub fn flat(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn unflat(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.shape[axis];
            idx /= self.shape[axis];
        }
        out
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.unflat(idx).iter().enumerate().map(|(axis, &i)| self.coord(axis, i)).collect()
    }

    /// Flat indices of the spatial neighbours of `idx` (axis-aligned, one step).
    pub fn neighbours(&self, idx: usize) -> Vec<usize> {
        let multi = self.unflat(idx);
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            if multi[axis] > 0 {
                let mut m = multi.clone();
                m[axis] -= 1;
                out.push(self.flat(&m));
            }
            if multi[axis] + 1 < self.shape[axis] {
                let mut m = multi.clone();
                m[axis] += 1;
                out.push(self.flat(&m));
            }
        }
        out
    }

    /// Distance from `x` to the nearest face of the spatial box.
    pub fn room(&self, x: &[f64]) -> f64 {
        (0..self.dim).map(|a| (x[a] - self.origin_x[a]).min(self.x_hi(a) - x[a])).fold(f64::INFINITY, f64::min)
    }

    /// Half of the smallest side of the spatial box.
    pub fn half_width(&self) -> f64 {
        (0..self.dim).map(|a| 0.5 * (self.x_hi(a) - self.origin_x[a])).fold(f64::INFINITY, f64::min)
    }

    /// Flat indices of nodes within distance `radius` of `center`.
    pub fn nodes_in_ball(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let mut ranges = Vec::with_capacity(self.dim);
        for a in 0..self.dim {
            let lo = ((center[a] - radius - self.origin_x[a]) / self.dx).ceil().max(0.0) as usize;
            let hi_f = ((center[a] + radius - self.origin_x[a]) / self.dx).floor();
            if hi_f < 0.0 {
                return Vec::new();
            }
            let hi = (hi_f as usize).min(self.shape[a] - 1);
            if lo > hi {
                return Vec::new();
            }
            ranges.push((lo, hi));
        }
        let r2 = radius * radius * (1.0 + 1e-12) + 1e-300;
        let mut out = Vec::new();
        let mut multi: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            let d2: f64 = (0..self.dim)
                .map(|a| {
                    let d = self.coord(a, multi[a]) - center[a];
                    d * d
                })
                .sum();
            if d2 <= r2 {
                out.push(self.flat(&multi));
            }
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if multi[axis] < ranges[axis].1 {
                    multi[axis] += 1;
                    for m in multi.iter_mut().skip(axis + 1).zip(ranges.iter().skip(axis + 1)) {
                        *m.0 = m.1 .0;
                    }
                    break;
                }
            }
        }
    }

    /// Nearest spatial node to `x` (clamped into the box).
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let multi: Vec<usize> = (0..self.dim)
            .map(|a| {
                let u = ((x[a] - self.origin_x[a]) / self.dx).round();
                u.clamp(0.0, (self.shape[a] - 1) as f64) as usize
            })
            .collect();
        self.flat(&multi)
    }

    /// Time index nearest to `t`, clamped.
    pub fn nearest_time(&self, t: f64) -> usize {
        ((t - self.origin_t) / self.dt).round().clamp(0.0, (self.nt - 1) as f64) as usize
    }
}
