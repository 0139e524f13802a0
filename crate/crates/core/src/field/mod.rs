//! Space-time grids, sampled fields of `w`, and the `SSTF1` file format.
//!
//! A [`Field`] stores `w` on every node of a [`SpaceTimeGrid`], time-major
//! then row-major in space. Fields are immutable once built; the recorded
//! monotonicity violation lets analysis report solver defects instead of
//! silently repairing them.

mod grid;
mod sampler;
mod sstf;

pub use grid::SpaceTimeGrid;
pub use sampler::{AnalyticField, Sampler};
pub use sstf::{field_from_bytes, field_to_bytes, read_field, write_field};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for `w >= 0` and `w_t <= 0` checks.
pub const DEFAULT_MONO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        SpaceTimePoint { x, t }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
    mono_tol: f64,
    max_violation: f64,
}

impl Field {
    pub fn new(grid: SpaceTimeGrid, values: Vec<f64>, mono_tol: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let max_violation = monotonicity_violation(&grid, &values);
        Ok(Field { grid, values, mono_tol, max_violation })
    }

    /// Rebuild a field with a stored violation (file reads keep the recorded value).
    pub(crate) fn with_recorded(
        grid: SpaceTimeGrid,
        values: Vec<f64>,
        mono_tol: f64,
        max_violation: f64,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Field { grid, values, mono_tol, max_violation })
    }

    pub fn from_fn(grid: SpaceTimeGrid, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let n = grid.n_space();
        let nodes: Vec<Vec<f64>> = (0..n).map(|i| grid.node(i)).collect();
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.nt {
            let t = grid.time(k);
            values.extend(nodes.iter().map(|x| f(x, t)));
        }
        Field::new(grid, values, DEFAULT_MONO_TOL)
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mono_tol(&self) -> f64 {
        self.mono_tol
    }

    /// Largest observed `max(-w, w[k] - w[k-1])` over the grid (0 if none).
    pub fn max_violation(&self) -> f64 {
        self.max_violation
    }

    pub fn is_monotone(&self) -> bool {
        self.max_violation <= self.mono_tol
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.grid.n_space();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn at(&self, k: usize, idx: usize) -> f64 {
        self.values[k * self.grid.n_space() + idx]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation in space and time, clamped below at 0.
    pub fn interpolate(&self, p: &SpaceTimePoint) -> Result<f64> {
        self.interpolate_at(&p.x, p.t)
    }

    pub fn interpolate_at(&self, x: &[f64], t: f64) -> Result<f64> {
        let g = &self.grid;
        if x.len() != g.dim {
            return Err(Error::pre(format!("point has {} coordinates, grid has {}", x.len(), g.dim)));
        }
        let mut base = [0usize; 2];
        let mut frac = [0.0f64; 2];
        for a in 0..g.dim {
            let (i, f) = locate(x[a], g.origin_x[a], g.dx, g.shape[a], &format!("x{}", a + 1))?;
            base[a] = i;
            frac[a] = f;
        }
        let (k, ft) = locate(t, g.origin_t, g.dt, g.nt, "t")?;
        let n = g.n_space();
        let spatial = |vals: &[f64]| -> f64 {
            match g.dim {
                1 => {
                    let i = base[0];
                    vals[i] * (1.0 - frac[0]) + vals[i + 1] * frac[0]
                }
                _ => {
                    let (i, j) = (base[0], base[1]);
                    let n1 = g.shape[1];
                    let v00 = vals[i * n1 + j];
                    let v01 = vals[i * n1 + j + 1];
                    let v10 = vals[(i + 1) * n1 + j];
                    let v11 = vals[(i + 1) * n1 + j + 1];
                    let a = v00 * (1.0 - frac[1]) + v01 * frac[1];
                    let b = v10 * (1.0 - frac[1]) + v11 * frac[1];
                    a * (1.0 - frac[0]) + b * frac[0]
                }
            }
        };
        let lo = spatial(&self.values[k * n..(k + 1) * n]);
        let v = if ft == 0.0 {
            lo
        } else {
            let hi = spatial(&self.values[(k + 1) * n..(k + 2) * n]);
            lo * (1.0 - ft) + hi * ft
        };
        Ok(v.max(0.0))
    }

    /// `eta = -w_t` on time level `k` by the backward difference.
    pub fn eta_slice(&self, k: usize) -> Result<Vec<f64>> {
        if k == 0 || k >= self.grid.nt {
            return Err(Error::pre(format!("eta_slice needs 1 <= k < nt, got k = {k}")));
        }
        let dt = self.grid.dt;
        Ok(self.slice(k - 1).iter().zip(self.slice(k)).map(|(prev, cur)| (prev - cur) / dt).collect())
    }
}

/// Cell index and fraction for coordinate `v` on an axis with `n` nodes.
fn locate(v: f64, origin: f64, h: f64, n: usize, name: &str) -> Result<(usize, f64)> {
    let hi = origin + (n - 1) as f64 * h;
    let slack = 1e-9 * h;
    if !(v >= origin - slack && v <= hi + slack) {
        return Err(Error::Domain { axis: name.to_string(), value: v, lo: origin, hi });
    }
    let u = ((v - origin) / h).clamp(0.0, (n - 1) as f64);
    let i = (u.floor() as usize).min(n - 2);
    let f = u - i as f64;
    // snap rounding noise so grid-aligned queries stay exact
    let f = if f < 1e-12 {
        0.0
    } else if f > 1.0 - 1e-12 {
        1.0
    } else {
        f
    };
    Ok((i, f))
}

fn monotonicity_violation(grid: &SpaceTimeGrid, values: &[f64]) -> f64 {
    let n = grid.n_space();
    let mut worst = 0.0_f64;
    for (k, slice) in values.chunks(n).enumerate() {
        for (i, &v) in slice.iter().enumerate() {
            worst = worst.max(-v);
            if k > 0 {
                worst = worst.max(v - values[(k - 1) * n + i]);
            }
        }
    }
    worst
}
