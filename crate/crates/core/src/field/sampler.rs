use std::fmt;
use std::sync::Arc;

use super::{Field, SpaceTimeGrid};
use crate::error::{Error, Result};

/// Anything that can be evaluated at a space-time point: sampled fields
/// (interpolated, clamped at zero) or closed-form functions. The analysis
/// modules only talk to this trait.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;

    /// Spatial resolution used for quadrature and finite differences.
    fn dx(&self) -> f64;

    fn dt(&self) -> f64;

    /// Closed spatial box, one `(lo, hi)` pair per axis.
    fn x_bounds(&self) -> Vec<(f64, f64)>;

    fn t_bounds(&self) -> (f64, f64);

    fn sample(&self, x: &[f64], t: f64) -> Result<f64>;

    /// Distance from `x` to the nearest face of the spatial box.
    fn room(&self, x: &[f64]) -> f64 {
        self.x_bounds().iter().zip(x).map(|(&(lo, hi), &v)| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min)
    }

    fn contains(&self, x: &[f64], t: f64) -> bool {
        let (t_lo, t_hi) = self.t_bounds();
        let slack = 1e-9 * self.dt();
        self.room(x) >= -1e-9 * self.dx() && t >= t_lo - slack && t <= t_hi + slack
    }

    /// `eta = -w_t` by a backward difference of one time step.
    fn eta(&self, x: &[f64], t: f64) -> Result<f64> {
        let dt = self.dt();
        Ok((self.sample(x, t - dt)? - self.sample(x, t)?) / dt)
    }
}

impl Sampler for Field {
    fn dim(&self) -> usize {
        self.grid().dim
    }

    fn dx(&self) -> f64 {
        self.grid().dx
    }

    fn dt(&self) -> f64 {
        self.grid().dt
    }

    fn x_bounds(&self) -> Vec<(f64, f64)> {
        let g = self.grid();
        (0..g.dim).map(|a| (g.origin_x[a], g.x_hi(a))).collect()
    }

    fn t_bounds(&self) -> (f64, f64) {
        (self.grid().origin_t, self.grid().t_end())
    }

    fn sample(&self, x: &[f64], t: f64) -> Result<f64> {
        self.interpolate_at(x, t)
    }
}

type Formula = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// A closed-form function exposed through [`Sampler`], with declared
/// bounds and resolutions. Values are not clamped.
#[derive(Clone)]
pub struct AnalyticField {
    f: Arc<Formula>,
    x_bounds: Vec<(f64, f64)>,
    t_bounds: (f64, f64),
    dx: f64,
    dt: f64,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField")
            .field("x_bounds", &self.x_bounds)
            .field("t_bounds", &self.t_bounds)
            .field("dx", &self.dx)
            .field("dt", &self.dt)
            .finish()
    }
}

impl AnalyticField {
    pub fn new(
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        x_bounds: Vec<(f64, f64)>,
        t_bounds: (f64, f64),
        dx: f64,
        dt: f64,
    ) -> Result<Self> {
        if x_bounds.is_empty() || x_bounds.len() > 2 {
            return Err(Error::Grid(format!("dimension {} not supported", x_bounds.len())));
        }
        if !(dx > 0.0) || !(dt > 0.0) {
            return Err(Error::Grid("resolutions must be positive".into()));
        }
        Ok(AnalyticField { f: Arc::new(f), x_bounds, t_bounds, dx, dt })
    }

    /// Same box and resolutions as `grid`.
    pub fn on_grid(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static, grid: &SpaceTimeGrid) -> Result<Self> {
        let xb = (0..grid.dim).map(|a| (grid.origin_x[a], grid.x_hi(a))).collect();
        Self::new(f, xb, (grid.origin_t, grid.t_end()), grid.dx, grid.dt)
    }

    /// Evaluate without bounds checks.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        (self.f)(x, t)
    }

    /// Sample onto `grid` as a stored field.
    pub fn to_field(&self, grid: SpaceTimeGrid) -> Result<Field> {
        Field::from_fn(grid, |x, t| (self.f)(x, t))
    }
}

impl Sampler for AnalyticField {
    fn dim(&self) -> usize {
        self.x_bounds.len()
    }

    fn dx(&self) -> f64 {
        self.dx
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn x_bounds(&self) -> Vec<(f64, f64)> {
        self.x_bounds.clone()
    }

    fn t_bounds(&self) -> (f64, f64) {
        self.t_bounds
    }

    fn sample(&self, x: &[f64], t: f64) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::pre(format!("point has {} coordinates, field has {}", x.len(), self.dim())));
        }
        for (a, (&v, &(lo, hi))) in x.iter().zip(&self.x_bounds).enumerate() {
            let slack = 1e-9 * self.dx;
            if !(v >= lo - slack && v <= hi + slack) {
                return Err(Error::Domain { axis: format!("x{}", a + 1), value: v, lo, hi });
            }
        }
        let (lo, hi) = self.t_bounds;
        let slack = 1e-9 * self.dt;
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Domain { axis: "t".into(), value: t, lo, hi });
        }
        Ok((self.f)(x, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_matches_sampled_on_nodes() {
        let g = SpaceTimeGrid::line(11, -1.0, 1.0, 6, 0.0, 0.5).unwrap();
        let a = AnalyticField::on_grid(|x, t| (0.3 - t).max(0.0) + x[0] * x[0], &g).unwrap();
        let f = a.to_field(g.clone()).unwrap();
        for k in 0..g.nt {
            for i in 0..g.n_space() {
                let x = g.node(i);
                assert_eq!(f.sample(&x, g.time(k)).unwrap(), a.sample(&x, g.time(k)).unwrap());
            }
        }
        assert!(a.sample(&[2.0], 0.1).is_err());
    }

    #[test]
    fn analytic_keeps_negative_values() {
        let a = AnalyticField::new(|x, _| x[0], vec![(-1.0, 1.0)], (0.0, 1.0), 0.1, 0.1).unwrap();
        assert_eq!(a.sample(&[-0.5], 0.5).unwrap(), -0.5);
    }

    #[test]
    fn eta_default_is_backward_difference() {
        let a = AnalyticField::new(|_, t| 1.0 - 2.0 * t, vec![(0.0, 1.0)], (0.0, 1.0), 0.1, 0.05).unwrap();
        assert!((a.eta(&[0.5], 0.5).unwrap() - 2.0).abs() < 1e-12);
    }
}
