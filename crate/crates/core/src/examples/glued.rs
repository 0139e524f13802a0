use serde::{Deserialize, Serialize};

use super::radial::{bump, solve_radial, RadialSolve};
use crate::error::{Error, Result};
use crate::field::{Field, Sampler, SpaceTimeGrid, SpaceTimePoint, DEFAULT_MONO_TOL};

pub const MAX_COPIES: usize = 4;

/// Disjoint rescaled copies `4^{-n} u(2^n (x - p_n), 4^n t)` of one
/// one-dimensional base solution `u`, with `p_n = spacing Σ_{m<=n} 2^{-m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingPlan {
    pub spacing: f64,
    pub n_max: usize,
    pub base_amp: f64,
    /// Radius of the base support `{u(·, 0) > 0}`.
    pub base_support: f64,
    pub base_dx: f64,
    pub dx: f64,
    pub total_levels: usize,
}

impl Default for GluingPlan {
    fn default() -> Self {
        GluingPlan {
            spacing: 4.0,
            n_max: 2,
            base_amp: 0.1,
            base_support: 1.0,
            base_dx: 1.0 / 512.0,
            dx: 1.0 / 256.0,
            total_levels: 401,
        }
    }
}

impl GluingPlan {
    pub fn center(&self, n: usize) -> f64 {
        self.spacing * (1..=n).map(|m| 0.5f64.powi(m as i32)).sum::<f64>()
    }

    pub fn radius(&self, n: usize) -> f64 {
        self.base_support / 2f64.powi(n as i32)
    }

    /// Smallest grid-aligned box holding every support with a margin of 1/4.
    pub fn default_grid(&self, base_extinction: f64) -> Result<SpaceTimeGrid> {
        let lo = ((self.center(1) - self.radius(1) - 0.25) / self.dx).floor() * self.dx;
        let hi = self.center(self.n_max) + self.radius(self.n_max) + 0.25;
        let n = ((hi - lo) / self.dx).ceil() as usize + 1;
        let t_end = 1.25 * base_extinction / 4.0;
        SpaceTimeGrid::new(vec![n], self.total_levels, self.dx, t_end / (self.total_levels - 1) as f64, vec![lo], 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct GluedExample {
    pub plan: GluingPlan,
    pub field: Field,
    pub base: RadialSolve,
    /// Planned singular points `(p_n, T_base / 4^n)`.
    pub expected: Vec<SpaceTimePoint>,
}

/// Solve the base profile on its own fine grid.
pub fn glued_base(plan: &GluingPlan) -> Result<RadialSolve> {
    solve_radial(1, bump(plan.base_amp), 1.25 * plan.base_support, plan.base_dx, 640, 801)
}

fn copy_value(base: &Field, n: usize, p: f64, x: f64, t: f64) -> Result<f64> {
    let scale = 2f64.powi(n as i32);
    let r = scale * (x - p).abs();
    let tau = scale * scale * t;
    let (r_hi, t_hi) = (base.grid().x_hi(0), base.grid().t_end());
    if r > r_hi || tau > t_hi {
        // outside the base support, or after the base has vanished
        return Ok(0.0);
    }
    Ok(base.sample(&[r], tau)? / (scale * scale))
}

/// Superpose the planned copies on `grid` (1D).
pub fn make_glued(plan: &GluingPlan, base: RadialSolve, grid: SpaceTimeGrid) -> Result<GluedExample> {
    if plan.n_max == 0 || plan.n_max > MAX_COPIES {
        return Err(Error::pre(format!("n_max must lie in 1..={MAX_COPIES}")));
    }
    if grid.dim != 1 {
        return Err(Error::pre("glued example is one-dimensional"));
    }
    for n in 1..=plan.n_max {
        let (p, r) = (plan.center(n), plan.radius(n));
        if p - r < grid.origin_x[0] || p + r > grid.x_hi(0) {
            return Err(Error::Construction(format!("copy {n} leaves the domain")));
        }
    }
    // supports on the grid: nodes where a copy's initial value is positive
    let supports: Vec<Vec<usize>> = (1..=plan.n_max)
        .map(|n| {
            (0..grid.n_space())
                .filter(|&i| copy_value(&base.field, n, plan.center(n), grid.node(i)[0], 0.0).unwrap_or(0.0) > 0.0)
                .collect()
        })
        .collect();
    for a in 0..plan.n_max {
        for b in a + 1..plan.n_max {
            let touching = supports[a].iter().any(|i| supports[b].iter().any(|j| i.abs_diff(*j) <= 1));
            let geometric = (plan.center(a + 1) - plan.center(b + 1)).abs() < plan.radius(a + 1) + plan.radius(b + 1);
            if touching || geometric {
                return Err(Error::Overlap(a + 1, b + 1));
            }
        }
    }
    let n_space = grid.n_space();
    let mut values = vec![0.0; grid.len()];
    for k in 0..grid.nt {
        let t = grid.time(k);
        for (c, support) in supports.iter().enumerate() {
            let n = c + 1;
            let p = plan.center(n);
            // the positive set only shrinks, so the initial support bounds it
            for &i in support {
                values[k * n_space + i] = copy_value(&base.field, n, p, grid.node(i)[0], t)?;
            }
        }
    }
    let field = Field::new(grid, values, DEFAULT_MONO_TOL)?;
    let expected = (1..=plan.n_max)
        .map(|n| SpaceTimePoint::new(vec![plan.center(n)], base.extinction_time / 4f64.powi(n as i32)))
        .collect();
    Ok(GluedExample { plan: plan.clone(), field, base, expected })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse_plan() -> GluingPlan {
        GluingPlan { base_dx: 1.0 / 256.0, dx: 1.0 / 128.0, total_levels: 201, ..GluingPlan::default() }
    }

    #[test]
    fn centers_and_overlap() {
        let plan = coarse_plan();
        assert_eq!(plan.center(1), 2.0);
        assert_eq!(plan.center(2), 3.0);
        let base = glued_base(&plan).unwrap();
        let bad = GluingPlan { spacing: 1.0, ..plan.clone() };
        let grid = bad.default_grid(base.extinction_time).unwrap();
        assert!(matches!(make_glued(&bad, base, grid), Err(Error::Overlap(1, 2))));
    }

    #[test]
    fn copies_are_rescaled_base() {
        let plan = coarse_plan();
        let base = glued_base(&plan).unwrap();
        let grid = plan.default_grid(base.extinction_time).unwrap();
        let ex = make_glued(&plan, base, grid).unwrap();
        assert!(ex.field.is_monotone());
        let g = ex.field.grid();
        // copy 1 at its center, level k: 4^{-1} u(0, 4 t_k)
        let i = g.nearest_node(&[2.0]);
        for k in [0, 10, 40] {
            let direct = ex.base.field.sample(&[0.0], 4.0 * g.time(k)).unwrap() / 4.0;
            assert_eq!(ex.field.at(k, i), direct);
        }
        assert_eq!(ex.expected.len(), 2);
        assert!((ex.expected[0].t - 4.0 * ex.expected[1].t).abs() < 1e-15);
    }
}
