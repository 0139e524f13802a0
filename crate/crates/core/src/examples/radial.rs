use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeGrid};
use crate::solver::{embed_radial, radial_profile_on, RunReport, Solver, SolverConfig};

/// `amp (1 - r²)₊²`
pub fn bump(amp: f64) -> impl Fn(f64) -> f64 + Copy {
    move |r: f64| amp * (1.0 - r * r).max(0.0).powi(2)
}

/// A radial solve recorded so that extinction falls near level
/// `levels_to_extinction`.
#[derive(Debug, Clone)]
pub struct RadialSolve {
    pub field: Field,
    pub report: RunReport,
    pub extinction_time: f64,
    /// Implicit steps per recorded level.
    pub substeps: usize,
    /// Every recorded slice is nonincreasing in `r`.
    pub radially_monotone: bool,
}

/// Solve `w(r, t)` on `[0, outer]` to extinction in two passes: the first
/// finds the extinction time `T` at `dt = dx²/2`, the second records
/// `total_levels` slices spaced `T / levels_to_extinction` apart.
pub fn solve_radial(
    d: usize,
    w0: impl Fn(f64) -> f64,
    outer: f64,
    dx: f64,
    levels_to_extinction: usize,
    total_levels: usize,
) -> Result<RadialSolve> {
    if levels_to_extinction < 2 || total_levels <= levels_to_extinction {
        return Err(Error::pre("need 2 <= levels_to_extinction < total_levels"));
    }
    let n = (outer / dx).ceil() as usize + 1;
    let dt0 = 0.5 * dx * dx;
    let probe = SpaceTimeGrid::line(n, 0.0, (n - 1) as f64 * dx, 2, 0.0, dt0)?;
    let init = radial_profile_on(&probe, &w0);
    let sup = init.iter().copied().fold(0.0, f64::max);
    let solver = Solver::new(SolverConfig::radial(probe.clone(), d))?;
    let report = solver.validate_initial(&init)?;
    if !report.pass {
        return Err(Error::pre(format!(
            "radial initial data failed validation: min = {:e}, max(Δw0 - 1) = {:e}",
            report.min_w0, report.max_excess
        )));
    }
    let t_max = 4.0 * d as f64 * sup + 1.0;
    let t1 = solver
        .extinction_time(&init, t_max)?
        .ok_or_else(|| Error::Construction(format!("no extinction before t = {t_max}")))?;
    let steps = (t1 / dt0).round() as usize;
    let substeps = steps.div_ceil(levels_to_extinction).max(1);
    let dt_out = t1 / levels_to_extinction as f64;
    let grid = SpaceTimeGrid::new(vec![n], total_levels, dx, dt_out, vec![0.0], 0.0)?;
    let mut cfg = SolverConfig::radial(grid, d);
    cfg.substeps = substeps;
    let (field, report) = Solver::new(cfg)?.run(&init, false)?;
    let extinction_time =
        report.extinction_time.ok_or_else(|| Error::Construction("recorded run did not reach extinction".into()))?;
    let radially_monotone = (0..field.grid().nt).all(|k| field.slice(k).windows(2).all(|w| w[1] <= w[0] + 1e-12));
    Ok(RadialSolve { field, report, extinction_time, substeps, radially_monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpec {
    /// Spatial dimension of the embedded field (1 or 2).
    pub d: usize,
    pub amp: f64,
    /// Radius outside which the initial profile vanishes; the radial solve
    /// covers `1.25` times this (or the box diagonal, if larger).
    pub support: f64,
    /// The embedded field lives on `[-half_width, half_width]^d`.
    pub half_width: f64,
    pub dx: f64,
    pub dx_radial: f64,
    pub levels_to_extinction: usize,
    pub total_levels: usize,
}

impl Default for RadialSpec {
    fn default() -> Self {
        RadialSpec {
            d: 2,
            amp: 0.1,
            support: 1.0,
            half_width: 0.6,
            dx: 0.01,
            dx_radial: 1.0 / 400.0,
            levels_to_extinction: 320,
            total_levels: 401,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadialExample {
    pub spec: RadialSpec,
    pub field: Field,
    pub radial: RadialSolve,
    pub center: Vec<f64>,
    pub extinction_time: f64,
}

/// Radial solve of `w0(|x|)` embedded on a Cartesian grid centred at 0.
pub fn make_radial(spec: &RadialSpec, w0: impl Fn(f64) -> f64) -> Result<RadialExample> {
    if !(1..=2).contains(&spec.d) {
        return Err(Error::pre(format!("embedded radial fields need d in {{1, 2}}, got {}", spec.d)));
    }
    let outer = (spec.half_width * (spec.d as f64).sqrt()).max(1.25 * spec.support) + 2.0 * spec.dx_radial;
    let radial = solve_radial(spec.d, &w0, outer, spec.dx_radial, spec.levels_to_extinction, spec.total_levels)?;
    let n = (2.0 * spec.half_width / spec.dx).round() as usize + 1;
    let rg = radial.field.grid();
    let target =
        SpaceTimeGrid::new(vec![n; spec.d], rg.nt, spec.dx, rg.dt, vec![-spec.half_width; spec.d], rg.origin_t)?;
    let center = vec![0.0; spec.d];
    let field = embed_radial(&radial.field, &target, &center)?;
    Ok(RadialExample { spec: spec.clone(), field, extinction_time: radial.extinction_time, radial, center })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_radial_example_extinguishes_monotonically() {
        let spec = RadialSpec { d: 1, half_width: 1.2, dx: 0.04, dx_radial: 0.01, ..RadialSpec::default() };
        let ex = make_radial(&spec, bump(0.1)).unwrap();
        assert!(ex.radial.radially_monotone);
        assert!(ex.field.is_monotone());
        let t = ex.extinction_time;
        // the run is recorded on levels of T1/320 and T lands near level 320
        let k = ex.field.grid().nearest_time(t);
        assert!((k as i64 - 320).abs() <= 1, "{k}");
        assert!(t > 0.0 && t < 0.1 / 0.5 + 1e-9);
    }

    #[test]
    fn invalid_profile_is_rejected() {
        let spec = RadialSpec { d: 1, dx: 0.05, dx_radial: 0.01, ..RadialSpec::default() };
        // Δw0 = 6 > 1 violates the semiconvexity bound
        assert!(make_radial(&spec, |r| 1.0 + 3.0 * r * r).is_err());
        assert!(make_radial(&RadialSpec { d: 3, ..spec }, bump(0.1)).is_err());
    }
}
