//! Implicit Euler for `w_t - Δw = -χ{w>0}`: each step solves the linear
//! complementarity problem for `A = I/dt - Δ_h`, `b = w_prev/dt - 1` with
//! projected SOR in red-black order, optionally capped above by `w_prev`.

mod radial;
mod stencil;

pub use radial::{embed_radial, radial_profile_on};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeGrid, DEFAULT_MONO_TOL};
use stencil::Stencil;

/// Above this many unknowns a colour half-sweep is evaluated in parallel.
const PAR_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Zero flux (even reflection).
    Neumann,
    /// `w = 0` on the boundary nodes.
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Output grid; its `dt` is the spacing of recorded slices.
    pub grid: SpaceTimeGrid,
    pub boundary: Boundary,
    pub psor_omega: f64,
    pub psor_tol: f64,
    pub psor_max_iter: usize,
    pub enforce_monotone: bool,
    /// Ambient dimension for the radial mode (grid is then `r` in `[0, R]`).
    pub radial_dim: Option<usize>,
    /// Implicit steps per recorded slice.
    pub substeps: usize,
}

impl SolverConfig {
    pub fn new(grid: SpaceTimeGrid) -> Self {
        SolverConfig {
            grid,
            boundary: Boundary::Neumann,
            psor_omega: 1.1,
            psor_tol: 1e-8,
            psor_max_iter: 10_000,
            enforce_monotone: true,
            radial_dim: None,
            substeps: 1,
        }
    }

    pub fn radial(grid: SpaceTimeGrid, d: usize) -> Self {
        SolverConfig { radial_dim: Some(d), ..SolverConfig::new(grid) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.psor_omega > 0.0 && self.psor_omega < 2.0) {
            return Err(Error::pre(format!("psor_omega = {} not in (0, 2)", self.psor_omega)));
        }
        if !(self.psor_tol > 0.0) {
            return Err(Error::pre("psor_tol must be positive"));
        }
        if self.psor_max_iter == 0 || self.substeps == 0 {
            return Err(Error::pre("psor_max_iter and substeps must be positive"));
        }
        Ok(())
    }

    /// Time step of one implicit solve.
    pub fn inner_dt(&self) -> f64 {
        self.grid.dt / self.substeps as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub lower_clamped: usize,
    pub upper_clamped: usize,
    /// Largest amount by which the relaxed update exceeded `w_prev` before
    /// projection onto the upper obstacle (or `max(w - w_prev)` without it).
    pub violation_before_repair: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub min_w0: f64,
    /// `max(Δ_h w0 - 1)` over nodes where `w0 > 0` (`-inf` if there are none).
    pub max_excess: f64,
    pub pass: bool,
}

pub const VALIDATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub steps: usize,
    pub total_iterations: usize,
    pub max_residual: f64,
    pub nonconverged_steps: usize,
    pub max_violation_before_repair: f64,
    pub lower_clamped_last: usize,
    /// Time of the first identically zero state, if reached.
    pub extinction_time: Option<f64>,
    pub validation: ValidationReport,
}

#[derive(Debug, Clone)]
pub struct Solver {
    cfg: SolverConfig,
    stencil: Stencil,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let stencil = match cfg.radial_dim {
            Some(d) => Stencil::radial(&cfg.grid, cfg.boundary, d)?,
            None => Stencil::cartesian(&cfg.grid, cfg.boundary),
        };
        Ok(Solver { cfg, stencil })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn laplacian(&self, w: &[f64]) -> Vec<f64> {
        self.stencil.laplacian(w)
    }

    pub fn validate_initial(&self, w0: &[f64]) -> Result<ValidationReport> {
        self.check_shape(w0)?;
        let min_w0 = w0.iter().copied().fold(f64::INFINITY, f64::min);
        let lap = self.stencil.laplacian(w0);
        let max_excess =
            w0.iter().zip(&lap).filter(|(w, _)| **w > 0.0).map(|(_, l)| l - 1.0).fold(f64::NEG_INFINITY, f64::max);
        let pass = min_w0 >= 0.0 && max_excess <= VALIDATION_TOL;
        Ok(ValidationReport { min_w0, max_excess, pass })
    }

    fn check_shape(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.stencil.len() {
            return Err(Error::ShapeMismatch { expected: self.stencil.len(), found: w.len() });
        }
        if let Some(i) = w.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    /// One implicit step of size `inner_dt`.
    pub fn step(&self, w_prev: &[f64]) -> Result<(Vec<f64>, StepReport)> {
        self.check_shape(w_prev)?;
        if let Some(i) = w_prev.iter().position(|&v| v < 0.0) {
            return Err(Error::pre(format!("w_prev negative at node {i}")));
        }
        let dt = self.cfg.inner_dt();
        let inv_dt = 1.0 / dt;
        let s = &self.stencil;
        let n = s.len();
        let b: Vec<f64> = w_prev.iter().map(|w| w * inv_dt - 1.0).collect();
        let upper: Vec<f64> = if self.cfg.enforce_monotone { w_prev.to_vec() } else { vec![f64::INFINITY; n] };
        let lap = s.laplacian(w_prev);
        let mut w: Vec<f64> = (0..n)
            .map(|i| if s.fixed[i] { 0.0 } else { (w_prev[i] + dt * (lap[i] - 1.0)).max(0.0).min(upper[i]) })
            .collect();

        let omega = self.cfg.psor_omega;
        let mut residual = self.residual(&w, &b, &upper, inv_dt);
        let mut iterations = 0;
        let mut overshoot = 0.0_f64;
        while residual > self.cfg.psor_tol && iterations < self.cfg.psor_max_iter {
            overshoot = 0.0;
            for colour in &s.colours {
                let update = |&i: &usize| {
                    let diag = inv_dt + s.sum[i];
                    let gs = (b[i] + s.off_diag(i, &w)) / diag;
                    let relaxed = w[i] + omega * (gs - w[i]);
                    (relaxed.max(0.0).min(upper[i]), relaxed - upper[i])
                };
                let new: Vec<(f64, f64)> = if colour.len() >= PAR_THRESHOLD {
                    colour.par_iter().map(update).collect()
                } else {
                    colour.iter().map(update).collect()
                };
                for (&i, (v, over)) in colour.iter().zip(new) {
                    w[i] = v;
                    overshoot = overshoot.max(over);
                }
            }
            iterations += 1;
            residual = self.residual(&w, &b, &upper, inv_dt);
        }

        let violation_before_repair = if self.cfg.enforce_monotone {
            overshoot.max(0.0)
        } else {
            w.iter().zip(w_prev).map(|(a, p)| a - p).fold(0.0, f64::max)
        };
        let lower_clamped = w.iter().filter(|&&v| v == 0.0).count();
        let upper_clamped = w.iter().zip(&upper).filter(|(v, u)| **v > 0.0 && **v == **u).count();
        Ok((
            w,
            StepReport {
                iterations,
                residual,
                converged: residual <= self.cfg.psor_tol,
                lower_clamped,
                upper_clamped,
                violation_before_repair,
            },
        ))
    }

    /// `max_i |mid(w - l, Aw - b, w - u)|` over free nodes.
    fn residual(&self, w: &[f64], b: &[f64], upper: &[f64], inv_dt: f64) -> f64 {
        let s = &self.stencil;
        let node = |i: usize| -> f64 {
            if s.fixed[i] {
                return 0.0;
            }
            let aw = (inv_dt + s.sum[i]) * w[i] - s.off_diag(i, w);
            let g = aw - b[i];
            let lo = w[i];
            let hi = w[i] - upper[i];
            // median of (lo, g, hi) with hi <= lo
            g.min(lo).max(hi).abs()
        };
        if w.len() >= PAR_THRESHOLD {
            (0..w.len()).into_par_iter().map(node).reduce(|| 0.0, f64::max)
        } else {
            (0..w.len()).map(node).fold(0.0, f64::max)
        }
    }

    /// Evolve `w0` over the configured grid. Unless `force`, initial data
    /// failing validation is rejected.
    pub fn run(&self, w0: &[f64], force: bool) -> Result<(Field, RunReport)> {
        let validation = self.validate_initial(w0)?;
        if !validation.pass && !force {
            return Err(Error::pre(format!(
                "initial data failed validation: min(w0) = {:e}, max(Δw0 - 1) = {:e}",
                validation.min_w0, validation.max_excess
            )));
        }
        let g = &self.cfg.grid;
        let n = g.n_space();
        let dt = self.cfg.inner_dt();
        let mut values = Vec::with_capacity(g.len());
        let mut w: Vec<f64> = w0.iter().map(|v| v.max(0.0)).collect();
        values.extend_from_slice(&w);
        let mut report = RunReport {
            steps: 0,
            total_iterations: 0,
            max_residual: 0.0,
            nonconverged_steps: 0,
            max_violation_before_repair: 0.0,
            lower_clamped_last: w.iter().filter(|&&v| v == 0.0).count(),
            extinction_time: if w.iter().all(|&v| v == 0.0) { Some(g.origin_t) } else { None },
            validation,
        };
        'outer: for _k in 1..g.nt {
            for _ in 0..self.cfg.substeps {
                if report.extinction_time.is_some() {
                    break 'outer;
                }
                let (next, sr) = self.step(&w)?;
                report.steps += 1;
                report.total_iterations += sr.iterations;
                report.max_residual = report.max_residual.max(sr.residual);
                report.nonconverged_steps += usize::from(!sr.converged);
                report.max_violation_before_repair = report.max_violation_before_repair.max(sr.violation_before_repair);
                report.lower_clamped_last = sr.lower_clamped;
                w = next;
                if w.iter().all(|&v| v == 0.0) {
                    report.extinction_time = Some(g.origin_t + report.steps as f64 * dt);
                }
            }
            values.extend_from_slice(&w);
        }
        // identically zero from here on
        values.resize(g.len(), 0.0);
        debug_assert_eq!(values.len(), n * g.nt);
        let field = Field::new(g.clone(), values, DEFAULT_MONO_TOL)?;
        Ok((field, report))
    }

    /// Step without recording until the state vanishes or `t_max` passes.
    pub fn extinction_time(&self, w0: &[f64], t_max: f64) -> Result<Option<f64>> {
        self.check_shape(w0)?;
        let dt = self.cfg.inner_dt();
        let mut w: Vec<f64> = w0.iter().map(|v| v.max(0.0)).collect();
        let mut steps = 0usize;
        let t0 = self.cfg.grid.origin_t;
        while !w.iter().all(|&v| v == 0.0) {
            if t0 + steps as f64 * dt > t_max {
                return Ok(None);
            }
            w = self.step(&w)?.0;
            steps += 1;
        }
        Ok(Some(t0 + steps as f64 * dt))
    }
}

pub fn validate_initial(w0: &[f64], cfg: &SolverConfig) -> Result<ValidationReport> {
    Solver::new(cfg.clone())?.validate_initial(w0)
}

pub fn step(w_prev: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, StepReport)> {
    Solver::new(cfg.clone())?.step(w_prev)
}

pub fn run(w0: &[f64], cfg: &SolverConfig, force: bool) -> Result<(Field, RunReport)> {
    Solver::new(cfg.clone())?.run(w0, force)
}
