use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use supercool_core::blowup::{classify_all, ClassifiedPoint, Family, FrequencyClass, Verdict};
use supercool_core::examples::{
    bump, glued_base, make_glued, make_planar, make_radial, make_tychonoff, GluingPlan, RadialSpec,
};
use supercool_core::export::write_sidecar;
use supercool_core::field::{read_field, write_field, Field, SpaceTimeGrid};
use supercool_core::freeboundary::{boundary_stats, extinction_maxima, freezing_time, jump_scan, nucleation_scan};
use supercool_core::solver::{Boundary, Solver, SolverConfig};

use crate::analyze::{classify_config, fit_radii};
use crate::config::GridSection;
use crate::{CliError, CliResult, Context, Outcome};

pub const EXAMPLES: [&str; 4] = ["planar", "tychonoff", "radial", "glued"];

/// JSON record written next to every output file.
#[derive(Serialize)]
pub struct Sidecar<'a, R: Serialize> {
    pub tool: &'static str,
    pub command: &'a str,
    pub seed: u64,
    /// Input files by name.
    pub inputs: Vec<String>,
    pub config: BTreeMap<&'static str, BTreeMap<&'static str, String>>,
    pub report: R,
}

impl Context {
    pub fn sidecar<'a, R: Serialize>(&self, command: &'a str, inputs: &[&Path], report: R) -> Sidecar<'a, R> {
        Sidecar {
            tool: concat!("supercool ", env!("CARGO_PKG_VERSION")),
            command,
            seed: self.seed,
            inputs: inputs
                .iter()
                .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()))
                .collect(),
            config: self.cfg.to_map(),
            report,
        }
    }

    pub fn write_field<R: Serialize>(&self, name: &str, field: &Field, sidecar: &Sidecar<R>) -> CliResult<()> {
        let path = self.out.join(name);
        write_field(field, &path)?;
        write_sidecar(&path, sidecar)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_text<R: Serialize>(&self, name: &str, text: &str, sidecar: &Sidecar<R>) -> CliResult<()> {
        let path = self.out.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
        write_sidecar(&path, sidecar)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

pub struct GridDefaults {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub nt: usize,
    pub t_lo: f64,
    pub t_hi: f64,
}

pub fn resolve_grid(sec: &GridSection, def: GridDefaults) -> CliResult<SpaceTimeGrid> {
    let n = sec.n.unwrap_or(def.n);
    let (lo, hi) = (sec.lo.unwrap_or(def.lo), sec.hi.unwrap_or(def.hi));
    let nt = sec.nt.unwrap_or(def.nt);
    let (t_lo, t_hi) = (sec.t_lo.unwrap_or(def.t_lo), sec.t_hi.unwrap_or(def.t_hi));
    let grid = match sec.dim {
        1 => SpaceTimeGrid::line(n, lo, hi, nt, t_lo, t_hi)?,
        2 => SpaceTimeGrid::square(n, lo, hi, nt, t_lo, t_hi)?,
        d => return Err(CliError::Usage(format!("[grid] dim = {d}: fields are one- or two-dimensional"))),
    };
    Ok(grid)
}

fn require_auto_grid(sec: &GridSection, name: &str) -> CliResult<()> {
    let explicit = sec.n.is_some()
        || sec.lo.is_some()
        || sec.hi.is_some()
        || sec.nt.is_some()
        || sec.t_lo.is_some()
        || sec.t_hi.is_some();
    if explicit {
        return Err(CliError::Usage(format!(
            "the {name} example derives its grid from [example]; leave [grid] keys at auto"
        )));
    }
    Ok(())
}

fn convergence(nonconverged: usize) -> Outcome {
    if nonconverged > 0 {
        Outcome::ConvergenceWarning
    } else {
        Outcome::Ok
    }
}

pub fn example(ctx: &Context, name: &str) -> CliResult<Outcome> {
    let ex = &ctx.cfg.example;
    let file = format!("{name}.sstf");
    match name {
        "planar" => {
            let grid =
                resolve_grid(&ctx.cfg.grid, GridDefaults { n: 257, lo: -1.0, hi: 1.0, nt: 201, t_lo: 0.0, t_hi: 0.5 })?;
            let field = make_planar(ex.t0, grid)?;
            let report = json!({ "t0": ex.t0, "grid": field.grid() });
            ctx.write_field(&file, &field, &ctx.sidecar("example planar", &[], report))?;
            Ok(Outcome::Ok)
        }
        "tychonoff" => {
            let grid = resolve_grid(
                &ctx.cfg.grid,
                GridDefaults { n: 129, lo: -0.5, hi: 0.5, nt: 257, t_lo: -0.25, t_hi: 0.25 },
            )?;
            let (field, report) = make_tychonoff(ex.eps, ex.order, grid)?;
            let pass = report.pass;
            ctx.write_field(&file, &field, &ctx.sidecar("example tychonoff", &[], &report))?;
            if !pass {
                return Err(CliError::Usage(format!(
                    "validity report failed (heat residual {:e} > tolerance {:e}); field written for inspection",
                    report.max_heat_residual, report.tolerance
                )));
            }
            Ok(Outcome::Ok)
        }
        "radial" => {
            require_auto_grid(&ctx.cfg.grid, name)?;
            let spec = RadialSpec {
                d: ex.d,
                amp: ex.amp,
                support: 1.0,
                half_width: ex.half_width,
                dx: ex.dx,
                dx_radial: ex.dx_radial,
                levels_to_extinction: ex.levels_to_extinction,
                total_levels: ex.total_levels,
            };
            let made = make_radial(&spec, bump(ex.amp))?;
            let report = json!({
                "profile": "amp (1 - r^2)_+^2",
                "spec": spec,
                "center": made.center,
                "extinction_time": made.extinction_time,
                "substeps": made.radial.substeps,
                "radially_monotone": made.radial.radially_monotone,
                "run": made.radial.report,
            });
            ctx.write_field(&file, &made.field, &ctx.sidecar("example radial", &[], report))?;
            println!("extinction time {:.16e}", made.extinction_time);
            Ok(convergence(made.radial.report.nonconverged_steps))
        }
        "glued" => {
            require_auto_grid(&ctx.cfg.grid, name)?;
            let plan = GluingPlan {
                spacing: ex.spacing,
                n_max: ex.n_max,
                base_amp: ex.amp,
                base_dx: ex.base_dx,
                dx: ex.glued_dx,
                total_levels: ex.total_levels,
                ..GluingPlan::default()
            };
            let base = glued_base(&plan)?;
            let grid = plan.default_grid(base.extinction_time)?;
            let made = make_glued(&plan, base, grid)?;
            let report = json!({
                "plan": plan,
                "base_extinction_time": made.base.extinction_time,
                "expected_singular_points": made.expected,
                "base_run": made.base.report,
            });
            ctx.write_field(&file, &made.field, &ctx.sidecar("example glued", &[], report))?;
            Ok(convergence(made.base.report.nonconverged_steps))
        }
        other => Err(CliError::Usage(format!("unknown example `{other}`; valid names: {}", EXAMPLES.join(", ")))),
    }
}

fn eval_expr(expr: &str, grid: &SpaceTimeGrid, radial: bool) -> CliResult<Vec<f64>> {
    use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value};
    let tree = build_operator_tree::<DefaultNumericTypes>(expr)
        .map_err(|e| CliError::Usage(format!("initial data expression: {e}")))?;
    let mut out = Vec::with_capacity(grid.n_space());
    let mut vars = HashMapContext::<DefaultNumericTypes>::new();
    for i in 0..grid.n_space() {
        let x = grid.node(i);
        let r = if radial { x[0] } else { x.iter().map(|v| v * v).sum::<f64>().sqrt() };
        let bind = |vars: &mut HashMapContext<DefaultNumericTypes>, k: &str, v: f64| {
            vars.set_value(k.into(), Value::from_float(v)).map_err(|e| CliError::Usage(e.to_string()))
        };
        bind(&mut vars, "x", x[0])?;
        bind(&mut vars, "y", x.get(1).copied().unwrap_or(0.0))?;
        bind(&mut vars, "r", r)?;
        let v = tree
            .eval_number_with_context(&vars)
            .map_err(|e| CliError::Usage(format!("initial data expression at node {i}: {e}")))?;
        out.push(v);
    }
    Ok(out)
}

fn read_values(path: &Path, expected: usize) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let vals = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| CliError::Usage(format!("{}: `{s}`: {e}", path.display()))))
        .collect::<CliResult<Vec<f64>>>()?;
    if vals.len() != expected {
        return Err(CliError::Usage(format!(
            "{}: {} values for a grid of {expected} nodes",
            path.display(),
            vals.len()
        )));
    }
    Ok(vals)
}

pub fn solve(ctx: &Context, expr: Option<&str>, w0_path: Option<&Path>, force: bool, name: &str) -> CliResult<Outcome> {
    let s = &ctx.cfg.solver;
    let radial = s.radial_dim.is_some();
    let lo = if radial { 0.0 } else { -1.0 };
    let grid = resolve_grid(&ctx.cfg.grid, GridDefaults { n: 257, lo, hi: 1.0, nt: 201, t_lo: 0.0, t_hi: 0.5 })?;
    if radial && grid.dim != 1 {
        return Err(CliError::Usage("radial solves use a one-dimensional grid in r".into()));
    }
    let w0 = match (expr, w0_path) {
        (Some(e), None) => eval_expr(e, &grid, radial)?,
        (None, Some(p)) => read_values(p, grid.n_space())?,
        _ => return Err(CliError::Usage("give the initial data with exactly one of --expr or --w0".into())),
    };
    let boundary = match s.boundary.as_str() {
        "neumann" => Boundary::Neumann,
        "dirichlet" => Boundary::Dirichlet,
        other => return Err(CliError::Usage(format!("[solver] boundary = {other}: expected neumann or dirichlet"))),
    };
    let cfg = SolverConfig {
        boundary,
        psor_omega: s.omega,
        psor_tol: s.tol,
        psor_max_iter: s.max_iter,
        enforce_monotone: s.enforce_monotone,
        radial_dim: s.radial_dim,
        substeps: s.substeps,
        ..SolverConfig::new(grid)
    };
    let solver = Solver::new(cfg)?;
    let validation = solver.validate_initial(&w0)?;
    if !validation.pass && !force {
        let text = serde_json::to_string_pretty(&validation).unwrap_or_default();
        return Err(CliError::Usage(format!(
            "initial data failed validation (rerun with --force to evolve anyway):\n{text}"
        )));
    }
    let (field, report) = solver.run(&w0, force)?;
    let inputs: Vec<&Path> = w0_path.into_iter().collect();
    let sidecar = ctx.sidecar(
        "solve",
        &inputs,
        json!({ "initial_data": expr.map_or("file", |e| e), "forced": force, "run": report }),
    );
    ctx.write_field(&format!("{name}.sstf"), &field, &sidecar)?;
    match report.extinction_time {
        Some(t) => println!("extinction time {t:.16e}"),
        None => println!("no extinction within the grid"),
    }
    Ok(convergence(report.nonconverged_steps))
}

/// Time of the first identically zero slice.
pub fn extinction_level(field: &Field) -> Option<(usize, f64)> {
    let g = field.grid();
    (0..g.nt).find(|&k| field.slice(k).iter().all(|&v| v == 0.0)).map(|k| (k, g.time(k)))
}

pub fn stats_radii(field: &Field) -> Vec<f64> {
    let dx = field.grid().dx;
    [2.0, 4.0, 8.0, 16.0].iter().map(|m| m * dx).collect()
}

#[derive(Default, Serialize)]
struct Counts {
    regular: usize,
    singular_stationary: usize,
    singular_dynamic: usize,
    undetermined: usize,
    errors: usize,
    by_stratum: BTreeMap<usize, usize>,
    frequency: BTreeMap<String, usize>,
    slow_convergence: usize,
    ambiguous: usize,
    eta_inconsistent: usize,
    nucleation: usize,
}

fn count(points: &[CliResult<ClassifiedPoint>]) -> Counts {
    let mut c = Counts::default();
    for p in points {
        let Ok(p) = p else {
            c.errors += 1;
            continue;
        };
        match (p.verdict, p.family) {
            (Verdict::Regular, _) => c.regular += 1,
            (Verdict::Singular, Some(Family::Stationary)) => c.singular_stationary += 1,
            (Verdict::Singular, _) => c.singular_dynamic += 1,
            (Verdict::Undetermined, _) => c.undetermined += 1,
        }
        if let Some(s) = p.stratum {
            *c.by_stratum.entry(s).or_default() += 1;
        }
        let key = match p.frequency {
            FrequencyClass::Finite(k) => Some(format!("finite {k}")),
            FrequencyClass::Infinite => Some("infinite".into()),
            FrequencyClass::Unresolved => Some("unresolved".into()),
            FrequencyClass::NotApplicable => None,
        };
        if let Some(k) = key {
            *c.frequency.entry(k).or_default() += 1;
        }
        c.slow_convergence += usize::from(p.slow_convergence);
        c.ambiguous += usize::from(p.profile.as_ref().is_some_and(|q| q.ambiguous));
        c.eta_inconsistent += usize::from(p.eta_consistent == Some(false));
        c.nucleation += usize::from(p.nucleation);
    }
    c
}

pub fn load_field(path: &Path) -> CliResult<Field> {
    read_field(path).map_err(|e| match e {
        supercool_core::Error::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

pub fn report(ctx: &Context, path: &Path) -> CliResult<Outcome> {
    let field = load_field(path)?;
    let g = field.grid();
    let fr = freezing_time(&field);
    let stats = boundary_stats(&field, &fr, &stats_radii(&field));
    let maxima = extinction_maxima(&fr, ctx.cfg.analysis.maxima_window * g.dx);
    let cfg = classify_config(&ctx.cfg.analysis);
    let radii_for =
        |p: &supercool_core::field::SpaceTimePoint| fit_radii(&field, p, &ctx.cfg.analysis).unwrap_or_default();
    let classified: Vec<CliResult<ClassifiedPoint>> =
        classify_all(&field, &fr, &maxima, &radii_for, &cfg).into_iter().map(|r| r.map_err(CliError::from)).collect();
    let counts = count(&classified);
    let jumps = jump_scan(&fr, ctx.cfg.analysis.jump_threshold);
    let nucleation = nucleation_scan(&field, &fr);
    let extinction = extinction_level(&field);

    let mut t = String::new();
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let _ = writeln!(t, "field        {name}");
    let _ = writeln!(
        t,
        "grid         dim {}, shape {:?}, dx {:e}; {} levels, dt {:e}, t in [{}, {}]",
        g.dim,
        g.shape,
        g.dx,
        g.nt,
        g.dt,
        g.origin_t,
        g.t_end()
    );
    let _ = writeln!(
        t,
        "monotone     {} (max violation {:e})",
        if field.is_monotone() { "yes" } else { "NO" },
        field.max_violation()
    );
    match extinction {
        Some((k, time)) => {
            let _ = writeln!(t, "extinction   t = {time} (level {k})");
        }
        None => {
            let _ = writeln!(t, "extinction   not reached");
        }
    }
    let frozen0 = fr.frozen_from_start.iter().filter(|&&b| b).count();
    let never = fr.never_freezes.iter().filter(|&&b| b).count();
    let _ = writeln!(
        t,
        "freezing     s defined at {} of {} nodes; {frozen0} frozen from the start, {never} never freeze",
        fr.defined_count(),
        g.n_space()
    );
    if let Some((i, s)) = fr.max() {
        let _ = writeln!(t, "             max s = {s} at x = {:?}", g.node(i));
    }
    if stats.is_empty() {
        let _ = writeln!(t, "boundary     no free-boundary nodes");
    } else {
        let c_d = stats.c_d.map_or_else(|| "n/a".to_string(), |c| format!("{c}"));
        let _ = writeln!(
            t,
            "boundary     grid Lipschitz constant of s {}; nondegeneracy c_d {c_d} ({} samples)",
            stats.lipschitz_global, stats.c_d_samples
        );
        let _ = writeln!(
            t,
            "             speed ratio max {} over {} samples, {} exceedances",
            stats.speed_ratio_max, stats.speed_samples, stats.speed_exceedances
        );
    }
    let _ = writeln!(t, "maxima       {} extinction maxima of s", maxima.len());
    let _ = writeln!(
        t,
        "classified   regular {}, singular stationary {}, singular dynamic {}, undetermined {}, errors {}",
        counts.regular, counts.singular_stationary, counts.singular_dynamic, counts.undetermined, counts.errors
    );
    if !counts.by_stratum.is_empty() {
        let _ = writeln!(t, "             strata {:?}", counts.by_stratum);
    }
    if !counts.frequency.is_empty() {
        let _ = writeln!(t, "             frequency classes {:?}", counts.frequency);
    }
    let _ = writeln!(t, "jumps        {} at t = {:?}", jumps.len(), jumps);
    let _ = writeln!(t, "nucleation   {} boundary nodes", nucleation.len());
    let _ = writeln!(
        t,
        "flags        slow convergence {}, ambiguous fits {}, eta inconsistent {}",
        counts.slow_convergence, counts.ambiguous, counts.eta_inconsistent
    );
    print!("{t}");
    let stem = path.file_stem().map_or_else(|| "field".into(), |s| s.to_string_lossy().into_owned());
    let summary = json!({
        "extinction_time": extinction.map(|e| e.1),
        "stats": stats,
        "maxima": maxima,
        "counts": counts,
        "jumps": jumps,
        "nucleation_nodes": nucleation.len(),
    });
    ctx.write_text(&format!("{stem}.report.txt"), &t, &ctx.sidecar("report", &[path], summary))?;
    Ok(Outcome::Ok)
}
