use std::path::Path;

use serde_json::json;
use supercool_core::blowup::{
    classify, classify_all, fit_profile, max_rescale_radius, rescale, taylor_fit, ClassifyConfig, RadiusFit,
};
use supercool_core::calpoly::CaloricPoly;
use supercool_core::export::fmt17;
use supercool_core::field::{Field, SpaceTimePoint};
use supercool_core::freeboundary::{
    boundary_stats, cleaning_check, dyadic_scales, extinction_maxima, freezing_time, jump_scan, nucleation_scan,
    parabolic_dimension, FreezingTime,
};
use supercool_core::functionals::{frequency_trace, monotonicity_audit, radius_ladder, resolvable_range, AuditMode};

use crate::commands::{load_field, stats_radii};
use crate::config::AnalysisSection;
use crate::{CliError, CliResult, Context, Outcome};

pub const KINDS: [&str; 9] =
    ["freeze", "frequency", "blowup", "classify", "taylor", "cleaning", "dimension", "nucleation", "jumps"];

pub fn classify_config(a: &AnalysisSection) -> ClassifyConfig {
    ClassifyConfig {
        rank_tol: a.rank_tol,
        m_tol: a.m_tol,
        residual_tol: a.residual_tol,
        stability_tol: a.stability_tol,
        plateau_margin: a.plateau_margin,
        trace_per_octave: a.per_octave,
        ..ClassifyConfig::default()
    }
}

/// Blow-up radii: a ladder from the largest backward cylinder that fits
/// (or `r_max`) down to `4dx` (or `r_min`).
pub fn fit_radii(field: &Field, point: &SpaceTimePoint, a: &AnalysisSection) -> CliResult<Vec<f64>> {
    let hi = a.r_max.unwrap_or_else(|| max_rescale_radius(field, point));
    let lo = a.r_min.unwrap_or(4.0 * field.grid().dx);
    let radii = radius_ladder(lo, hi, a.per_octave);
    if radii.is_empty() {
        return Err(supercool_core::Error::Unresolvable { r: lo, lo, hi }.into());
    }
    Ok(radii)
}

fn parse_center(spec: Option<&str>, field: &Field, fr: &FreezingTime) -> CliResult<SpaceTimePoint> {
    let spec = spec.ok_or_else(|| CliError::Usage("this analysis needs --center".into()))?;
    let g = field.grid();
    if spec == "auto-extinction" {
        let (i, s) = fr.max().ok_or_else(|| CliError::Usage("no node of the field ever freezes".into()))?;
        return Ok(SpaceTimePoint::new(g.node(i), s));
    }
    let nums = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("--center `{s}`: {e}"))))
        .collect::<CliResult<Vec<f64>>>()?;
    if nums.len() != g.dim + 1 {
        return Err(CliError::Usage(format!(
            "--center needs {} comma-separated numbers (x1[,x2],t), got {}",
            g.dim + 1,
            nums.len()
        )));
    }
    let t = nums[g.dim];
    Ok(SpaceTimePoint::new(nums[..g.dim].to_vec(), t))
}

pub fn analyze(ctx: &Context, kind: &str, path: &Path, center: Option<&str>, all_maxima: bool) -> CliResult<Outcome> {
    if !KINDS.contains(&kind) {
        return Err(CliError::Usage(format!("unknown analysis `{kind}`; valid kinds: {}", KINDS.join(", "))));
    }
    let field = load_field(path)?;
    let g = field.grid();
    let a = &ctx.cfg.analysis;
    let fr = freezing_time(&field);
    let stem = path.file_stem().map_or_else(|| "field".into(), |s| s.to_string_lossy().into_owned());
    let command = format!("analyze {kind}");
    let inputs = [path];
    match kind {
        "freeze" => {
            let report = json!({
                "defined": fr.defined_count(),
                "max": fr.max().map(|(i, s)| json!({ "x": g.node(i), "s": s })),
            });
            ctx.write_text(&format!("{stem}.freeze.csv"), &fr.to_csv(), &ctx.sidecar(&command, &inputs, report))?;
        }
        "frequency" => {
            let point = parse_center(center, &field, &fr)?;
            let profile = match a.profile.as_str() {
                "planar" => CaloricPoly::t(g.dim).scale(&-1.0),
                "zero" => CaloricPoly::zero(g.dim),
                other => return Err(CliError::Usage(format!("[analysis] profile = {other}: expected planar or zero"))),
            };
            let (lo, hi) = resolvable_range(&field, &point);
            let radii = radius_ladder(a.r_min.unwrap_or(lo), a.r_max.unwrap_or(hi), a.per_octave);
            let trace = frequency_trace(&field, &point, &profile, &radii, a.gamma, a.cutoff)?;
            let mode = if a.cutoff { AuditMode::Cutoff } else { AuditMode::Global };
            let audit = monotonicity_audit(&trace, mode, 0.05).ok();
            let lambda = trace.lambda();
            match lambda {
                Some(l) => println!("lambda({}) = {l}", a.gamma),
                None => println!("lambda({}) undefined: every radius is degenerate", a.gamma),
            }
            let report = json!({
                "center": point,
                "profile": trace.profile.pretty(),
                "gamma": a.gamma,
                "cutoff": a.cutoff,
                "lambda": lambda,
                "phi_limit": trace.phi_limit(),
                "all_degenerate": trace.all_degenerate(),
                "audit": audit,
            });
            ctx.write_text(&format!("{stem}.frequency.csv"), &trace.to_csv(), &ctx.sidecar(&command, &inputs, report))?;
        }
        "blowup" => {
            let point = parse_center(center, &field, &fr)?;
            let fits = fit_radii(&field, &point, a)?
                .into_iter()
                .map(|r| Ok(RadiusFit { r, profile: fit_profile(&rescale(&field, &point, r)?) }))
                .collect::<CliResult<Vec<RadiusFit>>>()?;
            let text = pretty(&json!({ "point": point, "fits": fits }));
            ctx.write_text(&format!("{stem}.blowup.json"), &text, &ctx.sidecar(&command, &inputs, json!({})))?;
        }
        "classify" => {
            let cfg = classify_config(a);
            let records = if all_maxima {
                let points = extinction_maxima(&fr, a.maxima_window * g.dx);
                let radii_for = |p: &SpaceTimePoint| fit_radii(&field, p, a).unwrap_or_default();
                classify_all(&field, &fr, &points, &radii_for, &cfg)
                    .into_iter()
                    .zip(&points)
                    .map(|(r, p)| match r {
                        Ok(c) => serde_json::to_value(c).unwrap_or_default(),
                        Err(e) => json!({ "point": p, "error": e.to_string() }),
                    })
                    .collect::<Vec<_>>()
            } else {
                let point = parse_center(center, &field, &fr)?;
                let c = classify(&field, &fr, &point, &fit_radii(&field, &point, a)?, &cfg)?;
                vec![serde_json::to_value(c).unwrap_or_default()]
            };
            println!("classified {} point(s)", records.len());
            let report = json!({ "config": cfg, "points": records.len() });
            ctx.write_text(
                &format!("{stem}.classify.json"),
                &pretty(&records),
                &ctx.sidecar(&command, &inputs, report),
            )?;
        }
        "taylor" => {
            let point = parse_center(center, &field, &fr)?;
            let r0 = a.taylor_r0.unwrap_or_else(|| max_rescale_radius(&field, &point));
            let ladder = radius_ladder(a.r_min.unwrap_or(4.0 * g.dx), 0.5 * r0, a.per_octave);
            let fit = taylor_fit(&field, &point, a.taylor_k as u32, a.taylor_beta, r0, &ladder)?;
            let text = pretty(&json!({
                "point": fit.point,
                "k": fit.k,
                "beta": fit.beta,
                "r0": r0,
                "samples": fit.samples,
                "poly": fit.poly.pretty(),
                "residuals": fit.residuals,
                "slope": slope_json(fit.slope),
                "slope_regression": fit.slope_regression.map(slope_json),
            }));
            ctx.write_text(&format!("{stem}.taylor.json"), &text, &ctx.sidecar(&command, &inputs, json!({})))?;
        }
        "cleaning" => {
            let point = parse_center(center, &field, &fr)?;
            let m = match a.cleaning_m {
                Some(m) => m,
                None => classify(&field, &fr, &point, &fit_radii(&field, &point, a)?, &classify_config(a))?
                    .m()
                    .ok_or_else(|| CliError::Usage("point is not singular; set analysis.cleaning_m".into()))?,
            };
            let stats = boundary_stats(&field, &fr, &stats_radii(&field));
            let c_d = stats.c_d.ok_or_else(|| CliError::Usage("no nondegeneracy samples to estimate c_d".into()))?;
            let hi = 0.5 * field.grid().room(&point.x);
            let radii = radius_ladder(2.0 * g.dx, hi, a.per_octave);
            let rep = cleaning_check(&field, &point, m, c_d, &radii);
            println!("cleaning: {} violation(s)", rep.violations());
            let text = pretty(&json!({ "point": point, "m": m, "report": rep }));
            ctx.write_text(&format!("{stem}.cleaning.json"), &text, &ctx.sidecar(&command, &inputs, json!({})))?;
        }
        "dimension" => {
            let points: Vec<SpaceTimePoint> =
                (0..g.n_space()).filter(|&i| fr.defined(i)).map(|i| SpaceTimePoint::new(g.node(i), fr.s[i])).collect();
            let scales = dyadic_scales(a.box_r0.unwrap_or(0.25 * g.half_width()), a.box_scales);
            let est = parabolic_dimension(&points, &scales)?;
            println!("{}", est.summary());
            let report = json!({ "points": points.len(), "estimate": est });
            ctx.write_text(&format!("{stem}.dimension.csv"), &est.to_csv(), &ctx.sidecar(&command, &inputs, report))?;
        }
        "nucleation" => {
            let hits = nucleation_scan(&field, &fr);
            println!("{} nucleation node(s)", hits.len());
            ctx.write_text(
                &format!("{stem}.nucleation.json"),
                &pretty(&hits),
                &ctx.sidecar(&command, &inputs, json!({})),
            )?;
        }
        "jumps" => {
            let times = jump_scan(&fr, a.jump_threshold);
            let mut csv = String::from("t\n");
            for t in &times {
                csv.push_str(&fmt17(*t));
                csv.push('\n');
            }
            println!("{} jump time(s)", times.len());
            let report = json!({ "threshold": a.jump_threshold });
            ctx.write_text(&format!("{stem}.jumps.csv"), &csv, &ctx.sidecar(&command, &inputs, report))?;
        }
        _ => unreachable!("kind checked above"),
    }
    Ok(Outcome::Ok)
}

fn pretty<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default() + "\n"
}

/// JSON has no infinity; an exact fit reports its slope as the string "inf".
fn slope_json(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt17(v))
    }
}
