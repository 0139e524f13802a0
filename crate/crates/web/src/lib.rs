//! Browser bindings. Each export returns a JSON string; the `*_json`
//! functions behind them are plain Rust so they can be tested natively.

use serde_json::{json, Value};
use supercool_core::calpoly::CaloricPoly;
use supercool_core::calpoly::{laguerre_coefficients, laguerre_constants, radial_caloric, radial_derivative, Coeff};
use supercool_core::examples::{bump, make_radial, solve_radial, RadialSpec};
use supercool_core::field::SpaceTimePoint;
use supercool_core::freeboundary::freezing_time;
use supercool_core::functionals::{frequency_trace, radius_ladder, resolvable_range};
use supercool_core::{Error, Result};
use wasm_bindgen::prelude::*;

/// Radial grid spacing of the demo solves.
const DEMO_DX: f64 = 0.01;

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Solve the radial bump `amp (1 - r²)₊²` in dimension `d` and report the
/// liquid radius `R(t) = max{r : w(r, t) > 0}` and the central height.
pub fn radial_front_json(d: usize, amp: f64) -> Result<Value> {
    if !(1..=3).contains(&d) {
        return Err(Error::Precondition(format!("dimension must be 1, 2 or 3, got {d}")));
    }
    let sol = solve_radial(d, bump(amp), 1.25, DEMO_DX, 160, 201)?;
    let field = &sol.field;
    let g = field.grid();
    let mut t = Vec::with_capacity(g.nt);
    let mut front = Vec::with_capacity(g.nt);
    let mut center = Vec::with_capacity(g.nt);
    for k in 0..g.nt {
        let slice = field.slice(k);
        let last = slice.iter().rposition(|&v| v > 0.0);
        t.push(g.time(k));
        front.push(last.map_or(0.0, |i| g.coord(0, i)));
        center.push(slice[0]);
    }
    Ok(json!({
        "d": d,
        "amp": amp,
        "extinction_time": sol.extinction_time,
        "substeps": sol.substeps,
        "radially_monotone": sol.radially_monotone,
        "t": t,
        "front": front,
        "center": center,
    }))
}

/// Frequency trace of `w - (T - t)⁺` at the extinction point of the planar
/// embedding of a radial bump.
pub fn frequency_curve_json(amp: f64, gamma: f64, cutoff: bool) -> Result<Value> {
    let spec = RadialSpec {
        amp,
        dx: 0.02,
        dx_radial: 1.0 / 200.0,
        levels_to_extinction: 160,
        total_levels: 201,
        ..RadialSpec::default()
    };
    let ex = make_radial(&spec, bump(amp))?;
    let fr = freezing_time(&ex.field);
    let (i, s) = fr.max().ok_or_else(|| Error::Precondition("no node freezes".into()))?;
    let point = SpaceTimePoint::new(ex.field.grid().node(i), s);
    let (lo, hi) = resolvable_range(&ex.field, &point);
    let radii = radius_ladder(lo, hi, 4);
    let profile = CaloricPoly::t(2).scale(&-1.0);
    let trace = frequency_trace(&ex.field, &point, &profile, &radii, gamma, cutoff)?;
    let entries = &trace.entries;
    Ok(json!({
        "center": point,
        "gamma": gamma,
        "cutoff": cutoff,
        "r": entries.iter().map(|e| e.r).collect::<Vec<_>>(),
        "phi": entries.iter().map(|e| finite_or_null(e.phi)).collect::<Vec<_>>(),
        "phi_gamma": entries.iter().map(|e| finite_or_null(e.phi_gamma)).collect::<Vec<_>>(),
        "degenerate": entries.iter().map(|e| e.degenerate()).collect::<Vec<_>>(),
        "lambda": trace.lambda(),
        "phi_limit": trace.phi_limit(),
    }))
}

/// Radial caloric polynomial of degree `2k` in `d` variables with its
/// Laguerre constants, and `∂_r p` along `c1 t = -r²` next to `-c2 r^{2k-1}`.
pub fn laguerre_json(k: u32, d: u32) -> Result<Value> {
    let coeffs = laguerre_coefficients(k, d)?;
    let c = laguerre_constants(k, d)?;
    let p = radial_caloric(k, d)?;
    let r: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
    let dr = r.iter().map(|&r| radial_derivative(k, d, r, -r * r / c.c1)).collect::<Result<Vec<f64>>>()?;
    let bound: Vec<f64> = r.iter().map(|&r| -c.c2 * r.powi(2 * k as i32 - 1)).collect();
    Ok(json!({
        "k": k,
        "d": d,
        "coefficients": coeffs.iter().map(Coeff::to_text).collect::<Vec<_>>(),
        "polynomial": p.pretty(),
        "caloric": p.is_caloric(),
        "c1": c.c1,
        "c2": c.c2,
        "p_prime": c.p_prime,
        "r": r,
        "dr_p": dr,
        "bound": bound,
    }))
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn radial_front(d: usize, amp: f64) -> std::result::Result<String, JsError> {
    to_js(radial_front_json(d, amp))
}

#[wasm_bindgen]
pub fn frequency_curve(amp: f64, gamma: f64, cutoff: bool) -> std::result::Result<String, JsError> {
    to_js(frequency_curve_json(amp, gamma, cutoff))
}

#[wasm_bindgen]
pub fn laguerre(k: u32, d: u32) -> std::result::Result<String, JsError> {
    to_js(laguerre_json(k, d))
}
