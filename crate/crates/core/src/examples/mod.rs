//! Reference fields: the planar solution `(t0 - t)⁺`, the Tychonoff-type
//! perturbation of `(-t)⁺`, radial solutions run to extinction, and glued
//! rescaled copies of a radial solution.

mod glued;
mod radial;
mod tychonoff;

use std::path::Path;

use serde::Serialize;

pub use glued::{glued_base, make_glued, GluedExample, GluingPlan, MAX_COPIES};
pub use radial::{bump, make_radial, solve_radial, RadialExample, RadialSolve, RadialSpec};
pub use tychonoff::{derivative_polynomials, make_tychonoff, TychonoffReport, TychonoffSeries, MAX_ORDER};

use crate::error::{Error, Result};
use crate::export::write_sidecar;
use crate::field::{write_field, Field, SpaceTimeGrid};

/// Exact samples of `(t0 - t)⁺`.
pub fn make_planar(t0: f64, grid: SpaceTimeGrid) -> Result<Field> {
    if t0 < grid.origin_t || t0 > grid.t_end() {
        return Err(Error::Domain { axis: "t".into(), value: t0, lo: grid.origin_t, hi: grid.t_end() });
    }
    Field::from_fn(grid, |_, t| (t0 - t).max(0.0))
}

/// Construction record written next to every example field.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance<P: Serialize, R: Serialize> {
    pub example: String,
    pub params: P,
    pub report: R,
}

/// Write `field` to `path` and its provenance to `path` + `.json`.
pub fn write_example<P: Serialize, R: Serialize>(path: &Path, field: &Field, prov: &Provenance<P, R>) -> Result<()> {
    write_field(field, path)?;
    write_sidecar(path, prov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_eta_is_one_then_zero() {
        let g = SpaceTimeGrid::line(11, -1.0, 1.0, 21, 0.0, 0.5).unwrap();
        let f = make_planar(0.25, g).unwrap();
        for k in 1..21 {
            let eta = f.eta_slice(k).unwrap();
            let expect = if f.grid().time(k) <= 0.25 + 1e-12 { 1.0 } else { 0.0 };
            assert!(eta.iter().all(|&e| (e - expect).abs() < 1e-12), "level {k}");
        }
        let g = SpaceTimeGrid::line(11, -1.0, 1.0, 21, 0.0, 0.5).unwrap();
        assert!(make_planar(0.7, g).is_err());
    }

    #[test]
    fn example_files_get_sidecars() {
        let dir = tempfile::tempdir().unwrap();
        let g = SpaceTimeGrid::line(5, 0.0, 1.0, 3, 0.0, 0.5).unwrap();
        let f = make_planar(0.25, g).unwrap();
        let path = dir.path().join("planar.sstf");
        let prov = Provenance { example: "planar".into(), params: serde_json::json!({"t0": 0.25}), report: () };
        write_example(&path, &f, &prov).unwrap();
        let side = std::fs::read_to_string(dir.path().join("planar.sstf.json")).unwrap();
        assert!(side.contains("\"example\": \"planar\""));
    }
}
