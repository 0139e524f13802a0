use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeGrid, DEFAULT_MONO_TOL};

/// Sample a radial profile `w0(r)` on the nodes of a radial grid.
pub fn radial_profile_on(grid: &SpaceTimeGrid, w0: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..grid.shape[0]).map(|i| w0(grid.coord(0, i))).collect()
}

/// Map a radial field `w(r, t)` onto a Cartesian grid by `r = |x - center|`,
/// linear in `r`. Time levels must coincide.
pub fn embed_radial(radial: &Field, target: &SpaceTimeGrid, center: &[f64]) -> Result<Field> {
    let rg = radial.grid();
    if rg.dim != 1 {
        return Err(Error::pre("radial field must be one-dimensional"));
    }
    if center.len() != target.dim {
        return Err(Error::pre("center dimension differs from target grid"));
    }
    let same_times = rg.nt == target.nt
        && (rg.dt - target.dt).abs() <= 1e-12 * rg.dt
        && (rg.origin_t - target.origin_t).abs() <= 1e-12 * rg.dt.max(rg.origin_t.abs());
    if !same_times {
        return Err(Error::pre("radial and target grids must share time levels"));
    }
    let r_max = rg.x_hi(0);
    let n = target.n_space();
    // per node: (cell index, fraction)
    let mut weights = Vec::with_capacity(n);
    for idx in 0..n {
        let x = target.node(idx);
        let r = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        if r > r_max * (1.0 + 1e-12) {
            return Err(Error::Domain { axis: "r".into(), value: r, lo: 0.0, hi: r_max });
        }
        let u = (r / rg.dx).min((rg.shape[0] - 1) as f64);
        let i = (u.floor() as usize).min(rg.shape[0] - 2);
        weights.push((i, u - i as f64));
    }
    let mut values = Vec::with_capacity(target.len());
    for k in 0..rg.nt {
        let slice = radial.slice(k);
        values.extend(weights.iter().map(
            |&(i, f)| {
                if f == 0.0 {
                    slice[i]
                } else {
                    slice[i] * (1.0 - f) + slice[i + 1] * f
                }
            },
        ));
    }
    Field::new(target.clone(), values, DEFAULT_MONO_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run, Solver, SolverConfig};

    #[test]
    fn radial_constant_decreases_at_unit_rate() {
        let g = SpaceTimeGrid::line(17, 0.0, 1.0, 2, 0.0, 1e-3).unwrap();
        for d in 1..=3 {
            let s = Solver::new(SolverConfig::radial(g.clone(), d)).unwrap();
            let (w, _) = s.step(&[0.3; 17]).unwrap();
            assert!(w.iter().all(|&v| (v - (0.3 - 1e-3)).abs() < 1e-15));
        }
    }

    #[test]
    fn d1_radial_matches_cartesian_half_line() {
        let g = SpaceTimeGrid::line(33, 0.0, 1.0, 20, 0.0, 19.0 * 2e-4).unwrap();
        let w0 = radial_profile_on(&g, |r| 0.05 * (1.0 - r * r).max(0.0).powi(2));
        let (a, _) = run(&w0, &SolverConfig::new(g.clone()), true).unwrap();
        let (b, _) = run(&w0, &SolverConfig::radial(g, 1), true).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn embedding_is_radial() {
        let g = SpaceTimeGrid::line(41, 0.0, 2.0, 3, 0.0, 0.02).unwrap();
        let rf = Field::from_fn(g, |x, t| (1.0 - x[0] * x[0]).max(0.0) * (1.0 - t)).unwrap();
        let target = SpaceTimeGrid::square(21, -1.0, 1.0, 3, 0.0, 0.02).unwrap();
        let e = embed_radial(&rf, &target, &[0.0, 0.0]).unwrap();
        let a = e.interpolate_at(&[0.3, 0.4], 0.01).unwrap();
        let b = e.interpolate_at(&[0.5, 0.0], 0.01).unwrap();
        assert!((a - b).abs() < 1e-2);
        let bad = SpaceTimeGrid::square(21, -2.0, 2.0, 3, 0.0, 0.02).unwrap();
        assert!(embed_radial(&rf, &bad, &[0.0, 0.0]).is_err());
    }
}
