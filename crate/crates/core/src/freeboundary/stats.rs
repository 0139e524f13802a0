use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::freeze::FreezingTime;
use crate::field::{Field, SpaceTimePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    /// `|∇s|` per node, `NaN` where `s` or all of its neighbours are undefined.
    pub grad_s: Vec<f64>,
    /// Largest difference quotient of `s` over neighbouring defined nodes.
    pub lipschitz_global: f64,
    pub lipschitz_local: Vec<f64>,
    /// `min sup_{B_r(x)} w(·, s(x) - r²) / r²` over boundary nodes and radii.
    pub c_d: Option<f64>,
    pub c_d_samples: usize,
    pub speed_ratio_max: f64,
    pub speed_samples: usize,
    /// Samples where `η <= ε_div` while `|∇w| > 0`.
    pub speed_exceedances: usize,
}

impl BoundaryStats {
    pub fn is_empty(&self) -> bool {
        self.c_d_samples == 0 && self.grad_s.iter().all(|v| v.is_nan())
    }
}

fn gradient_of_s(fr: &FreezingTime) -> (Vec<f64>, Vec<f64>, f64) {
    let g = &fr.grid;
    let n = g.n_space();
    let mut grad = vec![f64::NAN; n];
    let mut local = vec![f64::NAN; n];
    let mut global = 0.0f64;
    for i in 0..n {
        if !fr.defined(i) {
            continue;
        }
        let multi = g.unflat(i);
        let mut g2 = 0.0;
        let mut any = false;
        let mut lip = 0.0f64;
        for a in 0..g.dim {
            let step = |delta: isize| -> Option<f64> {
                let j = multi[a] as isize + delta;
                if j < 0 || j as usize >= g.shape[a] {
                    return None;
                }
                let mut m = multi.clone();
                m[a] = j as usize;
                let v = fr.s[g.flat(&m)];
                v.is_finite().then_some(v)
            };
            let (up, dn) = (step(1), step(-1));
            let d = match (up, dn) {
                (Some(u), Some(l)) => Some((u - l) / (2.0 * g.dx)),
                (Some(u), None) => Some((u - fr.s[i]) / g.dx),
                (None, Some(l)) => Some((fr.s[i] - l) / g.dx),
                (None, None) => None,
            };
            if let Some(d) = d {
                g2 += d * d;
                any = true;
            }
            for v in [up, dn].into_iter().flatten() {
                lip = lip.max((v - fr.s[i]).abs() / g.dx);
            }
        }
        if any {
            grad[i] = g2.sqrt();
            local[i] = lip;
            global = global.max(lip);
        }
    }
    (grad, local, global)
}

/// Boundary statistics; `radii` are the nondegeneracy test radii.
pub fn boundary_stats(field: &Field, fr: &FreezingTime, radii: &[f64]) -> BoundaryStats {
    let g = field.grid();
    let (grad_s, lipschitz_local, lipschitz_global) = gradient_of_s(fr);

    let samples: Vec<f64> = (0..g.n_space())
        .into_par_iter()
        .filter(|&i| fr.defined(i))
        .flat_map_iter(|i| {
            let x = g.node(i);
            let room = g.room(&x);
            radii
                .iter()
                .filter_map(|&r| {
                    let t = fr.s[i] - r * r;
                    if r > room || t < g.origin_t {
                        return None;
                    }
                    let sup = g
                        .nodes_in_ball(&x, r)
                        .into_iter()
                        .filter_map(|j| field.interpolate_at(&g.node(j), t).ok())
                        .fold(0.0f64, f64::max);
                    Some(sup / (r * r))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let c_d = samples.iter().copied().reduce(f64::min);

    // speed ratios on the positive set within a parabolic band below the graph
    let band = radii.iter().copied().fold(0.0f64, f64::max).powi(2).max(4.0 * g.dt);
    let eps_div = 1e-12 * field.sup_norm() / g.dt;
    let mut ratio_max = 0.0f64;
    let mut count = 0;
    let mut exceed = 0;
    for k in 1..g.nt {
        let t = g.time(k);
        let eta = field.eta_slice(k).expect("k in range");
        let w = field.slice(k);
        for i in 0..g.n_space() {
            if w[i] <= 0.0 || !fr.defined(i) || fr.s[i] - t > band {
                continue;
            }
            let multi = g.unflat(i);
            if (0..g.dim).any(|a| multi[a] == 0 || multi[a] + 1 == g.shape[a]) {
                continue;
            }
            let mut g2 = 0.0;
            for a in 0..g.dim {
                let mut up = multi.clone();
                up[a] += 1;
                let mut dn = multi.clone();
                dn[a] -= 1;
                let d = (w[g.flat(&up)] - w[g.flat(&dn)]) / (2.0 * g.dx);
                g2 += d * d;
            }
            let grad = g2.sqrt();
            count += 1;
            if eta[i] <= eps_div {
                if grad > 0.0 {
                    exceed += 1;
                }
            } else {
                ratio_max = ratio_max.max(grad / eta[i]);
            }
        }
    }

    BoundaryStats {
        grad_s,
        lipschitz_global,
        lipschitz_local,
        c_d,
        c_d_samples: samples.len(),
        speed_ratio_max: ratio_max,
        speed_samples: count,
        speed_exceedances: exceed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleationHit {
    pub node: usize,
    pub point: SpaceTimePoint,
    pub radius: f64,
}

/// Radius (`4dx` or `8dx`) of a liquid backward cylinder below the boundary
/// point over node `i`, if one exists.
pub fn nucleates_at(field: &Field, fr: &FreezingTime, i: usize) -> Option<f64> {
    let g = field.grid();
    if !fr.defined(i) {
        return None;
    }
    let x = g.node(i);
    let s0 = fr.s[i];
    for r in [4.0 * g.dx, 8.0 * g.dx] {
        if g.room(&x) < r {
            continue;
        }
        let ball = g.nodes_in_ball(&x, r);
        let graph_ok = ball.iter().all(|&j| fr.never_freezes[j] || (fr.defined(j) && fr.s[j] >= s0));
        if !graph_ok {
            continue;
        }
        let liquid = (0..g.nt)
            .filter(|&k| {
                let t = g.time(k);
                t >= s0 - r * r && t < s0
            })
            .all(|k| ball.iter().all(|&j| field.at(k, j) > 0.0));
        if liquid {
            return Some(r);
        }
    }
    None
}

/// Boundary nodes below which a full backward cylinder of radius `4dx` or
/// `8dx` is liquid on every grid level.
pub fn nucleation_scan(field: &Field, fr: &FreezingTime) -> Vec<NucleationHit> {
    let g = field.grid();
    (0..g.n_space())
        .into_par_iter()
        .filter_map(|i| {
            let radius = nucleates_at(field, fr, i)?;
            Some(NucleationHit { node: i, point: SpaceTimePoint::new(g.node(i), fr.s[i]), radius })
        })
        .collect()
}

/// Grid times `t_k` whose freezing bin (nodes with `s` nearest to `t_k`)
/// contains a discrete ball of radius `threshold · half_width`.
pub fn jump_scan(fr: &FreezingTime, threshold: f64) -> Vec<f64> {
    let g = &fr.grid;
    let rho = threshold * g.half_width();
    let bins: Vec<Option<usize>> = (0..g.n_space()).map(|i| fr.defined(i).then(|| g.nearest_time(fr.s[i]))).collect();
    let mut times: Vec<usize> = (0..g.n_space())
        .into_par_iter()
        .filter_map(|i| {
            let k = bins[i]?;
            let x = g.node(i);
            if g.room(&x) < rho {
                return None;
            }
            g.nodes_in_ball(&x, rho).iter().all(|&j| bins[j] == Some(k)).then_some(k)
        })
        .collect();
    times.sort_unstable();
    times.dedup();
    times.into_iter().map(|k| g.time(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningRadius {
    pub r: f64,
    pub delta: f64,
    /// `B_r × [t0 - r², t0 - δr²/c)` lies in `{w > 0}` on the grid.
    pub lower_holds: bool,
    /// `B_r × [t0 + δr²/c, t0 + r²]` lies in `{w = 0}` on the grid.
    pub upper_holds: bool,
    pub nodes_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CleaningReport {
    NotApplicable { m: f64 },
    Checked { c_d: f64, radii: Vec<CleaningRadius>, skipped: Vec<f64>, first_failure: Option<f64> },
}

impl CleaningReport {
    pub fn violations(&self) -> usize {
        match self {
            CleaningReport::NotApplicable { .. } => 0,
            CleaningReport::Checked { radii, .. } => radii.iter().filter(|c| !(c.lower_holds && c.upper_holds)).count(),
        }
    }
}

/// Two-sided cleaning at `point`, whose blow-up has time coefficient `m`.
pub fn cleaning_check(field: &Field, point: &SpaceTimePoint, m: f64, c_d: f64, radii: &[f64]) -> CleaningReport {
    if m < 0.9 {
        return CleaningReport::NotApplicable { m };
    }
    let g = field.grid();
    let t0 = point.t;
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for &r in radii {
        let fits =
            g.room(&point.x) >= 2.0 * r && t0 - 4.0 * r * r >= g.origin_t && t0 + r * r <= g.t_end() && r >= 2.0 * g.dx;
        if !fits {
            skipped.push(r);
            continue;
        }
        let big = g.nodes_in_ball(&point.x, 2.0 * r);
        let small = g.nodes_in_ball(&point.x, r);
        let levels = |lo: f64, hi: f64| (0..g.nt).filter(move |&k| g.time(k) >= lo && g.time(k) <= hi);
        let mut sup = 0.0f64;
        for k in levels(t0 - 4.0 * r * r, t0) {
            let t = g.time(k);
            for &j in &big {
                sup = sup.max((field.at(k, j) - (t0 - t)).abs());
            }
        }
        let delta = sup / (r * r);
        let gap = delta * r * r / c_d;
        let mut checked = 0;
        let mut lower = true;
        // half-open at the top: w vanishes at t0 itself
        for k in levels(t0 - r * r, t0 - gap).filter(|&k| g.time(k) < t0 - gap) {
            for &j in &small {
                checked += 1;
                lower &= field.at(k, j) > 0.0;
            }
        }
        let mut upper = true;
        for k in levels(t0 + gap, t0 + r * r) {
            for &j in &small {
                checked += 1;
                upper &= field.at(k, j) <= 0.0;
            }
        }
        out.push(CleaningRadius { r, delta, lower_holds: lower, upper_holds: upper, nodes_checked: checked });
    }
    let first_failure = out.iter().find(|c| !(c.lower_holds && c.upper_holds)).map(|c| c.r);
    CleaningReport::Checked { c_d, radii: out, skipped, first_failure }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpaceTimeGrid;
    use crate::freeboundary::freezing_time;

    fn planar() -> Field {
        let g = SpaceTimeGrid::line(81, -1.0, 1.0, 101, 0.0, 0.5).unwrap();
        Field::from_fn(g, |_, t| (0.25 - t).max(0.0)).unwrap()
    }

    #[test]
    fn planar_stats() {
        let f = planar();
        let fr = freezing_time(&f);
        let dx = f.grid().dx;
        let st = boundary_stats(&f, &fr, &[2.0 * dx, 4.0 * dx, 8.0 * dx]);
        assert!((st.c_d.unwrap() - 1.0).abs() < 1e-9, "{:?}", st.c_d);
        assert_eq!(st.lipschitz_global, 0.0);
        assert_eq!(st.speed_ratio_max, 0.0);
    }

    #[test]
    fn stationary_profile_has_empty_stats() {
        let g = SpaceTimeGrid::line(41, -1.0, 1.0, 11, 0.0, 0.5).unwrap();
        let f = Field::from_fn(g, |x, _| 0.5 * x[0].max(0.0).powi(2)).unwrap();
        let fr = freezing_time(&f);
        let st = boundary_stats(&f, &fr, &[0.1]);
        assert!(st.is_empty());
        assert!(fr.frozen_from_start[0] && fr.never_freezes[40]);
    }

    #[test]
    fn planar_nucleates_and_jumps_once() {
        let f = planar();
        let fr = freezing_time(&f);
        let hits = nucleation_scan(&f, &fr);
        let g = f.grid();
        let interior = (0..g.n_space()).filter(|&i| g.room(&g.node(i)) >= 4.0 * g.dx).count();
        assert_eq!(hits.len(), interior);
        let jumps = jump_scan(&fr, 0.1);
        assert_eq!(jumps.len(), 1);
        assert!((jumps[0] - 0.25).abs() < 1e-12);
        let jump_nodes: Vec<usize> = (0..g.n_space())
            .filter(|&i| g.room(&g.node(i)) >= 4.0 * g.dx && g.nearest_time(fr.s[i]) == g.nearest_time(0.25))
            .collect();
        let hit_nodes: Vec<usize> = hits.iter().map(|h| h.node).collect();
        assert_eq!(jump_nodes, hit_nodes);
    }

    #[test]
    fn planar_cleaning_and_guard() {
        let f = planar();
        let p = SpaceTimePoint::new(vec![0.0], 0.25);
        let rep = cleaning_check(&f, &p, 1.0, 1.0, &[0.05, 0.1, 0.2]);
        match &rep {
            CleaningReport::Checked { radii, first_failure, .. } => {
                assert_eq!(radii.len(), 3);
                assert!(radii.iter().all(|c| c.delta < 1e-15));
                assert!(first_failure.is_none());
            }
            _ => panic!("expected a check"),
        }
        assert_eq!(rep.violations(), 0);
        assert!(matches!(cleaning_check(&f, &p, 0.1, 1.0, &[0.1]), CleaningReport::NotApplicable { .. }));
    }
}
