use serde::{Deserialize, Serialize};

use crate::export::fmt17;
use crate::field::{Field, SpaceTimeGrid, SpaceTimePoint};

/// First vanishing time `s(x)` of every spatial column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreezingTime {
    pub grid: SpaceTimeGrid,
    /// `NaN` where the column never changes sign.
    pub s: Vec<f64>,
    pub never_freezes: Vec<bool>,
    pub frozen_from_start: Vec<bool>,
}

impl FreezingTime {
    pub fn defined(&self, i: usize) -> bool {
        self.s[i].is_finite()
    }

    pub fn defined_count(&self) -> usize {
        self.s.iter().filter(|v| v.is_finite()).count()
    }

    pub fn max(&self) -> Option<(usize, f64)> {
        self.s.iter().enumerate().filter(|(_, v)| v.is_finite()).fold(None, |best: Option<(usize, f64)>, (i, &v)| {
            match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            }
        })
    }

    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut out = String::new();
        for a in 0..g.dim {
            out.push_str(&format!("x{},", a + 1));
        }
        out.push_str("s,never_freezes,frozen_from_start\n");
        for i in 0..g.n_space() {
            for x in g.node(i) {
                out.push_str(&fmt17(x));
                out.push(',');
            }
            out.push_str(&format!(
                "{},{},{}\n",
                fmt17(self.s[i]),
                u8::from(self.never_freezes[i]),
                u8::from(self.frozen_from_start[i])
            ));
        }
        out
    }
}

/// Column scan for the first level with `w <= 0`.
///
/// Between the last positive level `k-1` and the first zero level `k` the
/// column is extrapolated with its last observed speed
/// `η_{k-1} = (w_{k-2} - w_{k-1})/dt`: `s = min(t_k, t_{k-1} + w_{k-1}/η_{k-1})`.
/// When no speed is available (`k = 1` or `η <= 0`) the linear interpolation
/// to the clamped zero gives `s = t_k`.
pub fn freezing_time(field: &Field) -> FreezingTime {
    let g = field.grid().clone();
    let n = g.n_space();
    let mut s = vec![f64::NAN; n];
    let mut never = vec![false; n];
    let mut start = vec![false; n];
    for i in 0..n {
        if field.at(0, i) <= 0.0 {
            start[i] = true;
            continue;
        }
        let Some(k) = (1..g.nt).find(|&k| field.at(k, i) <= 0.0) else {
            never[i] = true;
            continue;
        };
        let t_k = g.time(k);
        let w_prev = field.at(k - 1, i);
        let mut v = t_k;
        if k >= 2 {
            let eta = (field.at(k - 2, i) - w_prev) / g.dt;
            if eta > 0.0 {
                v = t_k.min(g.time(k - 1) + w_prev / eta);
            }
        }
        s[i] = v;
    }
    FreezingTime { grid: g, s, never_freezes: never, frozen_from_start: start }
}

/// Local maxima of `s`: nodes whose value is not exceeded anywhere within
/// `window`, merged into plateaus of grid-adjacent maxima. Each plateau is
/// reported at its centroid with the plateau's value of `s`.
pub fn extinction_maxima(freezing: &FreezingTime, window: f64) -> Vec<SpaceTimePoint> {
    let g = &freezing.grid;
    let n = g.n_space();
    let is_max: Vec<bool> = (0..n)
        .map(|i| {
            if !freezing.defined(i) {
                return false;
            }
            let x = g.node(i);
            g.nodes_in_ball(&x, window).into_iter().all(|j| {
                // never-freezing neighbours stay liquid longer than any s
                !freezing.never_freezes[j] && (!freezing.defined(j) || freezing.s[j] <= freezing.s[i])
            })
        })
        .collect();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if !is_max[i] || seen[i] {
            continue;
        }
        let mut stack = vec![i];
        seen[i] = true;
        let mut members = Vec::new();
        while let Some(j) = stack.pop() {
            members.push(j);
            for nb in g.neighbours(j) {
                if is_max[nb] && !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        members.sort_unstable();
        let mut c = vec![0.0; g.dim];
        let mut t = f64::NEG_INFINITY;
        for &j in &members {
            for (ca, xa) in c.iter_mut().zip(g.node(j)) {
                *ca += xa;
            }
            t = t.max(freezing.s[j]);
        }
        for ca in &mut c {
            *ca /= members.len() as f64;
        }
        out.push(SpaceTimePoint::new(c, t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_freezes_at_t0() {
        let g = SpaceTimeGrid::line(41, -1.0, 1.0, 81, 0.0, 0.5).unwrap();
        let f = Field::from_fn(g, |_, t| (0.25 - t).max(0.0)).unwrap();
        let fr = freezing_time(&f);
        assert!(fr.s.iter().all(|&v| (v - 0.25).abs() <= f.grid().dt));
        let maxima = extinction_maxima(&fr, 0.1);
        assert_eq!(maxima.len(), 1);
        assert!(maxima[0].x[0].abs() < 1e-12);
    }

    #[test]
    fn all_zero_and_never() {
        let g = SpaceTimeGrid::line(5, 0.0, 1.0, 4, 0.0, 1.0).unwrap();
        let z = Field::from_fn(g.clone(), |_, _| 0.0).unwrap();
        let fr = freezing_time(&z);
        assert!(fr.frozen_from_start.iter().all(|&b| b) && fr.defined_count() == 0);
        let p = Field::from_fn(g, |x, _| 0.5 * x[0].max(0.0).powi(2) + 0.1).unwrap();
        let fr = freezing_time(&p);
        assert!(fr.never_freezes.iter().all(|&b| b));
        assert!(fr.max().is_none());
    }

    #[test]
    fn refinement_extrapolates_last_speed() {
        // w = 0.23 - t on levels 0, 0.1, 0.2, then 0 at 0.3
        let g = SpaceTimeGrid::line(2, 0.0, 1.0, 5, 0.0, 0.4).unwrap();
        let f = Field::from_fn(g, |_, t| (0.23 - t).max(0.0)).unwrap();
        let fr = freezing_time(&f);
        assert!((fr.s[0] - 0.23).abs() < 1e-12);
    }

    #[test]
    fn csv_has_mask_columns() {
        let g = SpaceTimeGrid::line(3, 0.0, 1.0, 3, 0.0, 1.0).unwrap();
        let f = Field::from_fn(g, |x, t| (0.5 + x[0] - t).max(0.0)).unwrap();
        let csv = freezing_time(&f).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x1,s,never_freezes,frozen_from_start");
        assert!(lines[3].ends_with("nan,1,0"));
    }
}
