use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{csv_row, fmt17};
use crate::field::SpaceTimePoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the regression residuals.
    pub slope_stderr: f64,
    /// `slope ± 2·stderr`.
    pub interval: (f64, f64),
    pub residuals: Vec<f64>,
}

impl DimensionEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,N\n");
        for (r, n) in self.scales.iter().zip(&self.counts) {
            out.push_str(&format!("{},{}\n", fmt17(*r), n));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!("slope,{}", csv_row(&[self.slope, self.slope_stderr, self.interval.0, self.interval.1]))
    }
}

/// Number of boxes `[i r, (i+1) r) × [j r², (j+1) r²)` meeting the set.
pub fn parabolic_box_count(points: &[SpaceTimePoint], r: f64) -> usize {
    let mut keys: HashSet<Vec<i64>> = HashSet::with_capacity(points.len());
    for p in points {
        let mut key: Vec<i64> = p.x.iter().map(|v| (v / r).floor() as i64).collect();
        key.push((p.t / (r * r)).floor() as i64);
        keys.insert(key);
    }
    keys.len()
}

/// Least-squares slope of `log N(r)` against `log(1/r)`.
pub fn parabolic_dimension(points: &[SpaceTimePoint], scales: &[f64]) -> Result<DimensionEstimate> {
    if points.len() < 10 {
        return Err(Error::pre(format!("dimension estimate needs >= 10 points, got {}", points.len())));
    }
    if scales.len() < 4 {
        return Err(Error::pre(format!("dimension estimate needs >= 4 scales, got {}", scales.len())));
    }
    if scales.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::pre("scales must be positive"));
    }
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    let counts: Vec<usize> = scales.iter().map(|&r| parabolic_box_count(points, r)).collect();
    let xs: Vec<f64> = scales.iter().map(|r| (1.0 / r).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let slope_stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(DimensionEstimate {
        scales,
        counts,
        slope,
        intercept,
        slope_stderr,
        interval: (slope - 2.0 * slope_stderr, slope + 2.0 * slope_stderr),
        residuals,
    })
}

/// Dyadic ladder `r0, r0/2, ..., r0/2^(n-1)`.
pub fn dyadic_scales(r0: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| r0 / 2f64.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_has_slope_zero() {
        let pts = vec![SpaceTimePoint::new(vec![0.3], 0.1); 20];
        let e = parabolic_dimension(&pts, &dyadic_scales(0.5, 5)).unwrap();
        assert!(e.counts.iter().all(|&c| c == 1));
        assert_eq!(e.slope, 0.0);
        assert!(e.to_csv().starts_with("r,N\n"));
    }

    #[test]
    fn counts_are_monotone_for_nested_scales() {
        let pts: Vec<SpaceTimePoint> =
            (0..500).map(|i| SpaceTimePoint::new(vec![i as f64 / 500.0], (i as f64 / 500.0).powi(2))).collect();
        let e = parabolic_dimension(&pts, &dyadic_scales(0.5, 6)).unwrap();
        assert!(e.counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn preconditions() {
        let pts = vec![SpaceTimePoint::new(vec![0.0], 0.0); 5];
        assert!(parabolic_dimension(&pts, &dyadic_scales(0.5, 5)).is_err());
        let pts = vec![SpaceTimePoint::new(vec![0.0], 0.0); 50];
        assert!(parabolic_dimension(&pts, &dyadic_scales(0.5, 3)).is_err());
    }
}
