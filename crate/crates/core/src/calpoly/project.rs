use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::poly::{caloric_basis, CaloricPoly};
use crate::error::{Error, Result};

/// One observation `value ≈ p(x, t)` with a nonnegative weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub x: Vec<f64>,
    pub t: f64,
    pub value: f64,
    pub weight: f64,
}

impl WeightedSample {
    pub fn new(x: Vec<f64>, t: f64, value: f64, weight: f64) -> Self {
        WeightedSample { x, t, value, weight }
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub poly: CaloricPoly<f64>,
    /// Coefficients with respect to the basis passed in.
    pub coefficients: Vec<f64>,
    /// `sqrt(Σ w (value - p)²)`.
    pub residual: f64,
}

/// Relative singular-value cutoff below which a direction counts as lost.
const RANK_TOL: f64 = 1e-10;

/// Weighted least squares onto `span(basis)`.
pub fn project_onto(samples: &[WeightedSample], basis: &[CaloricPoly<f64>]) -> Result<Projection> {
    if basis.is_empty() {
        return Err(Error::pre("empty basis"));
    }
    let dim = basis[0].dim();
    let all_names = || basis.iter().map(CaloricPoly::pretty).collect::<Vec<_>>();
    if samples.len() < basis.len() {
        return Err(Error::RankDeficient(all_names()));
    }
    for s in samples {
        if s.x.len() != dim || !(s.weight >= 0.0) || !s.value.is_finite() {
            return Err(Error::pre("malformed sample (dimension, weight, or value)"));
        }
    }
    let n = samples.len();
    let m = basis.len();
    let mut a = DMatrix::<f64>::zeros(n, m);
    let mut b = DVector::<f64>::zeros(n);
    for (i, s) in samples.iter().enumerate() {
        let sw = s.weight.sqrt();
        b[i] = sw * s.value;
        for (j, p) in basis.iter().enumerate() {
            a[(i, j)] = sw * p.eval(&s.x, s.t);
        }
    }
    let mut scale = vec![0.0; m];
    let mut dead = Vec::new();
    for j in 0..m {
        let norm = a.column(j).norm();
        if norm == 0.0 {
            dead.push(basis[j].pretty());
        } else {
            scale[j] = norm;
            a.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    if !dead.is_empty() {
        return Err(Error::RankDeficient(dead));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut lost = Vec::new();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= RANK_TOL * smax {
            let row = v_t.row(k);
            let j = row.transpose().iamax();
            lost.push(basis[j].pretty());
        }
    }
    if !lost.is_empty() {
        return Err(Error::RankDeficient(lost));
    }
    let y = svd.solve(&b, RANK_TOL * smax).map_err(|e| Error::pre(format!("least-squares solve failed: {e}")))?;
    let coefficients: Vec<f64> = (0..m).map(|j| y[j] / scale[j]).collect();
    let residual = (&a * &y - &b).norm();
    let mut poly = CaloricPoly::zero(dim);
    for (p, &c) in basis.iter().zip(&coefficients) {
        poly = poly.add(&p.scale(&c));
    }
    Ok(Projection { poly, coefficients, residual })
}

/// Least-squares projection onto caloric polynomials of parabolic degree `<= k`.
pub fn project_caloric(samples: &[WeightedSample], dim: usize, k: u32) -> Result<Projection> {
    let basis: Vec<CaloricPoly<f64>> = caloric_basis(dim, k)?;
    project_onto(samples, &basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: &[f64], t: f64) -> f64 {
        x[0] * x[0] + 2.0 * t
    }

    fn grid_samples(f: impl Fn(&[f64], f64) -> f64, times: &[f64]) -> Vec<WeightedSample> {
        let mut out = Vec::new();
        for &t in times {
            for i in -2..=2 {
                let x = vec![i as f64 * 0.5];
                out.push(WeightedSample::new(x.clone(), t, f(&x, t), 1.0));
            }
        }
        out
    }

    #[test]
    fn reproduces_caloric_input() {
        let s = grid_samples(q, &[-1.0, -0.5]);
        let p = project_caloric(&s, 1, 2).unwrap();
        assert!(p.residual < 1e-12);
        assert!((p.poly.eval(&[0.3], -0.2) - q(&[0.3], -0.2)).abs() < 1e-12);
    }

    #[test]
    fn single_slice_absorbs_constant() {
        // at t = -1, x² = (x² + 2t) + 2 exactly
        let s = grid_samples(|x, _| x[0] * x[0], &[-1.0]);
        let p = project_caloric(&s, 1, 2).unwrap();
        assert!(p.residual < 1e-12);
        assert!((p.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((p.coefficients[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_slices_match_hand_normal_equations() {
        // x in {-1,-1/2,0,1/2,1}, t in {-1,-1/2}. By symmetry the x-coefficient
        // vanishes; with e = x²+2t the normal equations for (c0, c2) read
        //   [10      Σe ] [c0]   [Σx²  ]
        //   [Σe     Σe² ] [c2] = [Σx²e ]
        let s = grid_samples(|x, _| x[0] * x[0], &[-1.0, -0.5]);
        let (mut se, mut se2, mut sx2, mut sx2e) = (0.0, 0.0, 0.0, 0.0);
        for w in &s {
            let e = q(&w.x, w.t);
            se += e;
            se2 += e * e;
            sx2 += w.value;
            sx2e += w.value * e;
        }
        let det = 10.0 * se2 - se * se;
        let c0 = (sx2 * se2 - se * sx2e) / det;
        let c2 = (10.0 * sx2e - se * sx2) / det;
        let p = project_caloric(&s, 1, 2).unwrap();
        assert!((p.coefficients[0] - c0).abs() < 1e-12);
        assert!(p.coefficients[1].abs() < 1e-12);
        assert!((p.coefficients[2] - c2).abs() < 1e-12);
        let manual: f64 = s.iter().map(|w| (w.value - c0 - c2 * q(&w.x, w.t)).powi(2)).sum::<f64>().sqrt();
        assert!((p.residual - manual).abs() < 1e-12);
        assert!(p.residual > 0.1);
    }

    #[test]
    fn rank_errors() {
        assert!(matches!(project_caloric(&[], 1, 2), Err(Error::RankDeficient(_))));
        // all samples at x = 0: the x and x² directions collapse
        let s: Vec<_> = (0..5).map(|k| WeightedSample::new(vec![0.0], -(k as f64), 1.0, 1.0)).collect();
        match project_caloric(&s, 1, 2) {
            Err(Error::RankDeficient(names)) => assert!(names.iter().any(|n| n.contains("x1"))),
            other => panic!("expected rank error, got {other:?}"),
        }
    }
}
