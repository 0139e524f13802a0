use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::calpoly::{graded_basis, homogeneous_basis, project_onto, CaloricPoly, Term, WeightedSample};
use crate::error::{Error, Result};
use crate::field::{Sampler, SpaceTimePoint};
use crate::functionals::{kernel, Recentered};

/// Time slices of the second blow-up fit, `s ∈ [-1, -0.1]`.
const SLICES: usize = 10;
/// Lattice points per axis on each slice.
const LATTICE: usize = 33;
/// Minimum number of samples for a Taylor fit.
pub const TAYLOR_MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSecond {
    /// `q = -a t - ½ A x·x`
    pub a: f64,
    pub a_matrix: Vec<Vec<f64>>,
    /// `A` with negative eigenvalues clipped to zero.
    pub a_projected: Vec<Vec<f64>>,
    /// `max(0, -λ_min(A))` before clipping.
    pub psd_defect: f64,
    pub trace_defect: f64,
}

#[derive(Debug, Clone)]
pub struct SecondBlowup {
    pub degree: u32,
    pub radius: f64,
    pub poly: CaloricPoly<f64>,
    /// Weighted L² misfit of the projection.
    pub residual: f64,
    pub h: f64,
    pub err_h: f64,
    pub quadratic: Option<QuadraticSecond>,
}

fn sym_eigen(a: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let d = a.len();
    let m = DMatrix::from_fn(d, d, |i, j| a[i][j]);
    let e = m.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Read `(a, A)` off a degree-2 caloric polynomial `-a t - ½ A x·x`.
pub fn quadratic_parts(q: &CaloricPoly<f64>) -> QuadraticSecond {
    let d = q.dim();
    let a = -q.coeff(&Term::new(vec![0; d], 1));
    let mut mat = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let mut beta = vec![0; d];
            beta[i] += 1;
            beta[j] += 1;
            let c = q.coeff(&Term::new(beta, 0));
            if i == j {
                mat[i][i] = -2.0 * c;
            } else {
                mat[i][j] = -c;
                mat[j][i] = -c;
            }
        }
    }
    let (ev, vecs) = sym_eigen(&mat);
    let lam_min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let clipped = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, ev.iter().map(|v| v.max(0.0))));
    let proj = &vecs * clipped * vecs.transpose();
    let a_projected = (0..d).map(|i| (0..d).map(|j| 0.5 * (proj[(i, j)] + proj[(j, i)])).collect()).collect();
    let trace: f64 = (0..d).map(|i| mat[i][i]).sum();
    QuadraticSecond { a, a_matrix: mat, a_projected, psd_defect: (-lam_min).max(0.0), trace_defect: (trace - a).abs() }
}

/// Project `u^(r) = (w - p2)(x0 + r·, t0 + r²·) / H(r, ζ(w - p2))^{1/2}` onto
/// parabolically `degree`-homogeneous caloric polynomials, with `G`-weights
/// on `t ∈ [-1, -0.1]`. `p2` is given in recentred coordinates.
pub fn second_blowup<S: Sampler + ?Sized>(
    field: &S,
    point: &SpaceTimePoint,
    p2: &CaloricPoly<f64>,
    degree: u32,
    r: f64,
) -> Result<SecondBlowup> {
    let rc = Recentered { field, center: point.clone(), profile: p2.clone(), use_cutoff: true };
    let f = rc.functionals(r)?;
    if !(f.h > 10.0 * f.err_h) || f.h <= 0.0 {
        return Err(Error::DegenerateBlowup { h: f.h, err: f.err_h });
    }
    let dim = field.dim();
    let big = (field.room(&point.x) / r).min(3.0);
    let hy = 2.0 * big / (LATTICE - 1) as f64;
    let norm = f.h.sqrt();
    let mut samples = Vec::new();
    for j in 0..SLICES {
        let s = -1.0 + 0.1 * j as f64;
        let count = LATTICE.pow(dim as u32);
        for flat in 0..count {
            let mut rem = flat;
            let mut y = vec![0.0; dim];
            for a in (0..dim).rev() {
                y[a] = -big + hy * (rem % LATTICE) as f64;
                rem /= LATTICE;
            }
            let x: Vec<f64> = point.x.iter().zip(&y).map(|(c, v)| c + r * v).collect();
            let ry: Vec<f64> = y.iter().map(|v| r * v).collect();
            let v = (field.sample(&x, point.t + r * r * s)? - p2.eval(&ry, r * r * s)) / norm;
            samples.push(WeightedSample::new(y.clone(), s, v, kernel(&y, s) * hy.powi(dim as i32)));
        }
    }
    let basis: Vec<CaloricPoly<f64>> = homogeneous_basis(dim, degree)?;
    let proj = project_onto(&samples, &basis)?;
    let quadratic = (degree == 2).then(|| quadratic_parts(&proj.poly));
    Ok(SecondBlowup { degree, radius: r, poly: proj.poly, residual: proj.residual, h: f.h, err_h: f.err_h, quadratic })
}

#[derive(Debug, Clone)]
pub struct TaylorFit {
    pub point: SpaceTimePoint,
    pub k: u32,
    pub beta: f64,
    pub r0: f64,
    pub samples: usize,
    pub poly: CaloricPoly<f64>,
    /// `(r, sup |w - (t0 - t) - q|)` over `B_r × [t0 - r², t0 - r^{2+β}]`.
    pub residuals: Vec<(f64, f64)>,
    /// `min_r ln(res)/ln(r)`; `+∞` when every residual is zero.
    pub slope: f64,
    /// Least-squares slope of `ln res` against `ln r` (needs two nonzero residuals).
    pub slope_regression: Option<f64>,
}

fn one_sided(field: &(impl Sampler + ?Sized), point: &SpaceTimePoint, y: &[f64], s: f64) -> Result<f64> {
    let x: Vec<f64> = point.x.iter().zip(y).map(|(c, v)| c + v).collect();
    Ok(field.sample(&x, point.t + s)? + s)
}

fn ball_lattice(dim: usize, r: f64, h: f64) -> Vec<Vec<f64>> {
    let m = (r / h).floor() as i64;
    let side = (2 * m + 1) as usize;
    let mut out = Vec::new();
    for flat in 0..side.pow(dim as u32) {
        let mut rem = flat;
        let mut y = vec![0.0; dim];
        for a in (0..dim).rev() {
            y[a] = ((rem % side) as i64 - m) as f64 * h;
            rem /= side;
        }
        if y.iter().map(|v| v * v).sum::<f64>() <= r * r * (1.0 + 1e-12) {
            out.push(y);
        }
    }
    out
}

/// One-sided Taylor polynomial of degree `k` at a top-stratum point: a single
/// `G`-weighted projection of `w - (t0 - t)` onto caloric polynomials of
/// degrees `3..=k` over `B_{r0} × [t0 - r0², t0 - r0^{2+β}]`, followed by the
/// sup residual on each radius of `ladder`.
pub fn taylor_fit<S: Sampler + ?Sized>(
    field: &S,
    point: &SpaceTimePoint,
    k: u32,
    beta: f64,
    r0: f64,
    ladder: &[f64],
) -> Result<TaylorFit> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::pre(format!("beta must lie in (1/2, 1), got {beta}")));
    }
    if k < 3 {
        return Err(Error::pre("Taylor degree must be at least 3"));
    }
    let dim = field.dim();
    let (dx, dt) = (field.dx(), field.dt());
    let s_hi = -r0.powf(2.0 + beta);
    let mut samples = Vec::new();
    let ys = ball_lattice(dim, r0, dx);
    let mut j = 0usize;
    loop {
        let s = s_hi - j as f64 * dt;
        if s < -r0 * r0 * (1.0 + 1e-12) {
            break;
        }
        for y in &ys {
            let v = one_sided(field, point, y, s)?;
            samples.push(WeightedSample::new(y.clone(), s, v, kernel(y, s)));
        }
        j += 1;
    }
    if samples.len() < TAYLOR_MIN_SAMPLES {
        return Err(Error::UnderResolved(samples.len()));
    }
    let basis: Vec<CaloricPoly<f64>> = graded_basis(dim, 3, k)?;
    let proj = project_onto(&samples, &basis)?;
    let q = proj.poly;

    let mut residuals = Vec::new();
    for &r in ladder.iter().filter(|&&r| r <= r0) {
        let h = dx.min(r / 8.0);
        let ys = ball_lattice(dim, r, h);
        let (lo, hi) = (-r * r, -r.powf(2.0 + beta));
        let mut sup = 0.0f64;
        for i in 0..9 {
            let s = lo + (hi - lo) * i as f64 / 8.0;
            for y in &ys {
                sup = sup.max((one_sided(field, point, y, s)? - q.eval(y, s)).abs());
            }
        }
        residuals.push((r, sup));
    }
    let slope = residuals
        .iter()
        .map(|&(r, e)| if e == 0.0 { f64::INFINITY } else { e.ln() / r.ln() })
        .fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = residuals.iter().filter(|(_, e)| *e > 0.0).map(|&(r, e)| (r.ln(), e.ln())).collect();
    let slope_regression = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(TaylorFit {
        point: point.clone(),
        k,
        beta,
        r0,
        samples: samples.len(),
        poly: q,
        residuals,
        slope,
        slope_regression,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;

    #[test]
    fn recovers_cubic_one_sided_expansion() {
        // w = -t - (x³ + 6 t x) near the origin
        let f = AnalyticField::new(
            |x, t| -t - (x[0].powi(3) + 6.0 * t * x[0]),
            vec![(-1.0, 1.0)],
            (-1.0, 0.0),
            1.0 / 256.0,
            1.0 / 1024.0,
        )
        .unwrap();
        let p = SpaceTimePoint::new(vec![0.0], 0.0);
        let fit = taylor_fit(&f, &p, 3, 0.75, 0.3, &[0.2, 0.1, 0.05]).unwrap();
        let x1 = CaloricPoly::<f64>::x(1, 0);
        let target = x1.pow(3).add(&x1.mul(&CaloricPoly::t(1)).scale(&6.0)).scale(&-1.0);
        assert!(fit.poly.sub(&target).max_coeff() < 1e-8, "{}", fit.poly.pretty());
        assert!(fit.slope >= 3.5, "{}", fit.slope);
    }

    #[test]
    fn planar_has_zero_taylor_polynomial() {
        let f = AnalyticField::new(|_, t| (-t).max(0.0), vec![(-1.0, 1.0)], (-1.0, 0.5), 0.01, 0.005).unwrap();
        let p = SpaceTimePoint::new(vec![0.0], 0.0);
        let fit = taylor_fit(&f, &p, 4, 0.75, 0.4, &[0.2, 0.1]).unwrap();
        assert!(fit.poly.max_coeff() < 1e-12);
        assert!(fit.residuals.iter().all(|&(_, e)| e == 0.0));
        assert_eq!(fit.slope, f64::INFINITY);
    }

    #[test]
    fn under_resolved_region_is_an_error() {
        let f = AnalyticField::new(|_, t| (-t).max(0.0), vec![(-1.0, 1.0)], (-1.0, 0.5), 0.05, 0.05).unwrap();
        let p = SpaceTimePoint::new(vec![0.0], 0.0);
        assert!(matches!(taylor_fit(&f, &p, 3, 0.75, 0.2, &[0.1]), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn second_blowup_recovers_quartic() {
        // (-t) - ε (x⁴ + 12 t x² + 12 t²)
        let eps = 1e-2;
        let f = AnalyticField::new(
            move |x, t| -t - eps * (x[0].powi(4) + 12.0 * t * x[0] * x[0] + 12.0 * t * t),
            vec![(-2.0, 2.0)],
            (-1.0, 0.0),
            0.005,
            0.005,
        )
        .unwrap();
        let p = SpaceTimePoint::new(vec![0.0], 0.0);
        let p2 = CaloricPoly::t(1).scale(&-1.0);
        let sb = second_blowup(&f, &p, &p2, 4, 0.3).unwrap();
        let x4 = sb.poly.coeff(&Term::new(vec![4], 0));
        let tx2 = sb.poly.coeff(&Term::new(vec![2], 1));
        let t2 = sb.poly.coeff(&Term::new(vec![0], 2));
        assert!(x4 < 0.0);
        assert!((tx2 / x4 - 12.0).abs() < 1e-6 && (t2 / x4 - 12.0).abs() < 1e-6);
        assert!(sb.residual < 1e-8);
    }

    #[test]
    fn degenerate_second_blowup() {
        let f = AnalyticField::new(|_, t| (-t).max(0.0), vec![(-2.0, 2.0)], (-1.0, 0.5), 0.01, 0.01).unwrap();
        let p = SpaceTimePoint::new(vec![0.0], 0.0);
        let p2 = CaloricPoly::t(1).scale(&-1.0);
        assert!(matches!(second_blowup(&f, &p, &p2, 2, 0.2), Err(Error::DegenerateBlowup { .. })));
    }

    #[test]
    fn quadratic_parts_of_caloric_quadratic() {
        // q = -3 t - ½ (2 x1² + x2²): tr A = 3 = a
        let x1 = CaloricPoly::<f64>::x(2, 0);
        let x2 = CaloricPoly::<f64>::x(2, 1);
        let q = CaloricPoly::t(2).scale(&-3.0).sub(&x1.pow(2)).sub(&x2.pow(2).scale(&0.5));
        assert!(q.is_caloric());
        let parts = quadratic_parts(&q);
        assert_eq!(parts.a, 3.0);
        assert_eq!(parts.a_matrix, vec![vec![2.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(parts.psd_defect, 0.0);
        assert_eq!(parts.trace_defect, 0.0);
    }
}
