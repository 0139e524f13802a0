//! Łojasiewicz-type lower bounds: for quadratic forms (exact distance to the
//! zero cone) and for harmonic polynomials (sampled zero sets).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::poly::CaloricPoly;
use crate::error::{Error, Result};

/// Symmetric matrix `A` defining `f(x) = Ax·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    a: DMatrix<f64>,
}

impl QuadraticForm {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::pre("quadratic form needs a square matrix"));
        }
        let a = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        for i in 0..d {
            for j in 0..i {
                if a[(i, j)] != a[(j, i)] {
                    return Err(Error::pre("matrix is not exactly symmetric"));
                }
            }
        }
        Ok(QuadraticForm { a })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.a * &v))
    }

    fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        self.a.clone().symmetric_eigen()
    }

    fn zero_cutoff(vals: &DVector<f64>) -> f64 {
        1e-12 * vals.amax().max(f64::MIN_POSITIVE)
    }

    /// Smallest nonzero |eigenvalue|.
    pub fn alpha(&self) -> Option<f64> {
        let e = self.eigen();
        let cut = Self::zero_cutoff(&e.eigenvalues);
        e.eigenvalues
            .iter()
            .map(|l| l.abs())
            .filter(|&l| l > cut)
            .fold(None, |m, l| Some(m.map_or(l, |m: f64| m.min(l))))
    }

    /// Euclidean distance from `x` to `{f = 0}`.
    ///
    /// In eigen-coordinates `y`, the nearest zero is `z_i = y_i / (1 + μλ_i)`
    /// with `μ` the unique root of `Σ λ_i y_i² / (1 + μλ_i)² = 0` on the
    /// interval where all denominators are positive; degenerate ("hard")
    /// cases put the free mass on an extreme eigenspace instead.
    pub fn distance_to_zero_set(&self, x: &[f64]) -> f64 {
        let e = self.eigen();
        let lam: Vec<f64> = e.eigenvalues.iter().copied().collect();
        let y: Vec<f64> = (e.eigenvectors.transpose() * DVector::from_column_slice(x)).iter().copied().collect();
        let cut = Self::zero_cutoff(&e.eigenvalues);
        let pos = lam.iter().any(|&l| l > cut);
        let neg = lam.iter().any(|&l| l < -cut);
        if !(pos && neg) {
            // semidefinite: the zero set is the kernel
            return lam.iter().zip(&y).filter(|(l, _)| l.abs() > cut).map(|(_, v)| v * v).sum::<f64>().sqrt();
        }
        let lmax = lam.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lmin = lam.iter().copied().fold(f64::INFINITY, f64::min);
        let g = |mu: f64| -> f64 { lam.iter().zip(&y).map(|(l, v)| l * v * v / (1.0 + mu * l).powi(2)).sum() };
        let dist_for = |mu: f64| -> f64 {
            lam.iter()
                .zip(&y)
                .map(|(l, v)| {
                    let z = v / (1.0 + mu * l);
                    (v - z) * (v - z)
                })
                .sum::<f64>()
                .sqrt()
        };
        let norm_y = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut best = norm_y; // z = 0 is always feasible

        let group_tol = 1e-9 * lmax.abs().max(lmin.abs());
        // interior root: g decreases from +inf (or a finite value) to -inf (or finite)
        let (lo, hi) = (-1.0 / lmax, -1.0 / lmin);
        let width = hi - lo;
        let (mut a, mut b) = (lo + 1e-15 * width, hi - 1e-15 * width);
        if g(a) > 0.0 && g(b) < 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if g(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            best = best.min(dist_for(0.5 * (a + b)));
        }
        // hard cases at the endpoints
        for &lj in &[lmax, lmin] {
            let mu = -1.0 / lj;
            let mut others = 0.0;
            let mut dist2 = 0.0;
            let mut group_norm2 = 0.0;
            for (l, v) in lam.iter().zip(&y) {
                if (l - lj).abs() <= group_tol {
                    group_norm2 += v * v;
                } else {
                    let z = v / (1.0 + mu * l);
                    others += l * z * z;
                    dist2 += (v - z) * (v - z);
                }
            }
            let tau = -others / lj;
            if tau >= 0.0 {
                let gap = group_norm2.sqrt() - tau.sqrt();
                best = best.min((dist2 + gap * gap).sqrt());
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCheck {
    pub distance: f64,
    pub bound: f64,
    pub pass: bool,
}

pub const LOJASIEWICZ_SLACK: f64 = 1e-6;

/// Verify `dist(x, {f = 0}) <= α^{-1/2} |f(x)|^{1/2}`.
pub fn lojasiewicz_quadratic_check(a: &QuadraticForm, x: &[f64]) -> Result<QuadraticCheck> {
    if x.len() != a.dim() {
        return Err(Error::pre("point dimension differs from the form"));
    }
    let alpha = a.alpha().ok_or_else(|| Error::pre("the zero form has no Łojasiewicz bound"))?;
    let distance = a.distance_to_zero_set(x);
    let bound = (a.eval(x).abs() / alpha).sqrt();
    Ok(QuadraticCheck { distance, bound, pass: distance <= bound + LOJASIEWICZ_SLACK })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub degree: u32,
    /// Sampled `sup_{B_1(x0)} |h|`.
    pub sup_norm: f64,
    /// Minimum over accepted samples of `|h(x)| / (sup_norm · dist^k)`.
    pub min_ratio: f64,
    pub evaluated: usize,
    /// Samples skipped because they (numerically) lie on the zero set.
    pub skipped: usize,
}

/// Lattice points of the closed ball `B_rad(c)` with spacing `h`.
fn ball_lattice(c: &[f64], rad: f64, h: f64) -> Vec<Vec<f64>> {
    let m = (rad / h).floor() as i64;
    let mut out = Vec::new();
    match c.len() {
        1 => {
            for i in -m..=m {
                out.push(vec![c[0] + i as f64 * h]);
            }
        }
        2 => {
            for i in -m..=m {
                for j in -m..=m {
                    let (dx, dy) = (i as f64 * h, j as f64 * h);
                    if dx * dx + dy * dy <= rad * rad + 1e-12 {
                        out.push(vec![c[0] + dx, c[1] + dy]);
                    }
                }
            }
        }
        _ => {
            for i in -m..=m {
                for j in -m..=m {
                    for k in -m..=m {
                        let v = [i as f64 * h, j as f64 * h, k as f64 * h];
                        if v.iter().map(|a| a * a).sum::<f64>() <= rad * rad + 1e-12 {
                            out.push(vec![c[0] + v[0], c[1] + v[1], c[2] + v[2]]);
                        }
                    }
                }
            }
        }
    }
    out
}

fn bisect_zero(h: &CaloricPoly<f64>, mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let mut fa = h.eval(&a, 0.0);
    for _ in 0..60 {
        let m: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
        let fm = h.eval(&m, 0.0);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect()
}

/// Points of `{h = 0}` near `c`: sign changes along lattice edges, bisected.
fn zero_set_samples(h: &CaloricPoly<f64>, c: &[f64], rad: f64, step: f64) -> Vec<Vec<f64>> {
    let d = c.len();
    let m = (rad / step).ceil() as i64;
    let mut zeros = Vec::new();
    let point = |idx: &[i64]| -> Vec<f64> { (0..d).map(|a| c[a] + idx[a] as f64 * step).collect() };
    let mut idx = vec![-m; d];
    loop {
        let p = point(&idx);
        let fp = h.eval(&p, 0.0);
        if fp == 0.0 {
            zeros.push(p.clone());
        }
        for axis in 0..d {
            if idx[axis] < m {
                let mut nb = idx.clone();
                nb[axis] += 1;
                let q = point(&nb);
                let fq = h.eval(&q, 0.0);
                if fp != 0.0 && fq != 0.0 && (fp > 0.0) != (fq > 0.0) {
                    zeros.push(bisect_zero(h, p.clone(), q));
                }
            }
        }
        // odometer increment
        let mut a = d;
        loop {
            if a == 0 {
                return zeros;
            }
            a -= 1;
            if idx[a] < m {
                idx[a] += 1;
                for v in idx.iter_mut().skip(a + 1) {
                    *v = -m;
                }
                break;
            }
        }
    }
}

/// Slide `z` along `{h = 0}` towards `x` (tangential step plus Newton return).
fn refine_nearest(h: &CaloricPoly<f64>, grad: &[CaloricPoly<f64>], x: &[f64], mut z: Vec<f64>) -> Vec<f64> {
    let d = x.len();
    for _ in 0..50 {
        let g: Vec<f64> = grad.iter().map(|p| p.eval(&z, 0.0)).collect();
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2 < 1e-24 {
            break;
        }
        let diff: Vec<f64> = (0..d).map(|a| x[a] - z[a]).collect();
        let along: f64 = diff.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / g2;
        let mut cand: Vec<f64> = (0..d).map(|a| z[a] + diff[a] - along * g[a]).collect();
        for _ in 0..20 {
            let f = h.eval(&cand, 0.0);
            let gc: Vec<f64> = grad.iter().map(|p| p.eval(&cand, 0.0)).collect();
            let gc2: f64 = gc.iter().map(|v| v * v).sum();
            if gc2 < 1e-24 {
                break;
            }
            for a in 0..d {
                cand[a] -= f / gc2 * gc[a];
            }
        }
        let old: f64 = (0..d).map(|a| (x[a] - z[a]).powi(2)).sum();
        let new: f64 = (0..d).map(|a| (x[a] - cand[a]).powi(2)).sum();
        if h.eval(&cand, 0.0).abs() > 1e-12 || new >= old {
            break;
        }
        z = cand;
    }
    z
}

/// Empirical constant `c` in `|h(x)| >= c ‖h‖ dist(x, {h=0})^k` over the
/// samples in `B_{1/2}(x0)`.
pub fn lojasiewicz_harmonic_check(h: &CaloricPoly<f64>, x0: &[f64], samples: &[Vec<f64>]) -> Result<HarmonicReport> {
    if !h.is_spatial() || h.dim() != x0.len() {
        return Err(Error::pre("harmonic check needs a spatial polynomial matching x0"));
    }
    let scale = h.max_coeff().max(1e-300);
    if h.laplacian().max_coeff() > 1e-12 * scale {
        return Err(Error::pre("input is not harmonic"));
    }
    if h.eval(x0, 0.0).abs() > 1e-10 {
        return Err(Error::pre("x0 is not on the zero set"));
    }
    let k = h.degree();
    let d = x0.len();
    let lattice_step = match d {
        1 => 1e-3,
        2 => 1e-2,
        _ => 4e-2,
    };
    let sup_norm = ball_lattice(x0, 1.0, lattice_step).iter().map(|p| h.eval(p, 0.0).abs()).fold(0.0, f64::max);
    let zero_step = match d {
        1 => 2e-3,
        2 => 5e-3,
        _ => 2.5e-2,
    };
    let zeros = zero_set_samples(h, x0, 1.0, zero_step);
    let grad: Vec<CaloricPoly<f64>> = (0..d).map(|a| h.diff_x(a)).collect();
    let mut min_ratio = f64::INFINITY;
    let (mut evaluated, mut skipped) = (0, 0);
    for x in samples {
        let off: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if x.len() != d || off > 0.5 + 1e-12 {
            return Err(Error::pre("samples must lie in B_{1/2}(x0)"));
        }
        let hx = h.eval(x, 0.0);
        let nearest = zeros
            .iter()
            .min_by(|a, b| {
                let da: f64 = a.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum();
                let db: f64 = b.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum();
                da.total_cmp(&db)
            })
            .cloned()
            .unwrap_or_else(|| x0.to_vec());
        let z = refine_nearest(h, &grad, x, nearest);
        let dist = z.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        if dist <= 1e-9 || hx == 0.0 {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        min_ratio = min_ratio.min(hx.abs() / (sup_norm * dist.powi(k as i32)));
    }
    Ok(HarmonicReport { degree: k, sup_norm, min_ratio, evaluated, skipped })
}
