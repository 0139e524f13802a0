use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::field::Field;

/// Samples with `t > -FIT_T_MAX` are left out of the singular fit.
pub const FIT_T_MAX: f64 = 0.05;
/// Regular and singular residuals closer than this resolve to singular.
pub const TIE_TOL: f64 = 1e-3;

const DIRECTIONS: usize = 64;
const FISTA_ITERS: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowupKind {
    /// `½ (x·e)₊²`
    Regular { e: Vec<f64> },
    /// `-m t + ½ A x·x` with `A ⪰ 0`, `tr A = 1 - m`.
    Singular { m: f64, a: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupProfile {
    pub kind: BlowupKind,
    /// L∞ misfit of the chosen family on the whole unit cylinder.
    pub residual: f64,
    pub regular_residual: f64,
    pub singular_residual: f64,
    pub ambiguous: bool,
}

impl BlowupProfile {
    pub fn is_singular(&self) -> bool {
        matches!(self.kind, BlowupKind::Singular { .. })
    }

    /// Flat parameter vector used for stability comparisons across radii.
    pub fn parameters(&self) -> Vec<f64> {
        match &self.kind {
            BlowupKind::Regular { e } => e.clone(),
            BlowupKind::Singular { m, a } => {
                let mut v = vec![*m];
                v.extend(a.iter().flatten());
                v
            }
        }
    }

    /// Eigenvalues of `A` in increasing order (empty for regular profiles).
    pub fn a_eigenvalues(&self) -> Vec<f64> {
        match &self.kind {
            BlowupKind::Regular { .. } => Vec::new(),
            BlowupKind::Singular { a, .. } => {
                let d = a.len();
                let m = DMatrix::from_fn(d, d, |i, j| a[i][j]);
                let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
                ev.sort_by(f64::total_cmp);
                ev
            }
        }
    }
}

pub fn regular_value(e: &[f64], x: &[f64]) -> f64 {
    let s: f64 = e.iter().zip(x).map(|(a, b)| a * b).sum();
    0.5 * s.max(0.0).powi(2)
}

pub fn singular_value(m: f64, a: &[Vec<f64>], x: &[f64], t: f64) -> f64 {
    let mut q = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            q += v * x[i] * x[j];
        }
    }
    -m * t + 0.5 * q
}

struct Samples {
    x: Vec<Vec<f64>>,
    t: Vec<f64>,
    w: Vec<f64>,
}

fn collect(field: &Field) -> Samples {
    let g = field.grid();
    let nodes: Vec<Vec<f64>> = (0..g.n_space()).map(|i| g.node(i)).collect();
    let mut s = Samples { x: Vec::new(), t: Vec::new(), w: Vec::new() };
    for k in 0..g.nt {
        for (i, x) in nodes.iter().enumerate() {
            s.x.push(x.clone());
            s.t.push(g.time(k));
            s.w.push(field.at(k, i));
        }
    }
    s
}

fn sup_misfit(s: &Samples, f: impl Fn(&[f64], f64) -> f64) -> f64 {
    s.x.iter().zip(&s.t).zip(&s.w).map(|((x, &t), &w)| (w - f(x, t)).abs()).fold(0.0, f64::max)
}

/// Orthonormal coordinates of `(m, A)`: `m`, the diagonal of `A`, then `√2 A_ij` for `i < j`.
fn features(x: &[f64], t: f64) -> Vec<f64> {
    let d = x.len();
    let mut f = vec![-t];
    for a in 0..d {
        f.push(0.5 * x[a] * x[a]);
    }
    for a in 0..d {
        for b in a + 1..d {
            f.push(x[a] * x[b] / std::f64::consts::SQRT_2);
        }
    }
    f
}

fn unpack(theta: &DVector<f64>, d: usize) -> (f64, DMatrix<f64>) {
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        a[(i, i)] = theta[1 + i];
    }
    let mut k = 1 + d;
    for i in 0..d {
        for j in i + 1..d {
            let v = theta[k] / std::f64::consts::SQRT_2;
            a[(i, j)] = v;
            a[(j, i)] = v;
            k += 1;
        }
    }
    (theta[0], a)
}

fn pack(m: f64, a: &DMatrix<f64>) -> DVector<f64> {
    let d = a.nrows();
    let mut v = vec![m];
    for i in 0..d {
        v.push(a[(i, i)]);
    }
    for i in 0..d {
        for j in i + 1..d {
            v.push(a[(i, j)] * std::f64::consts::SQRT_2);
        }
    }
    DVector::from_vec(v)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let cand = (cum - 1.0) / (i + 1) as f64;
        if ui - cand > 0.0 {
            tau = cand;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Frobenius projection onto `{(m, A) : m >= 0, A ⪰ 0, m + tr A = 1}`:
/// the block matrix `diag(m, A)` lives in the unit-trace PSD cone, so the
/// projection acts on its eigenvalues through the simplex.
pub fn project_constraints(m: f64, a: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let eig = a.clone().symmetric_eigen();
    let mut lam = vec![m];
    lam.extend(eig.eigenvalues.iter().copied());
    let p = project_simplex(&lam);
    let diag = DMatrix::from_diagonal(&DVector::from_vec(p[1..].to_vec()));
    let a_new = &eig.eigenvectors * diag * eig.eigenvectors.transpose();
    let a_sym = (&a_new + a_new.transpose()) * 0.5;
    (p[0], a_sym)
}

/// Constrained least squares for the singular family by accelerated
/// projected gradient with the exact constraint projection.
pub fn fit_singular(field: &Field) -> (f64, Vec<Vec<f64>>) {
    let d = field.grid().dim;
    let s = collect(field);
    let p = 1 + d + d * (d - 1) / 2;
    let mut q = DMatrix::<f64>::zeros(p, p);
    let mut b = DVector::<f64>::zeros(p);
    for ((x, &t), &w) in s.x.iter().zip(&s.t).zip(&s.w) {
        if t > -FIT_T_MAX {
            continue;
        }
        let f = DVector::from_vec(features(x, t));
        q += &f * f.transpose();
        b += &f * w;
    }
    let lmax = q.clone().symmetric_eigen().eigenvalues.iter().copied().fold(0.0, f64::max);
    let step = if lmax > 0.0 { 1.0 / lmax } else { 1.0 };
    let proj = |v: &DVector<f64>| {
        let (m, a) = unpack(v, d);
        let (m, a) = project_constraints(m, &a);
        pack(m, &a)
    };
    let mut theta = proj(&DVector::from_element(p, 0.0));
    let mut y = theta.clone();
    let mut tk = 1.0f64;
    for _ in 0..FISTA_ITERS {
        let grad = &q * &y - &b;
        let next = proj(&(&y - grad * step));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        let moved = (&next - &theta).amax();
        y = &next + (&next - &theta) * ((tk - 1.0) / t_next);
        theta = next;
        tk = t_next;
        if moved < 1e-15 {
            break;
        }
    }
    let (m, a) = unpack(&theta, d);
    let rows = (0..d).map(|i| (0..d).map(|j| a[(i, j)]).collect()).collect();
    (m, rows)
}

fn direction(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

/// Direction `e` minimizing the squared misfit of `½ (x·e)₊²`.
pub fn fit_regular(field: &Field) -> Vec<f64> {
    let s = collect(field);
    let l2 = |e: &[f64]| -> f64 { s.x.iter().zip(&s.w).map(|(x, &w)| (w - regular_value(e, x)).powi(2)).sum() };
    match field.grid().dim {
        1 => {
            if l2(&[1.0]) <= l2(&[-1.0]) {
                vec![1.0]
            } else {
                vec![-1.0]
            }
        }
        _ => {
            let obj = |th: f64| l2(&direction(th));
            let step = 2.0 * std::f64::consts::PI / DIRECTIONS as f64;
            let best =
                (0..DIRECTIONS).map(|i| i as f64 * step).min_by(|a, b| obj(*a).total_cmp(&obj(*b))).expect("nonempty");
            // golden-section refinement on the bracketing cell pair
            let (mut lo, mut hi) = (best - step, best + step);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = hi - phi * (hi - lo);
            let mut e = lo + phi * (hi - lo);
            let (mut fc, mut fe) = (obj(c), obj(e));
            while hi - lo > 1e-10 {
                if fc < fe {
                    hi = e;
                    e = c;
                    fe = fc;
                    c = hi - phi * (hi - lo);
                    fc = obj(c);
                } else {
                    lo = c;
                    c = e;
                    fc = fe;
                    e = lo + phi * (hi - lo);
                    fe = obj(e);
                }
            }
            direction(0.5 * (lo + hi))
        }
    }
}

/// Fit both families on a rescaled field and keep the one with the smaller
/// L∞ residual.
pub fn fit_profile(rescaled: &Field) -> BlowupProfile {
    let s = collect(rescaled);
    let e = fit_regular(rescaled);
    let (m, a) = fit_singular(rescaled);
    let reg = sup_misfit(&s, |x, _| regular_value(&e, x));
    let sing = sup_misfit(&s, |x, t| singular_value(m, &a, x, t));
    let ambiguous = (reg - sing).abs() <= TIE_TOL;
    if ambiguous || sing < reg {
        BlowupProfile {
            kind: BlowupKind::Singular { m, a },
            residual: sing,
            regular_residual: reg,
            singular_residual: sing,
            ambiguous,
        }
    } else {
        BlowupProfile {
            kind: BlowupKind::Regular { e },
            residual: reg,
            regular_residual: reg,
            singular_residual: sing,
            ambiguous,
        }
    }
}
