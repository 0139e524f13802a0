use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest parabolic degree the algebra is meant for.
pub const MAX_DEGREE: u32 = 20;

/// Coefficient ring: exact rationals for algebra, `f64` for fitting.
pub trait Coeff: Clone + PartialEq + Debug + Num + Neg<Output = Self> + Send + Sync {
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn to_text(&self) -> String;
    fn from_text(s: &str) -> Option<Self>;
}

impl Coeff for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_text(&self) -> String {
        // shortest representation that parses back to the same value
        format!("{self:?}")
    }
    fn from_text(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl Coeff for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_text(&self) -> String {
        self.to_string()
    }
    fn from_text(s: &str) -> Option<Self> {
        BigRational::from_str(s).ok()
    }
}

/// Monomial `x^beta t^j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub beta: Vec<u32>,
    pub j: u32,
}

impl Term {
    pub fn new(beta: Vec<u32>, j: u32) -> Self {
        Term { beta, j }
    }

    /// Parabolic degree `|beta| + 2j`.
    pub fn degree(&self) -> u32 {
        self.beta.iter().sum::<u32>() + 2 * self.j
    }

    pub fn name(&self) -> String {
        let mut parts = Vec::new();
        for (a, &b) in self.beta.iter().enumerate() {
            match b {
                0 => {}
                1 => parts.push(format!("x{}", a + 1)),
                _ => parts.push(format!("x{}^{}", a + 1, b)),
            }
        }
        match self.j {
            0 => {}
            1 => parts.push("t".into()),
            j => parts.push(format!("t^{j}")),
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// Polynomial in `(x, t)`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CaloricPoly<T = f64> {
    dim: usize,
    coeffs: BTreeMap<Term, T>,
}

pub type RatPoly = CaloricPoly<BigRational>;

/// Exact rational `n / d`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl<T: Coeff> CaloricPoly<T> {
    pub fn zero(dim: usize) -> Self {
        CaloricPoly { dim, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::monomial(dim, vec![0; dim], 0, c)
    }

    pub fn monomial(dim: usize, beta: Vec<u32>, j: u32, c: T) -> Self {
        assert_eq!(beta.len(), dim, "multi-index length must equal dim");
        let mut p = Self::zero(dim);
        p.add_term(Term { beta, j }, c);
        p
    }

    /// The coordinate function `x_{axis+1}`.
    pub fn x(dim: usize, axis: usize) -> Self {
        let mut beta = vec![0; dim];
        beta[axis] = 1;
        Self::monomial(dim, beta, 0, T::one())
    }

    pub fn t(dim: usize) -> Self {
        Self::monomial(dim, vec![0; dim], 1, T::one())
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Term, T)>) -> Self {
        let mut p = Self::zero(dim);
        for (term, c) in terms {
            assert_eq!(term.beta.len(), dim, "multi-index length must equal dim");
            p.add_term(term, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &T)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, term: &Term) -> T {
        self.coeffs.get(term).cloned().unwrap_or_else(T::zero)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest parabolic degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(Term::degree).max().unwrap_or(0)
    }

    /// Lowest parabolic degree present (`None` for zero).
    pub fn min_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(Term::degree).min()
    }

    pub fn is_spatial(&self) -> bool {
        self.coeffs.keys().all(|t| t.j == 0)
    }

    pub fn add_term(&mut self, term: Term, c: T) {
        if c.is_zero() {
            return;
        }
        let remove = {
            let slot = self.coeffs.entry(term.clone()).or_insert_with(T::zero);
            *slot = slot.clone() + c;
            slot.is_zero()
        };
        if remove {
            self.coeffs.remove(&term);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (t, c) in &other.coeffs {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_terms(self.dim, self.coeffs.iter().map(|(t, c)| (t.clone(), c.clone() * s.clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (ta, ca) in &self.coeffs {
            for (tb, cb) in &other.coeffs {
                let beta = ta.beta.iter().zip(&tb.beta).map(|(a, b)| a + b).collect();
                out.add_term(Term { beta, j: ta.j + tb.j }, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(self.dim, T::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn diff_x(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (t, c) in &self.coeffs {
            let b = t.beta[axis];
            if b > 0 {
                let mut beta = t.beta.clone();
                beta[axis] -= 1;
                out.add_term(Term { beta, j: t.j }, c.clone() * T::from_i64(b as i64));
            }
        }
        out
    }

    pub fn diff_t(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (t, c) in &self.coeffs {
            if t.j > 0 {
                out.add_term(Term { beta: t.beta.clone(), j: t.j - 1 }, c.clone() * T::from_i64(t.j as i64));
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for a in 0..self.dim {
            out = out.add(&self.diff_x(a).diff_x(a));
        }
        out
    }

    /// `𝐇p = Δp - ∂_t p`.
    pub fn heat_op(&self) -> Self {
        self.laplacian().sub(&self.diff_t())
    }

    /// `Zp = x·∇p + 2t ∂_t p`: each term scales by its parabolic degree.
    pub fn z_op(&self) -> Self {
        Self::from_terms(
            self.dim,
            self.coeffs.iter().map(|(t, c)| (t.clone(), c.clone() * T::from_i64(t.degree() as i64))),
        )
    }

    pub fn is_caloric(&self) -> bool {
        self.heat_op().is_zero()
    }

    /// Keep only terms whose parabolic degree lies in `[lo, hi]`.
    pub fn truncate(&self, lo: u32, hi: u32) -> Self {
        Self::from_terms(
            self.dim,
            self.coeffs.iter().filter(|(t, _)| (lo..=hi).contains(&t.degree())).map(|(t, c)| (t.clone(), c.clone())),
        )
    }

    pub fn to_f64(&self) -> CaloricPoly<f64> {
        CaloricPoly::from_terms(self.dim, self.coeffs.iter().map(|(t, c)| (t.clone(), c.to_f64())))
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(term, c)| {
                let mut v = c.to_f64() * t.powi(term.j as i32);
                for (xa, &b) in x.iter().zip(&term.beta) {
                    v *= xa.powi(b as i32);
                }
                v
            })
            .sum()
    }

    pub fn gradient_at(&self, x: &[f64], t: f64) -> Vec<f64> {
        (0..self.dim).map(|a| self.diff_x(a).eval(x, t)).collect()
    }

    /// `Σ_i t^i / i! Δ^i h`: the unique caloric polynomial equal to `h` at `t = 0`.
    pub fn caloric_extension(h: &Self) -> Result<Self> {
        if !h.is_spatial() {
            return Err(Error::pre("caloric_extension needs a polynomial in x only"));
        }
        let mut out = Self::zero(h.dim);
        let mut lap_i = h.clone();
        let mut factorial = T::one();
        let mut i: u32 = 0;
        while !lap_i.is_zero() {
            let shifted = Self::from_terms(
                h.dim,
                lap_i
                    .coeffs
                    .iter()
                    .map(|(t, c)| (Term { beta: t.beta.clone(), j: t.j + i }, c.clone() / factorial.clone())),
            );
            out = out.add(&shifted);
            lap_i = lap_i.laplacian();
            i += 1;
            factorial = factorial * T::from_i64(i as i64);
        }
        Ok(out)
    }

    /// Human-readable form, e.g. `1*x1^2 + 2*t`.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.coeffs.iter().map(|(t, c)| format!("{}*{}", c.to_text(), t.name())).collect::<Vec<_>>().join(" + ")
    }
}

impl CaloricPoly<f64> {
    /// Largest absolute coefficient.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drop coefficients below `tol` in absolute value.
    pub fn chop(&self, tol: f64) -> Self {
        Self::from_terms(self.dim, self.coeffs.iter().filter(|(_, c)| c.abs() > tol).map(|(t, c)| (t.clone(), *c)))
    }
}

/// All multi-indices of length `dim` with `|beta| = k`, in lexicographic order.
pub fn multi_indices(dim: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == dim {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(dim, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    rec(dim, k, &mut Vec::new(), &mut out);
    out
}

/// Caloric extensions of all spatial monomials of degree `<= k`.
pub fn caloric_basis<T: Coeff>(dim: usize, k: u32) -> Result<Vec<CaloricPoly<T>>> {
    graded_basis(dim, 0, k)
}

/// Caloric extensions of spatial monomials with degree in `[lo, hi]`.
pub fn graded_basis<T: Coeff>(dim: usize, lo: u32, hi: u32) -> Result<Vec<CaloricPoly<T>>> {
    if hi > MAX_DEGREE {
        return Err(Error::pre(format!("degree {hi} exceeds the supported bound {MAX_DEGREE}")));
    }
    if dim == 0 {
        return Err(Error::pre("dimension must be positive"));
    }
    let mut out = Vec::new();
    for deg in lo..=hi {
        for beta in multi_indices(dim, deg) {
            let h = CaloricPoly::monomial(dim, beta, 0, T::one());
            out.push(CaloricPoly::caloric_extension(&h)?);
        }
    }
    Ok(out)
}

/// Basis of parabolically `k`-homogeneous caloric polynomials.
pub fn homogeneous_basis<T: Coeff>(dim: usize, k: u32) -> Result<Vec<CaloricPoly<T>>> {
    graded_basis(dim, k, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> RatPoly {
        RatPoly::x(1, 0)
    }

    fn t1() -> RatPoly {
        RatPoly::t(1)
    }

    #[test]
    fn heat_op_examples() {
        let q = t1().add(&x1().pow(2).scale(&rat(1, 2)));
        assert!(q.heat_op().is_zero());
        assert_eq!(t1().scale(&rat(-1, 1)).heat_op(), RatPoly::constant(1, rat(1, 1)));
        let c = x1().pow(3).add(&t1().mul(&x1()).scale(&rat(6, 1)));
        assert!(c.heat_op().is_zero());
    }

    #[test]
    fn z_op_examples() {
        let mt = t1().scale(&rat(-1, 1));
        assert_eq!(mt.z_op(), mt.scale(&rat(2, 1)));
        assert!(RatPoly::constant(1, rat(1, 1)).z_op().is_zero());
        let c = x1().pow(3).add(&t1().mul(&x1()).scale(&rat(6, 1)));
        assert_eq!(c.z_op(), c.scale(&rat(3, 1)));
    }

    #[test]
    fn caloric_extension_examples() {
        let e = RatPoly::caloric_extension(&x1().pow(2)).unwrap();
        assert_eq!(e, x1().pow(2).add(&t1().scale(&rat(2, 1))));
        assert_eq!(RatPoly::caloric_extension(&x1()).unwrap(), x1());
        let e4 = RatPoly::caloric_extension(&x1().pow(4)).unwrap();
        let want = x1().pow(4).add(&t1().mul(&x1().pow(2)).scale(&rat(12, 1))).add(&t1().pow(2).scale(&rat(12, 1)));
        assert_eq!(e4, want);
        assert!(e4.is_caloric());
        assert!(RatPoly::caloric_extension(&t1()).is_err());
    }

    #[test]
    fn basis_sizes() {
        let b: Vec<RatPoly> = caloric_basis(1, 2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b[2], x1().pow(2).add(&t1().scale(&rat(2, 1))));
        assert_eq!(caloric_basis::<BigRational>(1, 0).unwrap().len(), 1);
        let b2: Vec<RatPoly> = caloric_basis(2, 2).unwrap();
        assert_eq!(b2.len(), 6);
        assert!(b2.iter().all(|p| p.is_caloric()));
        assert!(caloric_basis::<f64>(1, 21).is_err());
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 3).len(), 4);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(1, 5), vec![vec![5]]);
    }

    #[test]
    fn term_names() {
        assert_eq!(Term::new(vec![2, 0], 1).name(), "x1^2*t");
        assert_eq!(Term::new(vec![0, 0], 0).name(), "1");
    }
}
