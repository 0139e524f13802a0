//! Radially symmetric caloric polynomials `p = (-t)^k P(s)`, `s = r²/(-t)`.
//!
//! Writing `P(s) = Σ a_m s^m`, i.e. `p = Σ a_m r^{2m} (-t)^{k-m}`, the heat
//! equation in dimension `d` gives `4sP'' + (2d - s)P' + kP = 0`, or
//! termwise `a_{m+1} = -(k - m) a_m / (2(m+1)(2m+d))`.

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::poly::{rat, Coeff, RatPoly, MAX_DEGREE};
use crate::error::{Error, Result};

/// Coefficients `a_0..=a_k` of `P`, normalized so `∂_r^{2k} p = 1`.
pub fn laguerre_coefficients(k: u32, d: u32) -> Result<Vec<BigRational>> {
    if k < 1 || d < 1 {
        return Err(Error::pre("need k >= 1 and d >= 1"));
    }
    let mut a = vec![BigRational::one()];
    for m in 0..k {
        let num = -rat((k - m) as i64, 1);
        let den = rat(2 * (m as i64 + 1) * (2 * m as i64 + d as i64), 1);
        let next = a[m as usize].clone() * num / den;
        a.push(next);
    }
    // a_k r^{2k} differentiated 2k times in r is a_k (2k)!
    let mut fact = BigRational::one();
    for i in 1..=(2 * k as i64) {
        fact *= rat(i, 1);
    }
    let norm = a[k as usize].clone() * fact;
    Ok(a.into_iter().map(|c| c / norm.clone()).collect())
}

/// The homogeneous radial caloric polynomial of degree `2k` in `d` variables.
pub fn radial_caloric(k: u32, d: u32) -> Result<RatPoly> {
    if k < 1 {
        return Err(Error::pre("k must be at least 1"));
    }
    if 2 * k > MAX_DEGREE {
        return Err(Error::pre(format!("degree {} exceeds {MAX_DEGREE}", 2 * k)));
    }
    let dim = d as usize;
    let a = laguerre_coefficients(k, d)?;
    let mut r2 = RatPoly::zero(dim);
    for axis in 0..dim {
        r2 = r2.add(&RatPoly::x(dim, axis).pow(2));
    }
    let minus_t = RatPoly::t(dim).scale(&rat(-1, 1));
    let mut p = RatPoly::zero(dim);
    for (m, am) in a.iter().enumerate() {
        let term = r2.pow(m as u32).mul(&minus_t.pow(k - m as u32)).scale(am);
        p = p.add(&term);
    }
    Ok(p)
}

fn eval_p_prime(a: &[f64], s: f64) -> f64 {
    let mut v = 0.0;
    for m in (1..a.len()).rev() {
        v = v * s + m as f64 * a[m];
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaguerreConstants {
    pub c1: f64,
    pub c2: f64,
    /// `P'(c1)`, negative.
    pub p_prime: f64,
}

/// Scan `s ∈ (0, 10(d + 2k)]` for `P'(s) < 0` and return the point that
/// maximizes `c2(s) = -2 P'(s) / s^{k-1}`. On `c1 t = -r²` this gives
/// `∂_r p = 2 r^{2k-1} c1^{1-k} P'(c1) = -c2 r^{2k-1}`.
pub fn laguerre_constants(k: u32, d: u32) -> Result<LaguerreConstants> {
    if k < 2 {
        return Err(Error::pre("the lemma needs k >= 2"));
    }
    let a: Vec<f64> = laguerre_coefficients(k, d)?.iter().map(Coeff::to_f64).collect();
    let s_max = 10.0 * (d + 2 * k) as f64;
    let n = 20_000;
    let mut best: Option<LaguerreConstants> = None;
    for i in 1..=n {
        let s = s_max * i as f64 / n as f64;
        let pp = eval_p_prime(&a, s);
        if pp < 0.0 {
            let c2 = -2.0 * pp / s.powi(k as i32 - 1);
            if best.is_none_or(|b| c2 > b.c2) {
                best = Some(LaguerreConstants { c1: s, c2, p_prime: pp });
            }
        }
    }
    best.ok_or_else(|| Error::SearchFailure(format!("no s in (0, {s_max}] with P'(s) < 0 for k = {k}, d = {d}")))
}

/// `∂_r p` at radius `r` and time `t < 0`, from the closed form.
pub fn radial_derivative(k: u32, d: u32, r: f64, t: f64) -> Result<f64> {
    let a: Vec<f64> = laguerre_coefficients(k, d)?.iter().map(Coeff::to_f64).collect();
    let s = r * r / (-t);
    Ok(2.0 / r * (-t).powi(k as i32) * eval_p_prime(&a, s) * s)
}
