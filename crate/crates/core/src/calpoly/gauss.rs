//! Closed-form Gaussian integrals: under `G(·, -r²)` the coordinates are
//! independent centred normals of variance `2r²`.

use std::collections::BTreeMap;

use super::poly::{CaloricPoly, Coeff};
use crate::error::{Error, Result};

/// `E[X^n]` for `X ~ N(0, 2r²)`: zero for odd `n`, `(n-1)!! (2r²)^{n/2}` otherwise.
pub fn gaussian_moment(n: u32, r: f64) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let var = 2.0 * r * r;
    let mut v = 1.0;
    let mut k = 1;
    while k < n {
        v *= k as f64 * var;
        k += 2;
    }
    v
}

/// Spatial coefficients of `p(·, -r²)`.
fn slice_at<T: Coeff>(p: &CaloricPoly<T>, r: f64) -> BTreeMap<Vec<u32>, f64> {
    let s = -r * r;
    let mut out: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (term, c) in p.terms() {
        *out.entry(term.beta.clone()).or_insert(0.0) += c.to_f64() * s.powi(term.j as i32);
    }
    out
}

/// `⟨p, q⟩_r = ∫ (p q)(x, -r²) G(x, -r²) dx`, exact up to rounding.
pub fn gaussian_inner<T: Coeff>(p: &CaloricPoly<T>, q: &CaloricPoly<T>, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::pre(format!("radius must be positive, got {r}")));
    }
    if p.dim() != q.dim() {
        return Err(Error::pre("polynomials live in different dimensions"));
    }
    let sp = slice_at(p, r);
    let sq = if std::ptr::eq(p, q) { sp.clone() } else { slice_at(q, r) };
    let max_deg = 2 * (p.degree().max(q.degree()) + 1);
    let moments: Vec<f64> = (0..=max_deg).map(|n| gaussian_moment(n, r)).collect();
    let mut total = 0.0;
    for (ba, ca) in &sp {
        for (bb, cb) in &sq {
            let mut m = ca * cb;
            for (a, b) in ba.iter().zip(bb) {
                m *= moments[(a + b) as usize];
                if m == 0.0 {
                    break;
                }
            }
            total += m;
        }
    }
    Ok(total)
}

/// `(H, D, φ)` of a polynomial in closed form, with `D = 2r² ⟨∇p, ∇p⟩_r`.
pub fn closed_form_frequency<T: Coeff>(p: &CaloricPoly<T>, r: f64) -> Result<(f64, f64, f64)> {
    let h = gaussian_inner(p, p, r)?;
    let mut grad = 0.0;
    for a in 0..p.dim() {
        let da = p.diff_x(a);
        grad += gaussian_inner(&da, &da, r)?;
    }
    let d = 2.0 * r * r * grad;
    Ok((h, d, d / h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calpoly::{rat, RatPoly};

    #[test]
    fn moments() {
        assert_eq!(gaussian_moment(0, 0.3), 1.0);
        assert_eq!(gaussian_moment(3, 0.3), 0.0);
        let r = 0.7_f64;
        assert!((gaussian_moment(4, r) - 3.0 * (2.0 * r * r).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn inner_examples() {
        let one = RatPoly::constant(1, rat(1, 1));
        for r in [0.1, 1.0, 3.0] {
            assert!((gaussian_inner(&one, &one, r).unwrap() - 1.0).abs() < 1e-15);
        }
        let mt = RatPoly::t(1).scale(&rat(-1, 1));
        let r = 0.4_f64;
        assert!((gaussian_inner(&mt, &mt, r).unwrap() - r.powi(4)).abs() < 1e-15);
        let q = RatPoly::t(1).add(&RatPoly::x(1, 0).pow(2).scale(&rat(1, 2)));
        assert!((gaussian_inner(&q, &q, r).unwrap() - 2.0 * r.powi(4)).abs() < 1e-15);
        assert!(gaussian_inner(&q, &q, 0.0).is_err());
    }

    #[test]
    fn quadratic_frequency_is_two() {
        let q = RatPoly::t(1).add(&RatPoly::x(1, 0).pow(2).scale(&rat(1, 2)));
        for r in [0.05, 0.1, 0.2, 0.4] {
            let (_, _, phi) = closed_form_frequency(&q, r).unwrap();
            assert!((phi - 2.0).abs() < 1e-12);
        }
    }
}
