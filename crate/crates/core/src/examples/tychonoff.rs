use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeGrid, DEFAULT_MONO_TOL};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 12;

/// Exact derivatives of `g(t) = exp(-1/t²)` (`t < 0`, and `g = 0` for `t >= 0`):
/// `g^{(k)}(t) = R_k(1/t) g(t)` with integer polynomials
/// `R_0 = 1`, `R_{k+1}(s) = -s² R_k'(s) + 2 s³ R_k(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TychonoffSeries {
    pub eps: f64,
    pub order: usize,
    /// `r[k][j]` is the coefficient of `s^j` in `R_k`; kept two orders past
    /// `order` for the residual bounds.
    pub r: Vec<Vec<BigInt>>,
}

pub fn derivative_polynomials(n: usize) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![BigInt::from(1)]];
    for k in 0..n {
        let cur = &out[k];
        let mut next = vec![BigInt::zero(); cur.len() + 3];
        for (j, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // -s² · d/ds (c s^j) = -j c s^{j+1}
            if j > 0 {
                next[j + 1] -= c * BigInt::from(j);
            }
            next[j + 3] += c * BigInt::from(2);
        }
        while next.len() > 1 && next.last().is_some_and(|c| c.is_zero()) {
            next.pop();
        }
        out.push(next);
    }
    out
}

/// `R(s) e^{-s²}` summed term by term in log space so that huge powers of
/// `s` and the tiny exponential never meet in floating point.
fn eval_times_gauss(r: &[BigInt], s: f64) -> f64 {
    let ls = s.abs().ln();
    let mut acc = 0.0;
    for (j, c) in r.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs().to_f64().unwrap_or(f64::INFINITY).ln() + j as f64 * ls - s * s;
        let sign = if c.is_negative() { -1.0 } else { 1.0 } * if s < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
        acc += sign * mag.exp();
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl TychonoffSeries {
    pub fn new(eps: f64, order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::pre(format!("truncation order {order} exceeds {MAX_ORDER}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::pre("amplitude must be positive"));
        }
        Ok(TychonoffSeries { eps, order, r: derivative_polynomials(order + 3) })
    }

    /// `g^{(k)}(t)`.
    pub fn g_derivative(&self, k: usize, t: f64) -> f64 {
        if t >= 0.0 {
            return 0.0;
        }
        eval_times_gauss(&self.r[k], 1.0 / t)
    }

    /// `Σ_{k <= K} g^{(k)}(t) x₁^{2k} / (2k)!`
    pub fn phi(&self, x1: f64, t: f64) -> f64 {
        self.shifted_sum(x1, t, 0, 0)
    }

    /// `Σ_{k <= K} g^{(k + dk)}(t) x^{2k - dx} / (2k - dx)!`, skipping
    /// terms with `2k < dx`.
    fn shifted_sum(&self, x1: f64, t: f64, dk: usize, dx: usize) -> f64 {
        if t >= 0.0 {
            return 0.0;
        }
        (0..=self.order)
            .filter(|k| 2 * k >= dx)
            .map(|k| self.g_derivative(k + dk, t) * x1.powi((2 * k - dx) as i32) / factorial(2 * k - dx))
            .sum()
    }

    pub fn w(&self, x1: f64, t: f64) -> f64 {
        (-t).max(0.0) + self.eps * self.phi(x1, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TychonoffReport {
    pub eps: f64,
    pub order: usize,
    pub positive_before_zero: bool,
    pub decreasing_before_zero: bool,
    pub zero_from_zero: bool,
    /// `max |Δ_h w - D_t^- w - χ{w>0}|` over interior nodes whose backward
    /// time step does not straddle `t = 0`.
    pub max_heat_residual: f64,
    pub truncation_bound: f64,
    pub discretization_bound: f64,
    /// Floating-point error of the difference quotients themselves.
    pub rounding_bound: f64,
    /// `2 (truncation + discretization) + rounding`: the derivative maxima
    /// are sampled, not certified, hence the factor 2.
    pub tolerance: f64,
    pub pass: bool,
}

/// Sample `(-t)⁺ + ε φ_K` and check it on the grid.
pub fn make_tychonoff(eps: f64, order: usize, grid: SpaceTimeGrid) -> Result<(Field, TychonoffReport)> {
    let series = TychonoffSeries::new(eps, order)?;
    let g = &grid;
    let inside = (0..g.dim).all(|a| g.origin_x[a] > -1.0 && g.x_hi(a) < 1.0) && g.origin_t > -1.0 && g.t_end() < 1.0;
    if !inside {
        return Err(Error::pre("grid must lie inside B_1 × (-1, 1)"));
    }
    let n = g.n_space();
    let mut values = Vec::with_capacity(g.len());
    for k in 0..g.nt {
        let t = g.time(k);
        for i in 0..n {
            values.push(series.w(g.node(i)[0], t));
        }
    }
    for k in 0..g.nt {
        if g.time(k) < 0.0 {
            if let Some(i) = (0..n).find(|&i| values[k * n + i] <= 0.0) {
                return Err(Error::Construction(format!(
                    "w <= 0 at node {i}, t = {}: amplitude {eps} too large",
                    g.time(k)
                )));
            }
        }
    }
    let field = Field::new(grid.clone(), values, DEFAULT_MONO_TOL)?;

    let mut decreasing = true;
    let mut zero_after = true;
    for k in 0..g.nt {
        let t = g.time(k);
        for i in 0..n {
            if t < 0.0 && k > 0 && field.at(k, i) >= field.at(k - 1, i) {
                decreasing = false;
            }
            if t >= 0.0 && field.at(k, i) != 0.0 {
                zero_after = false;
            }
        }
    }

    let h2 = g.dx * g.dx;
    let mut res = 0.0f64;
    let mut trunc = 0.0f64;
    let mut x4 = 0.0f64;
    let mut tt = 0.0f64;
    for k in 1..g.nt {
        let (t0, t1) = (g.time(k - 1), g.time(k));
        if t0 < 0.0 && t1 >= 0.0 {
            continue;
        }
        for i in 0..n {
            let m = g.unflat(i);
            if (0..g.dim).any(|a| m[a] == 0 || m[a] + 1 == g.shape[a]) {
                continue;
            }
            let mut lap = 0.0;
            for a in 0..g.dim {
                let mut up = m.clone();
                up[a] += 1;
                let mut dn = m.clone();
                dn[a] -= 1;
                lap += (field.at(k, g.flat(&up)) - 2.0 * field.at(k, i) + field.at(k, g.flat(&dn))) / h2;
            }
            let wt = (field.at(k, i) - field.at(k - 1, i)) / g.dt;
            let chi = if field.at(k, i) > 0.0 { 1.0 } else { 0.0 };
            res = res.max((lap - wt - chi).abs());

            let x1 = g.node(i)[0];
            // bounds over the backward step: both ends and the midpoint
            for t in [t0, 0.5 * (t0 + t1), t1] {
                let top =
                    series.g_derivative(order + 1, t).abs() * x1.abs().powi(2 * order as i32) / factorial(2 * order);
                trunc = trunc.max(top);
                x4 = x4.max(series.shifted_sum(x1, t, 0, 4).abs());
                tt = tt.max(series.shifted_sum(x1, t, 2, 0).abs());
            }
        }
    }
    let truncation_bound = eps * trunc;
    // centred second difference and backward first difference
    let discretization_bound = eps * (g.dim as f64 * h2 / 12.0 * x4 + g.dt / 2.0 * tt);
    let rounding_bound = 8.0 * f64::EPSILON * field.sup_norm() * (2.0 * g.dim as f64 / h2 + 2.0 / g.dt);
    let tolerance = 2.0 * (truncation_bound + discretization_bound) + rounding_bound;
    let report = TychonoffReport {
        eps,
        order,
        positive_before_zero: true,
        decreasing_before_zero: decreasing,
        zero_from_zero: zero_after,
        max_heat_residual: res,
        truncation_bound,
        discretization_bound,
        rounding_bound,
        tolerance,
        pass: decreasing && zero_after && res <= tolerance,
    };
    Ok((field, report))
}
