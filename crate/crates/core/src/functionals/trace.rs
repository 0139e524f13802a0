use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{cutoff, kernel, kernel_tail_mass};
use crate::calpoly::CaloricPoly;
use crate::error::{Error, Result};
use crate::export::csv_row;
use crate::field::{Sampler, SpaceTimePoint};

/// Value with an a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

/// Gaussian tails are cut at this many standard deviations `√2 r`.
const TRUNC_SIGMAS: f64 = 8.0;

/// `[3 dx, min(room/2, sqrt(t0 - t_lo))]` for a center in `field`.
pub fn resolvable_range<S: Sampler + ?Sized>(field: &S, center: &SpaceTimePoint) -> (f64, f64) {
    let lo = 3.0 * field.dx();
    let room = field.room(&center.x);
    let (t_lo, _) = field.t_bounds();
    let hi = (0.5 * room).min((center.t - t_lo).max(0.0).sqrt());
    (lo, hi)
}

fn check_radius<S: Sampler + ?Sized>(field: &S, center: &SpaceTimePoint, r: f64) -> Result<()> {
    let (lo, hi) = resolvable_range(field, center);
    // relative slack so ladder endpoints built from (lo, hi) stay admissible
    if !(r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12)) {
        return Err(Error::Unresolvable { r, lo, hi });
    }
    Ok(())
}

/// Values of a function of `y` on the cube lattice `h·[-m, m]^d`.
struct Lattice {
    dim: usize,
    m: i64,
    h: f64,
    vals: Vec<f64>,
}

impl Lattice {
    fn build(dim: usize, m: i64, h: f64, f: &(dyn Fn(&[f64]) -> Result<f64> + Sync)) -> Result<Self> {
        let side = (2 * m + 1) as usize;
        let n = side.pow(dim as u32);
        let vals: Result<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|flat| {
                let y = Self::coords(dim, m, h, flat);
                f(&y)
            })
            .collect();
        Ok(Lattice { dim, m, h, vals: vals? })
    }

    fn idx_of(dim: usize, m: i64, flat: usize) -> Vec<i64> {
        let side = (2 * m + 1) as usize;
        let mut rem = flat;
        let mut idx = vec![0i64; dim];
        for a in (0..dim).rev() {
            idx[a] = (rem % side) as i64 - m;
            rem /= side;
        }
        idx
    }

    fn coords(dim: usize, m: i64, h: f64, flat: usize) -> Vec<f64> {
        Self::idx_of(dim, m, flat).iter().map(|&i| i as f64 * h).collect()
    }

    fn flat(&self, idx: &[i64]) -> usize {
        let side = 2 * self.m + 1;
        idx.iter().fold(0i64, |acc, &i| acc * side + (i + self.m)) as usize
    }

    fn at(&self, idx: &[i64]) -> f64 {
        self.vals[self.flat(idx)]
    }

    /// Squared centred-difference gradient at an interior index.
    fn grad2(&self, idx: &[i64]) -> f64 {
        let mut g2 = 0.0;
        let mut nb = idx.to_vec();
        for a in 0..self.dim {
            nb[a] = idx[a] + 1;
            let up = self.at(&nb);
            nb[a] = idx[a] - 1;
            let dn = self.at(&nb);
            nb[a] = idx[a];
            let g = (up - dn) / (2.0 * self.h);
            g2 += g * g;
        }
        g2
    }
}

/// Sums `Σ F(y) G(y, -r²) h^d` over `|y| <= big_r` at spacing `h` and `2h`,
/// plus the largest `|F|` in the outer shell for the tail bound.
struct Sums {
    fine: Vec<f64>,
    coarse: Vec<f64>,
    edge: Vec<f64>,
}

fn weighted_sums(
    lat: &Lattice,
    r: f64,
    big_r: f64,
    integrands: &dyn Fn(&Lattice, &[i64]) -> Vec<f64>,
    count: usize,
) -> Sums {
    let dim = lat.dim;
    let inner = lat.m - 1;
    let side = (2 * inner + 1) as usize;
    let n = side.pow(dim as u32);
    let h = lat.h;
    let hd = h.powi(dim as i32);
    let h2d = (2.0 * h).powi(dim as i32);
    let shell = big_r - 2.0 * h;
    let mut sums = Sums { fine: vec![0.0; count], coarse: vec![0.0; count], edge: vec![0.0; count] };
    for flat in 0..n {
        let idx = Lattice::idx_of(dim, inner, flat);
        let y: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        let dist = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dist > big_r {
            continue;
        }
        let g = kernel(&y, -r * r);
        let vals = integrands(lat, &idx);
        let even = idx.iter().all(|i| i % 2 == 0);
        for k in 0..count {
            sums.fine[k] += vals[k] * g * hd;
            if even {
                sums.coarse[k] += vals[k] * g * h2d;
            }
            if dist > shell {
                sums.edge[k] = sums.edge[k].max(vals[k].abs());
            }
        }
    }
    sums
}

/// `⟨f, g⟩_r` for functions of the recentred variables `(y, s)`, evaluated
/// on the slice `s = -r²` by lattice quadrature at the field's spacing.
pub fn inner_r<S: Sampler + ?Sized>(
    field: &S,
    center: &SpaceTimePoint,
    f: &(dyn Fn(&[f64], f64) -> Result<f64> + Sync),
    g: &(dyn Fn(&[f64], f64) -> Result<f64> + Sync),
    r: f64,
) -> Result<Quad> {
    check_radius(field, center, r)?;
    let h = field.dx();
    let dim = field.dim();
    let room = field.room(&center.x);
    let big_r = (room - h).min(TRUNC_SIGMAS * 2f64.sqrt() * r);
    let m = (big_r / h).floor() as i64 + 1;
    let s = -r * r;
    let lf = Lattice::build(dim, m, h, &|y| f(y, s))?;
    let lg = Lattice::build(dim, m, h, &|y| g(y, s))?;
    let sums = weighted_sums(&lf, r, big_r, &|l, idx| vec![l.at(idx) * lg.at(idx)], 1);
    let tail = kernel_tail_mass(dim, big_r, r) * sums.edge[0];
    Ok(Quad { value: sums.fine[0], error: (sums.fine[0] - sums.coarse[0]).abs() + tail })
}

/// `u(y, s) = ζ(y) (w(x0 + y, t0 + s) - p(y, s))`, or without `ζ` in global mode.
pub struct Recentered<'a, S: Sampler + ?Sized> {
    pub field: &'a S,
    pub center: SpaceTimePoint,
    pub profile: CaloricPoly<f64>,
    pub use_cutoff: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceFunctionals {
    pub h: f64,
    pub d: f64,
    pub err_h: f64,
    pub err_d: f64,
}

impl<S: Sampler + ?Sized> Recentered<'_, S> {
    pub fn u(&self, y: &[f64], s: f64) -> Result<f64> {
        let z = if self.use_cutoff { cutoff(y) } else { 1.0 };
        if z == 0.0 {
            return Ok(0.0);
        }
        let x: Vec<f64> = self.center.x.iter().zip(y).map(|(c, v)| c + v).collect();
        let w = self.field.sample(&x, self.center.t + s)?;
        Ok(z * (w - self.profile.eval(y, s)))
    }

    fn operand_scale(&self, y: &[f64], s: f64) -> Result<f64> {
        let x: Vec<f64> = self.center.x.iter().zip(y).map(|(c, v)| c + v).collect();
        let w = self.field.sample(&x, self.center.t + s)?;
        Ok(w.abs() + self.profile.eval(y, s).abs())
    }

    /// `H(r, u)` and `D(r, u) = 2r² ⟨∇u, ∇u⟩_r` with error estimates.
    pub fn functionals(&self, r: f64) -> Result<SliceFunctionals> {
        check_radius(self.field, &self.center, r)?;
        let h = self.field.dx();
        let dim = self.field.dim();
        let room = self.field.room(&self.center.x);
        let mut big_r = (room - h).min(TRUNC_SIGMAS * 2f64.sqrt() * r);
        let cut_limited = self.use_cutoff && big_r >= 0.5;
        if cut_limited {
            big_r = 0.5;
        }
        // one extra ring of lattice points for the centred differences
        let m = (big_r / h).floor() as i64 + 2;
        let s = -r * r;
        let inside = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().sqrt() <= room * (1.0 + 1e-12);
        let lat = Lattice::build(dim, m, h, &|y| {
            if inside(y) {
                self.u(y, s)
            } else {
                Ok(0.0)
            }
        })?;
        // rounding in w - p is relative to the size of the operands, not of u
        let scale = Lattice::build(dim, m, h, &|y| {
            if inside(y) {
                self.operand_scale(y, s)
            } else {
                Ok(0.0)
            }
        })?;
        let sums = weighted_sums(
            &lat,
            r,
            big_r,
            &|l, idx| {
                let v = l.at(idx);
                let g2 = l.grad2(idx);
                let delta = 4.0 * f64::EPSILON * scale.at(idx);
                let dg = delta / h;
                vec![v * v, g2, 2.0 * v.abs() * delta + delta * delta, 2.0 * g2.sqrt() * dg + dg * dg]
            },
            4,
        );
        let tail_mass = if cut_limited { 0.0 } else { kernel_tail_mass(dim, big_r, r) };
        let two_r2 = 2.0 * r * r;
        Ok(SliceFunctionals {
            h: sums.fine[0],
            d: two_r2 * sums.fine[1],
            err_h: (sums.fine[0] - sums.coarse[0]).abs() + tail_mass * sums.edge[0] + sums.fine[2],
            err_d: two_r2 * ((sums.fine[1] - sums.coarse[1]).abs() + tail_mass * sums.edge[1] + sums.fine[3]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub r: f64,
    pub h: f64,
    pub d: f64,
    pub phi: f64,
    pub phi_gamma: f64,
    pub err_h: f64,
    pub err_d: f64,
}

impl TraceEntry {
    /// `H` is indistinguishable from quadrature noise.
    pub fn degenerate(&self) -> bool {
        !(self.h > 10.0 * self.err_h) || self.h <= 0.0
    }

    /// Propagated error of `φ`.
    pub fn err_phi(&self) -> f64 {
        if self.h <= 0.0 {
            return f64::INFINITY;
        }
        (self.err_d + self.phi.abs() * self.err_h) / self.h
    }

    pub fn err_phi_gamma(&self, gamma: f64) -> f64 {
        let pad = self.r.powf(2.0 * gamma);
        (self.err_d + self.phi_gamma.abs() * self.err_h) / (self.h + pad)
    }
}

/// `φ^γ(r) = (D + γ r^{2γ}) / (H + r^{2γ})`.
pub fn phi_gamma(h: f64, d: f64, r: f64, gamma: f64) -> f64 {
    let pad = r.powf(2.0 * gamma);
    (d + gamma * pad) / (h + pad)
}

#[derive(Debug, Clone)]
pub struct FrequencyTrace {
    pub center: SpaceTimePoint,
    pub profile: CaloricPoly<f64>,
    pub gamma: f64,
    pub cutoff_used: bool,
    /// Sorted by decreasing radius.
    pub entries: Vec<TraceEntry>,
}

impl FrequencyTrace {
    /// Median of `φ^γ` over the smallest octave `[r_min, 2 r_min]`.
    pub fn lambda(&self) -> Option<f64> {
        median_over_smallest_octave(&self.entries, |e| e.phi_gamma)
    }

    /// `λ` recomputed from the stored `H`, `D` for another truncation exponent.
    pub fn lambda_at(&self, gamma: f64) -> Option<f64> {
        median_over_smallest_octave(&self.entries, |e| phi_gamma(e.h, e.d, e.r, gamma))
    }

    /// Same statistic for plain `φ`, skipping degenerate entries.
    pub fn phi_limit(&self) -> Option<f64> {
        let good: Vec<TraceEntry> = self.entries.iter().copied().filter(|e| !e.degenerate()).collect();
        median_over_smallest_octave(&good, |e| e.phi)
    }

    pub fn all_degenerate(&self) -> bool {
        self.entries.iter().all(TraceEntry::degenerate)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,H,D,phi,phi_gamma,err_H,err_D\n");
        for e in &self.entries {
            out.push_str(&csv_row(&[e.r, e.h, e.d, e.phi, e.phi_gamma, e.err_h, e.err_d]));
            out.push('\n');
        }
        out
    }
}

fn median_over_smallest_octave(entries: &[TraceEntry], f: impl Fn(&TraceEntry) -> f64) -> Option<f64> {
    let r_min = entries.iter().map(|e| e.r).fold(f64::INFINITY, f64::min);
    let mut vals: Vec<f64> =
        entries.iter().filter(|e| e.r <= 2.0 * r_min * (1.0 + 1e-12)).map(&f).filter(|v| v.is_finite()).collect();
    if vals.is_empty() {
        return None;
    }
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    Some(if n % 2 == 1 { vals[n / 2] } else { 0.5 * (vals[n / 2 - 1] + vals[n / 2]) })
}

/// Geometric ladder from `hi` down to `lo` with `per_octave` radii per halving.
pub fn radius_ladder(lo: f64, hi: f64, per_octave: usize) -> Vec<f64> {
    if !(lo > 0.0 && hi >= lo) || per_octave == 0 {
        return Vec::new();
    }
    let ratio = 2f64.powf(-1.0 / per_octave as f64);
    let mut out = vec![hi];
    let mut r = hi;
    loop {
        r *= ratio;
        if r < lo * (1.0 - 1e-12) {
            break;
        }
        out.push(r);
    }
    out
}

pub fn frequency_trace<S: Sampler + ?Sized>(
    field: &S,
    center: &SpaceTimePoint,
    profile: &CaloricPoly<f64>,
    radii: &[f64],
    gamma: f64,
    use_cutoff: bool,
) -> Result<FrequencyTrace> {
    if radii.is_empty() {
        return Err(Error::pre("empty radius ladder"));
    }
    if center.x.len() != field.dim() || profile.dim() != field.dim() {
        return Err(Error::pre("center/profile dimension differs from the field"));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    for &r in &radii {
        check_radius(field, center, r)?;
    }
    let rc = Recentered { field, center: center.clone(), profile: profile.clone(), use_cutoff };
    let mut entries = Vec::with_capacity(radii.len());
    for &r in &radii {
        let f = rc.functionals(r)?;
        let phi = if f.h > 0.0 { f.d / f.h } else { f64::NAN };
        entries.push(TraceEntry {
            r,
            h: f.h,
            d: f.d,
            phi,
            phi_gamma: phi_gamma(f.h, f.d, r, gamma),
            err_h: f.err_h,
            err_d: f.err_d,
        });
    }
    Ok(FrequencyTrace { center: center.clone(), profile: profile.clone(), gamma, cutoff_used: use_cutoff, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditMode {
    /// Audit `φ^γ` (almost monotone with cutoff).
    Cutoff,
    /// Audit plain `φ` and the floor `φ >= 2` (global solutions, no cutoff).
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub r_small: f64,
    pub r_large: f64,
    /// Amount by which the audited quantity decreased going outwards.
    pub drop: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub checked_pairs: usize,
    pub violations: Vec<AuditViolation>,
    /// Radii where `φ < 2 - floor_tol` (global mode only).
    pub below_floor: Vec<f64>,
    pub degenerate: bool,
}

pub fn monotonicity_audit(trace: &FrequencyTrace, mode: AuditMode, floor_tol: f64) -> Result<AuditReport> {
    if trace.entries.len() < 4 {
        return Err(Error::pre("monotonicity audit needs at least 4 radii"));
    }
    let mut asc: Vec<TraceEntry> = trace.entries.clone();
    asc.sort_by(|a, b| a.r.total_cmp(&b.r));
    let usable: Vec<TraceEntry> = match mode {
        AuditMode::Cutoff => asc.into_iter().filter(|e| e.phi_gamma.is_finite()).collect(),
        AuditMode::Global => asc.into_iter().filter(|e| !e.degenerate()).collect(),
    };
    let degenerate = usable.is_empty();
    let value = |e: &TraceEntry| match mode {
        AuditMode::Cutoff => e.phi_gamma,
        AuditMode::Global => e.phi,
    };
    let err = |e: &TraceEntry| match mode {
        AuditMode::Cutoff => e.err_phi_gamma(trace.gamma),
        AuditMode::Global => e.err_phi(),
    };
    let mut violations = Vec::new();
    let mut checked = 0;
    for pair in usable.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        checked += 1;
        let drop = value(a) - value(b);
        let allowed = err(a) + err(b);
        if drop > allowed {
            violations.push(AuditViolation { r_small: a.r, r_large: b.r, drop, allowed });
        }
    }
    let below_floor = if mode == AuditMode::Global {
        usable.iter().filter(|e| e.phi < 2.0 - floor_tol).map(|e| e.r).collect()
    } else {
        Vec::new()
    };
    Ok(AuditReport { mode, checked_pairs: checked, violations, below_floor, degenerate })
}
