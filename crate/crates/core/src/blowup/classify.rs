use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::profile::{fit_profile, BlowupKind, BlowupProfile};
use super::rescale::rescale;
use crate::calpoly::CaloricPoly;
use crate::error::Result;
use crate::field::{Field, SpaceTimePoint};
use crate::freeboundary::{nucleates_at, FreezingTime};
use crate::functionals::{frequency_trace, radius_ladder, resolvable_range, FrequencyTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Eigenvalues of `A` below this count toward `dim ker A`.
    pub rank_tol: f64,
    /// Singular profiles with `m <= m_tol` are stationary.
    pub m_tol: f64,
    pub residual_tol: f64,
    /// Allowed parameter drift over one octave of radii.
    pub stability_tol: f64,
    pub gammas: Vec<f64>,
    /// `φ^γ` must plateau this far below `γ` to count as a finite class.
    pub plateau_margin: f64,
    pub trace_per_octave: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            rank_tol: 0.05,
            m_tol: 0.05,
            residual_tol: 0.1,
            stability_tol: 0.05,
            gammas: vec![3.0, 4.0, 5.0, 6.0],
            plateau_margin: 0.25,
            trace_per_octave: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Regular,
    Singular,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Stationary,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyClass {
    Finite(u32),
    /// No plateau below any tested `γ` (so `>= 7` or infinite).
    Infinite,
    /// The profile is not in the top stratum.
    NotApplicable,
    /// No resolvable radii around the point.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    pub r: f64,
    pub profile: BlowupProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedPoint {
    pub point: SpaceTimePoint,
    pub verdict: Verdict,
    pub profile: Option<BlowupProfile>,
    /// Radius whose fit was adopted.
    pub decided_at: Option<f64>,
    /// Adopted without a stable octave because one family clearly dominates.
    pub slow_convergence: bool,
    pub stratum: Option<usize>,
    pub family: Option<Family>,
    pub frequency: FrequencyClass,
    /// `(γ, λ_γ)` for every tested truncation exponent.
    pub lambda_by_gamma: Vec<(f64, f64)>,
    pub nucleation: bool,
    pub eta_before: Option<f64>,
    pub eta_discontinuous: bool,
    /// Whether the η flag agrees with the profile (discontinuous exactly at dynamic points).
    pub eta_consistent: Option<bool>,
    pub fits: Vec<RadiusFit>,
}

impl ClassifiedPoint {
    pub fn lambda(&self, gamma: f64) -> Option<f64> {
        self.lambda_by_gamma.iter().find(|(g, _)| *g == gamma).map(|(_, l)| *l)
    }

    pub fn m(&self) -> Option<f64> {
        match self.profile.as_ref().map(|p| &p.kind) {
            Some(BlowupKind::Singular { m, .. }) => Some(*m),
            _ => None,
        }
    }
}

fn drift(a: &BlowupProfile, b: &BlowupProfile) -> f64 {
    if a.is_singular() != b.is_singular() {
        return f64::INFINITY;
    }
    a.parameters().iter().zip(b.parameters()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Index of the adopted fit among `fits` (sorted by decreasing radius) and
/// whether it was adopted under the slow-convergence rule.
fn choose(fits: &[RadiusFit], cfg: &ClassifyConfig) -> Option<(usize, bool)> {
    let stable = |i: usize| -> bool {
        let r = fits[i].r;
        let partner = fits[..i]
            .iter()
            .filter(|f| f.r / r >= 1.5 && f.r / r <= 3.0)
            .min_by(|a, b| (a.r / r - 2.0).abs().total_cmp(&(b.r / r - 2.0).abs()));
        partner.is_some_and(|p| drift(&p.profile, &fits[i].profile) < cfg.stability_tol)
    };
    if let Some(i) = (0..fits.len()).rev().find(|&i| fits[i].profile.residual < cfg.residual_tol && stable(i)) {
        return Some((i, false));
    }
    let last = fits.len().checked_sub(1)?;
    let p = &fits[last].profile;
    let (win, lose) = if p.is_singular() {
        (p.singular_residual, p.regular_residual)
    } else {
        (p.regular_residual, p.singular_residual)
    };
    (!p.ambiguous && win <= 0.5 * lose && win <= 0.5).then_some((last, true))
}

/// Frequency trace of `ζ (w(x0 + ·, t0 + ·) + t)` over the resolvable ladder.
pub fn top_stratum_trace(field: &Field, point: &SpaceTimePoint, per_octave: usize) -> Option<Result<FrequencyTrace>> {
    let (lo, hi) = resolvable_range(field, point);
    let radii = radius_ladder(lo, hi, per_octave);
    if radii.len() < 2 {
        return None;
    }
    let p = CaloricPoly::t(field.grid().dim).scale(&-1.0);
    Some(frequency_trace(field, point, &p, &radii, 4.0, true))
}

/// Class from the `γ` sweep: the first `γ` whose plateau sits clearly below it.
pub fn frequency_class(trace: &FrequencyTrace, cfg: &ClassifyConfig) -> (FrequencyClass, Vec<(f64, f64)>) {
    let lambdas: Vec<(f64, f64)> = cfg.gammas.iter().filter_map(|&g| trace.lambda_at(g).map(|l| (g, l))).collect();
    for &(g, l) in &lambdas {
        if l < g - cfg.plateau_margin {
            return (FrequencyClass::Finite(l.round().max(0.0) as u32), lambdas);
        }
    }
    (FrequencyClass::Infinite, lambdas)
}

/// `η` at the last grid level strictly before `t0`, over the node nearest `x0`.
fn eta_before(field: &Field, point: &SpaceTimePoint) -> Option<f64> {
    let g = field.grid();
    let i = g.nearest_node(&point.x);
    let k = (1..g.nt).rev().find(|&k| g.time(k) < point.t - 1e-9 * g.dt)?;
    Some((field.at(k - 1, i) - field.at(k, i)) / g.dt)
}

/// Fit blow-up profiles across `radii` and classify the point.
pub fn classify(
    field: &Field,
    freezing: &FreezingTime,
    point: &SpaceTimePoint,
    radii: &[f64],
    cfg: &ClassifyConfig,
) -> Result<ClassifiedPoint> {
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let mut fits = Vec::new();
    for r in radii {
        let scaled = rescale(field, point, r)?;
        fits.push(RadiusFit { r, profile: fit_profile(&scaled) });
    }
    let g = field.grid();
    let node = g.nearest_node(&point.x);
    let nucleation = nucleates_at(field, freezing, node).is_some();
    let eta = eta_before(field, point);
    let eta_discontinuous = eta.is_some_and(|v| v > cfg.m_tol);

    let mut out = ClassifiedPoint {
        point: point.clone(),
        verdict: Verdict::Undetermined,
        profile: None,
        decided_at: None,
        slow_convergence: false,
        stratum: None,
        family: None,
        frequency: FrequencyClass::NotApplicable,
        lambda_by_gamma: Vec::new(),
        nucleation,
        eta_before: eta,
        eta_discontinuous,
        eta_consistent: None,
        fits,
    };
    let Some((idx, slow)) = choose(&out.fits, cfg) else {
        return Ok(out);
    };
    let profile = out.fits[idx].profile.clone();
    out.decided_at = Some(out.fits[idx].r);
    out.slow_convergence = slow;
    match &profile.kind {
        BlowupKind::Regular { .. } => {
            out.verdict = Verdict::Regular;
            out.eta_consistent = Some(!eta_discontinuous);
        }
        BlowupKind::Singular { m, .. } => {
            out.verdict = Verdict::Singular;
            let stratum = profile.a_eigenvalues().iter().filter(|&&v| v < cfg.rank_tol).count();
            let family = if *m <= cfg.m_tol { Family::Stationary } else { Family::Dynamic };
            out.stratum = Some(stratum);
            out.family = Some(family);
            out.eta_consistent = Some(eta_discontinuous == (family == Family::Dynamic));
            if stratum == g.dim {
                match top_stratum_trace(field, point, cfg.trace_per_octave) {
                    None => out.frequency = FrequencyClass::Unresolved,
                    Some(trace) => {
                        let (class, lambdas) = frequency_class(&trace?, cfg);
                        out.frequency = class;
                        out.lambda_by_gamma = lambdas;
                    }
                }
            }
        }
    }
    out.profile = Some(profile);
    Ok(out)
}

/// Classify several points in parallel; results keep the input order.
pub fn classify_all(
    field: &Field,
    freezing: &FreezingTime,
    points: &[SpaceTimePoint],
    radii_for: &(dyn Fn(&SpaceTimePoint) -> Vec<f64> + Sync),
    cfg: &ClassifyConfig,
) -> Vec<Result<ClassifiedPoint>> {
    points.par_iter().map(|p| classify(field, freezing, p, &radii_for(p), cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpaceTimeGrid;
    use crate::freeboundary::freezing_time;

    #[test]
    fn planar_is_dynamic_top_stratum_with_infinite_frequency() {
        let g = SpaceTimeGrid::line(201, -1.0, 1.0, 201, 0.0, 0.5).unwrap();
        let f = Field::from_fn(g, |_, t| (0.25 - t).max(0.0)).unwrap();
        let fr = freezing_time(&f);
        let p = SpaceTimePoint::new(vec![0.0], 0.25);
        let c = classify(&f, &fr, &p, &[0.4, 0.2, 0.1, 0.05], &ClassifyConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Singular);
        assert_eq!(c.family, Some(Family::Dynamic));
        assert_eq!(c.stratum, Some(1));
        assert_eq!(c.frequency, FrequencyClass::Infinite);
        assert!(c.nucleation && c.eta_discontinuous && c.eta_consistent == Some(true));
        assert!(!c.slow_convergence);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"verdict\":\"singular\""));
    }

    #[test]
    fn half_space_point_is_regular() {
        // stationary solution: the boundary never moves, so η vanishes identically
        let g = SpaceTimeGrid::line(201, -1.0, 1.0, 101, 0.0, 0.5).unwrap();
        let f = Field::from_fn(g, |x, _| 0.5 * x[0].max(0.0).powi(2)).unwrap();
        let fr = freezing_time(&f);
        let p = SpaceTimePoint::new(vec![0.0], 0.3);
        let c = classify(&f, &fr, &p, &[0.2, 0.1, 0.05], &ClassifyConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Regular);
        assert!(c.family.is_none() && c.stratum.is_none());
        assert_eq!(c.eta_consistent, Some(true));
    }
}
