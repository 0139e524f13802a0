//! Blow-up analysis at free-boundary points: parabolic rescaling onto the
//! unit backward cylinder, regular/singular profile fits, classification
//! with strata and frequency classes, second blow-ups and one-sided Taylor
//! expansions.

mod classify;
mod profile;
mod rescale;
mod second;

pub use classify::{
    classify, classify_all, frequency_class, top_stratum_trace, ClassifiedPoint, ClassifyConfig, Family,
    FrequencyClass, RadiusFit, Verdict,
};
pub use profile::{
    fit_profile, fit_regular, fit_singular, project_constraints, regular_value, singular_value, BlowupKind,
    BlowupProfile, FIT_T_MAX, TIE_TOL,
};
pub use rescale::{max_rescale_radius, rescale, unit_cylinder_grid, RESCALE_N};
pub use second::{
    quadratic_parts, second_blowup, taylor_fit, QuadraticSecond, SecondBlowup, TaylorFit, TAYLOR_MIN_SAMPLES,
};
