//! Polynomials in `(x, t)` graded by parabolic degree `|β| + 2j`: heat and
//! scaling operators, caloric extensions and bases, Gaussian moments,
//! weighted projections, and the Łojasiewicz and Laguerre verifiers.

mod gauss;
mod laguerre;
mod lojasiewicz;
mod poly;
mod project;
mod text;

pub use gauss::{closed_form_frequency, gaussian_inner, gaussian_moment};
pub use laguerre::{laguerre_coefficients, laguerre_constants, radial_caloric, radial_derivative, LaguerreConstants};
pub use lojasiewicz::{
    lojasiewicz_harmonic_check, lojasiewicz_quadratic_check, HarmonicReport, QuadraticCheck, QuadraticForm,
    LOJASIEWICZ_SLACK,
};
pub use poly::{
    caloric_basis, graded_basis, homogeneous_basis, multi_indices, rat, CaloricPoly, Coeff, RatPoly, Term, MAX_DEGREE,
};
pub use project::{project_caloric, project_onto, Projection, WeightedSample};
pub use text::{poly_from_text, poly_to_text};
