//! Gaussian-weighted functionals on recentred differences `u = ζ(w - p)`:
//! `H(r) = ⟨u, u⟩_r`, `D(r) = 2r² ⟨∇u, ∇u⟩_r`, the frequency `φ = D/H`
//! and its truncated form `φ^γ`, with quadrature error estimates.

mod kernel;
mod trace;

pub use kernel::{cutoff, kernel, kernel_tail_mass, smooth_step};
pub use trace::{
    frequency_trace, inner_r, monotonicity_audit, phi_gamma, radius_ladder, resolvable_range, AuditMode, AuditReport,
    AuditViolation, FrequencyTrace, Quad, Recentered, SliceFunctionals, TraceEntry,
};
