//! Free-boundary extraction and measurement: the freezing time `s(x)`,
//! Lipschitz and nondegeneracy statistics, nucleation and jump detection,
//! two-sided cleaning, and parabolic box-counting dimension.

mod dimension;
mod freeze;
mod stats;

pub use dimension::{dyadic_scales, parabolic_box_count, parabolic_dimension, DimensionEstimate};
pub use freeze::{extinction_maxima, freezing_time, FreezingTime};
pub use stats::{
    boundary_stats, cleaning_check, jump_scan, nucleates_at, nucleation_scan, BoundaryStats, CleaningRadius,
    CleaningReport, NucleationHit,
};
