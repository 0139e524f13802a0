use crate::error::{Error, Result};
use crate::field::{Field, Sampler, SpaceTimeGrid, SpaceTimePoint, DEFAULT_MONO_TOL};

/// Nodes per axis (space and time) of every rescaled field.
pub const RESCALE_N: usize = 33;

/// The unit backward cylinder grid `[-1, 1]^d × [-1, 0]`.
pub fn unit_cylinder_grid(dim: usize) -> SpaceTimeGrid {
    let h = 2.0 / (RESCALE_N - 1) as f64;
    SpaceTimeGrid::new(vec![RESCALE_N; dim], RESCALE_N, h, 1.0 / (RESCALE_N - 1) as f64, vec![-1.0; dim], -1.0)
        .expect("fixed grid is valid")
}

/// Largest radius whose backward cylinder at `center` stays in the domain.
pub fn max_rescale_radius<S: Sampler + ?Sized>(field: &S, center: &SpaceTimePoint) -> f64 {
    let (t_lo, _) = field.t_bounds();
    // the cube [-1, 1]^d maps onto a cube of half-side r
    field.room(&center.x).min((center.t - t_lo).max(0.0).sqrt())
}

/// `r^{-2} w(x0 + r x, t0 + r² t)` sampled on the unit cylinder grid.
pub fn rescale<S: Sampler + ?Sized>(field: &S, center: &SpaceTimePoint, r: f64) -> Result<Field> {
    let (_, t_hi) = field.t_bounds();
    if center.t > t_hi {
        return Err(Error::Domain { axis: "t".into(), value: center.t, lo: field.t_bounds().0, hi: t_hi });
    }
    let lo = 3.0 * field.dx();
    let hi = max_rescale_radius(field, center);
    if !(r >= lo && r <= hi * (1.0 + 1e-12)) {
        return Err(Error::Unresolvable { r, lo, hi });
    }
    let grid = unit_cylinder_grid(field.dim());
    let n = grid.n_space();
    let nodes: Vec<Vec<f64>> = (0..n).map(|i| grid.node(i)).collect();
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.nt {
        let t = center.t + r * r * grid.time(k);
        for y in &nodes {
            let x: Vec<f64> = center.x.iter().zip(y).map(|(c, v)| c + r * v).collect();
            values.push(field.sample(&x, t)? / (r * r));
        }
    }
    Field::new(grid, values, DEFAULT_MONO_TOL)
}
