use crate::error::{Error, Result};
use crate::field::SpaceTimeGrid;

use super::Boundary;

/// Discrete Laplacian in "flux" form: `(Δ_h w)_i = Σ_j c_ij (w_j - w_i)`,
/// stored as compressed rows. Nodes held at zero by a Dirichlet boundary
/// carry `fixed = true` and no couplings.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    coeffs: Vec<f64>,
    /// Σ_j c_ij per row.
    pub(crate) sum: Vec<f64>,
    pub(crate) fixed: Vec<bool>,
    /// Red-black colouring: index sets of colour 0 and colour 1.
    pub(crate) colours: [Vec<usize>; 2],
}

impl Stencil {
    pub(crate) fn len(&self) -> usize {
        self.sum.len()
    }

    pub(crate) fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        self.cols[a..b].iter().copied().zip(self.coeffs[a..b].iter().copied())
    }

    /// `Σ_j c_ij w_j`.
    pub(crate) fn off_diag(&self, i: usize, w: &[f64]) -> f64 {
        self.row(i).map(|(j, c)| c * w[j]).sum()
    }

    pub(crate) fn laplacian(&self, w: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| if self.fixed[i] { 0.0 } else { self.off_diag(i, w) - self.sum[i] * w[i] }).collect()
    }

    fn from_rows(rows: Vec<Vec<(usize, f64)>>, fixed: Vec<bool>, parity: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut coeffs = Vec::new();
        let mut sum = Vec::with_capacity(rows.len());
        offsets.push(0);
        for row in rows {
            sum.push(row.iter().map(|r| r.1).sum());
            for (j, c) in row {
                cols.push(j);
                coeffs.push(c);
            }
            offsets.push(cols.len());
        }
        let mut colours = [Vec::new(), Vec::new()];
        for (i, p) in parity.into_iter().enumerate() {
            if !fixed[i] {
                colours[p % 2].push(i);
            }
        }
        Stencil { offsets, cols, coeffs, sum, fixed, colours }
    }

    /// Standard `2d+1`-point Laplacian; Neumann by even reflection at each face.
    pub(crate) fn cartesian(grid: &SpaceTimeGrid, boundary: Boundary) -> Self {
        let n = grid.n_space();
        let h2 = 1.0 / (grid.dx * grid.dx);
        let mut rows = Vec::with_capacity(n);
        let mut fixed = vec![false; n];
        let mut parity = Vec::with_capacity(n);
        for idx in 0..n {
            let multi = grid.unflat(idx);
            parity.push(multi.iter().sum::<usize>());
            let on_face = multi.iter().zip(&grid.shape).any(|(&i, &m)| i == 0 || i + 1 == m);
            if boundary == Boundary::Dirichlet && on_face {
                fixed[idx] = true;
                rows.push(Vec::new());
                continue;
            }
            let mut row = Vec::with_capacity(2 * grid.dim);
            for axis in 0..grid.dim {
                let m = grid.shape[axis];
                let i = multi[axis];
                let step = |to: usize| {
                    let mut mm = multi.clone();
                    mm[axis] = to;
                    grid.flat(&mm)
                };
                if i == 0 {
                    row.push((step(1), 2.0 * h2));
                } else if i + 1 == m {
                    row.push((step(m - 2), 2.0 * h2));
                } else {
                    row.push((step(i - 1), h2));
                    row.push((step(i + 1), h2));
                }
            }
            rows.push(row);
        }
        Stencil::from_rows(rows, fixed, parity)
    }

    /// Radial Laplacian `u_rr + (d-1)/r u_r` on `r = i·dx`, `i = 0..n`.
    /// At `r = 0` the even reflection gives `2d (u_1 - u_0)/dx²`.
    pub(crate) fn radial(grid: &SpaceTimeGrid, boundary: Boundary, d: usize) -> Result<Self> {
        if grid.dim != 1 {
            return Err(Error::pre("radial mode needs a 1D grid in r"));
        }
        if grid.origin_x[0].abs() > 1e-12 * grid.dx {
            return Err(Error::pre("radial grid must start at r = 0"));
        }
        if d == 0 {
            return Err(Error::pre("radial dimension must be at least 1"));
        }
        // c_minus at i = 1 is (1 - (d-1)/2)/dx², negative for d > 3
        if d > 3 {
            return Err(Error::pre(format!("radial dimension {d} breaks the M-matrix property (d <= 3)")));
        }
        let n = grid.shape[0];
        let h2 = 1.0 / (grid.dx * grid.dx);
        let dm1 = (d - 1) as f64;
        let mut rows = Vec::with_capacity(n);
        let mut fixed = vec![false; n];
        for i in 0..n {
            if i == 0 {
                rows.push(vec![(1, 2.0 * d as f64 * h2)]);
            } else if i + 1 == n {
                if boundary == Boundary::Dirichlet {
                    fixed[i] = true;
                    rows.push(Vec::new());
                } else {
                    rows.push(vec![(n - 2, 2.0 * h2)]);
                }
            } else {
                let drift = dm1 / (2.0 * i as f64) * h2;
                rows.push(vec![(i - 1, h2 - drift), (i + 1, h2 + drift)]);
            }
        }
        Ok(Stencil::from_rows(rows, fixed, (0..n).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_has_laplacian_two() {
        let g = SpaceTimeGrid::line(21, -1.0, 1.0, 2, 0.0, 1.0).unwrap();
        let s = Stencil::cartesian(&g, Boundary::Neumann);
        let w: Vec<f64> = (0..21).map(|i| g.coord(0, i).powi(2)).collect();
        let lap = s.laplacian(&w);
        for v in &lap[1..20] {
            assert!((v - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn radial_d1_equals_cartesian_half_line() {
        let g = SpaceTimeGrid::line(17, 0.0, 1.0, 2, 0.0, 1.0).unwrap();
        let a = Stencil::cartesian(&g, Boundary::Neumann);
        let b = Stencil::radial(&g, Boundary::Neumann, 1).unwrap();
        for i in 0..17 {
            let ra: Vec<_> = a.row(i).collect();
            let rb: Vec<_> = b.row(i).collect();
            assert_eq!(ra, rb, "row {i}");
        }
    }

    #[test]
    fn radial_quadratic_laplacian() {
        // Δ(r²) = 2d in dimension d, exactly on the stencil including r = 0
        let g = SpaceTimeGrid::line(33, 0.0, 1.0, 2, 0.0, 1.0).unwrap();
        for d in 1..=3 {
            let s = Stencil::radial(&g, Boundary::Neumann, d).unwrap();
            let w: Vec<f64> = (0..33).map(|i| g.coord(0, i).powi(2)).collect();
            let lap = s.laplacian(&w);
            for v in &lap[..32] {
                assert!((v - 2.0 * d as f64).abs() < 1e-9, "d = {d}: {v}");
            }
        }
    }
}
