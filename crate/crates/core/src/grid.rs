//! Uniform cell grids over bounded habitats, with midpoint quadrature.
//!
//! The habitat is covered by axis-aligned square cells of side `h`; every
//! integral in the crate is the midpoint rule `sum(field_i * cell_measure)`.
//! Disk domains are realized by cell-center masking: a cell is active iff its
//! center lies inside the disk, so quadrature weights stay uniform and the
//! discrete operator stays exactly symmetric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounded habitat. Dimension is 1 (interval) or 2 (rectangle, disk).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Exact Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Rectangle { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Domain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    /// Lower corner and extents of the bounding box.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Domain::Interval { lo, hi } => ([*lo, 0.0], [hi - lo, 0.0]),
            Domain::Rectangle { lo, hi } => (*lo, [hi[0] - lo[0], hi[1] - lo[1]]),
            Domain::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [2.0 * radius, 2.0 * radius],
            ),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Domain::Interval { lo, hi } => *lo < p[0] && p[0] < *hi,
            Domain::Rectangle { lo, hi } => {
                lo[0] < p[0] && p[0] < hi[0] && lo[1] < p[1] && p[1] < hi[1]
            }
            Domain::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy < radius * radius
            }
        }
    }

    pub fn centroid(&self) -> [f64; 2] {
        match self {
            Domain::Interval { lo, hi } => [0.5 * (lo + hi), 0.0],
            Domain::Rectangle { lo, hi } => [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])],
            Domain::Disk { center, .. } => *center,
        }
    }

    /// Distance from an interior point to the domain boundary.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        match self {
            Domain::Interval { lo, hi } => (p[0] - lo).min(hi - p[0]),
            Domain::Rectangle { lo, hi } => (p[0] - lo[0])
                .min(hi[0] - p[0])
                .min(p[1] - lo[1])
                .min(hi[1] - p[1]),
            Domain::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                radius - (dx * dx + dy * dy).sqrt()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Domain::Interval { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Domain::Rectangle { lo, hi } => {
                lo.iter().chain(hi.iter()).all(|v| v.is_finite())
                    && lo[0] < hi[0]
                    && lo[1] < hi[1]
            }
            Domain::Disk { center, radius } => {
                center.iter().all(|v| v.is_finite()) && radius.is_finite() && *radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "degenerate domain: {self:?} (need lo < hi componentwise, radius > 0)"
            )))
        }
    }
}

/// Uniform cell grid. Fields live on the *active* cells, in lattice row-major
/// order (x fastest).
#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    cell_measure: f64,
    /// Lattice indices (ix + nx*iy) of active cells, ascending.
    active: Vec<usize>,
    full: bool,
}

impl Grid {
    /// Build a uniform grid with `cells_per_axis` cells along the first axis
    /// of the bounding box. For rectangles the second axis must be an integer
    /// multiple of the resulting cell size, so cells stay square and tile the
    /// domain exactly. Disk domains get a square lattice over the bounding
    /// box with inactive cells masked out.
    pub fn build(domain: &Domain, cells_per_axis: usize) -> Result<Grid> {
        domain.validate()?;
        if cells_per_axis < 2 {
            return Err(Error::Grid(format!(
                "cells_per_axis = {cells_per_axis} < 2"
            )));
        }
        let (origin, extent) = domain.bounding_box();
        let nx = cells_per_axis;
        let h = extent[0] / nx as f64;
        let (ny, cell_measure) = match domain.dim() {
            1 => (1, h),
            _ => {
                let ny_real = extent[1] / h;
                let ny = ny_real.round() as usize;
                if ny < 1 || (ny_real - ny as f64).abs() > 1e-9 * ny_real.max(1.0) {
                    return Err(Error::Grid(format!(
                        "rectangle extents {extent:?} are not commensurate with square cells of side {h}"
                    )));
                }
                (ny, h * h)
            }
        };

        let mut active = Vec::new();
        let mut full = true;
        for iy in 0..ny {
            for ix in 0..nx {
                let c = center_of(origin, h, domain.dim(), ix, iy);
                if matches!(domain, Domain::Disk { .. }) && !domain.contains(c) {
                    full = false;
                } else {
                    active.push(ix + nx * iy);
                }
            }
        }
        if active.is_empty() {
            return Err(Error::Grid(
                "zero active cells: domain/resolution mismatch".into(),
            ));
        }
        Ok(Grid {
            domain: domain.clone(),
            nx,
            ny,
            h,
            origin,
            cell_measure,
            active,
            full,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Number of active cells (the length of every field on this grid).
    pub fn n_cells(&self) -> usize {
        self.active.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// Total measure of the active cells (converges to |domain| as h -> 0).
    pub fn active_measure(&self) -> f64 {
        self.active.len() as f64 * self.cell_measure
    }

    /// True when no cell of the bounding-box lattice is masked out.
    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn lattice_shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn active_lattice_indices(&self) -> &[usize] {
        &self.active
    }

    /// Center of the i-th active cell.
    pub fn center(&self, i: usize) -> [f64; 2] {
        let idx = self.active[i];
        center_of(self.origin, self.h, self.dim(), idx % self.nx, idx / self.nx)
    }

    pub fn centers(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.n_cells()).map(|i| self.center(i))
    }

    /// Index of the active cell whose center is nearest to `p`.
    pub fn nearest_cell(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for i in 0..self.n_cells() {
            let c = self.center(i);
            let d = (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Midpoint-rule integral of a per-cell field. Summation is in index
    /// order for bit reproducibility.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        if field.len() != self.n_cells() {
            return Err(Error::FieldLength {
                expected: self.n_cells(),
                got: field.len(),
            });
        }
        let mut sum = 0.0;
        for v in field {
            sum += v;
        }
        Ok(sum * self.cell_measure)
    }

    /// Weighted inner product `integrate(f * g)`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        let mut sum = 0.0;
        for (a, b) in f.iter().zip(g) {
            sum += a * b;
        }
        sum * self.cell_measure
    }

    /// Weighted discrete L2 norm.
    pub fn norm_l2(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }
}

fn center_of(origin: [f64; 2], h: f64, dim: usize, ix: usize, iy: usize) -> [f64; 2] {
    let x = origin[0] + (ix as f64 + 0.5) * h;
    let y = if dim == 1 {
        0.0
    } else {
        origin[1] + (iy as f64 + 0.5) * h
    };
    [x, y]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_grid_centers_and_measure() {
        let g = Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 4).unwrap();
        let xs: Vec<f64> = g.centers().map(|c| c[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.h(), 0.25);
        assert!((g.active_measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rectangle_grid_four_cells() {
        let g = Grid::build(
            &Domain::Rectangle {
                lo: [0.0, 0.0],
                hi: [1.0, 1.0],
            },
            2,
        )
        .unwrap();
        assert_eq!(g.n_cells(), 4);
        assert!((g.cell_measure() - 0.25).abs() < 1e-15);
        assert!((g.active_measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_commensurate_rectangle_rejected() {
        let err = Grid::build(
            &Domain::Rectangle {
                lo: [0.0, 0.0],
                hi: [1.0, 0.77],
            },
            10,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Grid(_)));
    }

    #[test]
    fn disk_measure_close_to_pi() {
        let g = Grid::build(
            &Domain::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            64,
        )
        .unwrap();
        assert!(!g.is_full());
        let pi = std::f64::consts::PI;
        assert!(
            (g.active_measure() - pi).abs() < 0.05 * pi,
            "active measure {} vs pi",
            g.active_measure()
        );
        for c in g.centers() {
            assert!(c[0] * c[0] + c[1] * c[1] < 1.0);
        }
    }

    #[test]
    fn disk_measure_converges_linearly() {
        let pi = std::f64::consts::PI;
        let dom = Domain::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        let e32 = (Grid::build(&dom, 32).unwrap().active_measure() - pi).abs();
        let e128 = (Grid::build(&dom, 128).unwrap().active_measure() - pi).abs();
        // O(h) rate: quadrupling the resolution should cut the error by ~4,
        // allow a factor-2 margin for the irregular boundary count.
        assert!(e128 < e32 / 2.0, "e32 = {e32}, e128 = {e128}");
    }

    #[test]
    fn integrate_constants_and_linear() {
        let g = Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 4).unwrap();
        assert_eq!(g.integrate(&vec![0.0; 4]).unwrap(), 0.0);
        assert!((g.integrate(&vec![1.0; 4]).unwrap() - 1.0).abs() < 1e-15);
        // midpoint rule is exact for linear integrands
        let xs: Vec<f64> = g.centers().map(|c| c[0]).collect();
        assert!((g.integrate(&xs).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn integrate_rejects_length_mismatch() {
        let g = Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 4).unwrap();
        assert!(matches!(
            g.integrate(&[1.0, 2.0]),
            Err(Error::FieldLength { .. })
        ));
    }

    #[test]
    fn integrate_is_linear() {
        let g = Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 16).unwrap();
        let f: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let gfield: Vec<f64> = (0..16).map(|i| (i as f64 * 0.7).cos()).collect();
        let combo: Vec<f64> = f
            .iter()
            .zip(&gfield)
            .map(|(a, b)| 2.5 * a - 1.25 * b)
            .collect();
        let lhs = g.integrate(&combo).unwrap();
        let rhs = 2.5 * g.integrate(&f).unwrap() - 1.25 * g.integrate(&gfield).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn refinement_second_order_on_monomials() {
        // integrate x^2 on [0,1]: midpoint error is h^2/24 exactly
        let exact = 1.0 / 3.0;
        let dom = Domain::Interval { lo: 0.0, hi: 1.0 };
        let err_at = |n: usize| {
            let g = Grid::build(&dom, n).unwrap();
            let f: Vec<f64> = g.centers().map(|c| c[0] * c[0]).collect();
            (g.integrate(&f).unwrap() - exact).abs()
        };
        let e1 = err_at(20);
        let e2 = err_at(40);
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.2, "O(h^2) ratio was {ratio}");
    }

    #[test]
    fn degenerate_domains_rejected() {
        assert!(Grid::build(&Domain::Interval { lo: 1.0, hi: 1.0 }, 4).is_err());
        assert!(Grid::build(
            &Domain::Disk {
                center: [0.0, 0.0],
                radius: -2.0
            },
            4
        )
        .is_err());
        assert!(Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 1).is_err());
    }
}
