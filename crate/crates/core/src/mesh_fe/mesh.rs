//! Uniform quadrilateral mesh over a square box.
//!
//! Node `(i, j)` has global index `j * (nx + 1) + i`, cell `(ci, cj)` has
//! index `cj * nx + ci`. Cell-local nodes are ordered counter-clockwise
//! starting at the lower-left corner.

use crate::error::{Error, Result};
use crate::mesh_fe::Vec2;

/// Parameter perturbation used to pick the neighbor after a ray hits a cell edge or corner.
pub const RAY_NUDGE: f64 = 1e-12;

/// Relative tolerance under which a grid coordinate is snapped onto a grid line.
const SNAP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformQuadMesh {
    pub nx: usize,
    pub ny: usize,
    /// Lower-left corner of the box.
    pub origin: Vec2,
    /// Side length of the (square) box.
    pub extent: f64,
    /// Cell size, `extent / nx`.
    pub h: f64,
}

/// A point expressed as a cell index plus local coordinates in `[0, 1]^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellPoint {
    pub cell: usize,
    pub local: [f64; 2],
}

/// Result of intersecting a ray with the boundary of the cell that contains its origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayExit {
    /// Ray parameter (arc length for a unit direction) of the exit point.
    pub t: f64,
    pub point: Vec2,
    /// Cell entered after the exit point, `None` when the ray leaves the domain.
    pub next: Option<usize>,
}

impl UniformQuadMesh {
    /// Mesh of `(0, 1)^2` with `nx` cells per axis.
    pub fn unit_square(nx: usize) -> Result<Self> {
        Self::square(nx, Vec2::new(0.0, 0.0), 1.0)
    }

    /// Mesh of the square `[origin, origin + extent]^2` with `nx` cells per axis.
    pub fn square(nx: usize, origin: Vec2, extent: f64) -> Result<Self> {
        if nx < 2 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 2 cells per axis, got {nx}"
            )));
        }
        if !(extent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mesh extent must be positive, got {extent}"
            )));
        }
        Ok(Self {
            nx,
            ny: nx,
            origin,
            extent,
            h: extent / nx as f64,
        })
    }

    pub fn num_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % (self.nx + 1), node / (self.nx + 1))
    }

    #[inline]
    pub fn node_coords(&self, node: usize) -> Vec2 {
        let (i, j) = self.node_ij(node);
        Vec2::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    #[inline]
    pub fn cell_index(&self, ci: usize, cj: usize) -> usize {
        cj * self.nx + ci
    }

    #[inline]
    pub fn cell_ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    /// Global node indices of a cell, counter-clockwise from the lower-left corner.
    #[inline]
    pub fn cell_nodes(&self, cell: usize) -> [usize; 4] {
        let (ci, cj) = self.cell_ij(cell);
        let n0 = self.node_index(ci, cj);
        let n3 = self.node_index(ci, cj + 1);
        [n0, n0 + 1, n3 + 1, n3]
    }

    /// Lower-left corner of a cell.
    #[inline]
    pub fn cell_origin(&self, cell: usize) -> Vec2 {
        let (ci, cj) = self.cell_ij(cell);
        Vec2::new(
            self.origin.x + ci as f64 * self.h,
            self.origin.y + cj as f64 * self.h,
        )
    }

    #[inline]
    pub fn local_to_global(&self, cell: usize, local: [f64; 2]) -> Vec2 {
        self.cell_origin(cell) + Vec2::new(local[0], local[1]) * self.h
    }

    /// Whether `x` lies in the closed box.
    pub fn contains(&self, x: Vec2) -> bool {
        let tol = SNAP_TOL * self.extent.max(1.0);
        let hi = self.extent + tol;
        let dx = x.x - self.origin.x;
        let dy = x.y - self.origin.y;
        dx >= -tol && dx <= hi && dy >= -tol && dy <= hi
    }

    /// Grid coordinate along one axis, snapped onto grid lines within round-off.
    fn grid_coord(&self, offset: f64, n: usize) -> Option<(usize, f64)> {
        let mut s = offset / self.h;
        let r = s.round();
        if (s - r).abs() <= SNAP_TOL * r.abs().max(1.0) {
            s = r;
        }
        if s < 0.0 || s > n as f64 {
            return None;
        }
        let c = (s.floor() as usize).min(n - 1);
        Some((c, s - c as f64))
    }

    /// Cell containing `x` together with local coordinates.
    ///
    /// Points on a shared edge or vertex belong to the cell whose lower-left
    /// corner they are; points on the right/top boundary of the box belong to
    /// the last cell along that axis.
    pub fn locate_cell(&self, x: Vec2) -> Result<CellPoint> {
        let out = || Error::OutOfDomain { x: x.x, y: x.y };
        let (ci, lx) = self.grid_coord(x.x - self.origin.x, self.nx).ok_or_else(out)?;
        let (cj, ly) = self.grid_coord(x.y - self.origin.y, self.ny).ok_or_else(out)?;
        Ok(CellPoint {
            cell: self.cell_index(ci, cj),
            local: [lx, ly],
        })
    }

    /// Intersection of the ray `origin + t * dir` (t > 0) with the boundary of `cell`.
    ///
    /// `origin` must lie in the closed cell and `dir` should be a unit vector.
    /// Corner hits are resolved by advancing the parameter by [`RAY_NUDGE`]
    /// before looking up the neighbor.
    pub fn ray_exit(&self, cell: usize, origin: Vec2, dir: Vec2) -> RayExit {
        let lo = self.cell_origin(cell);
        let hi = lo + Vec2::new(self.h, self.h);
        let axis_t = |o: f64, d: f64, lo: f64, hi: f64| {
            if d > 0.0 {
                ((hi - o) / d).max(0.0)
            } else if d < 0.0 {
                ((lo - o) / d).max(0.0)
            } else {
                f64::INFINITY
            }
        };
        let tx = axis_t(origin.x, dir.x, lo.x, hi.x);
        let ty = axis_t(origin.y, dir.y, lo.y, hi.y);
        let t = tx.min(ty);
        let point = origin + dir * t;

        let probe = origin + dir * (t + RAY_NUDGE);
        let (ci, cj) = self.cell_ij(cell);
        let mut next = if self.contains(probe) {
            self.locate_cell(probe).ok().map(|cp| cp.cell)
        } else {
            None
        };
        if next == Some(cell) {
            // The nudge was swallowed by round-off: step across the hit edge(s).
            let scale = self.h * 1e-9;
            let step_x = if (tx - t).abs() <= scale { dir.x.signum() as isize } else { 0 };
            let step_y = if (ty - t).abs() <= scale { dir.y.signum() as isize } else { 0 };
            let ni = ci as isize + step_x;
            let nj = cj as isize + step_y;
            next = if ni < 0 || nj < 0 || ni >= self.nx as isize || nj >= self.ny as isize {
                None
            } else {
                Some(self.cell_index(ni as usize, nj as usize))
            };
        }
        RayExit { t, point, next }
    }

    /// Indices of the (up to 9) nodes coupled to `node` through shared cells.
    pub fn node_stencil(&self, node: usize) -> Vec<usize> {
        let (i, j) = self.node_ij(node);
        let mut out = Vec::with_capacity(9);
        for jj in j.saturating_sub(1)..=(j + 1).min(self.ny) {
            for ii in i.saturating_sub(1)..=(i + 1).min(self.nx) {
                out.push(self.node_index(ii, jj));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn build_mesh_sizes() {
        let m = UniformQuadMesh::unit_square(16).unwrap();
        assert_eq!(m.h, 0.0625);
        assert_eq!(m.num_nodes(), 289);
        let m = UniformQuadMesh::unit_square(128).unwrap();
        assert_eq!(m.h, 1.0 / 128.0);
        assert!(UniformQuadMesh::unit_square(1).is_err());
        assert!(UniformQuadMesh::unit_square(0).is_err());
    }

    #[test]
    fn interior_node_has_nine_point_stencil() {
        let m = UniformQuadMesh::unit_square(4).unwrap();
        assert_eq!(m.node_stencil(m.node_index(2, 2)).len(), 9);
        assert_eq!(m.node_stencil(m.node_index(0, 0)).len(), 4);
        assert_eq!(m.node_stencil(m.node_index(0, 2)).len(), 6);
    }

    #[test]
    fn locate_on_grid_lines() {
        let m = UniformQuadMesh::unit_square(2).unwrap();
        let cp = m.locate_cell(Vec2::new(0.5, 0.5)).unwrap();
        assert_eq!(cp.cell, m.cell_index(1, 1));
        assert_eq!(cp.local, [0.0, 0.0]);

        let m = UniformQuadMesh::unit_square(10).unwrap();
        let cp = m.locate_cell(Vec2::new(0.3, 0.7)).unwrap();
        assert_eq!(m.cell_ij(cp.cell), (3, 7));
        assert_abs_diff_eq!(cp.local[0], 0.0);
        assert_abs_diff_eq!(cp.local[1], 0.0);
    }

    #[test]
    fn locate_right_boundary_uses_last_cell() {
        let m = UniformQuadMesh::unit_square(4).unwrap();
        let cp = m.locate_cell(Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(m.cell_ij(cp.cell), (3, 3));
        assert_eq!(cp.local, [1.0, 1.0]);
    }

    #[test]
    fn locate_outside_is_error() {
        let m = UniformQuadMesh::unit_square(4).unwrap();
        assert!(matches!(
            m.locate_cell(Vec2::new(1.2, 0.5)),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(m.locate_cell(Vec2::new(0.5, -0.01)).is_err());
    }

    #[test]
    fn ray_exit_axis_aligned() {
        let m = UniformQuadMesh::unit_square(4).unwrap();
        let cell = m.cell_index(1, 1);
        let center = m.local_to_global(cell, [0.5, 0.5]);
        let ex = m.ray_exit(cell, center, Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(ex.t, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(ex.point.x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ex.point.y, 0.375, epsilon = 1e-15);
        assert_eq!(ex.next, Some(m.cell_index(2, 1)));

        let left = m.cell_index(0, 2);
        let c = m.local_to_global(left, [0.5, 0.5]);
        let ex = m.ray_exit(left, c, Vec2::new(-1.0, 0.0));
        assert_eq!(ex.next, None);
        assert_abs_diff_eq!(ex.point.x, 0.0, epsilon = 1e-15);
    }

    /// Brute force: smallest positive parameter over the four edge lines that
    /// lands on the closed edge segment.
    fn brute_force_exit(lo: Vec2, h: f64, o: Vec2, d: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for (axis, value) in [(0, lo.x), (0, lo.x + h), (1, lo.y), (1, lo.y + h)] {
            let (oc, dc) = if axis == 0 { (o.x, d.x) } else { (o.y, d.y) };
            if dc == 0.0 {
                continue;
            }
            let t = (value - oc) / dc;
            if t <= 1e-15 {
                continue;
            }
            let p = o + d * t;
            let other = if axis == 0 { p.y - lo.y } else { p.x - lo.x };
            if other >= -1e-12 && other <= h + 1e-12 {
                best = best.min(t);
            }
        }
        best
    }

    #[test]
    fn ray_exit_through_corner_is_deterministic() {
        let m = UniformQuadMesh::unit_square(4).unwrap();
        let cell = m.cell_index(1, 1);
        let o = m.local_to_global(cell, [0.25, 0.25]);
        let d = Vec2::new(1.0, 1.0).normalize();
        let ex = m.ray_exit(cell, o, d);
        let t_ref = brute_force_exit(m.cell_origin(cell), m.h, o, d);
        assert_abs_diff_eq!(ex.t, t_ref, epsilon = 1e-14);
        assert_eq!(ex.next, Some(m.cell_index(2, 2)));
        let again = m.ray_exit(cell, o, d);
        assert_eq!(ex, again);
    }

    proptest! {
        #[test]
        fn ray_exit_matches_brute_force(
            lx in 0.01f64..0.99, ly in 0.01f64..0.99, angle in 0.0f64..std::f64::consts::TAU
        ) {
            let m = UniformQuadMesh::unit_square(8).unwrap();
            let cell = m.cell_index(3, 5);
            let o = m.local_to_global(cell, [lx, ly]);
            let d = Vec2::new(angle.cos(), angle.sin());
            let ex = m.ray_exit(cell, o, d);
            let t_ref = brute_force_exit(m.cell_origin(cell), m.h, o, d);
            prop_assert!((ex.t - t_ref).abs() < 1e-12);
        }

        #[test]
        fn ray_chain_terminates(
            x in 0.0f64..1.0, y in 0.0f64..1.0, angle in 0.0f64..std::f64::consts::TAU
        ) {
            let m = UniformQuadMesh::unit_square(16).unwrap();
            let d = Vec2::new(angle.cos(), angle.sin());
            let mut p = Vec2::new(x, y);
            let mut cell = m.locate_cell(p).unwrap().cell;
            let mut steps = 0;
            loop {
                steps += 1;
                let ex = m.ray_exit(cell, p, d);
                match ex.next {
                    Some(c) => { cell = c; p = ex.point; }
                    None => break,
                }
                prop_assert!(steps <= m.nx + m.ny + 2);
            }
            prop_assert!(steps <= m.nx + m.ny + 2);
        }
    }
}
