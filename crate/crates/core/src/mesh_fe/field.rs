//! Q1 shape functions and nodal finite element fields.

use crate::error::Result;
use crate::mesh_fe::mesh::{CellPoint, UniformQuadMesh};
use crate::mesh_fe::Vec2;

/// Bilinear shape function values at local coordinates, counter-clockwise node order.
#[inline]
pub fn shape_values(local: [f64; 2]) -> [f64; 4] {
    let [s, t] = local;
    [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t]
}

/// Physical gradients of the four shape functions on a cell of size `h`.
#[inline]
pub fn shape_gradients(local: [f64; 2], h: f64) -> [Vec2; 4] {
    let [s, t] = local;
    let inv = 1.0 / h;
    [
        Vec2::new(-(1.0 - t), -(1.0 - s)) * inv,
        Vec2::new(1.0 - t, -s) * inv,
        Vec2::new(t, s) * inv,
        Vec2::new(-t, 1.0 - s) * inv,
    ]
}

/// A scalar field in the Q1 space: one coefficient per mesh node.
#[derive(Clone, Debug, PartialEq)]
pub struct FEField {
    pub mesh: UniformQuadMesh,
    pub values: Vec<f64>,
}

impl FEField {
    pub fn zeros(mesh: UniformQuadMesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.num_nodes()],
        }
    }

    pub fn constant(mesh: UniformQuadMesh, c: f64) -> Self {
        Self {
            mesh,
            values: vec![c; mesh.num_nodes()],
        }
    }

    pub fn from_values(mesh: UniformQuadMesh, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), mesh.num_nodes(), "coefficient count mismatch");
        Self { mesh, values }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: UniformQuadMesh, f: impl Fn(Vec2) -> f64) -> Self {
        let values = (0..mesh.num_nodes())
            .map(|n| f(mesh.node_coords(n)))
            .collect();
        Self { mesh, values }
    }

    #[inline]
    pub fn cell_values(&self, cell: usize) -> [f64; 4] {
        let n = self.mesh.cell_nodes(cell);
        [
            self.values[n[0]],
            self.values[n[1]],
            self.values[n[2]],
            self.values[n[3]],
        ]
    }

    #[inline]
    pub fn eval_at(&self, cp: CellPoint) -> f64 {
        let v = self.cell_values(cp.cell);
        let n = shape_values(cp.local);
        v[0] * n[0] + v[1] * n[1] + v[2] * n[2] + v[3] * n[3]
    }

    #[inline]
    pub fn eval_grad_at(&self, cp: CellPoint) -> Vec2 {
        let v = self.cell_values(cp.cell);
        let g = shape_gradients(cp.local, self.mesh.h);
        g[0] * v[0] + g[1] * v[1] + g[2] * v[2] + g[3] * v[3]
    }

    pub fn eval(&self, x: Vec2) -> Result<f64> {
        Ok(self.eval_at(self.mesh.locate_cell(x)?))
    }

    /// Gradient at `x`; on cell edges the cell chosen by
    /// [`UniformQuadMesh::locate_cell`] decides the one-sided value.
    pub fn eval_grad(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.eval_grad_at(self.mesh.locate_cell(x)?))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// A two-component nodal field, stored as separate component arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: FEField,
    pub y: FEField,
}

impl VectorField {
    pub fn mesh(&self) -> &UniformQuadMesh {
        &self.x.mesh
    }

    #[inline]
    pub fn eval_at(&self, cp: CellPoint) -> Vec2 {
        Vec2::new(self.x.eval_at(cp), self.y.eval_at(cp))
    }

    pub fn eval(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.eval_at(self.x.mesh.locate_cell(x)?))
    }

    pub fn node(&self, i: usize) -> Vec2 {
        Vec2::new(self.x.values[i], self.y.values[i])
    }
}
