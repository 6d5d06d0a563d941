//! Uniform Q1 discretization layer: mesh, fields, quadrature, sparse algebra, output.

pub mod field;
pub mod mesh;
pub mod quadrature;
pub mod sparse;
pub mod vtk;

pub use field::{shape_gradients, shape_values, FEField, VectorField};
pub use mesh::{CellPoint, RayExit, UniformQuadMesh};
pub use quadrature::QuadratureRule;
pub use sparse::{cg_solve, cg_solve_with_floor, CgSolution, CsrMatrix};

/// Points and vectors in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;

/// Shape data of a quadrature rule on a uniform mesh. Every cell is a
/// translate of the reference cell, so values and gradients are shared.
#[derive(Clone, Debug)]
pub struct CellQuadrature {
    pub mesh: UniformQuadMesh,
    pub rule: QuadratureRule,
    pub values: Vec<[f64; 4]>,
    pub grads: Vec<[Vec2; 4]>,
    /// Physical weights `w_k * h^2`.
    pub weights: Vec<f64>,
}

impl CellQuadrature {
    pub fn new(mesh: UniformQuadMesh, rule: QuadratureRule) -> Self {
        let values = rule.points.iter().map(|&p| shape_values(p)).collect();
        let grads = rule
            .points
            .iter()
            .map(|&p| shape_gradients(p, mesh.h))
            .collect();
        let area = mesh.h * mesh.h;
        let weights = rule.weights.iter().map(|w| w * area).collect();
        Self {
            mesh,
            rule,
            values,
            grads,
            weights,
        }
    }

    pub fn with_default_rule(mesh: UniformQuadMesh) -> Self {
        Self::new(mesh, QuadratureRule::default_rule())
    }

    /// Points per cell.
    #[inline]
    pub fn per_cell(&self) -> usize {
        self.rule.len()
    }

    /// Total number of quadrature points in the mesh.
    pub fn total_points(&self) -> usize {
        self.per_cell() * self.mesh.num_cells()
    }

    #[inline]
    pub fn point(&self, cell: usize, k: usize) -> Vec2 {
        self.mesh.local_to_global(cell, self.rule.points[k])
    }

    #[inline]
    pub fn cell_point(&self, cell: usize, k: usize) -> CellPoint {
        CellPoint {
            cell,
            local: self.rule.points[k],
        }
    }

    /// Integral of `f` over the whole mesh, accumulated cell by cell in index order.
    pub fn integrate(&self, f: impl Fn(CellPoint, Vec2) -> f64) -> f64 {
        let mut total = 0.0;
        for cell in 0..self.mesh.num_cells() {
            let mut cell_sum = 0.0;
            for k in 0..self.per_cell() {
                cell_sum += self.weights[k] * f(self.cell_point(cell, k), self.point(cell, k));
            }
            total += cell_sum;
        }
        total
    }
}
