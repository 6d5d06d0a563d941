//! Per-quadrature-point interface data, computed once per level-set state.
//!
//! Closest points are only searched where they can contribute: where the
//! surface weight `delta |grad phi|` or the ghost extension weight exceeds the
//! skip threshold. Interpolation weights of the points used by the
//! reconstruction are stored so repeated extrapolation is a handful of
//! multiply-adds.

use rayon::prelude::*;

use crate::error::Result;
use crate::extrapolation::{
    extension_weight, ClosestPoint, ClosestPointSearch, SearchMethod, SKIP_THRESHOLD,
};
use crate::interface::{LevelSetField, RegularizedKernels};
use crate::mesh_fe::{shape_values, CellQuadrature, FEField, UniformQuadMesh, Vec2};

/// Bilinear interpolation weights of one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointEval {
    pub nodes: [u32; 4],
    pub weights: [f64; 4],
}

impl PointEval {
    pub fn locate(mesh: &UniformQuadMesh, x: Vec2) -> Result<Self> {
        let cp = mesh.locate_cell(x)?;
        let nodes = mesh.cell_nodes(cp.cell).map(|n| n as u32);
        Ok(Self {
            nodes,
            weights: shape_values(cp.local),
        })
    }

    #[inline]
    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            s += self.weights[a] * u[self.nodes[a] as usize];
        }
        s
    }
}

/// A closest point with the interpolation data of its reconstruction stencil.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub point: Vec2,
    pub normal: Vec2,
    /// `x_Q - x_Gamma`
    pub offset: Vec2,
    pub at_gamma: PointEval,
    pub at_shifted: PointEval,
    pub minus: Option<PointEval>,
    pub plus: Option<PointEval>,
}

impl Projection {
    fn new(mesh: &UniformQuadMesh, cp: &ClosestPoint, eps: f64) -> Result<Self> {
        let tau = cp.tangent() * (0.5 * eps);
        Ok(Self {
            point: cp.point,
            normal: cp.normal,
            offset: cp.query - cp.point,
            at_gamma: PointEval::locate(mesh, cp.point)?,
            at_shifted: PointEval::locate(mesh, cp.shifted)?,
            minus: PointEval::locate(mesh, cp.shifted - tau).ok(),
            plus: PointEval::locate(mesh, cp.shifted + tau).ok(),
        })
    }

    #[inline]
    pub fn tangent(&self) -> Vec2 {
        Vec2::new(-self.normal.y, self.normal.x)
    }

    /// Tangential stencil difference, one-sided next to the domain boundary.
    #[inline]
    pub fn tangential_derivative(&self, u: &[f64], eps: f64) -> f64 {
        match (&self.minus, &self.plus) {
            (Some(m), Some(p)) => (p.eval(u) - m.eval(u)) / eps,
            (Some(m), None) => (self.at_shifted.eval(u) - m.eval(u)) / (0.5 * eps),
            (None, Some(p)) => (p.eval(u) - self.at_shifted.eval(u)) / (0.5 * eps),
            (None, None) => 0.0,
        }
    }

    /// Gradient at `x_Gamma` whose normal part is `(value - u(x_P)) / eps`.
    #[inline]
    pub fn gradient_from_value(&self, value: f64, u: &[f64], eps: f64) -> (f64, Vec2) {
        let dn = (value - self.at_shifted.eval(u)) / eps;
        let grad = self.normal * dn + self.tangent() * self.tangential_derivative(u, eps);
        (dn, grad)
    }

    /// Linear extension from `x_Gamma` to the quadrature point.
    #[inline]
    pub fn extend(&self, value: f64, grad: Vec2) -> f64 {
        value + grad.dot(&self.offset)
    }
}

/// Level-set and kernel values at one quadrature point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QpData {
    pub x: Vec2,
    /// Quadrature weight including the cell area.
    pub weight: f64,
    pub phi: f64,
    pub grad_norm: f64,
    pub heaviside: f64,
    pub delta: f64,
    pub damping: f64,
}

/// Which closest points to search for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeometryNeeds {
    /// Points carrying surface weight (interface flux).
    pub flux: bool,
    /// Points carrying ghost extension weight; the flag selects the damped weight.
    pub ghost: Option<bool>,
}

/// Cached interface geometry for one level-set state.
#[derive(Clone, Debug)]
pub struct InterfaceGeometry {
    pub quad: CellQuadrature,
    pub kernels: RegularizedKernels,
    pub qp: Vec<QpData>,
    proj_index: Vec<u32>,
    projections: Vec<Projection>,
}

const NO_PROJECTION: u32 = u32::MAX;

impl InterfaceGeometry {
    pub fn build(
        quad: &CellQuadrature,
        ls: &LevelSetField,
        kernels: RegularizedKernels,
        needs: GeometryNeeds,
        method: SearchMethod,
    ) -> Result<Self> {
        let mesh = quad.mesh;
        let nq = quad.per_cell();
        let qp: Vec<QpData> = (0..mesh.num_cells())
            .into_par_iter()
            .flat_map_iter(|cell| {
                (0..nq).map(move |k| {
                    let (cp, x) = (quad.cell_point(cell, k), quad.point(cell, k));
                    let phi = ls.value_at(cp, x);
                    QpData {
                        x,
                        weight: quad.weights[k],
                        phi,
                        grad_norm: ls.gradient_at(cp, x).norm(),
                        heaviside: kernels.heaviside(phi),
                        delta: kernels.delta(phi),
                        damping: kernels.damping(phi),
                    }
                })
            })
            .collect();

        let wanted = |d: &QpData| {
            (needs.flux && d.delta * d.grad_norm >= SKIP_THRESHOLD)
                || needs
                    .ghost
                    .is_some_and(|damped| extension_weight(&kernels, d.phi, damped) >= SKIP_THRESHOLD)
        };
        let search = ClosestPointSearch::new(&quad.mesh, ls, kernels.eps);
        let found: Vec<Option<Projection>> = qp
            .par_iter()
            .map(|d| {
                if !wanted(d) {
                    return Ok(None);
                }
                let cp = search.project(d.x, method)?;
                Projection::new(&mesh, &cp, kernels.eps).map(Some)
            })
            .collect::<Result<_>>()?;

        let mut proj_index = vec![NO_PROJECTION; qp.len()];
        let mut projections = Vec::new();
        for (i, p) in found.into_iter().enumerate() {
            if let Some(p) = p {
                proj_index[i] = projections.len() as u32;
                projections.push(p);
            }
        }
        Ok(Self {
            quad: quad.clone(),
            kernels,
            qp,
            proj_index,
            projections,
        })
    }

    #[inline]
    pub fn mesh(&self) -> &UniformQuadMesh {
        &self.quad.mesh
    }

    #[inline]
    pub fn per_cell(&self) -> usize {
        self.quad.per_cell()
    }

    #[inline]
    pub fn projection(&self, index: usize) -> Option<&Projection> {
        match self.proj_index[index] {
            NO_PROJECTION => None,
            i => Some(&self.projections[i as usize]),
        }
    }

    pub fn num_projections(&self) -> usize {
        self.projections.len()
    }

    /// `int H dx`.
    pub fn weighted_area(&self) -> f64 {
        self.qp.iter().map(|d| d.weight * d.heaviside).sum()
    }

    /// `int delta |grad phi| dx`.
    pub fn interface_length(&self) -> f64 {
        self.qp.iter().map(|d| d.weight * d.delta * d.grad_norm).sum()
    }

    /// FE value and gradient at quadrature point `k` of `cell`.
    #[inline]
    pub fn eval_at(&self, u: &FEField, cell: usize, k: usize) -> (f64, Vec2) {
        let nodes = self.mesh().cell_nodes(cell);
        let mut v = 0.0;
        let mut g = Vec2::zeros();
        for a in 0..4 {
            let ua = u.values[nodes[a]];
            v += self.quad.values[k][a] * ua;
            g += self.quad.grads[k][a] * ua;
        }
        (v, g)
    }
}
