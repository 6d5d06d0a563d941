//! Level set representations: closed-form signed distance functions and
//! finite element fields with an averaged gradient.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interface::kernels::RegularizedKernels;
use crate::mesh_fe::{CellPoint, CellQuadrature, FEField, VectorField, Vec2};

pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;

/// Default regularization of the averaged-gradient denominator.
pub const DEFAULT_SIGMA: f64 = 1e-3;

/// Closed-form level set, positive inside the physical domain.
#[derive(Clone)]
pub struct AnalyticLevelSet {
    phi: ScalarFn,
    grad: VectorFn,
}

impl fmt::Debug for AnalyticLevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AnalyticLevelSet")
    }
}

impl AnalyticLevelSet {
    pub fn new(phi: ScalarFn, grad: VectorFn) -> Self {
        Self { phi, grad }
    }

    /// Signed distance `r - |x - c|` of a disk (positive inside).
    pub fn circle(center: Vec2, radius: f64) -> Self {
        Self {
            phi: Arc::new(move |x: Vec2| radius - (x - center).norm()),
            grad: Arc::new(move |x: Vec2| {
                let d = x - center;
                let r = d.norm();
                if r > 0.0 {
                    -d / r
                } else {
                    Vec2::zeros()
                }
            }),
        }
    }

    /// Signed distance of the half plane `{(x - p) . n > 0}` for unit `n`.
    pub fn half_plane(point: Vec2, normal: Vec2) -> Self {
        let n = normal.normalize();
        Self {
            phi: Arc::new(move |x: Vec2| (x - point).dot(&n)),
            grad: Arc::new(move |_| n),
        }
    }

    #[inline]
    pub fn value(&self, x: Vec2) -> f64 {
        (self.phi)(x)
    }

    #[inline]
    pub fn gradient(&self, x: Vec2) -> Vec2 {
        (self.grad)(x)
    }
}

/// Nodal normalized gradient `q ~ grad(phi) / |grad(phi)|` computed with the
/// lumped-mass formula.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragedGradient {
    pub q: VectorField,
    pub sigma: f64,
}

/// Lumped-mass averaged gradient of an FE level set:
///
/// `q_j = int(grad(phi) N_j) / int(sqrt(|grad(phi)|^2 + sigma^2) N_j)`.
pub fn averaged_gradient(
    phi: &FEField,
    sigma: f64,
    quad: &CellQuadrature,
) -> Result<AveragedGradient> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gradient regularization must be positive, got {sigma}"
        )));
    }
    let mesh = phi.mesh;
    let n = mesh.num_nodes();
    let mut num_x = vec![0.0; n];
    let mut num_y = vec![0.0; n];
    let mut den = vec![0.0; n];
    for cell in 0..mesh.num_cells() {
        let nodes = mesh.cell_nodes(cell);
        for k in 0..quad.per_cell() {
            let g = phi.eval_grad_at(quad.cell_point(cell, k));
            let s = (g.norm_squared() + sigma * sigma).sqrt();
            let w = quad.weights[k];
            for (a, &node) in nodes.iter().enumerate() {
                let wn = w * quad.values[k][a];
                num_x[node] += wn * g.x;
                num_y[node] += wn * g.y;
                den[node] += wn * s;
            }
        }
    }
    for i in 0..n {
        num_x[i] /= den[i];
        num_y[i] /= den[i];
    }
    Ok(AveragedGradient {
        q: VectorField {
            x: FEField::from_values(mesh, num_x),
            y: FEField::from_values(mesh, num_y),
        },
        sigma,
    })
}

/// FE level set with its averaged gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLevelSet {
    pub phi: FEField,
    pub q: AveragedGradient,
}

impl DiscreteLevelSet {
    pub fn new(phi: FEField, sigma: f64, quad: &CellQuadrature) -> Result<Self> {
        let q = averaged_gradient(&phi, sigma, quad)?;
        Ok(Self { phi, q })
    }
}

/// A level set that is either known in closed form or carried as an FE field.
#[derive(Clone, Debug)]
pub enum LevelSetField {
    Analytic(AnalyticLevelSet),
    Discrete(DiscreteLevelSet),
}

impl LevelSetField {
    pub fn value(&self, x: Vec2) -> Result<f64> {
        match self {
            Self::Analytic(a) => Ok(a.value(x)),
            Self::Discrete(d) => d.phi.eval(x),
        }
    }

    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        match self {
            Self::Analytic(a) => Ok(a.gradient(x)),
            Self::Discrete(d) => d.phi.eval_grad(x),
        }
    }

    /// Value at a point already located in the mesh.
    #[inline]
    pub fn value_at(&self, cp: CellPoint, x: Vec2) -> f64 {
        match self {
            Self::Analytic(a) => a.value(x),
            Self::Discrete(d) => d.phi.eval_at(cp),
        }
    }

    #[inline]
    pub fn gradient_at(&self, cp: CellPoint, x: Vec2) -> Vec2 {
        match self {
            Self::Analytic(a) => a.gradient(x),
            Self::Discrete(d) => d.phi.eval_grad_at(cp),
        }
    }

    /// The global normal field `q`: the exact normalized gradient for
    /// analytic level sets, the interpolated averaged gradient otherwise.
    pub fn normal_field(&self, x: Vec2) -> Result<Vec2> {
        match self {
            Self::Analytic(a) => {
                let g = a.gradient(x);
                let n = g.norm();
                Ok(if n > 0.0 { g / n } else { Vec2::zeros() })
            }
            Self::Discrete(d) => d.q.q.eval(x),
        }
    }

    #[inline]
    pub fn normal_field_at(&self, cp: CellPoint, x: Vec2) -> Vec2 {
        match self {
            Self::Analytic(a) => {
                let g = a.gradient(x);
                let n = g.norm();
                if n > 0.0 {
                    g / n
                } else {
                    Vec2::zeros()
                }
            }
            Self::Discrete(d) => d.q.q.eval_at(cp),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::Discrete(_))
    }

    /// Nodal values on the mesh of `quad` (the interpolant for analytic level sets).
    pub fn nodal_values(&self, quad: &CellQuadrature) -> FEField {
        match self {
            Self::Analytic(a) => FEField::interpolate(quad.mesh, |x| a.value(x)),
            Self::Discrete(d) => d.phi.clone(),
        }
    }
}

/// Diffuse interface length `int delta(phi) |grad(phi)| dx`.
pub fn interface_measure(
    ls: &LevelSetField,
    kernels: &RegularizedKernels,
    quad: &CellQuadrature,
) -> f64 {
    quad.integrate(|cp, x| kernels.delta(ls.value_at(cp, x)) * ls.gradient_at(cp, x).norm())
}
