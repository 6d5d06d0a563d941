//! Boundary data and finite-difference reconstruction of derivatives at the
//! closest point.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extrapolation::closest_point::ClosestPoint;
use crate::mesh_fe::{FEField, Vec2};

/// Space-time scalar function `f(x, t)`.
pub type TimeScalarFn = Arc<dyn Fn(Vec2, f64) -> f64 + Send + Sync>;

/// Interface data. `dirichlet` is defined on the whole domain and evaluated at
/// the discrete closest point.
#[derive(Clone, Default)]
pub struct BoundaryData {
    pub dirichlet: Option<TimeScalarFn>,
    pub neumann: Option<TimeScalarFn>,
    pub normal_velocity: Option<TimeScalarFn>,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData")
            .field("dirichlet", &self.dirichlet.is_some())
            .field("neumann", &self.neumann.is_some())
            .field("normal_velocity", &self.normal_velocity.is_some())
            .finish()
    }
}

impl BoundaryData {
    pub fn dirichlet(f: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dirichlet: Some(Arc::new(f)),
            ..Self::default()
        }
    }

    pub fn neumann(f: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            neumann: Some(Arc::new(f)),
            ..Self::default()
        }
    }

    pub fn with_dirichlet(mut self, f: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dirichlet = Some(Arc::new(f));
        self
    }

    pub fn with_normal_velocity(
        mut self,
        f: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.normal_velocity = Some(Arc::new(f));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dirichlet.is_none() && self.neumann.is_none() {
            return Err(Error::InvalidArgument(
                "boundary data needs a Dirichlet or a Neumann function".into(),
            ));
        }
        Ok(())
    }

    /// `u_Gamma(x, t)`.
    pub fn value(&self, x: Vec2, t: f64) -> Result<f64> {
        self.dirichlet
            .as_ref()
            .map(|f| f(x, t))
            .ok_or_else(|| Error::InvalidArgument("no Dirichlet data".into()))
    }

    /// Normal interface speed, zero for fixed interfaces.
    pub fn normal_speed(&self, x: Vec2, t: f64) -> f64 {
        self.normal_velocity.as_ref().map_or(0.0, |f| f(x, t))
    }
}

/// Three-point tangential stencil through the shifted point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil2D {
    /// `[x_P - eps/2 tau, x_P, x_P + eps/2 tau]`
    pub points: [Vec2; 3],
    pub tangent: Vec2,
}

impl Stencil2D {
    pub fn new(cp: &ClosestPoint, eps: f64) -> Self {
        let tangent = cp.tangent();
        let d = tangent * (0.5 * eps);
        Self {
            points: [cp.shifted - d, cp.shifted, cp.shifted + d],
            tangent,
        }
    }
}

/// Cartesian gradient at the closest point together with its components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructedGradient {
    pub gradient: Vec2,
    pub normal_derivative: f64,
    pub tangential_derivative: f64,
    /// A stencil point left the mesh and a one-sided difference was used.
    pub one_sided: bool,
}

/// `(u_Gamma(x_Gamma) - u_h(x_P)) / eps`, or the Neumann data when present.
pub fn reconstruct_normal_derivative(
    cp: &ClosestPoint,
    bd: &BoundaryData,
    u_h: &FEField,
    eps: f64,
    t: f64,
) -> Result<f64> {
    if let Some(g) = &bd.neumann {
        return Ok(g(cp.point, t));
    }
    let u_p = u_h.eval(cp.shifted)?;
    Ok((bd.value(cp.point, t)? - u_p) / eps)
}

/// Gradient from the reconstructed normal derivative and the tangential
/// stencil difference.
pub fn reconstruct_gradient(
    cp: &ClosestPoint,
    bd: &BoundaryData,
    u_h: &FEField,
    eps: f64,
    t: f64,
) -> Result<ReconstructedGradient> {
    let dn = reconstruct_normal_derivative(cp, bd, u_h, eps, t)?;
    gradient_with_normal_derivative(cp, dn, u_h, eps)
}

/// Combine a given normal derivative with the stencil tangential derivative.
pub fn gradient_with_normal_derivative(
    cp: &ClosestPoint,
    normal_derivative: f64,
    u_h: &FEField,
    eps: f64,
) -> Result<ReconstructedGradient> {
    let st = Stencil2D::new(cp, eps);
    let minus = u_h.eval(st.points[0]).ok();
    let plus = u_h.eval(st.points[2]).ok();
    let (dt, one_sided) = match (minus, plus) {
        (Some(m), Some(p)) => ((p - m) / eps, false),
        (Some(m), None) => ((u_h.eval(st.points[1])? - m) / (0.5 * eps), true),
        (None, Some(p)) => ((p - u_h.eval(st.points[1])?) / (0.5 * eps), true),
        (None, None) => {
            let x = st.points[1];
            return Err(Error::OutOfDomain { x: x.x, y: x.y });
        }
    };
    Ok(ReconstructedGradient {
        gradient: cp.normal * normal_derivative + st.tangent * dt,
        normal_derivative,
        tangential_derivative: dt,
        one_sided,
    })
}
