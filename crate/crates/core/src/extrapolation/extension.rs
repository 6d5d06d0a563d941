//! Extension of interface data to quadrature points off the interface.

use crate::error::Result;
use crate::extrapolation::closest_point::ClosestPoint;
use crate::extrapolation::reconstruct::{
    gradient_with_normal_derivative, reconstruct_gradient, BoundaryData,
};
use crate::mesh_fe::{FEField, Vec2};

/// Constant extension of the normal derivative.
#[inline]
pub fn extend_normal_derivative(_cp: &ClosestPoint, dn_at_gamma: f64) -> f64 {
    dn_at_gamma
}

/// `U(x_Q) = u(x_Gamma) + grad U(x_Gamma) . (x_Q - x_Gamma)`.
#[inline]
pub fn extend_value_linear(cp: &ClosestPoint, value_at_gamma: f64, grad_at_gamma: Vec2) -> f64 {
    value_at_gamma + grad_at_gamma.dot(&(cp.query - cp.point))
}

/// `v_h(x_Q) = -V(x_Gamma) q(x_Q)`.
#[inline]
pub fn extension_velocity(speed_at_gamma: f64, q_at_query: Vec2) -> Vec2 {
    -q_at_query * speed_at_gamma
}

/// Extended quantities entering the interface flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtensionEvaluation {
    /// `U`
    pub value: f64,
    /// `dn U`
    pub normal_derivative: f64,
    /// `F`, the inviscid normal flux.
    pub flux: f64,
    /// `V`, the interface normal speed.
    pub normal_speed: f64,
    /// `G = F - kappa dn U - V U`.
    pub g: f64,
}

/// Upwinded inviscid flux at a quadrature point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpwindFlux {
    /// `V_Q = v(x_Gamma) . n_Gamma`
    pub normal_velocity: f64,
    /// Linearly extended upwind value.
    pub value: f64,
    pub flux: f64,
    pub inflow: bool,
}

/// Upwind value `u_Gamma` on inflow (`V_Q < 0`) or `u_h(x_Gamma)` otherwise,
/// extended linearly with a gradient whose normal part is
/// `(u_hat - u_h(x_P)) / eps`.
pub fn upwind_inviscid_extension(
    cp: &ClosestPoint,
    bd: &BoundaryData,
    u_h: &FEField,
    velocity: &dyn Fn(Vec2) -> Vec2,
    eps: f64,
    t: f64,
) -> Result<UpwindFlux> {
    let v_q = velocity(cp.point).dot(&cp.normal);
    let inflow = v_q < 0.0;
    let u_hat = if inflow {
        bd.value(cp.point, t)?
    } else {
        u_h.eval(cp.point)?
    };
    let dn = (u_hat - u_h.eval(cp.shifted)?) / eps;
    let grad = gradient_with_normal_derivative(cp, dn, u_h, eps)?.gradient;
    let value = extend_value_linear(cp, u_hat, grad);
    Ok(UpwindFlux {
        normal_velocity: v_q,
        value,
        flux: v_q * value,
        inflow,
    })
}

/// Physical parameters of the interface flux.
#[derive(Clone, Copy)]
pub struct FluxParams<'a> {
    pub kappa: f64,
    pub inviscid: Option<&'a (dyn Fn(Vec2) -> Vec2 + Sync)>,
    pub eps: f64,
    pub t: f64,
    /// `D_eps(phi(x_Q))` when the narrow-band damping is active.
    pub damping: Option<f64>,
}

/// `G = F - kappa dn U - V U` at the query point of `cp`.
pub fn interface_flux_g(
    cp: &ClosestPoint,
    bd: &BoundaryData,
    u_h: &FEField,
    params: &FluxParams,
) -> Result<ExtensionEvaluation> {
    let flux = match params.inviscid {
        Some(v) => upwind_inviscid_extension(cp, bd, u_h, v, params.eps, params.t)?.flux,
        None => 0.0,
    };
    let speed = bd.normal_speed(cp.point, params.t);
    let (mut dn, mut value) = (0.0, 0.0);
    if params.kappa != 0.0 || speed != 0.0 {
        let g = reconstruct_gradient(cp, bd, u_h, params.eps, params.t)?;
        dn = extend_normal_derivative(cp, g.normal_derivative);
        if speed != 0.0 {
            value = extend_value_linear(cp, bd.value(cp.point, params.t)?, g.gradient);
        }
    }
    let d = params.damping.unwrap_or(1.0);
    let (flux, dn, value) = (d * flux, d * dn, d * value);
    Ok(ExtensionEvaluation {
        value,
        normal_derivative: dn,
        flux,
        normal_speed: speed,
        g: flux - params.kappa * dn - speed * value,
    })
}
