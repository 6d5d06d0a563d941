//! Element-parallel assembly of the diffuse-domain operators.
//!
//! Element contributions are computed concurrently and scattered in cell
//! order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrapolation::{extension_weight, SKIP_THRESHOLD};
use crate::mesh_fe::{CellQuadrature, CsrMatrix, Vec2};
use crate::transport::geometry::{InterfaceGeometry, Projection, QpData};
use crate::transport::problem::{GhostKind, GhostPenaltyConfig, ProblemSpec};

type Local = [[f64; 4]; 4];

fn assemble_matrix(quad: &CellQuadrature, local: impl Fn(usize, &mut Local) + Sync) -> CsrMatrix {
    let mesh = quad.mesh;
    let locals: Vec<Local> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|cell| {
            let mut m = [[0.0; 4]; 4];
            local(cell, &mut m);
            m
        })
        .collect();
    let mut a = CsrMatrix::q1_pattern(&mesh);
    for (cell, m) in locals.iter().enumerate() {
        a.add_cell_matrix(&mesh, cell, m);
    }
    a
}

fn assemble_vector(
    quad: &CellQuadrature,
    local: impl Fn(usize, &mut [f64; 4]) -> Result<()> + Sync,
) -> Result<Vec<f64>> {
    let mesh = quad.mesh;
    let locals: Vec<[f64; 4]> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|cell| {
            let mut v = [0.0; 4];
            local(cell, &mut v).map(|_| v)
        })
        .collect::<Result<_>>()?;
    let mut b = vec![0.0; mesh.num_nodes()];
    for (cell, v) in locals.iter().enumerate() {
        for (a, node) in mesh.cell_nodes(cell).into_iter().enumerate() {
            b[node] += v[a];
        }
    }
    Ok(b)
}

/// `M_ij = int H phi_i phi_j`.
pub fn assemble_weighted_mass(geom: &InterfaceGeometry) -> CsrMatrix {
    let q = &geom.quad;
    let nq = q.per_cell();
    assemble_matrix(q, |cell, m| {
        for k in 0..nq {
            let d = &geom.qp[cell * nq + k];
            let w = d.weight * d.heaviside;
            let n = &q.values[k];
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += w * n[a] * n[b];
                }
            }
        }
    })
}

/// `K_ij = kappa int H grad phi_i . grad phi_j`.
pub fn assemble_stiffness(geom: &InterfaceGeometry, kappa: f64) -> CsrMatrix {
    let q = &geom.quad;
    let nq = q.per_cell();
    assemble_matrix(q, |cell, m| {
        for k in 0..nq {
            let d = &geom.qp[cell * nq + k];
            let w = kappa * d.weight * d.heaviside;
            let g = &q.grads[k];
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += w * g[a].dot(&g[b]);
                }
            }
        }
    })
}

/// `C_ij = -int H (grad phi_i . v) phi_j`.
pub fn assemble_advection(geom: &InterfaceGeometry, v: &(dyn Fn(Vec2) -> Vec2 + Sync)) -> CsrMatrix {
    let q = &geom.quad;
    let nq = q.per_cell();
    assemble_matrix(q, |cell, m| {
        for k in 0..nq {
            let d = &geom.qp[cell * nq + k];
            let w = d.weight * d.heaviside;
            let vel = v(d.x);
            let (g, n) = (&q.grads[k], &q.values[k]);
            for a in 0..4 {
                let ga = g[a].dot(&vel);
                for b in 0..4 {
                    m[a][b] -= w * ga * n[b];
                }
            }
        }
    })
}

/// Symmetric surrogate `R_ij = kappa/eps int phi_i phi_j delta |grad phi|` of the
/// part of the interface flux that depends on the solution, used to treat that
/// dependence implicitly. Zero unless the interface carries Dirichlet data.
pub fn assemble_flux_surrogate(geom: &InterfaceGeometry, problem: &ProblemSpec) -> Option<CsrMatrix> {
    if problem.kappa == 0.0 || problem.boundary.dirichlet.is_none() || problem.boundary.neumann.is_some() {
        return None;
    }
    let q = &geom.quad;
    let nq = q.per_cell();
    let c = problem.kappa / geom.kernels.eps;
    Some(assemble_matrix(q, |cell, m| {
        for k in 0..nq {
            let d = &geom.qp[cell * nq + k];
            let w = c * d.weight * d.delta * d.grad_norm;
            let n = &q.values[k];
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += w * n[a] * n[b];
                }
            }
        }
    }))
}

/// Standard Q1 mass matrix.
pub fn assemble_unweighted_mass(quad: &CellQuadrature) -> CsrMatrix {
    let nq = quad.per_cell();
    assemble_matrix(quad, |_, m| {
        for k in 0..nq {
            let n = &quad.values[k];
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += quad.weights[k] * n[a] * n[b];
                }
            }
        }
    })
}

/// Standard Q1 stiffness matrix.
pub fn assemble_unweighted_stiffness(quad: &CellQuadrature) -> CsrMatrix {
    let nq = quad.per_cell();
    assemble_matrix(quad, |_, m| {
        for k in 0..nq {
            let g = &quad.grads[k];
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += quad.weights[k] * g[a].dot(&g[b]);
                }
            }
        }
    })
}

/// Implicit part of the ghost penalty: `gamma M_0` (optionally lumped) for the
/// Dirichlet kind, `gamma K_0` for the Neumann kind.
pub fn assemble_penalty_matrix(quad: &CellQuadrature, cfg: &GhostPenaltyConfig) -> CsrMatrix {
    let mut p = match cfg.kind {
        GhostKind::Dirichlet => {
            let m = assemble_unweighted_mass(quad);
            if cfg.lumped_lhs {
                m.lumped()
            } else {
                m
            }
        }
        GhostKind::Neumann => assemble_unweighted_stiffness(quad),
    };
    p.scale(cfg.gamma);
    p
}

fn missing_projection(d: &QpData) -> Error {
    Error::InvalidArgument(format!(
        "no closest point cached at ({}, {}); rebuild the geometry with the required needs",
        d.x.x, d.x.y
    ))
}

/// Interface value, normal derivative and gradient reconstructed from `u`.
fn reconstruct(p: &Projection, problem: &ProblemSpec, u: &[f64], eps: f64, t: f64) -> (f64, f64, Vec2) {
    let bd = &problem.boundary;
    let value = match &bd.dirichlet {
        Some(f) => f(p.point, t),
        None => p.at_gamma.eval(u),
    };
    match &bd.neumann {
        Some(g) => {
            let dn = g(p.point, t);
            let grad = p.normal * dn + p.tangent() * p.tangential_derivative(u, eps);
            (value, dn, grad)
        }
        None => {
            let (dn, grad) = p.gradient_from_value(value, u, eps);
            (value, dn, grad)
        }
    }
}

/// Upwind value `u_hat` extended to the quadrature point, and `V_Q`.
fn upwind(p: &Projection, problem: &ProblemSpec, v: &(dyn Fn(Vec2) -> Vec2 + Send + Sync), u: &[f64], eps: f64, t: f64) -> (f64, f64) {
    let v_q = v(p.point).dot(&p.normal);
    let u_hat = match (&problem.boundary.dirichlet, v_q < 0.0) {
        (Some(f), true) => f(p.point, t),
        _ => p.at_gamma.eval(u),
    };
    let (_, grad) = p.gradient_from_value(u_hat, u, eps);
    (p.extend(u_hat, grad), v_q)
}

/// `G = F - kappa dn U - V U` at one quadrature point.
pub fn interface_flux_at(
    p: &Projection,
    d: &QpData,
    problem: &ProblemSpec,
    u: &[f64],
    eps: f64,
    t: f64,
    damp: bool,
) -> f64 {
    let mut flux = 0.0;
    if let Some(v) = &problem.inviscid {
        let (value, v_q) = upwind(p, problem, v.as_ref(), u, eps, t);
        flux = v_q * value;
    }
    let speed = problem.boundary.normal_speed(p.point, t);
    let (mut dn, mut value) = (0.0, 0.0);
    if problem.kappa != 0.0 || speed != 0.0 {
        let (v, n, grad) = reconstruct(p, problem, u, eps, t);
        dn = n;
        value = p.extend(v, grad);
    }
    let g = flux - problem.kappa * dn - speed * value;
    if damp {
        d.damping * g
    } else {
        g
    }
}

/// `b_i = -int phi_i G delta |grad phi|`.
pub fn assemble_interface_rhs(
    geom: &InterfaceGeometry,
    problem: &ProblemSpec,
    u: &[f64],
    t: f64,
    cfg: &GhostPenaltyConfig,
) -> Result<Vec<f64>> {
    let q = &geom.quad;
    let nq = q.per_cell();
    let eps = geom.kernels.eps;
    assemble_vector(q, |cell, out| {
        for k in 0..nq {
            let idx = cell * nq + k;
            let d = &geom.qp[idx];
            let s = d.delta * d.grad_norm;
            if s < SKIP_THRESHOLD {
                continue;
            }
            let p = geom.projection(idx).ok_or_else(|| missing_projection(d))?;
            let g = interface_flux_at(p, d, problem, u, eps, t, cfg.damp_flux);
            let w = -d.weight * s * g;
            for a in 0..4 {
                out[a] += w * q.values[k][a];
            }
        }
        Ok(())
    })
}

/// Explicit part of the ghost penalty, `gamma int phi_i u_Omega` or
/// `gamma int grad phi_i . g_Omega`, built from the lagged solution `u`.
pub fn assemble_ghost_rhs(
    geom: &InterfaceGeometry,
    problem: &ProblemSpec,
    u: &[f64],
    t: f64,
    cfg: &GhostPenaltyConfig,
) -> Result<Vec<f64>> {
    let q = &geom.quad;
    let nq = q.per_cell();
    let eps = geom.kernels.eps;
    let mesh = geom.mesh();
    if cfg.gamma == 0.0 {
        return Ok(vec![0.0; mesh.num_nodes()]);
    }
    assemble_vector(q, |cell, out| {
        let nodes = mesh.cell_nodes(cell);
        let uc = nodes.map(|n| u[n]);
        for k in 0..nq {
            let idx = cell * nq + k;
            let d = &geom.qp[idx];
            let we = extension_weight(&geom.kernels, d.phi, cfg.damped);
            let p = if we >= SKIP_THRESHOLD {
                Some(geom.projection(idx).ok_or_else(|| missing_projection(d))?)
            } else {
                None
            };
            let w = cfg.gamma * d.weight;
            match cfg.kind {
                GhostKind::Dirichlet => {
                    let uh: f64 = (0..4).map(|a| q.values[k][a] * uc[a]).sum();
                    let mut target = d.heaviside * uh;
                    if let Some(p) = p {
                        let ext = match &problem.inviscid {
                            Some(v) => upwind(p, problem, v.as_ref(), u, eps, t).0,
                            None => {
                                let (value, _, grad) = reconstruct(p, problem, u, eps, t);
                                p.extend(value, grad)
                            }
                        };
                        target += we * ext;
                    }
                    for a in 0..4 {
                        out[a] += w * q.values[k][a] * target;
                    }
                }
                GhostKind::Neumann => {
                    let mut gu = Vec2::zeros();
                    for a in 0..4 {
                        gu += q.grads[k][a] * uc[a];
                    }
                    let mut target = gu * d.heaviside;
                    if let Some(p) = p {
                        target += reconstruct(p, problem, u, eps, t).2 * we;
                    }
                    for a in 0..4 {
                        out[a] += w * q.grads[k][a].dot(&target);
                    }
                }
            }
        }
        Ok(())
    })
}

/// Fixed-point split of the ghost penalty: implicit matrix and lagged rhs.
pub fn assemble_ghost_penalty(
    geom: &InterfaceGeometry,
    problem: &ProblemSpec,
    u_lagged: &[f64],
    t: f64,
    cfg: &GhostPenaltyConfig,
) -> Result<(CsrMatrix, Vec<f64>)> {
    Ok((
        assemble_penalty_matrix(&geom.quad, cfg),
        assemble_ghost_rhs(geom, problem, u_lagged, t, cfg)?,
    ))
}
