//! Ghost-penalty target fields that blend the FE solution with its
//! extension across the interface.

use crate::error::Result;
use crate::extrapolation::closest_point::{ClosestPointSearch, SearchMethod};
use crate::extrapolation::extension::extend_value_linear;
use crate::extrapolation::reconstruct::{reconstruct_gradient, BoundaryData};
use crate::interface::RegularizedKernels;
use crate::mesh_fe::{FEField, Vec2};

/// Extension weights below this are dropped.
pub const SKIP_THRESHOLD: f64 = 1e-12;

/// Weight `(1 - H) [D]` of the extension at level-set value `phi`.
#[inline]
pub fn extension_weight(kernels: &RegularizedKernels, phi: f64, damped: bool) -> f64 {
    let w = kernels.heaviside_complement(phi);
    if damped {
        w * kernels.damping(phi)
    } else {
        w
    }
}

/// `u_Omega = H u_h + (1 - H) [D] U`; the extension is only evaluated when its
/// weight exceeds the skip threshold.
pub fn dirichlet_ghost_value(
    kernels: &RegularizedKernels,
    phi: f64,
    u_h: f64,
    damped: bool,
    extension: impl FnOnce() -> Result<f64>,
) -> Result<f64> {
    let base = kernels.heaviside(phi) * u_h;
    let w = extension_weight(kernels, phi, damped);
    if w < SKIP_THRESHOLD {
        return Ok(base);
    }
    Ok(base + w * extension()?)
}

/// `g_Omega = H grad u_h + (1 - H) [D] grad U(x_Gamma)`.
pub fn neumann_ghost_gradient(
    kernels: &RegularizedKernels,
    phi: f64,
    grad_u_h: Vec2,
    damped: bool,
    extension: impl FnOnce() -> Result<Vec2>,
) -> Result<Vec2> {
    let base = grad_u_h * kernels.heaviside(phi);
    let w = extension_weight(kernels, phi, damped);
    if w < SKIP_THRESHOLD {
        return Ok(base);
    }
    Ok(base + extension()? * w)
}

/// Pointwise evaluator of the Dirichlet-type ghost field.
pub struct DirichletGhostField<'a> {
    pub search: ClosestPointSearch<'a>,
    pub boundary: &'a BoundaryData,
    pub u_h: &'a FEField,
    pub kernels: RegularizedKernels,
    pub damped: bool,
    pub method: SearchMethod,
    pub t: f64,
}

impl DirichletGhostField<'_> {
    pub fn eval(&self, x: Vec2) -> Result<f64> {
        let phi = self.search.ls.value(x)?;
        let u = self.u_h.eval(x)?;
        dirichlet_ghost_value(&self.kernels, phi, u, self.damped, || {
            let cp = self.search.project(x, self.method)?;
            let g = reconstruct_gradient(&cp, self.boundary, self.u_h, self.kernels.eps, self.t)?;
            Ok(extend_value_linear(&cp, self.boundary.value(cp.point, self.t)?, g.gradient))
        })
    }
}

/// Pointwise evaluator of the Neumann-type ghost field.
pub struct NeumannGhostField<'a> {
    pub search: ClosestPointSearch<'a>,
    pub boundary: &'a BoundaryData,
    pub u_h: &'a FEField,
    pub kernels: RegularizedKernels,
    pub damped: bool,
    pub method: SearchMethod,
    pub t: f64,
}

impl NeumannGhostField<'_> {
    pub fn eval(&self, x: Vec2) -> Result<Vec2> {
        let phi = self.search.ls.value(x)?;
        let grad = self.u_h.eval_grad(x)?;
        neumann_ghost_gradient(&self.kernels, phi, grad, self.damped, || {
            let cp = self.search.project(x, self.method)?;
            Ok(reconstruct_gradient(&cp, self.boundary, self.u_h, self.kernels.eps, self.t)?.gradient)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::{AnalyticLevelSet, LevelSetField};
    use crate::mesh_fe::UniformQuadMesh;
    use approx::assert_abs_diff_eq;

    struct Setup {
        mesh: UniformQuadMesh,
        ls: LevelSetField,
        kernels: RegularizedKernels,
    }

    fn setup() -> Setup {
        let mesh = UniformQuadMesh::unit_square(64).unwrap();
        Setup {
            mesh,
            ls: LevelSetField::Analytic(AnalyticLevelSet::circle(Vec2::new(0.5, 0.5), 0.25)),
            kernels: RegularizedKernels::for_mesh(mesh.h, 2.0).unwrap(),
        }
    }

    fn lin(x: Vec2) -> f64 {
        1.0 + 0.5 * x.x - 2.0 * x.y
    }

    #[test]
    fn dirichlet_field_cases() {
        let s = setup();
        let eps = s.kernels.eps;
        let bd = BoundaryData::dirichlet(|x, _| lin(x));
        let u_h = FEField::interpolate(s.mesh, lin);
        let make = |damped| DirichletGhostField {
            search: ClosestPointSearch::new(&s.mesh, &s.ls, eps),
            boundary: &bd,
            u_h: &u_h,
            kernels: s.kernels,
            damped,
            method: SearchMethod::Traversal,
            t: 0.0,
        };
        let full = make(false);
        // deep inside
        let x_in = Vec2::new(0.5, 0.6);
        assert_abs_diff_eq!(full.eval(x_in).unwrap(), u_h.eval(x_in).unwrap(), epsilon = 1e-12);
        // far outside: linear exactness
        let x_out = Vec2::new(0.5, 0.25 - 5.0 * eps);
        let x_out = Vec2::new(x_out.x + 0.01, x_out.y);
        assert_abs_diff_eq!(full.eval(x_out).unwrap(), lin(x_out), epsilon = 1e-9);
        // damped at phi = -5 eps
        let x5 = Vec2::new(0.75 + 5.0 * eps, 0.5);
        let damped = make(true);
        let phi = s.ls.value(x5).unwrap();
        let base = s.kernels.heaviside(phi) * u_h.eval(x5).unwrap();
        let bound = s.kernels.damping(phi) * lin(x5).abs() + 1e-15;
        assert!((damped.eval(x5).unwrap() - base).abs() <= bound);
        assert!(s.kernels.damping(phi) < 1e-3);
    }

    #[test]
    fn neumann_field_cases() {
        let s = setup();
        let eps = s.kernels.eps;
        let bd = BoundaryData::dirichlet(|x, _| lin(x));
        let u_h = FEField::interpolate(s.mesh, lin);
        let make = |damped| NeumannGhostField {
            search: ClosestPointSearch::new(&s.mesh, &s.ls, eps),
            boundary: &bd,
            u_h: &u_h,
            kernels: s.kernels,
            damped,
            method: SearchMethod::Traversal,
            t: 0.0,
        };
        let full = make(false);
        let exact = Vec2::new(0.5, -2.0);
        let g = full.eval(Vec2::new(0.5, 0.55)).unwrap();
        assert!((g - exact).norm() < 1e-12);
        let g = full.eval(Vec2::new(0.93, 0.47)).unwrap();
        assert!((g - exact).norm() < 1e-9);
        let x5 = Vec2::new(0.75 + 5.0 * eps, 0.5);
        let phi = s.ls.value(x5).unwrap();
        let base = exact * s.kernels.heaviside(phi);
        let g = make(true).eval(x5).unwrap();
        assert!((g - base).norm() <= s.kernels.damping(phi) * exact.norm() + 1e-12);
    }

    #[test]
    fn penalty_integrand_vanishes_inside() {
        let s = setup();
        let bd = BoundaryData::dirichlet(|_, _| 0.0);
        let u_h = FEField::interpolate(s.mesh, |x| (3.0 * x.x).sin() + x.y);
        let field = DirichletGhostField {
            search: ClosestPointSearch::new(&s.mesh, &s.ls, s.kernels.eps),
            boundary: &bd,
            u_h: &u_h,
            kernels: s.kernels,
            damped: false,
            method: SearchMethod::Traversal,
            t: 0.0,
        };
        let gamma = 1.0 / s.mesh.h;
        let scale = u_h.max_abs();
        for i in 0..40 {
            let a = i as f64 * 0.157;
            let r = 0.25 - 6.0 * s.kernels.eps - 0.002 * (i % 5) as f64;
            let x = Vec2::new(0.5 + r * a.cos(), 0.5 + r * a.sin());
            let d = gamma * (u_h.eval(x).unwrap() - field.eval(x).unwrap());
            assert!(d.abs() <= 1e-10 * scale, "{d}");
        }
    }

    #[test]
    fn extension_skipped_below_threshold() {
        let k = RegularizedKernels::new(0.01, 2.0).unwrap();
        let v = dirichlet_ghost_value(&k, 1.0, 2.0, false, || panic!("should skip")).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-15);
        assert_eq!(extension_weight(&k, -1.0, true), k.damping(-1.0));
    }
}
