//! Pseudo-time, Crank-Nicolson and Heun drivers.
//!
//! Every implicit solve is written for the increment `u^{n+1} - u^n`, so the
//! Krylov tolerance is relative to the change rather than to the state.

use crate::error::{Error, Result};
use crate::mesh_fe::{cg_solve_with_floor, CsrMatrix, FEField};
use crate::transport::assembly::{
    assemble_advection, assemble_flux_surrogate, assemble_ghost_rhs, assemble_interface_rhs, assemble_penalty_matrix,
    assemble_stiffness, assemble_weighted_mass,
};
use crate::transport::geometry::InterfaceGeometry;
use crate::transport::problem::{GhostPenaltyConfig, ProblemSpec, TransientState};

/// Linear solver settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub cg_tol: f64,
    /// Iteration cap; zero means `20 n`.
    pub cg_max_iter: usize,
    /// Fixed-point passes per implicit time step.
    pub fixed_point_passes: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            cg_tol: 1e-10,
            cg_max_iter: 0,
            fixed_point_passes: 1,
        }
    }
}

/// Geometry-dependent matrices of one level-set state.
#[derive(Clone, Debug)]
pub struct Operators {
    pub geometry: InterfaceGeometry,
    pub mass: CsrMatrix,
    pub stiffness: Option<CsrMatrix>,
    pub advection: Option<CsrMatrix>,
    /// Implicit stand-in for the solution-dependent interface flux. It only
    /// enters the increment matrix, so converged states are unaffected.
    pub flux_surrogate: Option<CsrMatrix>,
}

impl Operators {
    pub fn assemble(geometry: InterfaceGeometry, problem: &ProblemSpec) -> Self {
        let mass = assemble_weighted_mass(&geometry);
        let stiffness = (problem.kappa > 0.0).then(|| assemble_stiffness(&geometry, problem.kappa));
        let advection = problem
            .inviscid
            .as_ref()
            .map(|v| assemble_advection(&geometry, v.as_ref()));
        let flux_surrogate = assemble_flux_surrogate(&geometry, problem);
        Self {
            geometry,
            mass,
            stiffness,
            advection,
            flux_surrogate,
        }
    }
}

/// Converged pseudo-time solution.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub u: FEField,
    pub steps: usize,
    /// Final `||u^{k+1} - u^k||_inf / dtau`.
    pub update: f64,
}

/// Stepping driver for one problem and penalty configuration.
#[derive(Clone, Debug)]
pub struct TransportSolver<'a> {
    pub problem: &'a ProblemSpec,
    pub ghost: GhostPenaltyConfig,
    pub settings: SolverSettings,
    /// Implicit penalty matrix; depends only on the mesh.
    pub penalty: CsrMatrix,
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(b, a)| *b += alpha * a);
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl<'a> TransportSolver<'a> {
    pub fn new(
        problem: &'a ProblemSpec,
        ghost: GhostPenaltyConfig,
        quad: &crate::mesh_fe::CellQuadrature,
        settings: SolverSettings,
    ) -> Result<Self> {
        problem.validate()?;
        ghost.validate()?;
        Ok(Self {
            problem,
            ghost,
            settings,
            penalty: assemble_penalty_matrix(quad, &ghost),
        })
    }

    /// Solves for an increment; residuals below round-off of `A u` count as converged.
    fn solve(&self, a: &CsrMatrix, rhs: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let max_iter = match self.settings.cg_max_iter {
            0 => 20 * a.n,
            m => m,
        };
        let au = a.mul_vec(u);
        let floor = 1e-14 * au.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(cg_solve_with_floor(a, rhs, None, self.settings.cg_tol, floor, max_iter)?.x)
    }

    /// Interface flux plus lagged ghost rhs, minus the implicit penalty applied to `u`.
    fn explicit_terms(&self, geom: &InterfaceGeometry, u: &[f64], t_flux: f64, geom_flux: &InterfaceGeometry, t_ghost: f64) -> Result<Vec<f64>> {
        let mut r = assemble_interface_rhs(geom_flux, self.problem, u, t_flux, &self.ghost)?;
        let g = assemble_ghost_rhs(geom, self.problem, u, t_ghost, &self.ghost)?;
        axpy(1.0, &g, &mut r);
        axpy(-1.0, &self.penalty.mul_vec(u), &mut r);
        Ok(r)
    }

    /// Backward-Euler pseudo-time marching to steady state.
    pub fn solve_steady(
        &self,
        ops: &Operators,
        initial: FEField,
        pseudo_dt: f64,
        tol: f64,
        max_steps: usize,
    ) -> Result<SteadyState> {
        if self.problem.inviscid.is_some() {
            return Err(Error::InvalidArgument(
                "steady solves are only provided for diffusive problems".into(),
            ));
        }
        if !(pseudo_dt > 0.0) {
            return Err(Error::InvalidArgument("pseudo time step must be positive".into()));
        }
        let mut a = ops.mass.clone();
        a.scale(1.0 / pseudo_dt);
        if let Some(k) = &ops.stiffness {
            a.add_scaled(1.0, k);
        }
        a.add_scaled(1.0, &self.penalty);
        if let Some(r) = &ops.flux_surrogate {
            a.add_scaled(1.0, r);
        }
        let mut u = initial;
        let mut update = f64::INFINITY;
        for step in 1..=max_steps {
            let mut r = self.explicit_terms(&ops.geometry, &u.values, 0.0, &ops.geometry, 0.0)?;
            if let Some(k) = &ops.stiffness {
                axpy(-1.0, &k.mul_vec(&u.values), &mut r);
            }
            let du = self.solve(&a, &r, &u.values)?;
            update = max_abs(&du) / pseudo_dt;
            axpy(1.0, &du, &mut u.values);
            if update <= tol {
                return Ok(SteadyState { u, steps: step, update });
            }
        }
        Err(Error::MaxStepsExceeded {
            steps: max_steps,
            update,
        })
    }

    /// One Crank-Nicolson step
    /// `(M1/dt + K1/2 + P) u1 = (M0/dt - K0/2) u0 + b(u0, t + dt/2) + P_rhs(u0)`,
    /// with `b` on the midpoint geometry and the penalty on the new one.
    pub fn step_crank_nicolson(
        &self,
        state: &TransientState,
        old: &Operators,
        mid: &InterfaceGeometry,
        new: &Operators,
    ) -> Result<TransientState> {
        self.problem.require_parabolic()?;
        let dt = state.dt;
        let u0 = &state.u.values;
        let (k_old, k_new) = match (&old.stiffness, &new.stiffness) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidArgument("operators lack a stiffness matrix".into())),
        };
        let mut a = new.mass.clone();
        a.scale(1.0 / dt);
        a.add_scaled(0.5, k_new);
        a.add_scaled(1.0, &self.penalty);
        if let Some(s) = &new.flux_surrogate {
            a.add_scaled(1.0, s);
        }

        // Pass k solves A (v_{k+1} - v_k) = (M0 u0 - M1 v_k)/dt - (K0 u0 + K1 v_k)/2
        //   + b((u0 + v_k)/2, t + dt/2) + P_rhs(v_k) - P v_k,
        // starting from v_0 = u0.
        let mut r0 = old.mass.mul_vec(u0);
        r0.iter_mut().for_each(|v| *v /= dt);
        axpy(-0.5, &k_old.mul_vec(u0), &mut r0);
        let mut u = state.u.clone();
        for pass in 0..self.settings.fixed_point_passes.max(1) {
            let v = &u.values;
            let mid_state: Vec<f64> = if pass == 0 {
                u0.clone()
            } else {
                u0.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect()
            };
            let mut r = assemble_interface_rhs(mid, self.problem, &mid_state, state.t + 0.5 * dt, &self.ghost)?;
            axpy(1.0, &assemble_ghost_rhs(&new.geometry, self.problem, v, state.t + dt, &self.ghost)?, &mut r);
            axpy(-1.0, &self.penalty.mul_vec(v), &mut r);
            axpy(1.0, &r0, &mut r);
            axpy(-1.0 / dt, &new.mass.mul_vec(v), &mut r);
            axpy(-0.5, &k_new.mul_vec(v), &mut r);
            let du = self.solve(&a, &r, v)?;
            axpy(1.0, &du, &mut u.values);
        }
        Ok(TransientState {
            u,
            t: state.t + dt,
            dt,
        })
    }

    /// One Heun (SSP-RK2) step. Each stage treats the ghost penalty matrix
    /// implicitly: `(M + dt P) (u* - u) = dt (-C u + b(u) + P_rhs(u) - P u)`.
    pub fn step_heun(&self, state: &TransientState, ops: &Operators) -> Result<TransientState> {
        self.problem.require_hyperbolic()?;
        let dt = state.dt;
        let mut a = ops.mass.clone();
        a.add_scaled(dt, &self.penalty);
        let stage = |u: &[f64], t: f64| -> Result<Vec<f64>> {
            let mut r = self.explicit_terms(&ops.geometry, u, t, &ops.geometry, t)?;
            if let Some(c) = &ops.advection {
                axpy(-1.0, &c.mul_vec(u), &mut r);
            }
            r.iter_mut().for_each(|v| *v *= dt);
            self.solve(&a, &r, u)
        };
        let u = ssp_rk2(&state.u.values, state.t, dt, stage)?;
        Ok(TransientState {
            u: FEField::from_values(state.u.mesh, u),
            t: state.t + dt,
            dt,
        })
    }
}

/// Heun's method `u1 = u + d(u, t)`, `u2 = u1 + d(u1, t + dt)`,
/// `u_new = (u + u2) / 2`, where `d` returns a stage increment.
pub fn ssp_rk2(
    u: &[f64],
    t: f64,
    dt: f64,
    mut increment: impl FnMut(&[f64], f64) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let mut u1 = u.to_vec();
    axpy(1.0, &increment(u, t)?, &mut u1);
    let mut u2 = u1.clone();
    axpy(1.0, &increment(&u1, t + dt)?, &mut u2);
    Ok(u.iter().zip(&u2).map(|(a, b)| 0.5 * (a + b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrapolation::{BoundaryData, SearchMethod};
    use crate::interface::{AnalyticLevelSet, LevelSetField, RegularizedKernels};
    use crate::mesh_fe::{cg_solve, CellQuadrature, UniformQuadMesh, Vec2};
    use crate::transport::geometry::GeometryNeeds;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn inside_everywhere() -> LevelSetField {
        LevelSetField::Analytic(AnalyticLevelSet::new(Arc::new(|_| 10.0), Arc::new(|_| Vec2::zeros())))
    }

    fn ops_for(nx: usize, ls: &LevelSetField, problem: &ProblemSpec, needs: GeometryNeeds) -> (CellQuadrature, Operators) {
        let mesh = UniformQuadMesh::unit_square(nx).unwrap();
        let quad = CellQuadrature::with_default_rule(mesh);
        let k = RegularizedKernels::for_mesh(mesh.h, 2.0).unwrap();
        let g = InterfaceGeometry::build(&quad, ls, k, needs, SearchMethod::Traversal).unwrap();
        let ops = Operators::assemble(g, problem);
        (quad, ops)
    }

    fn heat() -> ProblemSpec {
        ProblemSpec {
            kappa: 1.0,
            inviscid: None,
            boundary: BoundaryData::dirichlet(|_, _| 0.0),
            initial: Arc::new(|_| 0.0),
            exact: None,
        }
    }

    #[test]
    fn crank_nicolson_damps_eigenmode_like_trapezoidal_rule() {
        let problem = heat();
        let nx = 16;
        let (quad, ops) = ops_for(nx, &inside_everywhere(), &problem, GeometryNeeds { flux: true, ghost: None });
        let zero = GhostPenaltyConfig { gamma: 0.0, ..GhostPenaltyConfig::dirichlet(quad.mesh.h) };
        let solver = TransportSolver::new(&problem, zero, &quad, SolverSettings { cg_tol: 1e-14, ..Default::default() }).unwrap();
        let h = quad.mesh.h;
        let lambda = 6.0 * (1.0 - (PI * h).cos()) / (h * h * (2.0 + (PI * h).cos()));
        let u0 = FEField::interpolate(quad.mesh, |x| (PI * x.x).cos());
        let dt = 0.01;
        let state = TransientState::new(u0.clone(), 0.0, dt).unwrap();
        let next = solver.step_crank_nicolson(&state, &ops, &ops.geometry, &ops).unwrap();
        let factor = (1.0 - 0.5 * lambda * dt) / (1.0 + 0.5 * lambda * dt);
        for (a, b) in next.u.values.iter().zip(&u0.values) {
            assert!((a - factor * b).abs() <= 1e-8);
        }
    }

    #[test]
    fn heun_amplification_factor() {
        let dt = 0.1;
        let u = ssp_rk2(&[1.0], 0.0, dt, |u, _| Ok(vec![-dt * u[0]])).unwrap();
        assert!((u[0] - (1.0 - dt + 0.5 * dt * dt)).abs() < 1e-12);
    }

    #[test]
    fn heun_keeps_constant_without_flow() {
        let problem = ProblemSpec {
            kappa: 0.0,
            inviscid: Some(Arc::new(|_| Vec2::zeros())),
            boundary: BoundaryData::dirichlet(|_, _| 1.0),
            initial: Arc::new(|_| 1.0),
            exact: None,
        };
        let (quad, ops) = ops_for(8, &inside_everywhere(), &problem, GeometryNeeds { flux: true, ghost: Some(false) });
        let cfg = GhostPenaltyConfig::dirichlet(quad.mesh.h).with_lumping(true);
        let solver = TransportSolver::new(&problem, cfg, &quad, SolverSettings::default()).unwrap();
        let state = TransientState::new(FEField::constant(quad.mesh, 1.0), 0.0, 0.05).unwrap();
        let next = solver.step_heun(&state, &ops).unwrap();
        assert!(next.u.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn steady_solve_of_penalty_dominated_system_is_fast() {
        // no physical domain: the damped penalty pins u to zero
        let problem = heat();
        let outside = LevelSetField::Analytic(AnalyticLevelSet::new(
            Arc::new(|_| -10.0),
            Arc::new(|_| Vec2::zeros()),
        ));
        let (quad, ops) = ops_for(16, &outside, &problem, GeometryNeeds { flux: true, ghost: Some(true) });
        let cfg = GhostPenaltyConfig::dirichlet(quad.mesh.h).with_damping(true);
        let solver = TransportSolver::new(&problem, cfg, &quad, SolverSettings::default()).unwrap();
        let sol = solver
            .solve_steady(&ops, FEField::constant(quad.mesh, 1.0), 3.2 * quad.mesh.h, 1e-9, 10)
            .unwrap();
        assert!(sol.steps <= 3, "{} steps", sol.steps);
        assert!(sol.u.max_abs() < 1e-9);
        let err = solver.solve_steady(&ops, FEField::constant(quad.mesh, 1.0), 0.2, 0.0, 3);
        assert!(matches!(err, Err(Error::MaxStepsExceeded { .. })));
    }

    #[test]
    fn steady_solve_reproduces_constant_data() {
        let problem = ProblemSpec {
            boundary: BoundaryData::dirichlet(|_, _| 2.0),
            ..heat()
        };
        let ls = LevelSetField::Analytic(AnalyticLevelSet::circle(Vec2::new(0.5, 0.5), 0.25));
        let (quad, ops) = ops_for(32, &ls, &problem, GeometryNeeds { flux: true, ghost: Some(false) });
        let cfg = GhostPenaltyConfig::dirichlet(quad.mesh.h);
        let solver = TransportSolver::new(&problem, cfg, &quad, SolverSettings::default()).unwrap();
        let sol = solver
            .solve_steady(&ops, FEField::zeros(quad.mesh), 3.2 * quad.mesh.h, 1e-9, 2000)
            .unwrap();
        for x in [Vec2::new(0.5, 0.5), Vec2::new(0.7, 0.55), Vec2::new(0.1, 0.9)] {
            let v = sol.u.eval(x).unwrap();
            assert!((v - 2.0).abs() < 1e-6, "u{x:?} = {v}");
        }
    }

    fn stepping_matrix() -> &'static CsrMatrix {
        static A: std::sync::OnceLock<CsrMatrix> = std::sync::OnceLock::new();
        A.get_or_init(|| {
            let problem = heat();
            let ls = LevelSetField::Analytic(AnalyticLevelSet::circle(Vec2::new(0.5, 0.5), 0.25));
            let (quad, ops) = ops_for(32, &ls, &problem, GeometryNeeds { flux: false, ghost: None });
            let cfg = GhostPenaltyConfig::dirichlet(quad.mesh.h);
            let dt = 3.2 * quad.mesh.h;
            let mut a = ops.mass.clone();
            a.add_scaled(0.5 * dt, ops.stiffness.as_ref().unwrap());
            a.add_scaled(1.0, &assemble_penalty_matrix(&quad, &cfg));
            a
        })
    }

    #[test]
    fn stepping_system_is_symmetric_and_solvable() {
        let a = stepping_matrix();
        assert!(a.asymmetry() < 1e-12);
        let b = vec![1.0; a.n];
        assert!(cg_solve(a, &b, None, 1e-10, 10 * a.n).is_ok());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn stepping_system_is_positive(x in proptest::collection::vec(-1.0f64..1.0, 33 * 33)) {
            let a = stepping_matrix();
            let ax = a.mul_vec(&x);
            let q: f64 = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
            proptest::prop_assert!(q > 0.0 || x.iter().all(|&v| v == 0.0));
        }
    }
}
