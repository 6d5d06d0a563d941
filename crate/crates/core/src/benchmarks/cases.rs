use std::sync::{Arc, RwLock};

use crate::benchmarks::{convergence_rows, l2_error, CaseName, ConvergenceRow, LevelSetMode, RunConfig};
use crate::error::{Error, Result};
use crate::extrapolation::BoundaryData;
use crate::interface::{AnalyticLevelSet, DiscreteLevelSet, LevelSetField, RegularizedKernels, DEFAULT_SIGMA};
use crate::levelset_evolution::{
    build_interface_velocity, zero_level_radii, EvolutionParams, LevelSetEvolver, LevelSetState, MotionLaw,
};
use crate::mesh_fe::{CellQuadrature, FEField, UniformQuadMesh, Vec2};
use crate::transport::{
    GeometryNeeds, GhostKind, GhostPenaltyConfig, InterfaceGeometry, Operators, ProblemSpec, SolverSettings,
    TransientState, TransportSolver,
};

/// Pseudo-time step of the steady solve, in units of `h`.
const PSEUDO_DT_FACTOR: f64 = 3.2;
const STEADY_TOL: f64 = 1e-9;
const STEADY_MAX_STEPS: usize = 20_000;
/// Rays used to sample the final zero level set.
const RADIUS_SAMPLES: usize = 64;

/// Geometry, data and time stepping of one study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkCase {
    pub name: CaseName,
    pub center: Vec2,
    /// Radius at `t = 0`; `r(t) = radius + radius_rate t`.
    pub radius: f64,
    pub radius_rate: f64,
    pub final_time: f64,
    /// `dt = dt_factor h`; `None` for the steady case.
    pub dt_factor: Option<f64>,
    pub kappa: f64,
    /// Lump the implicit Dirichlet penalty.
    pub lumped_lhs: bool,
}

fn saddle(x: Vec2) -> f64 {
    (x.x - 0.5).powi(2) - (x.y - 0.5).powi(2)
}

fn paraboloid(x: Vec2) -> f64 {
    (x.x - 0.5).powi(2) + (x.y - 0.5).powi(2)
}

impl BenchmarkCase {
    pub fn new(name: CaseName) -> Self {
        let base = Self {
            name,
            center: Vec2::new(0.5, 0.5),
            radius: 0.25,
            radius_rate: 0.0,
            final_time: 1.0,
            dt_factor: None,
            kappa: 1.0,
            lumped_lhs: false,
        };
        match name {
            CaseName::Elliptic => base,
            CaseName::Parabolic | CaseName::ParabolicLs => Self {
                radius_rate: 0.15,
                dt_factor: Some(3.2),
                ..base
            },
            CaseName::Hyperbolic => Self {
                center: Vec2::new(0.75, 0.5),
                radius: 0.15,
                dt_factor: Some(0.5),
                kappa: 0.0,
                lumped_lhs: true,
                ..base
            },
            CaseName::ExtensionCircle => Self {
                center: Vec2::zeros(),
                radius: 1.0,
                final_time: 0.0,
                kappa: 0.0,
                ..base
            },
        }
    }

    pub fn radius_at(&self, t: f64) -> f64 {
        self.radius + self.radius_rate * t
    }

    /// Signed distance to the interface at time `t`, positive inside.
    pub fn signed_distance(&self, t: f64) -> impl Fn(Vec2) -> f64 + Send + Sync + 'static {
        let (c, r) = (self.center, self.radius_at(t));
        move |x| r - (x - c).norm()
    }

    /// The exact solution; it does not depend on time in any case.
    pub fn exact(&self) -> fn(Vec2) -> f64 {
        match self.name {
            CaseName::Hyperbolic => paraboloid,
            _ => saddle,
        }
    }

    pub fn mesh(&self, nx: usize) -> Result<UniformQuadMesh> {
        match self.name {
            CaseName::ExtensionCircle => UniformQuadMesh::square(nx, Vec2::new(-2.0, -2.0), 4.0),
            _ => UniformQuadMesh::unit_square(nx),
        }
    }

    pub fn problem(&self) -> ProblemSpec {
        let exact = self.exact();
        let mut boundary = BoundaryData::dirichlet(move |x, _| exact(x));
        if self.radius_rate != 0.0 {
            let rate = self.radius_rate;
            boundary = boundary.with_normal_velocity(move |_, _| rate);
        }
        let inviscid = (self.name == CaseName::Hyperbolic)
            .then(|| Arc::new(|x: Vec2| Vec2::new(0.5 - x.y, x.x - 0.5)) as crate::interface::VectorFn);
        ProblemSpec {
            kappa: self.kappa,
            inviscid,
            boundary,
            initial: Arc::new(exact),
            exact: Some(Arc::new(move |x, _| exact(x))),
        }
    }

    /// Interface representation at time `t` for a fixed-geometry mode.
    pub fn level_set(&self, t: f64, quad: &CellQuadrature, mode: LevelSetMode) -> Result<LevelSetField> {
        match mode {
            LevelSetMode::Analytic => Ok(LevelSetField::Analytic(AnalyticLevelSet::circle(
                self.center,
                self.radius_at(t),
            ))),
            LevelSetMode::Interpolated | LevelSetMode::Advected => {
                let phi = FEField::interpolate(quad.mesh, self.signed_distance(t));
                Ok(LevelSetField::Discrete(DiscreteLevelSet::new(phi, DEFAULT_SIGMA, quad)?))
            }
        }
    }

    /// Level-set mode actually used under `cfg`.
    fn effective_mode(&self, cfg: &RunConfig) -> Result<LevelSetMode> {
        match (self.name, cfg.level_set) {
            (CaseName::ParabolicLs, _) => Ok(LevelSetMode::Advected),
            (CaseName::Elliptic | CaseName::Hyperbolic, LevelSetMode::Advected) => Err(Error::InvalidArgument(
                format!("the {} case has a fixed interface and cannot advect it", self.name),
            )),
            (_, mode) => Ok(mode),
        }
    }
}

/// Result of one mesh level.
#[derive(Clone, Debug)]
pub struct LevelResult {
    pub nx: usize,
    pub h: f64,
    pub inv_dt: Option<f64>,
    /// Time steps, or pseudo-time steps of the steady solve.
    pub steps: usize,
    pub l2_error: f64,
    pub u: FEField,
    pub exact: FEField,
    /// Final level set at the nodes.
    pub phi: FEField,
    /// Mean distance from the center to the final zero level set.
    pub mean_radius: f64,
    /// Largest deviation of a sampled radius from the mean.
    pub radius_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub case: CaseName,
    pub config: RunConfig,
    pub rows: Vec<ConvergenceRow>,
    pub levels: Vec<LevelResult>,
}

/// Runs every level of `cfg` in order.
pub fn run_case(name: CaseName, cfg: &RunConfig) -> Result<CaseReport> {
    cfg.validate()?;
    let levels = cfg
        .levels
        .iter()
        .map(|&nx| run_level(name, nx, cfg))
        .collect::<Result<Vec<_>>>()?;
    let table: Vec<_> = levels.iter().map(|l| (l.nx, l.inv_dt, l.l2_error)).collect();
    Ok(CaseReport {
        case: name,
        config: cfg.clone(),
        rows: convergence_rows(&table),
        levels,
    })
}

struct Setup {
    case: BenchmarkCase,
    mesh: UniformQuadMesh,
    quad: CellQuadrature,
    kernels: RegularizedKernels,
    ghost: GhostPenaltyConfig,
    settings: SolverSettings,
}

impl Setup {
    fn geometry(&self, ls: &LevelSetField, needs: GeometryNeeds, cfg: &RunConfig) -> Result<InterfaceGeometry> {
        InterfaceGeometry::build(&self.quad, ls, self.kernels, needs, cfg.search)
    }
}

const NO_NEEDS: GeometryNeeds = GeometryNeeds { flux: false, ghost: None };
const FLUX: GeometryNeeds = GeometryNeeds { flux: true, ghost: None };

/// Runs one mesh level of a convergence study.
pub fn run_level(name: CaseName, nx: usize, cfg: &RunConfig) -> Result<LevelResult> {
    if name == CaseName::ExtensionCircle {
        return Err(Error::InvalidArgument(
            "the extension-circle case has no convergence table; use run_extension_circle".into(),
        ));
    }
    cfg.validate()?;
    let case = BenchmarkCase::new(name);
    let mode = case.effective_mode(cfg)?;
    let mesh = case.mesh(nx)?;
    let h = mesh.h;
    let setup = Setup {
        case,
        mesh,
        quad: CellQuadrature::with_default_rule(mesh),
        kernels: RegularizedKernels::new(cfg.eps_factor * h, cfg.m_damp)?,
        ghost: GhostPenaltyConfig::for_kind(cfg.ghost, h)
            .with_damping(cfg.damped)
            .with_lumping(case.lumped_lhs && cfg.ghost == GhostKind::Dirichlet),
        settings: SolverSettings {
            fixed_point_passes: cfg.cn_passes,
            ..Default::default()
        },
    };
    let with_ghost = GeometryNeeds { flux: true, ghost: Some(cfg.damped) };

    let (u, phi, steps, inv_dt) = match (name, mode) {
        (CaseName::Elliptic, _) => {
            let problem = case.problem();
            let ls = case.level_set(0.0, &setup.quad, mode)?;
            let ops = Operators::assemble(setup.geometry(&ls, with_ghost, cfg)?, &problem);
            let solver = TransportSolver::new(&problem, setup.ghost, &setup.quad, setup.settings)?;
            let s = solver.solve_steady(&ops, FEField::zeros(mesh), PSEUDO_DT_FACTOR * h, STEADY_TOL, STEADY_MAX_STEPS)?;
            (s.u, ls.nodal_values(&setup.quad), s.steps, None)
        }
        (CaseName::Hyperbolic, _) => {
            let problem = case.problem();
            let ls = case.level_set(0.0, &setup.quad, mode)?;
            let ops = Operators::assemble(setup.geometry(&ls, with_ghost, cfg)?, &problem);
            let solver = TransportSolver::new(&problem, setup.ghost, &setup.quad, setup.settings)?;
            let (steps, dt) = time_steps(&case, h);
            let mut state = TransientState::new(FEField::interpolate(mesh, &*problem.initial), 0.0, dt)?;
            for _ in 0..steps {
                state = solver.step_heun(&state, &ops)?;
            }
            (state.u, ls.nodal_values(&setup.quad), steps, Some(steps as f64 / case.final_time))
        }
        (_, LevelSetMode::Advected) => run_advected(&setup, cfg)?,
        _ => run_moving(&setup, mode, cfg)?,
    };

    let exact = case.exact();
    let final_phi = case.signed_distance(case.final_time);
    let l2 = l2_error(&u, &exact, &final_phi, cfg.fine_eps)?;
    let radii = zero_level_radii(&phi, case.center, RADIUS_SAMPLES)?;
    let mean_radius = radii.iter().sum::<f64>() / radii.len() as f64;
    let radius_deviation = radii.iter().map(|r| (r - mean_radius).abs()).fold(0.0, f64::max);
    Ok(LevelResult {
        nx,
        h,
        inv_dt,
        steps,
        l2_error: l2,
        exact: FEField::interpolate(mesh, exact),
        u,
        phi,
        mean_radius,
        radius_deviation,
    })
}

/// Step count and the step size that lands exactly on the final time.
fn time_steps(case: &BenchmarkCase, h: f64) -> (usize, f64) {
    let nominal = case.dt_factor.expect("transient case") * h;
    let steps = ((case.final_time / nominal).round() as usize).max(1);
    (steps, case.final_time / steps as f64)
}

/// Crank-Nicolson on a prescribed moving interface.
fn run_moving(setup: &Setup, mode: LevelSetMode, cfg: &RunConfig) -> Result<(FEField, FEField, usize, Option<f64>)> {
    let case = &setup.case;
    let problem = case.problem();
    let solver = TransportSolver::new(&problem, setup.ghost, &setup.quad, setup.settings)?;
    let ghost = GeometryNeeds { flux: false, ghost: Some(cfg.damped) };
    let (steps, dt) = time_steps(case, setup.mesh.h);
    let mut state = TransientState::new(FEField::interpolate(setup.mesh, &*problem.initial), 0.0, dt)?;
    let geometry_at = |t: f64, needs| setup.geometry(&case.level_set(t, &setup.quad, mode)?, needs, cfg);
    let mut old = Operators::assemble(geometry_at(0.0, NO_NEEDS)?, &problem);
    for n in 0..steps {
        let t = n as f64 * dt;
        let mid = geometry_at(t + 0.5 * dt, FLUX)?;
        let new = Operators::assemble(geometry_at(t + dt, ghost)?, &problem);
        state = solver.step_crank_nicolson(&state, &old, &mid, &new)?;
        old = new;
    }
    let phi = case.level_set(case.final_time, &setup.quad, mode)?.nodal_values(&setup.quad);
    Ok((state.u, phi, steps, Some(steps as f64 / case.final_time)))
}

/// `V = c phi_h(x_P) / eps` at an interface point `x`, with `x_P = x - eps n`
/// and `n = -grad phi / |grad phi|`.
fn normal_derivative_speed(phi: &FEField, x: Vec2, eps: f64, coefficient: f64) -> f64 {
    let g = match phi.eval_grad(x) {
        Ok(g) if g.norm() > 0.0 => g / g.norm(),
        _ => return coefficient,
    };
    phi.eval(x + g * eps).map_or(coefficient, |v| coefficient * v / eps)
}

/// Crank-Nicolson coupled with level-set evolution under the normal-derivative law.
fn run_advected(setup: &Setup, cfg: &RunConfig) -> Result<(FEField, FEField, usize, Option<f64>)> {
    let case = &setup.case;
    let quad = &setup.quad;
    let (steps, dt) = time_steps(case, setup.mesh.h);
    let params = EvolutionParams::for_mesh(setup.mesh.h, dt, cfg.eps_factor);
    let evolver = LevelSetEvolver::new(quad, params)?;
    let law = MotionLaw::NormalDerivative { coefficient: case.radius_rate };

    let phi0 = FEField::interpolate(setup.mesh, case.signed_distance(0.0));
    let mut ls_state = LevelSetState::new(phi0.clone(), params.sigma, quad, 0.0)?;
    // the interface speed in the flux is read from the midpoint level set
    let mid_phi = Arc::new(RwLock::new(phi0));
    let mut problem = case.problem();
    let (shared, eps, rate) = (Arc::clone(&mid_phi), params.eps, case.radius_rate);
    problem.boundary = problem.boundary.with_normal_velocity(move |x, _| {
        let phi = shared.read().unwrap_or_else(|e| e.into_inner());
        normal_derivative_speed(&phi, x, eps, rate)
    });

    let solver = TransportSolver::new(&problem, setup.ghost, quad, setup.settings)?;
    let ghost = GeometryNeeds { flux: false, ghost: Some(cfg.damped) };
    let mut state = TransientState::new(FEField::interpolate(setup.mesh, &*problem.initial), 0.0, dt)?;
    let mut old = Operators::assemble(setup.geometry(&ls_state.level_set(), NO_NEEDS, cfg)?, &problem);
    for _ in 0..steps {
        let v = build_interface_velocity(&ls_state, &law, &params, quad, cfg.search)?;
        let next = evolver.evolve_step(&ls_state, &v)?;
        let avg: Vec<f64> = ls_state
            .phi
            .values
            .iter()
            .zip(&next.phi.values)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let avg = FEField::from_values(setup.mesh, avg);
        *mid_phi.write().unwrap_or_else(|e| e.into_inner()) = avg.clone();
        let mid_ls = LevelSetField::Discrete(DiscreteLevelSet::new(avg, params.sigma, quad)?);
        let mid = setup.geometry(&mid_ls, FLUX, cfg)?;
        let new = Operators::assemble(setup.geometry(&next.level_set(), ghost, cfg)?, &problem);
        state = solver.step_crank_nicolson(&state, &old, &mid, &new)?;
        old = new;
        ls_state = next;
    }
    Ok((state.u, ls_state.phi, steps, Some(steps as f64 / case.final_time)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_setups() {
        let p = BenchmarkCase::new(CaseName::Parabolic);
        assert!((p.radius_at(1.0) - 0.4).abs() < 1e-15);
        let h = BenchmarkCase::new(CaseName::Hyperbolic);
        assert_eq!(h.center, Vec2::new(0.75, 0.5));
        assert!(h.problem().require_hyperbolic().is_ok());
        assert!(p.problem().require_parabolic().is_ok());
        let exact = h.exact();
        assert!((exact(Vec2::new(0.75, 0.5)) - 0.0625).abs() < 1e-15);
        let m = BenchmarkCase::new(CaseName::ExtensionCircle).mesh(8).unwrap();
        assert_eq!((m.origin, m.h), (Vec2::new(-2.0, -2.0), 0.5));
        assert_eq!(time_steps(&p, 1.0 / 16.0), (5, 0.2));
        assert_eq!(time_steps(&h, 1.0 / 16.0), (32, 1.0 / 32.0));
    }

    #[test]
    fn exact_solutions_are_steady_for_their_equations() {
        // the saddle is harmonic; the paraboloid is constant along the rotation
        let x = Vec2::new(0.3, 0.8);
        let d = 1e-4;
        let s = saddle;
        let lap = (s(x + Vec2::new(d, 0.0)) + s(x - Vec2::new(d, 0.0)) + s(x + Vec2::new(0.0, d))
            + s(x - Vec2::new(0.0, d))
            - 4.0 * s(x))
            / (d * d);
        assert!(lap.abs() < 1e-6);
        let v = Vec2::new(0.5 - x.y, x.x - 0.5);
        let g = Vec2::new(2.0 * (x.x - 0.5), 2.0 * (x.y - 0.5));
        assert!(v.dot(&g).abs() < 1e-15);
    }

    #[test]
    fn speed_of_an_exact_distance_function() {
        let mesh = UniformQuadMesh::unit_square(64).unwrap();
        let c = Vec2::new(0.5, 0.5);
        let phi = FEField::interpolate(mesh, |x| 0.25 - (x - c).norm());
        let x = c + Vec2::new(0.25, 0.0);
        let v = normal_derivative_speed(&phi, x, 2.0 * mesh.h, 0.15);
        assert!((v - 0.15).abs() < 1e-3, "{v}");
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        let cfg = RunConfig { level_set: LevelSetMode::Advected, ..Default::default() };
        assert!(run_level(CaseName::Elliptic, 16, &cfg).is_err());
        assert!(run_level(CaseName::ExtensionCircle, 16, &RunConfig::default()).is_err());
        assert!(run_case(CaseName::Elliptic, &RunConfig { levels: vec![], ..Default::default() }).is_err());
    }

    #[test]
    fn elliptic_level_matches_the_reference_error() {
        let cfg = RunConfig { level_set: LevelSetMode::Analytic, ..Default::default() };
        let r = run_level(CaseName::Elliptic, 64, &cfg).unwrap();
        assert!(r.l2_error > 1.72e-4 / 2.0 && r.l2_error < 1.72e-4 * 2.0, "{}", r.l2_error);
        assert!((r.mean_radius - 0.25).abs() < 1e-3);
    }
}
