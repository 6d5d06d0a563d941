//! Conservative level-set transport driven by extension velocities.
//!
//! The smoothed sign `S(phi)` is advected with a velocity that is only
//! needed where `grad S` is non-negligible, while a penalty term pulls
//! `grad phi` towards the averaged unit normal `q` and keeps `phi` close to
//! a distance function away from the interface.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrapolation::{extension_velocity, ClosestPoint, ClosestPointSearch, SearchMethod, SKIP_THRESHOLD};
use crate::interface::{
    averaged_gradient, AveragedGradient, DiscreteLevelSet, LevelSetField, RegularizedKernels, ScalarFn,
    DEFAULT_SIGMA,
};
use crate::mesh_fe::{cg_solve_with_floor, CellQuadrature, FEField, Vec2};
use crate::transport::assemble_unweighted_stiffness;

/// Floor of the time-derivative weight, relative to `1 / eps`.
pub const WEIGHT_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionParams {
    /// Penalty `lambda` of the gradient-alignment term.
    pub lambda: f64,
    /// Regularization `sigma` of the averaged gradient.
    pub sigma: f64,
    pub dt: f64,
    pub eps: f64,
}

impl EvolutionParams {
    /// `lambda = h`, default `sigma`, `eps = eps_factor h`.
    pub fn for_mesh(h: f64, dt: f64, eps_factor: f64) -> Self {
        Self {
            lambda: h,
            sigma: DEFAULT_SIGMA,
            dt,
            eps: eps_factor * h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        check("lambda", self.lambda)?;
        check("sigma", self.sigma)?;
        check("time step", self.dt)?;
        check("interface thickness", self.eps)
    }

    pub fn kernels(&self) -> Result<RegularizedKernels> {
        RegularizedKernels::new(self.eps, 2.0)
    }
}

/// Nodal level set, its averaged gradient and the current time.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetState {
    pub phi: FEField,
    pub q: AveragedGradient,
    pub t: f64,
}

impl LevelSetState {
    pub fn new(phi: FEField, sigma: f64, quad: &CellQuadrature, t: f64) -> Result<Self> {
        let q = averaged_gradient(&phi, sigma, quad)?;
        Ok(Self { phi, q, t })
    }

    pub fn level_set(&self) -> LevelSetField {
        LevelSetField::Discrete(DiscreteLevelSet {
            phi: self.phi.clone(),
            q: self.q.clone(),
        })
    }
}

/// Normal speed of the interface.
#[derive(Clone)]
pub enum MotionLaw {
    /// `V = -c dn Phi` with `dn Phi = -phi_h(x_P) / eps`.
    NormalDerivative { coefficient: f64 },
    /// `V` given as a function of the interface point.
    Prescribed(ScalarFn),
}

impl std::fmt::Debug for MotionLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NormalDerivative { coefficient } => {
                f.debug_struct("NormalDerivative").field("coefficient", coefficient).finish()
            }
            Self::Prescribed(_) => f.write_str("Prescribed(..)"),
        }
    }
}

impl MotionLaw {
    /// `V(x_Gamma)` for a projected point.
    pub fn speed(&self, cp: &ClosestPoint, ls: &LevelSetField, eps: f64) -> Result<f64> {
        match self {
            Self::NormalDerivative { coefficient } => {
                let dn = -ls.value(cp.shifted)? / eps;
                Ok(-coefficient * dn)
            }
            Self::Prescribed(f) => Ok(f(cp.point)),
        }
    }
}

/// Velocity at every quadrature point of `quad`, in cell-major order.
pub fn quadrature_velocity(quad: &CellQuadrature, f: impl Fn(Vec2) -> Vec2 + Sync) -> Vec<Vec2> {
    let nq = quad.per_cell();
    (0..quad.total_points())
        .into_par_iter()
        .map(|i| f(quad.point(i / nq, i % nq)))
        .collect()
}

/// Extension velocity `v_h = -V(x_Gamma) q(x_Q)` at the quadrature points where
/// `delta(phi)` is non-negligible; zero elsewhere.
pub fn build_interface_velocity(
    state: &LevelSetState,
    law: &MotionLaw,
    params: &EvolutionParams,
    quad: &CellQuadrature,
    method: SearchMethod,
) -> Result<Vec<Vec2>> {
    let kernels = params.kernels()?;
    let ls = state.level_set();
    let search = ClosestPointSearch::new(&quad.mesh, &ls, params.eps);
    let nq = quad.per_cell();
    (0..quad.total_points())
        .into_par_iter()
        .map(|i| {
            let (cell, k) = (i / nq, i % nq);
            let cp = quad.cell_point(cell, k);
            let x = quad.point(cell, k);
            if kernels.delta(ls.value_at(cp, x)) < SKIP_THRESHOLD {
                return Ok(Vec2::zeros());
            }
            let proj = search.project(x, method)?;
            let v = law.speed(&proj, &ls, params.eps)?;
            Ok(extension_velocity(v, ls.normal_field_at(cp, x)))
        })
        .collect()
}

/// Advances `S(phi)` by one step:
///
/// `W (phi1 - phi0) / dt + lambda K phi1 = -int w v . 2 delta(phi0) grad phi0 + lambda int grad w . q0`
///
/// with the lumped weight `W_i = m_i max(2 delta(phi0_i), beta)`.
pub struct LevelSetEvolver {
    pub quad: CellQuadrature,
    pub params: EvolutionParams,
    kernels: RegularizedKernels,
    stiffness: crate::mesh_fe::CsrMatrix,
    lumped_mass: Vec<f64>,
}

impl LevelSetEvolver {
    pub fn new(quad: &CellQuadrature, params: EvolutionParams) -> Result<Self> {
        params.validate()?;
        let stiffness = assemble_unweighted_stiffness(quad);
        let mesh = quad.mesh;
        let mut lumped_mass = vec![0.0; mesh.num_nodes()];
        for cell in 0..mesh.num_cells() {
            for (a, node) in mesh.cell_nodes(cell).into_iter().enumerate() {
                for k in 0..quad.per_cell() {
                    lumped_mass[node] += quad.weights[k] * quad.values[k][a];
                }
            }
        }
        Ok(Self {
            quad: quad.clone(),
            params,
            kernels: params.kernels()?,
            stiffness,
            lumped_mass,
        })
    }

    /// `velocity` holds one vector per quadrature point.
    pub fn evolve_step(&self, state: &LevelSetState, velocity: &[Vec2]) -> Result<LevelSetState> {
        let quad = &self.quad;
        let mesh = quad.mesh;
        let nq = quad.per_cell();
        if velocity.len() != quad.total_points() {
            return Err(Error::InvalidArgument(format!(
                "expected {} velocity samples, got {}",
                quad.total_points(),
                velocity.len()
            )));
        }
        let EvolutionParams { lambda, dt, eps, .. } = self.params;
        let beta = WEIGHT_FLOOR / eps;
        let phi0 = &state.phi;

        let mut a = self.stiffness.clone();
        a.scale(lambda);
        let w: Vec<f64> = phi0
            .values
            .iter()
            .zip(&self.lumped_mass)
            .map(|(&p, m)| m * (2.0 * self.kernels.delta(p)).max(beta) / dt)
            .collect();
        a.add_diagonal(&w);

        let locals: Vec<[f64; 4]> = (0..mesh.num_cells())
            .into_par_iter()
            .map(|cell| {
                let mut out = [0.0; 4];
                for k in 0..nq {
                    let cp = quad.cell_point(cell, k);
                    let g = phi0.eval_grad_at(cp);
                    let q = state.q.q.eval_at(cp);
                    let adv = velocity[cell * nq + k].dot(&g) * 2.0 * self.kernels.delta(phi0.eval_at(cp));
                    let wk = quad.weights[k];
                    for b in 0..4 {
                        out[b] += wk * (lambda * quad.grads[k][b].dot(&(q - g)) - quad.values[k][b] * adv);
                    }
                }
                out
            })
            .collect();
        let mut rhs = vec![0.0; mesh.num_nodes()];
        for (cell, v) in locals.iter().enumerate() {
            for (b, node) in mesh.cell_nodes(cell).into_iter().enumerate() {
                rhs[node] += v[b];
            }
        }

        let scale = a.mul_vec(&phi0.values).iter().map(|v| v * v).sum::<f64>().sqrt();
        let sol = cg_solve_with_floor(&a, &rhs, None, 1e-10, 1e-14 * scale, 20 * a.n)?;
        let mut phi = phi0.clone();
        phi.values.iter_mut().zip(&sol.x).for_each(|(p, d)| *p += d);
        LevelSetState::new(phi, self.params.sigma, quad, state.t + dt)
    }
}

/// `int H(phi) dx`.
pub fn volume(ls: &LevelSetField, kernels: &RegularizedKernels, quad: &CellQuadrature) -> f64 {
    quad.integrate(|cp, x| kernels.heaviside(ls.value_at(cp, x)))
}

/// Centroid of the diffuse interface, weighted by `delta(phi) |grad phi|`.
pub fn interface_centroid(ls: &LevelSetField, kernels: &RegularizedKernels, quad: &CellQuadrature) -> Vec2 {
    let w = |cp, x| kernels.delta(ls.value_at(cp, x)) * ls.gradient_at(cp, x).norm();
    let total = quad.integrate(w);
    let cx = quad.integrate(|cp, x| w(cp, x) * x.x);
    let cy = quad.integrate(|cp, x| w(cp, x) * x.y);
    Vec2::new(cx, cy) / total
}

/// Distances from `center` to the zero level set of `phi` along `samples`
/// equally spaced rays. `phi` must be positive at `center`.
pub fn zero_level_radii(phi: &FEField, center: Vec2, samples: usize) -> Result<Vec<f64>> {
    let mesh = phi.mesh;
    let step = 0.25 * mesh.h;
    (0..samples)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            let dir = Vec2::new(a.cos(), a.sin());
            let at = |s: f64| phi.eval(center + dir * s);
            let mut lo = 0.0;
            if !(at(lo)? > 0.0) {
                return Err(Error::InvalidArgument("level set is not positive at the center".into()));
            }
            loop {
                let hi = lo + step;
                if !mesh.contains(center + dir * hi) {
                    return Err(Error::NoInterfaceFound { x: center.x, y: center.y });
                }
                if at(hi)? <= 0.0 {
                    let (mut a, mut b) = (lo, hi);
                    while b - a > 1e-12 {
                        let m = 0.5 * (a + b);
                        if at(m)? > 0.0 {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    return Ok(0.5 * (a + b));
                }
                lo = hi;
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::AnalyticLevelSet;
    use crate::mesh_fe::UniformQuadMesh;
    use std::f64::consts::PI;
    use std::sync::Arc;

    const C: Vec2 = Vec2::new(0.5, 0.5);

    fn setup(nx: usize, r: f64, dt_factor: f64) -> (CellQuadrature, LevelSetState, EvolutionParams) {
        let mesh = UniformQuadMesh::unit_square(nx).unwrap();
        let quad = CellQuadrature::with_default_rule(mesh);
        let params = EvolutionParams::for_mesh(mesh.h, dt_factor * mesh.h, 2.0);
        let phi = FEField::interpolate(mesh, |x| r - (x - C).norm());
        let state = LevelSetState::new(phi, params.sigma, &quad, 0.0).unwrap();
        (quad, state, params)
    }

    fn band_nodes(state: &LevelSetState, width: f64) -> impl Iterator<Item = usize> + '_ {
        (0..state.phi.values.len()).filter(move |&i| state.phi.values[i].abs() <= width)
    }

    #[test]
    fn distance_function_is_nearly_stationary() {
        // the cone tip away from the interface is relaxed by the penalty; the
        // band around the interface must stay put
        for nx in [32, 64] {
            let (quad, initial, params) = setup(nx, 0.25, 3.2);
            let h = quad.mesh.h;
            let ev = LevelSetEvolver::new(&quad, params).unwrap();
            let v = vec![Vec2::zeros(); quad.total_points()];
            let mut state = initial.clone();
            for _ in 0..(1.0 / params.dt).round() as usize {
                let next = ev.evolve_step(&state, &v).unwrap();
                let d = band_nodes(&initial, 2.0 * params.eps)
                    .map(|i| (next.phi.values[i] - state.phi.values[i]).abs())
                    .fold(0.0, f64::max);
                assert!(d <= h * h, "nx {nx}: step drift {d}");
                state = next;
            }
            let total = band_nodes(&initial, 2.0 * params.eps)
                .map(|i| (state.phi.values[i] - initial.phi.values[i]).abs())
                .fold(0.0, f64::max);
            assert!(total <= 0.1 * h, "nx {nx}: cumulative drift {total}");
        }
    }

    #[test]
    fn translation_moves_the_centroid() {
        let (quad, mut state, params) = setup(64, 0.2, 1.0);
        let ev = LevelSetEvolver::new(&quad, params).unwrap();
        let c = 0.5;
        let v = quadrature_velocity(&quad, |_| Vec2::new(c, 0.0));
        let k = params.kernels().unwrap();
        let start = interface_centroid(&state.level_set(), &k, &quad);
        let steps = 10;
        for _ in 0..steps {
            state = ev.evolve_step(&state, &v).unwrap();
        }
        let end = interface_centroid(&state.level_set(), &k, &quad);
        let expected = start + Vec2::new(c * params.dt * steps as f64, 0.0);
        assert!((end - expected).norm() < quad.mesh.h, "{end:?} vs {expected:?}");
        assert!((state.t - params.dt * steps as f64).abs() < 1e-12);
    }

    #[test]
    fn expansion_rate_and_normal_consistency() {
        let (quad, state, params) = setup(64, 0.25, 3.2);
        let law = MotionLaw::NormalDerivative { coefficient: 0.15 };
        let v = build_interface_velocity(&state, &law, &params, &quad, SearchMethod::Traversal).unwrap();
        let ev = LevelSetEvolver::new(&quad, params).unwrap();
        let k = params.kernels().unwrap();
        let radius = |s: &LevelSetState| (volume(&s.level_set(), &k, &quad) / PI).sqrt();
        let next = ev.evolve_step(&state, &v).unwrap();
        let growth = radius(&next) - radius(&state);
        let expected = 0.15 * params.dt;
        assert!((growth - expected).abs() <= 0.2 * expected, "{growth} vs {expected}");
        for i in band_nodes(&next, 4.0 * params.eps) {
            assert!((next.q.q.node(i).norm() - 1.0).abs() <= 0.1);
        }
    }

    #[test]
    fn speed_from_level_set_values() {
        let mesh = UniformQuadMesh::unit_square(64).unwrap();
        let eps = 2.0 * mesh.h;
        let law = MotionLaw::NormalDerivative { coefficient: 0.15 };
        let exact = LevelSetField::Analytic(AnalyticLevelSet::circle(C, 0.25));
        let scaled = LevelSetField::Analytic(AnalyticLevelSet::new(
            Arc::new(|x| 1.1 * (0.25 - (x - C).norm())),
            Arc::new(|x| -(x - C).normalize() * 1.1),
        ));
        for (ls, lo, hi) in [(&exact, 0.15 - 1e-9, 0.15 + 1e-9), (&scaled, 0.135 - 1e-9, 0.165 + 1e-9)] {
            let search = ClosestPointSearch::new(&mesh, ls, eps);
            for x in [Vec2::new(0.8, 0.5), Vec2::new(0.5, 0.3), Vec2::new(0.62, 0.61)] {
                let cp = search.project(x, SearchMethod::Traversal).unwrap();
                let v = law.speed(&cp, ls, eps).unwrap();
                assert!(v >= lo && v <= hi, "{v}");
            }
        }
        let prescribed = MotionLaw::Prescribed(Arc::new(|x: Vec2| x.y));
        let cp = ClosestPointSearch::new(&mesh, &exact, eps)
            .project(Vec2::new(0.5, 0.8), SearchMethod::Traversal)
            .unwrap();
        assert!((prescribed.speed(&cp, &exact, eps).unwrap() - 0.75).abs() < 1e-9);
    }

    #[test]
    fn volume_examples() {
        let quad = CellQuadrature::with_default_rule(UniformQuadMesh::unit_square(128).unwrap());
        let k = RegularizedKernels::for_mesh(quad.mesh.h, 2.0).unwrap();
        let circle = LevelSetField::Analytic(AnalyticLevelSet::circle(C, 0.25));
        assert!((volume(&circle, &k, &quad) - PI / 16.0).abs() <= 0.01 * PI / 16.0);
        let empty = LevelSetField::Analytic(AnalyticLevelSet::new(Arc::new(|_| -0.6), Arc::new(|_| Vec2::zeros())));
        assert!(volume(&empty, &k, &quad) <= 1e-6);
        let half = LevelSetField::Analytic(AnalyticLevelSet::half_plane(C, Vec2::new(1.0, 0.0)));
        assert!((volume(&half, &k, &quad) - 0.5).abs() <= 1e-3);
    }

    #[test]
    fn radii_of_interpolated_circle() {
        let (_, state, _) = setup(64, 0.3, 1.0);
        let r = zero_level_radii(&state.phi, C, 32).unwrap();
        assert!(r.iter().all(|v| (v - 0.3).abs() < 1e-3));
        assert!(zero_level_radii(&state.phi, Vec2::new(0.02, 0.02), 4).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let (quad, state, params) = setup(8, 0.25, 1.0);
        assert!(EvolutionParams { lambda: 0.0, ..params }.validate().is_err());
        assert!(EvolutionParams { sigma: -1.0, ..params }.validate().is_err());
        let ev = LevelSetEvolver::new(&quad, params).unwrap();
        assert!(ev.evolve_step(&state, &[]).is_err());
    }
}
