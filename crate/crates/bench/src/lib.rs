//! Shared fixtures for the criterion benchmarks: the elliptic circle setup at
//! a given resolution.

use diffsbm_core::benchmarks::{BenchmarkCase, CaseName, LevelSetMode};
use diffsbm_core::extrapolation::SearchMethod;
use diffsbm_core::interface::{LevelSetField, RegularizedKernels};
use diffsbm_core::mesh_fe::{CellQuadrature, Vec2};
use diffsbm_core::transport::{GeometryNeeds, InterfaceGeometry, ProblemSpec};

pub struct CircleFixture {
    pub case: BenchmarkCase,
    pub quad: CellQuadrature,
    pub analytic: LevelSetField,
    pub interpolated: LevelSetField,
    pub kernels: RegularizedKernels,
    pub problem: ProblemSpec,
}

impl CircleFixture {
    pub fn new(nx: usize) -> Self {
        let case = BenchmarkCase::new(CaseName::Elliptic);
        let quad = CellQuadrature::with_default_rule(case.mesh(nx).expect("valid level"));
        let level_set = |mode| case.level_set(0.0, &quad, mode).expect("level set");
        Self {
            analytic: level_set(LevelSetMode::Analytic),
            interpolated: level_set(LevelSetMode::Interpolated),
            kernels: RegularizedKernels::new(2.0 * quad.mesh.h, 5.0).expect("kernels"),
            problem: case.problem(),
            case,
            quad,
        }
    }

    /// `n` points spread over the band `|phi| < 4 eps`.
    pub fn band_points(&self, n: usize) -> Vec<Vec2> {
        let eps = self.kernels.eps;
        (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 * 0.618_033_988_749_895).fract();
                let s = -4.0 + 8.0 * (k as f64 + 0.5) / n as f64;
                self.case.center + Vec2::new(a.cos(), a.sin()) * (self.case.radius + s * eps)
            })
            .collect()
    }

    pub fn geometry(&self, ls: &LevelSetField, damped: bool) -> InterfaceGeometry {
        let needs = GeometryNeeds { flux: true, ghost: Some(damped) };
        InterfaceGeometry::build(&self.quad, ls, self.kernels, needs, SearchMethod::Traversal).expect("geometry")
    }
}
