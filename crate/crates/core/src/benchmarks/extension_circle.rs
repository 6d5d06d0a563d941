use rayon::prelude::*;

use crate::benchmarks::{BenchmarkCase, CaseName, LevelSetMode, RunConfig};
use crate::error::{Error, Result};
use crate::extrapolation::ClosestPointSearch;
use crate::mesh_fe::{CellQuadrature, FEField, Vec2};

/// Band half-width in units of `eps`.
const BAND: f64 = 2.0;
const INTERFACE_SAMPLES: usize = 64;

/// Constant extension of `V = y (1 + y)` off the unit circle.
#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub nx: usize,
    pub h: f64,
    pub band_nodes: usize,
    /// Against the reference extension `y (r + y) / r`.
    pub linf_error: f64,
    pub l2_error: f64,
    /// Against the extension that is constant along normals, `(y/r)(1 + y/r)`.
    pub linf_normal: f64,
    pub l2_normal: f64,
    /// Largest error at query points on the circle itself.
    pub interface_error: f64,
    /// Largest difference of the error under `x -> -x`.
    pub symmetry: f64,
    pub extension: FEField,
    pub error: FEField,
    pub phi: FEField,
}

fn speed(x: Vec2) -> f64 {
    x.y * (1.0 + x.y)
}

fn reference_extension(x: Vec2) -> f64 {
    let r = x.norm();
    x.y * (r + x.y) / r
}

fn normal_extension(x: Vec2) -> f64 {
    speed(x / x.norm())
}

pub fn run_extension_circle(nx: usize, cfg: &RunConfig) -> Result<ExtensionReport> {
    if cfg.level_set == LevelSetMode::Advected {
        return Err(Error::InvalidArgument("the extension-circle case has a fixed interface".into()));
    }
    if nx < 4 || nx % 2 != 0 {
        return Err(Error::InvalidArgument(format!("extension-circle needs an even level >= 4, got {nx}")));
    }
    let case = BenchmarkCase::new(CaseName::ExtensionCircle);
    let mesh = case.mesh(nx)?;
    let quad = CellQuadrature::with_default_rule(mesh);
    let ls = case.level_set(0.0, &quad, cfg.level_set)?;
    let phi = ls.nodal_values(&quad);
    let eps = cfg.eps_factor * mesh.h;
    let search = ClosestPointSearch::new(&mesh, &ls, eps);

    let in_band: Vec<bool> = phi.values.iter().map(|p| p.abs() <= BAND * eps).collect();
    let values: Vec<Option<(f64, f64, f64)>> = (0..mesh.num_nodes())
        .into_par_iter()
        .map(|i| {
            if !in_band[i] {
                return Ok(None);
            }
            let x = mesh.node_coords(i);
            let v = speed(search.project(x, cfg.search)?.point);
            Ok(Some((v, v - reference_extension(x), v - normal_extension(x))))
        })
        .collect::<Result<_>>()?;

    let mut extension = FEField::zeros(mesh);
    let mut error = FEField::zeros(mesh);
    let (mut linf, mut sum, mut linf_n, mut sum_n) = (0.0f64, 0.0, 0.0f64, 0.0);
    for (i, v) in values.iter().enumerate() {
        if let Some((v, e, en)) = *v {
            extension.values[i] = v;
            error.values[i] = e;
            linf = linf.max(e.abs());
            linf_n = linf_n.max(en.abs());
            sum += e * e;
            sum_n += en * en;
        }
    }
    let area = mesh.h * mesh.h;

    let mut symmetry = 0.0f64;
    for i in 0..mesh.num_nodes() {
        let (a, b) = mesh.node_ij(i);
        let m = mesh.node_index(mesh.nx - a, b);
        if in_band[i] && in_band[m] {
            symmetry = symmetry.max((error.values[i] - error.values[m]).abs());
        }
    }

    let interface_error = (0..INTERFACE_SAMPLES)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / INTERFACE_SAMPLES as f64;
            let x = Vec2::new(a.cos(), a.sin());
            Ok((speed(search.project(x, cfg.search)?.point) - speed(x)).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    Ok(ExtensionReport {
        nx,
        h: mesh.h,
        band_nodes: in_band.iter().filter(|&&b| b).count(),
        linf_error: linf,
        l2_error: (area * sum).sqrt(),
        linf_normal: linf_n,
        l2_normal: (area * sum_n).sqrt(),
        interface_error,
        symmetry,
        extension,
        error,
        phi,
    })
}
