//! Convergence studies on a circular interface and their table/field output.
//!
//! Each case runs a sequence of uniform meshes, measures the error in the
//! `H`-weighted L2 norm against a closed-form solution and reports
//! experimental orders of convergence between successive levels.

mod cases;
mod extension_circle;
mod output;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrapolation::SearchMethod;
use crate::interface::RegularizedKernels;
use crate::mesh_fe::{FEField, QuadratureRule, Vec2};
use crate::transport::GhostKind;

pub use cases::{run_case, run_level, BenchmarkCase, CaseReport, LevelResult};
pub use extension_circle::{run_extension_circle, ExtensionReport};
pub use output::{csv_file_name, write_case_outputs, write_csv, write_extension_csv, write_extension_outputs};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseName {
    Elliptic,
    Parabolic,
    Hyperbolic,
    ParabolicLs,
    ExtensionCircle,
}

impl CaseName {
    pub const ALL: [CaseName; 5] = [
        Self::Elliptic,
        Self::Parabolic,
        Self::Hyperbolic,
        Self::ParabolicLs,
        Self::ExtensionCircle,
    ];
}

impl FromStr for CaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown case '{s}'")))
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Elliptic => "elliptic",
            Self::Parabolic => "parabolic",
            Self::Hyperbolic => "hyperbolic",
            Self::ParabolicLs => "parabolic-ls",
            Self::ExtensionCircle => "extension-circle",
        })
    }
}

/// How the interface is represented during a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LevelSetMode {
    /// Closed-form signed distance.
    Analytic,
    /// Nodal interpolant of the signed distance with its averaged gradient.
    #[default]
    Interpolated,
    /// Interpolated initial state, then evolved with the level-set solver.
    Advected,
}

impl fmt::Display for LevelSetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::Interpolated => "interpolated",
            Self::Advected => "advected",
        })
    }
}

impl FromStr for LevelSetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "interpolated" => Ok(Self::Interpolated),
            "advected" => Ok(Self::Advected),
            other => Err(Error::InvalidArgument(format!("unknown level-set mode '{other}'"))),
        }
    }
}

/// Settings shared by every level of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Cells per side of each level.
    pub levels: Vec<usize>,
    pub ghost: GhostKind,
    pub damped: bool,
    /// `eps = eps_factor h`.
    pub eps_factor: f64,
    /// Half-width of the damping band in units of `eps`.
    pub m_damp: f64,
    /// Fixed-point passes per Crank-Nicolson step.
    pub cn_passes: usize,
    pub search: SearchMethod,
    pub level_set: LevelSetMode,
    /// Interface thickness of the Heaviside weight in the error norm.
    pub fine_eps: f64,
    pub vtk: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            levels: vec![16, 32, 64, 128],
            ghost: GhostKind::Dirichlet,
            damped: false,
            eps_factor: 2.0,
            m_damp: 5.0,
            cn_passes: 2,
            search: SearchMethod::Traversal,
            level_set: LevelSetMode::Interpolated,
            fine_eps: 2.0 / 1024.0,
            vtk: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidArgument("at least one level is required".into()));
        }
        if let Some(&nx) = self.levels.iter().find(|&&n| n < 4) {
            return Err(Error::InvalidArgument(format!("level {nx} is too coarse")));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("eps factor", self.eps_factor)?;
        positive("damping width", self.m_damp)?;
        positive("error-norm thickness", self.fine_eps)?;
        if self.cn_passes == 0 {
            return Err(Error::InvalidArgument("at least one fixed-point pass is required".into()));
        }
        Ok(())
    }

    /// Band label used in file names.
    pub fn band_label(&self) -> &'static str {
        if self.damped {
            "damped"
        } else {
            "full"
        }
    }
}

/// One line of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub inv_h: usize,
    pub inv_dt: Option<f64>,
    pub l2_error: f64,
    /// Order against the previous row; absent on the first.
    pub eoc: Option<f64>,
}

/// `log2(e_{k-1} / e_k)` for successive entries.
pub fn eoc(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Rows with orders filled in.
pub fn convergence_rows(levels: &[(usize, Option<f64>, f64)]) -> Vec<ConvergenceRow> {
    let errors: Vec<f64> = levels.iter().map(|l| l.2).collect();
    let orders = eoc(&errors);
    levels
        .iter()
        .enumerate()
        .map(|(i, &(inv_h, inv_dt, l2_error))| ConvergenceRow {
            inv_h,
            inv_dt,
            l2_error,
            eoc: i.checked_sub(1).map(|j| orders[j]),
        })
        .collect()
}

const ERROR_SUBCELLS: usize = 8;

/// `sqrt(int H_eps(phi) (u_h - u)^2 dx)` with a fixed thin `eps` and the exact `phi`.
///
/// Each cell is split into `8 x 8` sub-cells with a 2x2 Gauss rule, so the
/// thin Heaviside is resolved independently of the mesh.
pub fn l2_error(
    u: &FEField,
    exact: &(dyn Fn(Vec2) -> f64 + Sync),
    phi: &(dyn Fn(Vec2) -> f64 + Sync),
    fine_eps: f64,
) -> Result<f64> {
    let kernels = RegularizedKernels::new(fine_eps, 2.0)?;
    let mesh = u.mesh;
    let rule = QuadratureRule::gauss(2)?;
    let s = ERROR_SUBCELLS;
    let sub = 1.0 / s as f64;
    let area = mesh.h * mesh.h * sub * sub;
    let per_cell: Vec<f64> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|cell| {
            let nodes = mesh.cell_nodes(cell);
            let vals = nodes.map(|n| u.values[n]);
            let mut sum = 0.0;
            for a in 0..s {
                for b in 0..s {
                    for (p, w) in rule.points.iter().zip(&rule.weights) {
                        let local = [(a as f64 + p[0]) * sub, (b as f64 + p[1]) * sub];
                        let x = mesh.local_to_global(cell, local);
                        let n = crate::mesh_fe::shape_values(local);
                        let uh: f64 = (0..4).map(|k| n[k] * vals[k]).sum();
                        let e = uh - exact(x);
                        sum += w * area * kernels.heaviside(phi(x)) * e * e;
                    }
                }
            }
            sum
        })
        .collect();
    Ok(per_cell.iter().sum::<f64>().sqrt())
}
