//! Run settings from flags, optionally overridden by a `key=value` file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use diffsbm_core::benchmarks::{CaseName, LevelSetMode, RunConfig};
use diffsbm_core::extrapolation::SearchMethod;
use diffsbm_core::transport::GhostKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Band {
    Full,
    Damped,
}

/// Convergence studies for diffuse-interface unfitted finite elements.
#[derive(Debug, Parser)]
#[command(name = "diffsbm", version)]
pub struct Args {
    /// elliptic, parabolic, hyperbolic, parabolic-ls or extension-circle.
    #[arg(long, default_value = "elliptic")]
    pub case: CaseName,

    /// Cells per side, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub levels: Vec<usize>,

    /// Ghost penalty: dirichlet or neumann.
    #[arg(long, default_value = "dirichlet")]
    pub ghost: GhostKind,

    #[arg(long, value_enum, default_value = "full")]
    pub band: Band,

    /// Interface thickness in units of h.
    #[arg(long, default_value_t = 2.0)]
    pub eps_factor: f64,

    /// Damping band half-width in units of eps.
    #[arg(long, default_value_t = 5.0)]
    pub m_damp: f64,

    /// Fixed-point passes per Crank-Nicolson step.
    #[arg(long, default_value_t = 2)]
    pub cn_passes: usize,

    /// Interface thickness of the error-norm weight.
    #[arg(long, default_value_t = 2.0 / 1024.0)]
    pub fine_eps: f64,

    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,

    /// Also write one VTK file per level.
    #[arg(long)]
    pub vtk: bool,

    /// Use the closed-form signed distance instead of its interpolant.
    #[arg(long, conflicts_with = "advect_ls")]
    pub analytic_ls: bool,

    /// Evolve the level set instead of prescribing it.
    #[arg(long)]
    pub advect_ls: bool,

    /// Closest-point search: traversal or bisection.
    #[arg(long, default_value = "traversal")]
    pub search: SearchMethod,

    /// File of `key=value` lines overriding the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub case: CaseName,
    pub run: RunConfig,
    pub out: PathBuf,
}

impl Settings {
    pub fn from_args(args: &Args) -> Result<Self> {
        let level_set = if args.analytic_ls {
            LevelSetMode::Analytic
        } else if args.advect_ls {
            LevelSetMode::Advected
        } else {
            LevelSetMode::Interpolated
        };
        let mut s = Self {
            case: args.case,
            run: RunConfig {
                levels: args.levels.clone(),
                ghost: args.ghost,
                damped: args.band == Band::Damped,
                eps_factor: args.eps_factor,
                m_damp: args.m_damp,
                cn_passes: args.cn_passes,
                search: args.search,
                level_set,
                fine_eps: args.fine_eps,
                vtk: args.vtk,
            },
            out: args.out.clone(),
        };
        if let Some(path) = &args.config {
            s.apply_file(path)?;
        }
        // an advected interface turns the prescribed-motion case into the coupled one
        if s.case == CaseName::Parabolic && s.run.level_set == LevelSetMode::Advected {
            s.case = CaseName::ParabolicLs;
        }
        Ok(s)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text)
            .with_context(|| format!("in config file {}", path.display()))
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", n + 1))?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('_', "-");
        let r = &mut self.run;
        match key.as_str() {
            "case" => self.case = value.parse()?,
            "levels" => {
                r.levels = value
                    .split(',')
                    .map(|v| v.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .with_context(|| format!("bad level list '{value}'"))?
            }
            "ghost" => r.ghost = value.parse()?,
            "band" => {
                r.damped = Band::from_str(value, true).map_err(|e| anyhow!(e))? == Band::Damped;
            }
            "eps-factor" => r.eps_factor = value.parse()?,
            "m-damp" => r.m_damp = value.parse()?,
            "cn-passes" => r.cn_passes = value.parse()?,
            "fine-eps" => r.fine_eps = value.parse()?,
            "out" => self.out = PathBuf::from(value),
            "vtk" => r.vtk = value.parse()?,
            "search" => r.search = value.parse()?,
            "level-set" => r.level_set = value.parse()?,
            "analytic-ls" if value.parse::<bool>()? => r.level_set = LevelSetMode::Analytic,
            "advect-ls" if value.parse::<bool>()? => r.level_set = LevelSetMode::Advected,
            "analytic-ls" | "advect-ls" => {}
            other => bail!("unknown key '{other}'"),
        }
        Ok(())
    }
}
