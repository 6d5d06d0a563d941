//! Problem description, ghost-penalty settings and time-stepping state.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::extrapolation::{BoundaryData, TimeScalarFn};
use crate::interface::{ScalarFn, VectorFn};
use crate::mesh_fe::FEField;

/// `du/dt + div(v u - kappa grad u) = 0` in the physical domain with
/// interface data on its boundary.
#[derive(Clone)]
pub struct ProblemSpec {
    pub kappa: f64,
    pub inviscid: Option<VectorFn>,
    pub boundary: BoundaryData,
    pub initial: ScalarFn,
    pub exact: Option<TimeScalarFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("kappa", &self.kappa)
            .field("inviscid", &self.inviscid.is_some())
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "diffusivity must be non-negative, got {}",
                self.kappa
            )));
        }
        self.boundary.validate()
    }

    pub fn require_parabolic(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidArgument(
                "implicit diffusion stepping needs a positive diffusivity".into(),
            ));
        }
        Ok(())
    }

    pub fn require_hyperbolic(&self) -> Result<()> {
        if self.inviscid.is_none() || self.kappa != 0.0 {
            return Err(Error::InvalidArgument(
                "explicit transport stepping needs a velocity field and zero diffusivity".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhostKind {
    Dirichlet,
    Neumann,
}

impl FromStr for GhostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" | "dgp" => Ok(Self::Dirichlet),
            "neumann" | "ngp" => Ok(Self::Neumann),
            other => Err(Error::InvalidArgument(format!("unknown ghost penalty '{other}'"))),
        }
    }
}

impl fmt::Display for GhostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        })
    }
}

/// Ghost penalty settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhostPenaltyConfig {
    pub kind: GhostKind,
    pub gamma: f64,
    /// Multiply the extension by the damping function.
    pub damped: bool,
    /// Row-sum lump the implicit penalty matrix (Dirichlet kind only).
    pub lumped_lhs: bool,
    /// Also damp the extensions entering the interface flux.
    pub damp_flux: bool,
}

impl GhostPenaltyConfig {
    /// `gamma = 1/h`.
    pub fn dirichlet(h: f64) -> Self {
        Self {
            kind: GhostKind::Dirichlet,
            gamma: 1.0 / h,
            damped: false,
            lumped_lhs: false,
            damp_flux: false,
        }
    }

    /// `gamma = h`.
    pub fn neumann(h: f64) -> Self {
        Self {
            kind: GhostKind::Neumann,
            gamma: h,
            damped: false,
            lumped_lhs: false,
            damp_flux: false,
        }
    }

    pub fn for_kind(kind: GhostKind, h: f64) -> Self {
        match kind {
            GhostKind::Dirichlet => Self::dirichlet(h),
            GhostKind::Neumann => Self::neumann(h),
        }
    }

    pub fn with_damping(mut self, damped: bool) -> Self {
        self.damped = damped;
        self
    }

    pub fn with_lumping(mut self, lumped: bool) -> Self {
        self.lumped_lhs = lumped;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "penalty parameter must be finite and non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransientState {
    pub u: FEField,
    pub t: f64,
    pub dt: f64,
}

impl TransientState {
    pub fn new(u: FEField, t: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { u, t, dt })
    }
}
