//! Assembly and time integration of the diffuse-domain transport problem.

pub mod assembly;
pub mod geometry;
pub mod problem;
pub mod stepping;

pub use assembly::{
    assemble_advection, assemble_flux_surrogate, assemble_ghost_penalty, assemble_ghost_rhs, assemble_interface_rhs,
    assemble_penalty_matrix, assemble_stiffness, assemble_unweighted_mass,
    assemble_unweighted_stiffness, assemble_weighted_mass, interface_flux_at,
};
pub use geometry::{GeometryNeeds, InterfaceGeometry, PointEval, Projection, QpData};
pub use problem::{GhostKind, GhostPenaltyConfig, ProblemSpec, TransientState};
pub use stepping::{ssp_rk2, Operators, SolverSettings, SteadyState, TransportSolver};
