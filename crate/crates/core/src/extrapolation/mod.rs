//! Closest-point projection and extrapolation of interface data into the
//! diffuse band.

pub mod closest_point;
pub mod extension;
pub mod ghost;
pub mod reconstruct;

pub use closest_point::{ClosestPoint, ClosestPointSearch, SearchMethod, DEGENERATE_NORMAL};
pub use extension::{
    extend_normal_derivative, extend_value_linear, extension_velocity, interface_flux_g,
    upwind_inviscid_extension, ExtensionEvaluation, FluxParams, UpwindFlux,
};
pub use ghost::{
    dirichlet_ghost_value, extension_weight, neumann_ghost_gradient, DirichletGhostField,
    NeumannGhostField, SKIP_THRESHOLD,
};
pub use reconstruct::{
    gradient_with_normal_derivative, reconstruct_gradient, reconstruct_normal_derivative,
    BoundaryData, ReconstructedGradient, Stencil2D, TimeScalarFn,
};
