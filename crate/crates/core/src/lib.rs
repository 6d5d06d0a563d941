//! Unfitted finite elements on uniform Q1 meshes with diffuse, level-set
//! defined embedded boundaries.
//!
//! Interface conditions are imposed through volume integrals weighted by a
//! regularized delta function. Boundary data is carried from the interface
//! into quadrature points by closest-point projection along an averaged
//! level-set gradient followed by constant or linear Taylor extrapolation.
//! Ghost penalties extend the solution into the fictitious part of the box.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh_fe`]: uniform mesh, Q1 fields, quadrature, CSR + CG, VTK output
//! - [`interface`]: level sets, regularized kernels, averaged gradient
//! - [`extrapolation`]: closest-point search, gradient reconstruction, extensions
//! - [`transport`]: assembly and time stepping of the diffuse conservation law
//! - [`levelset_evolution`]: conservative level-set transport with extension velocities
//! - [`benchmarks`]: the elliptic/parabolic/hyperbolic convergence studies

pub mod benchmarks;
pub mod error;
pub mod extrapolation;
pub mod interface;
pub mod levelset_evolution;
pub mod mesh_fe;
pub mod transport;

pub use error::{Error, Result};
pub use mesh_fe::{CsrMatrix, FEField, QuadratureRule, UniformQuadMesh, Vec2};
