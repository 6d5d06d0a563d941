//! Interface description: level sets, regularized kernels and the averaged gradient.

pub mod kernels;
pub mod levelset;

pub use kernels::{damping, delta_eps, heaviside_eps, sign_eps, RegularizedKernels};
pub use levelset::{
    averaged_gradient, interface_measure, AnalyticLevelSet, AveragedGradient, DiscreteLevelSet,
    LevelSetField, ScalarFn, VectorFn, DEFAULT_SIGMA,
};
