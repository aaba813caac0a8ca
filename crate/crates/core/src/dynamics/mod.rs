//! Point-vortex and Galerkin-truncated spectral evolution of mSQG.

mod galerkin;
mod vortex;

pub use galerkin::{
    galerkin_rhs, integrate_galerkin, GalerkinRun, GalerkinSample, GalerkinSolver, SpectralState,
};
pub use vortex::{integrate_vortex, vortex_rhs, VortexRun, VortexSample, VortexState, VortexSystem};
