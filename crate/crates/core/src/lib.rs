//! Kernels, white-noise fields, renormalized quadratic forms and dynamics for the
//! modified SQG equation with white-noise data.

pub mod chebyshev;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod kernels;
pub mod modes;
pub mod noise;
pub mod quadform;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod testfn;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{reduce_to_cell, Rect, Vec2};
pub use kernels::{
    kernel_plane, kernel_torus_images, kernel_torus_spectral, Domain, KernelEvaluator, KernelSpec,
    LatticeTruncation, OriginRule, SeriesValue, Summation,
};
pub use modes::ModeTable;
pub use noise::{pair, sample_draw, sample_white_noise, weighted_sobolev_norm_sq, NoiseField, Pairing, WeightSpec};
pub use quadform::{
    build_fn, h_phi, nonlinear_estimate, quad_pair, quad_pair_grid, quad_pair_renormalized,
    BandCutoff, Bikernel, TransportBikernel, TrigBikernel,
};
pub use dynamics::{
    integrate_galerkin, integrate_vortex, GalerkinSolver, SpectralState, VortexState, VortexSystem,
};
pub use testfn::{Bump, TestFunction, TrigPolynomial, TrigTerm};
pub use verify::{
    invariance_experiment, residual_refinement, vortex_marginal_experiment, weakform_residual,
    GaussianityReport, InvarianceConfig, ResidualConfig, VortexMarginalConfig,
};
