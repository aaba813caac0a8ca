//! Fractional Biot–Savart kernels on the plane and on periodic cells.
//!
//! The plane kernel is `K(x) = c(eps) x^perp |x|^(eps-3)`, the perpendicular gradient of
//! the Riesz potential `G(x) = g(eps) |x|^(eps-1)`. On the torus of side `M` both are
//! obtained from the unit-torus versions by `K^M(x) = M^(eps-2) K^1(x/M)` and
//! `G^M(x) = M^(eps-1) G^1(x/M)`.

mod checks;
mod ewald;
mod images;
mod periodic;
mod spectral;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{check_epsilon, check_positive, Error, Result};
use crate::geometry::{reduce_to_cell, Vec2};

pub use checks::{
    convergence_points, kernel_bound_scan, kernel_convergence, poisson_coefficient_check,
    poisson_coefficients, BoundScan, ConvergencePoint, ConvergenceReport, ConvergenceRow,
    PoissonCoefficient,
};
pub use ewald::Ewald;
pub use images::kernel_torus_images;
pub use periodic::{KernelEvaluator, PeriodicTable};
pub use spectral::{kernel_torus_spectral, stream_green_torus, SpectralSeries};

/// Where the kernel lives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Plane,
    Torus { side: f64 },
}

/// What an evaluator returns at the singular point (the origin, or a lattice point).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginRule {
    /// Report a singularity error.
    #[default]
    Singular,
    /// Return zero, which removes self-interaction in vortex sums.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub epsilon: f64,
    pub domain: Domain,
    #[serde(default)]
    pub origin: OriginRule,
}

impl KernelSpec {
    pub fn plane(epsilon: f64) -> Result<Self> {
        let s = KernelSpec {
            epsilon,
            domain: Domain::Plane,
            origin: OriginRule::Singular,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn torus(epsilon: f64, side: f64) -> Result<Self> {
        let s = KernelSpec {
            epsilon,
            domain: Domain::Torus { side },
            origin: OriginRule::Singular,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_origin(mut self, origin: OriginRule) -> Self {
        self.origin = origin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if let Domain::Torus { side } = self.domain {
            check_positive("M", side)?;
        }
        Ok(())
    }

    pub fn side(&self) -> Option<f64> {
        match self.domain {
            Domain::Plane => None,
            Domain::Torus { side } => Some(side),
        }
    }

    pub(crate) fn torus_side(&self) -> Result<f64> {
        self.validate()?;
        self.side()
            .ok_or(Error::DomainMismatch("this evaluator needs a torus kernel"))
    }
}

/// How a lattice series is truncated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// Plain square partial sums `|k|_inf <= n_max`.
    Raw,
    /// Square sums with a convergence accelerator: a smooth cutoff for Fourier series,
    /// a boundary correction for image sums.
    Accelerated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeTruncation {
    pub n_max: usize,
    pub tail_tol: f64,
    pub summation: Summation,
}

impl LatticeTruncation {
    pub fn new(n_max: usize, tail_tol: f64) -> Self {
        LatticeTruncation {
            n_max,
            tail_tol,
            summation: Summation::Accelerated,
        }
    }

    pub fn raw(mut self) -> Self {
        self.summation = Summation::Raw;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                value: "0".into(),
                expected: "an integer >= 1",
            });
        }
        check_positive("tail_tol", self.tail_tol)
    }
}

impl Default for LatticeTruncation {
    fn default() -> Self {
        LatticeTruncation::new(64, 1e-8)
    }
}

/// A truncated series value with the change produced by the last refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue<T> {
    pub value: T,
    /// Size of the change between the result and a coarser truncation of the same series.
    pub shell_change: f64,
    pub converged: bool,
}

/// `c(eps)` in `K(x) = c(eps) x^perp |x|^(eps-3)`; negative on `(0, 1)`.
pub fn kernel_constant(epsilon: f64) -> f64 {
    (epsilon - 1.0) * green_constant(epsilon)
}

/// `g(eps)` in `G(x) = g(eps) |x|^(eps-1)`.
pub fn green_constant(epsilon: f64) -> f64 {
    gamma(0.5 * (1.0 - epsilon))
        / (2f64.powf(1.0 + epsilon) * std::f64::consts::PI * gamma(0.5 * (1.0 + epsilon)))
}

#[inline]
pub(crate) fn plane_kernel_unchecked(c: f64, epsilon: f64, x: Vec2) -> Vec2 {
    let r2 = x.norm_sq();
    x.perp() * (c * r2.powf(0.5 * (epsilon - 3.0)))
}

pub fn kernel_plane(spec: &KernelSpec, x: Vec2) -> Result<Vec2> {
    spec.validate()?;
    if spec.side().is_some() {
        return Err(Error::DomainMismatch("kernel_plane needs a plane kernel"));
    }
    if x == Vec2::ZERO {
        return match spec.origin {
            OriginRule::Singular => Err(Error::Singularity(x)),
            OriginRule::Zero => Ok(Vec2::ZERO),
        };
    }
    Ok(plane_kernel_unchecked(
        kernel_constant(spec.epsilon),
        spec.epsilon,
        x,
    ))
}

/// Riesz potential `G(x) = g(eps) |x|^(eps-1)` on the plane.
pub fn green_plane(spec: &KernelSpec, x: Vec2) -> Result<f64> {
    spec.validate()?;
    if spec.side().is_some() {
        return Err(Error::DomainMismatch("green_plane needs a plane kernel"));
    }
    if x == Vec2::ZERO {
        return match spec.origin {
            OriginRule::Singular => Err(Error::Singularity(x)),
            OriginRule::Zero => Ok(0.0),
        };
    }
    Ok(green_constant(spec.epsilon) * x.norm().powf(spec.epsilon - 1.0))
}

/// Reduce a torus point to unit-cell coordinates `x/M` in `[-1/2, 1/2)^2`.
/// Returns `None` when the point sits on the lattice.
pub(crate) fn unit_cell_point(x: Vec2, side: f64) -> Option<Vec2> {
    let eta = reduce_to_cell(x, side) / side;
    (eta != Vec2::ZERO).then_some(eta)
}
