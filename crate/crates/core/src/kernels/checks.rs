//! Numerical checks of the periodic kernel against its closed forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::images::ImageSum;
use super::{
    kernel_constant, kernel_plane, kernel_torus_images, Domain, KernelEvaluator, KernelSpec,
    LatticeTruncation,
};
use crate::error::{check_epsilon, Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::quadrature::GaussLegendre;

/// Result of [`kernel_bound_scan`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundScan {
    /// `sup |x|^(2-eps) |K(x)|` over the samples.
    pub sup: f64,
    /// Sample attaining the supremum.
    pub argmax: Vec2,
    pub samples: usize,
}

/// Smallest sampled radius, relative to the half side of the cell.
const SCAN_MIN_RADIUS: f64 = 1e-4;

/// Scan `|x|^(2-eps) |K(x)|` over log-radially distributed points of the cell.
///
/// Samples are drawn sequentially from one ChaCha stream, so a larger `sample_count`
/// extends the sample set of a smaller one and the supremum can only grow. On the plane
/// the scanned quantity is the constant `|c(eps)|`, returned as such.
pub fn kernel_bound_scan(spec: &KernelSpec, sample_count: usize, seed: u64) -> Result<BoundScan> {
    spec.validate()?;
    if sample_count == 0 {
        return Err(Error::InvalidParameter {
            name: "sample_count",
            value: "0".into(),
            expected: "an integer >= 1",
        });
    }
    let eps = spec.epsilon;
    let side = match spec.domain {
        Domain::Plane => {
            return Ok(BoundScan {
                sup: kernel_constant(eps).abs(),
                argmax: Vec2::new(1.0, 0.0),
                samples: sample_count,
            })
        }
        Domain::Torus { side } => side,
    };
    let eval = KernelEvaluator::new(spec)?;
    let half = 0.5 * side;
    let r_lo = SCAN_MIN_RADIUS * half;
    let r_hi = half * std::f64::consts::SQRT_2;
    let log_span = (r_hi / r_lo).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = BoundScan {
        sup: 0.0,
        argmax: Vec2::ZERO,
        samples: sample_count,
    };
    let mut accepted = 0;
    while accepted < sample_count {
        let u: f64 = rng.random();
        let theta: f64 = rng.random::<f64>() * 2.0 * PI;
        let r = r_lo * (u * log_span).exp();
        let x = Vec2::new(r * theta.cos(), r * theta.sin());
        if x.max_abs() >= half {
            continue;
        }
        accepted += 1;
        let v = r.powf(2.0 - eps) * eval.kernel(x).norm();
        if v > best.sup {
            best.sup = v;
            best.argmax = x;
        }
    }
    Ok(best)
}

/// One Fourier coefficient of the periodized plane kernel.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PoissonCoefficient {
    pub k: [i64; 2],
    pub computed: [Complex64; 2],
    pub expected: [Complex64; 2],
    /// `|computed - expected| / |expected|` with Euclidean norms on `C^2`.
    pub rel_error: f64,
}

/// Number of dyadic rings around the singular point.
const RING_LEVELS: usize = 12;
/// Image truncation used for the periodized kernel at every node.
const IMAGE_CUTOFF: usize = 24;
/// Relative change between resolutions `q` and `q + 2` treated as failure.
const REFINEMENT_TOL: f64 = 1e-4;

/// Weighted nodes covering the unit cell: dyadic rings of squares closing in on the
/// origin, then a polar rule on the innermost square with the radius stretched as
/// `r = r_max v^(1/eps)`, which turns the `r^(eps-2)` singularity into a smooth integrand.
fn cell_nodes(epsilon: f64, q: usize) -> Vec<(Vec2, f64)> {
    let gl = GaussLegendre::new(q);
    let mut nodes = Vec::new();
    let mut h = 0.5;
    for _ in 0..RING_LEVELS {
        let s = 0.5 * h;
        for i in 0..4 {
            for j in 0..4 {
                if (1..3).contains(&i) && (1..3).contains(&j) {
                    continue;
                }
                let x0 = -h + s * i as f64;
                let y0 = -h + s * j as f64;
                nodes.extend(gl.rect_nodes(Rect::new(x0, x0 + s, y0, y0 + s)));
            }
        }
        h = s;
    }
    // innermost square [-h, h]^2 as eight triangles with a vertex at the origin
    for side in 0..4 {
        let rot = 0.5 * PI * side as f64;
        for (phi, wphi) in gl.on(-0.25 * PI, 0.25 * PI) {
            let r_max = h / phi.cos();
            let theta = rot + phi;
            let dir = Vec2::new(theta.cos(), theta.sin());
            for (v, wv) in gl.on(0.0, 1.0) {
                let r = r_max * v.powf(1.0 / epsilon);
                let jac = r_max / epsilon * v.powf(1.0 / epsilon - 1.0);
                nodes.push((dir * r, wphi * wv * jac * r));
            }
        }
    }
    nodes
}

fn expected_coefficient(epsilon: f64, k: [i64; 2]) -> [Complex64; 2] {
    let kk = Vec2::new(k[0] as f64, k[1] as f64);
    let s = (2.0 * PI).powf(-epsilon) * kk.norm().powf(-1.0 - epsilon);
    let kp = kk.perp();
    [Complex64::new(0.0, kp.x * s), Complex64::new(0.0, kp.y * s)]
}

fn coefficients_at(
    epsilon: f64,
    ks: &[[i64; 2]],
    q: usize,
    images: &ImageSum,
) -> Vec<[Complex64; 2]> {
    let nodes = cell_nodes(epsilon, q);
    let values: Vec<Vec2> = nodes
        .par_iter()
        .map(|&(eta, _)| images.value(eta, IMAGE_CUTOFF))
        .collect();
    ks.iter()
        .map(|&k| {
            let kk = Vec2::new(k[0] as f64, k[1] as f64);
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for (&(eta, w), p) in nodes.iter().zip(&values) {
                let (s, c) = (-2.0 * PI * kk.dot(eta)).sin_cos();
                let e = Complex64::new(c, s) * w;
                acc[0] += e * p.x;
                acc[1] += e * p.y;
            }
            acc
        })
        .collect()
}

/// Fourier coefficients `int P(eta) e^(-2 pi i k.eta) d eta` of the image sum
/// `P(eta) = sum_l K(eta + l)` on the unit torus, against `(2 pi)^-eps i k^perp / |k|^(1+eps)`.
///
/// `resolution` is the Gauss–Legendre order per cell and direction. The computation is
/// repeated at `resolution + 2`; a relative change above `1e-4` is a quadrature failure.
pub fn poisson_coefficients(
    epsilon: f64,
    ks: &[[i64; 2]],
    resolution: usize,
) -> Result<Vec<PoissonCoefficient>> {
    check_epsilon(epsilon)?;
    if resolution < 2 {
        return Err(Error::InvalidParameter {
            name: "quadrature_resolution",
            value: resolution.to_string(),
            expected: "an integer >= 2",
        });
    }
    if let Some(k) = ks.iter().find(|k| k[0] == 0 && k[1] == 0) {
        return Err(Error::InvalidParameter {
            name: "k",
            value: format!("({}, {})", k[0], k[1]),
            expected: "a nonzero lattice vector",
        });
    }
    let images = ImageSum::new(epsilon)?;
    let coarse = coefficients_at(epsilon, ks, resolution, &images);
    let fine = coefficients_at(epsilon, ks, resolution + 2, &images);
    let mut out = Vec::with_capacity(ks.len());
    for ((&k, c), f) in ks.iter().zip(&coarse).zip(&fine) {
        let expected = expected_coefficient(epsilon, k);
        let norm = |v: &[Complex64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let diff = |a: &[Complex64; 2], b: &[Complex64; 2]| norm(&[a[0] - b[0], a[1] - b[1]]);
        let refinement = diff(f, c) / norm(f);
        if refinement > REFINEMENT_TOL {
            return Err(Error::QuadratureFailure(format!(
                "coefficient k = ({}, {}) changed by {refinement:.3e} between orders {} and {}",
                k[0],
                k[1],
                resolution,
                resolution + 2
            )));
        }
        out.push(PoissonCoefficient {
            k,
            computed: *f,
            expected,
            rel_error: diff(f, &expected) / norm(&expected),
        });
    }
    Ok(out)
}

/// Single-coefficient form of [`poisson_coefficients`]; returns `(computed, expected)`.
pub fn poisson_coefficient_check(
    epsilon: f64,
    k: [i64; 2],
    resolution: usize,
) -> Result<([Complex64; 2], [Complex64; 2])> {
    let c = poisson_coefficients(epsilon, &[k], resolution)?;
    Ok((c[0].computed, c[0].expected))
}

/// Relative error of `K^M` against the plane kernel at one point and side.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergenceRow {
    pub point: usize,
    pub x: Vec2,
    pub side: f64,
    pub rel_error: f64,
}

/// Per-point summary of [`kernel_convergence`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergencePoint {
    pub point: usize,
    pub x: Vec2,
    /// error at the largest side
    pub final_rel_error: f64,
    /// steps where the error did not decrease
    pub non_monotone_steps: usize,
    /// final error at most `1e-3` with at most one non-monotone step
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub points: Vec<ConvergencePoint>,
    pub pass: bool,
}

/// Ten fixed points inside the cell of side 4, at radii between 0.05 and 1.5.
pub fn convergence_points() -> Vec<Vec2> {
    (0..10)
        .map(|i| {
            let r = 0.05 * 30f64.powf(i as f64 / 9.0);
            let th = 0.3 + 2.0 * PI * i as f64 * 0.382;
            Vec2::new(r * th.cos(), r * th.sin())
        })
        .collect()
}

/// `|K^M(x) - K(x)| / |K(x)|` for every point and side, with `K^M` from the image sum.
pub fn kernel_convergence(
    epsilon: f64,
    points: &[Vec2],
    sides: &[f64],
    trunc: &LatticeTruncation,
) -> Result<ConvergenceReport> {
    let plane = KernelSpec::plane(epsilon)?;
    if sides.windows(2).any(|w| w[1] <= w[0]) || sides.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sides",
            value: format!("{sides:?}"),
            expected: "an increasing list of torus sides",
        });
    }
    let mut rows = Vec::with_capacity(points.len() * sides.len());
    let mut summary = Vec::with_capacity(points.len());
    for (i, &x) in points.iter().enumerate() {
        let exact = kernel_plane(&plane, x)?;
        let errs: Vec<f64> = sides
            .iter()
            .map(|&m| {
                let spec = KernelSpec::torus(epsilon, m)?;
                if x.max_abs() >= 0.5 * m {
                    return Err(Error::InvalidParameter {
                        name: "sides",
                        value: m.to_string(),
                        expected: "cells containing every sample point",
                    });
                }
                let v = kernel_torus_images(&spec, x, trunc)?.value;
                Ok((v - exact).norm() / exact.norm())
            })
            .collect::<Result<_>>()?;
        for (&side, &rel_error) in sides.iter().zip(&errs) {
            rows.push(ConvergenceRow { point: i, x, side, rel_error });
        }
        let non_monotone = errs.windows(2).filter(|w| w[1] >= w[0]).count();
        let last = *errs.last().expect("sides is not empty");
        summary.push(ConvergencePoint {
            point: i,
            x,
            final_rel_error: last,
            non_monotone_steps: non_monotone,
            pass: last <= 1e-3 && non_monotone <= 1,
        });
    }
    let pass = summary.iter().all(|p| p.pass);
    Ok(ConvergenceReport { rows, points: summary, pass })
}
