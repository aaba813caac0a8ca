//! Lattice-image sum of the plane kernel.

use super::spectral::at_lattice;
use super::{
    kernel_constant, plane_kernel_unchecked, unit_cell_point, KernelSpec, LatticeTruncation,
    SeriesValue, Summation,
};
use crate::error::{check_epsilon, Result};
use crate::geometry::Vec2;
use crate::quadrature::GaussLegendre;

/// Image sum `P(eta) = sum_l K(eta + l)` on the unit torus, computed as `K(eta)` plus
/// `K(eta + l) + K(eta - l)` over `l in Z2+` with `|l|_inf <= N`.
///
/// Square partial sums converge like `N^(eps-1)`. The accelerated variant adds the
/// Euler–Maclaurin estimate of the omitted terms, `-S_K + S_{Lap K}/24`, where
/// `S_F = int_{Q+eta} F - int_{Q} F` over the square `Q = [-N-1/2, N+1/2]^2`. That
/// difference is four thin boundary strips, integrated by Gauss–Legendre.
#[derive(Clone, Debug)]
pub(crate) struct ImageSum {
    epsilon: f64,
    c: f64,
    lap_c: f64,
    gl_long: GaussLegendre,
    gl_thin: GaussLegendre,
}

impl ImageSum {
    pub(crate) fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let c = kernel_constant(epsilon);
        Ok(ImageSum {
            epsilon,
            c,
            // Lap(x^perp r^(eps-3)) = (eps-1)(eps-3) x^perp r^(eps-5)
            lap_c: c * (epsilon - 1.0) * (epsilon - 3.0),
            gl_long: GaussLegendre::new(16),
            gl_thin: GaussLegendre::new(8),
        })
    }

    /// Plain paired partial sums up to `|l|_inf <= n`, returned for `n` and `n - 1`.
    fn partial(&self, eta: Vec2, n: usize) -> (Vec2, Vec2) {
        let n = n as i64;
        let mut inner = plane_kernel_unchecked(self.c, self.epsilon, eta);
        let mut shell = Vec2::ZERO;
        for l1 in 0..=n {
            for l2 in -n..=n {
                if l1 == 0 && l2 <= 0 {
                    continue;
                }
                let l = Vec2::new(l1 as f64, l2 as f64);
                let pair = plane_kernel_unchecked(self.c, self.epsilon, eta + l)
                    + plane_kernel_unchecked(self.c, self.epsilon, eta - l);
                if l1 == n || l2.abs() == n {
                    shell += pair;
                } else {
                    inner += pair;
                }
            }
        }
        (inner + shell, inner)
    }

    /// `-S_K + S_{Lap K} / 24` for the square of half-width `r`.
    fn tail(&self, eta: Vec2, r: f64) -> Vec2 {
        let f = |p: Vec2| {
            let r2 = p.norm_sq();
            let k = r2.powf(0.5 * (self.epsilon - 3.0));
            let lap = k / r2;
            p.perp() * (-self.c * k + self.lap_c * lap / 24.0)
        };
        let panels = 8;
        let mut total = Vec2::ZERO;
        // strips normal to the first axis, spanning the shifted second coordinate
        for (x1, lo) in [(r, 1.0), (-r, -1.0)] {
            for p in 0..panels {
                let a = -r + eta.y + 2.0 * r * p as f64 / panels as f64;
                let b = a + 2.0 * r / panels as f64;
                for (y, wy) in self.gl_long.on(a, b) {
                    for (x, wx) in self.gl_thin.on(x1, x1 + eta.x) {
                        total += f(Vec2::new(x, y)) * (lo * wx * wy);
                    }
                }
            }
        }
        // strips normal to the second axis over the unshifted first coordinate
        for (x2, lo) in [(r, 1.0), (-r, -1.0)] {
            for p in 0..panels {
                let a = -r + 2.0 * r * p as f64 / panels as f64;
                let b = a + 2.0 * r / panels as f64;
                for (x, wx) in self.gl_long.on(a, b) {
                    for (y, wy) in self.gl_thin.on(x2, x2 + eta.y) {
                        total += f(Vec2::new(x, y)) * (lo * wx * wy);
                    }
                }
            }
        }
        total
    }

    /// Accelerated `P(eta)` without the change estimate.
    pub(crate) fn value(&self, eta: Vec2, n: usize) -> Vec2 {
        self.partial(eta, n).0 + self.tail(eta, n as f64 + 0.5)
    }

    /// `P(eta)` with a relative change estimate against the truncation `n - 1`.
    pub(crate) fn eval(&self, eta: Vec2, n: usize, summation: Summation) -> SeriesValue<Vec2> {
        let (fine, coarse) = self.partial(eta, n);
        let (value, other) = match summation {
            Summation::Raw => (fine, coarse),
            Summation::Accelerated => {
                let r = n as f64 + 0.5;
                (fine + self.tail(eta, r), coarse + self.tail(eta, r - 1.0))
            }
        };
        let size = value.norm();
        let change = (value - other).norm();
        SeriesValue {
            value,
            shell_change: if size > 0.0 { change / size } else { change },
            converged: true,
        }
    }
}

/// Periodic kernel `K^M(x)` as a lattice sum of plane kernels.
pub fn kernel_torus_images(
    spec: &KernelSpec,
    x: Vec2,
    trunc: &LatticeTruncation,
) -> Result<SeriesValue<Vec2>> {
    let side = spec.torus_side()?;
    trunc.validate()?;
    let Some(eta) = unit_cell_point(x, side) else {
        return at_lattice(spec.origin, x, Vec2::ZERO);
    };
    let mut v = ImageSum::new(spec.epsilon)?.eval(eta, trunc.n_max, trunc.summation);
    if v.shell_change > trunc.tail_tol {
        v.converged = false;
        log::warn!(
            "kernel_torus_images: image sum not converged, relative change {:.3e} > {:.3e}",
            v.shell_change,
            trunc.tail_tol
        );
    }
    v.value = v.value * side.powf(spec.epsilon - 2.0);
    Ok(v)
}
