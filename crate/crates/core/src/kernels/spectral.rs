//! Fourier series of the periodic kernel and stream function in square partial sums.

use std::f64::consts::PI;

use super::{unit_cell_point, KernelSpec, LatticeTruncation, OriginRule, SeriesValue, Summation};
use crate::error::{check_epsilon, check_positive, Error, Result};
use crate::geometry::Vec2;

/// Precomputed coefficients of the unit-torus series
/// `K^1(eta) = -2 (2 pi)^-eps sum_{k in Z2+} k^perp sin(2 pi k.eta) / |k|^(1+eps)` and
/// `G^1(eta) = 2 sum_{k in Z2+} cos(2 pi k.eta) / (2 pi |k|)^(1+eps)`.
///
/// Two truncations are summed in one pass; their difference is the reported shell change.
/// With [`Summation::Raw`] the coarse sum drops the outermost shell `|k|_inf = n_max`. With
/// [`Summation::Accelerated`] each coefficient carries a smooth cutoff `w(k1/(N+1)) w(k2/(N+1))`
/// which turns the conditionally convergent square sums into rapidly convergent ones, and
/// the coarse sum uses the same cutoff at three quarters of `N`.
#[derive(Clone, Debug)]
pub struct SpectralSeries {
    epsilon: f64,
    n: usize,
    fine: Vec<f64>,
    coarse: Vec<f64>,
}

impl SpectralSeries {
    pub fn new(epsilon: f64, trunc: &LatticeTruncation) -> Result<Self> {
        check_epsilon(epsilon)?;
        trunc.validate()?;
        let n = trunc.n_max;
        let width = 2 * n + 1;
        let mut fine = vec![0.0; (n + 1) * width];
        let mut coarse = vec![0.0; (n + 1) * width];
        let coarse_n = (3 * n / 4).max(1);
        for k1 in 0..=n {
            for j in 0..width {
                let k2 = j as i64 - n as i64;
                if k1 == 0 && k2 <= 0 {
                    continue;
                }
                let r2 = (k1 * k1) as f64 + (k2 * k2) as f64;
                let base = r2.powf(-0.5 * (1.0 + epsilon));
                let idx = k1 * width + j;
                let m = k1.max(k2.unsigned_abs() as usize);
                match trunc.summation {
                    Summation::Raw => {
                        fine[idx] = base;
                        if m < n {
                            coarse[idx] = base;
                        }
                    }
                    Summation::Accelerated => {
                        fine[idx] = base * product_window(k1, k2, n);
                        if m <= coarse_n {
                            coarse[idx] = base * product_window(k1, k2, coarse_n);
                        }
                    }
                }
            }
        }
        Ok(SpectralSeries {
            epsilon,
            n,
            fine,
            coarse,
        })
    }

    /// Sums `(sum_k w_k k^perp sin, sum_k w_k cos)` for both truncations.
    fn sums(&self, eta: Vec2) -> [(Vec2, f64); 2] {
        let n = self.n as i64;
        let width = (2 * n + 1) as usize;
        let e2: Vec<(f64, f64)> = (-n..=n)
            .map(|k2| (2.0 * PI * k2 as f64 * eta.y).sin_cos())
            .collect();
        let mut out = [(Vec2::ZERO, 0.0); 2];
        for k1 in 0..=n {
            let (s1, c1) = (2.0 * PI * k1 as f64 * eta.x).sin_cos();
            let row = k1 as usize * width;
            let start = if k1 == 0 { n as usize + 1 } else { 0 };
            let (mut fk, mut fg, mut ck, mut cg) = (Vec2::ZERO, 0.0, Vec2::ZERO, 0.0);
            for j in start..width {
                let wf = self.fine[row + j];
                let wc = self.coarse[row + j];
                let (s2, c2) = e2[j];
                let s = s1 * c2 + c1 * s2;
                let c = c1 * c2 - s1 * s2;
                let kp = Vec2::new(-((j as i64 - n) as f64), k1 as f64);
                fk += kp * (wf * s);
                fg += wf * c;
                ck += kp * (wc * s);
                cg += wc * c;
            }
            out[0].0 += fk;
            out[0].1 += fg;
            out[1].0 += ck;
            out[1].1 += cg;
        }
        out
    }

    /// `K^1(eta)` for `eta` in the unit cell, `eta != 0`.
    pub fn kernel(&self, eta: Vec2) -> SeriesValue<Vec2> {
        let [fine, coarse] = self.sums(eta);
        let f = -2.0 * (2.0 * PI).powf(-self.epsilon);
        let value = fine.0 * f;
        let change = (fine.0 - coarse.0).norm() * f.abs();
        relative(value, value.norm(), change)
    }

    /// `G^1(eta)` for `eta` in the unit cell, `eta != 0`.
    pub fn green(&self, eta: Vec2) -> SeriesValue<f64> {
        let [fine, coarse] = self.sums(eta);
        let f = 2.0 * (2.0 * PI).powf(-1.0 - self.epsilon);
        let value = fine.1 * f;
        relative(value, value.abs(), (fine.1 - coarse.1).abs() * f)
    }
}

fn relative<T>(value: T, size: f64, change: f64) -> SeriesValue<T> {
    let shell_change = if size > 0.0 { change / size } else { change };
    SeriesValue {
        value,
        shell_change,
        converged: true,
    }
}

/// End of the flat part of the cutoff. A long transition decays fastest in physical space,
/// which is what controls the error near the singularity.
const PLATEAU: f64 = 0.15;

/// Smooth cutoff equal to 1 on `[0, PLATEAU]` and 0 from 1 on, infinitely differentiable.
fn window(t: f64) -> f64 {
    let a = PLATEAU;
    if t <= a {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let s = (t - a) / (1.0 - a);
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    b / (a + b)
}

fn product_window(k1: usize, k2: i64, n: usize) -> f64 {
    let d = (n + 1) as f64;
    window(k1 as f64 / d) * window(k2.unsigned_abs() as f64 / d)
}

fn finish<T: Copy>(
    mut v: SeriesValue<T>,
    tail_tol: f64,
    what: &str,
    scale: impl Fn(T) -> T,
) -> SeriesValue<T> {
    if v.shell_change > tail_tol {
        v.converged = false;
        log::warn!(
            "{what}: truncated series not converged, relative shell change {:.3e} > {:.3e}",
            v.shell_change,
            tail_tol
        );
    }
    v.value = scale(v.value);
    v
}

/// Periodic kernel `K^M(x)` from its Fourier series.
pub fn kernel_torus_spectral(
    spec: &KernelSpec,
    x: Vec2,
    trunc: &LatticeTruncation,
) -> Result<SeriesValue<Vec2>> {
    let side = spec.torus_side()?;
    let series = SpectralSeries::new(spec.epsilon, trunc)?;
    let Some(eta) = unit_cell_point(x, side) else {
        return at_lattice(spec.origin, x, Vec2::ZERO);
    };
    let s = side.powf(spec.epsilon - 2.0);
    Ok(finish(
        series.kernel(eta),
        trunc.tail_tol,
        "kernel_torus_spectral",
        |v| v * s,
    ))
}

/// Periodic stream function `G^M(x) = sum_{k != 0} (M / (2 pi |k|))^(1+eps) M^-2 e^(2 pi i k.x/M)`.
pub fn stream_green_torus(
    epsilon: f64,
    side: f64,
    x: Vec2,
    trunc: &LatticeTruncation,
) -> Result<SeriesValue<f64>> {
    check_positive("M", side)?;
    let series = SpectralSeries::new(epsilon, trunc)?;
    let Some(eta) = unit_cell_point(x, side) else {
        return Err(Error::Singularity(x));
    };
    let s = side.powf(epsilon - 1.0);
    Ok(finish(
        series.green(eta),
        trunc.tail_tol,
        "stream_green_torus",
        |v| v * s,
    ))
}

pub(super) fn at_lattice<T>(origin: OriginRule, x: Vec2, zero: T) -> Result<SeriesValue<T>> {
    match origin {
        OriginRule::Singular => Err(Error::Singularity(x)),
        OriginRule::Zero => Ok(SeriesValue {
            value: zero,
            shell_change: 0.0,
            converged: true,
        }),
    }
}
