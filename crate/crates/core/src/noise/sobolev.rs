use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::NoiseField;
use crate::error::{check_positive, Error, Result};
use crate::fft::Fft2;

/// Weight `rho_sigma(x) = (1 + |x|^2)^(-sigma/2)`, Sobolev index `s` and the window on which
/// the periodic field is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub sigma: f64,
    pub s: f64,
    /// Requested window half-width `L`; the window actually used is the smallest union of
    /// whole periods, centred on the origin, that contains `[-L, L]^2`.
    pub half_width: f64,
    /// Grid points per period.
    pub resolution: usize,
}

impl WeightSpec {
    /// `L = 4M` and `resolution = max(4N, 8M)`, which also resolves the weight.
    pub fn default_for(side: f64, cutoff: usize, sigma: f64, s: f64) -> Self {
        WeightSpec {
            sigma,
            s,
            half_width: 4.0 * side,
            resolution: (4 * cutoff).max((8.0 * side).ceil() as usize),
        }
    }

    pub fn validate(&self, side: f64, cutoff: usize) -> Result<()> {
        if !(self.sigma > 2.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: self.sigma.to_string(),
                expected: "a finite value > 2",
            });
        }
        if !(self.s <= 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "s",
                value: self.s.to_string(),
                expected: "a Sobolev index <= 0",
            });
        }
        check_positive("half_width", self.half_width)?;
        if self.half_width < side {
            return Err(Error::InvalidParameter {
                name: "half_width",
                value: self.half_width.to_string(),
                expected: "a window half-width L >= M",
            });
        }
        if self.resolution < 4 * cutoff {
            return Err(Error::Resolution {
                what: "mode cutoff",
                detail: format!(
                    "{} grid points per period, need at least 4N = {}",
                    self.resolution,
                    4 * cutoff
                ),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    /// `int (1 + |xi|^2)^s |F(rho omega)(xi)|^2 d xi`
    pub value: f64,
    /// Estimate of the part of the integral carried by `rho omega` outside the window.
    pub tail: f64,
    /// Half-width of the window actually used.
    pub half_width: f64,
    pub grid_points: usize,
}

/// Squared norm of `rho_sigma omega` in `H^s(R^2)` with `F u(xi) = int u(x) e^(-i x.xi) dx`.
///
/// The field is extended periodically, multiplied by the weight on `2q + 1` periods per
/// direction and transformed by FFT. On that grid the xi-integral becomes the Riemann sum
/// with spacing `pi / L`. Outside the window `rho^2 <= <L>^(-2 sigma)` and `(1+|xi|^2)^s <= 1`
/// give the tail estimate `4 pi^2 <omega^2> pi <L>^(2 - 2 sigma) / (sigma - 1)`, where
/// `<omega^2>` is the mean square of the field over a period.
pub fn weighted_sobolev_norm_sq(field: &NoiseField, w: &WeightSpec) -> Result<WeightedNorm> {
    let side = field.side();
    w.validate(side, field.cutoff())?;
    let res = w.resolution;
    let q = (w.half_width / side - 0.5).max(0.0).ceil() as usize;
    let periods = 2 * q + 1;
    let n = periods * res;
    let h = side / res as f64;
    let half = 0.5 * n as f64 * h;

    let cell = field.to_grid(res);
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            let x = -half + h * i as f64;
            x * x
        })
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let row = &cell[(i % res) * res..(i % res + 1) * res];
        for j in 0..n {
            let weight = (1.0 + rho[i] + rho[j]).powf(-0.5 * w.sigma);
            data[i * n + j] = Complex64::new(weight * row[j % res], 0.0);
        }
    }
    Fft2::new(n).forward(&mut data);

    // DFT index m corresponds to xi = 2 pi m / (n h); the window offset only changes phases
    let dxi = 2.0 * PI / (n as f64 * h);
    let freq: Vec<f64> = (0..n)
        .map(|m| {
            let m = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            let xi = m * dxi;
            xi * xi
        })
        .collect();
    let mut value = 0.0;
    for a in 0..n {
        let mut acc = 0.0;
        for b in 0..n {
            acc += (1.0 + freq[a] + freq[b]).powf(w.s) * data[a * n + b].norm_sqr();
        }
        value += acc;
    }
    value *= dxi * dxi * h.powi(4);

    let mean_sq = field.energy() / (side * side);
    let tail = 4.0 * PI * PI * mean_sq * PI * (1.0 + half * half).powf(1.0 - w.sigma)
        / (w.sigma - 1.0);
    if tail > 0.01 * value {
        return Err(Error::WindowTooSmall { tail, value });
    }
    Ok(WeightedNorm {
        value,
        tail,
        half_width: half,
        grid_points: n,
    })
}
