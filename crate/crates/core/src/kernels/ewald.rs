//! Ewald splitting of the unit-torus kernel and stream function.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, gamma_ur};

use super::{green_constant, kernel_constant};
use crate::error::{check_epsilon, Result};
use crate::geometry::Vec2;

const REAL_CUT: i64 = 4;
const RECIP_CUT: i64 = 4;

/// Splits `|xi|^-(1+eps)` through `int t^(b-1) e^(-t |xi|^2) dt` at `t = alpha`: the part
/// above `alpha` is summed in Fourier space with weights `Q(b, alpha |xi|^2)`, the part
/// below is Poisson-summed into Gaussian-screened images with profile
/// `phi(r) = Gamma(a) / (4 pi Gamma(b)) (r^2/4)^-a Q(a, r^2 / (4 alpha))`,
/// where `a = (1-eps)/2`, `b = (1+eps)/2` and `Q` is the regularized upper incomplete gamma.
///
/// Both sums converge like Gaussians, so fixed cutoffs give full double precision.
/// The `smooth_*` methods return the periodic function minus the plane singularity, which
/// stays bounded at the origin.
#[derive(Clone, Debug)]
pub struct Ewald {
    epsilon: f64,
    a: f64,
    alpha: f64,
    /// `1 / (4 pi Gamma(b))`
    norm: f64,
    gamma_a: f64,
    /// `alpha^b / (b Gamma(b))`, the removed zero mode
    zero_mode: f64,
    /// `(k1, k2, |xi|^-(1+eps) Q(b, alpha |xi|^2))` for `k in Z2+`
    recip: Vec<(f64, f64, f64)>,
    c: f64,
    g: f64,
}

impl Ewald {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let a = 0.5 * (1.0 - epsilon);
        let b = 0.5 * (1.0 + epsilon);
        let alpha = 1.0 / (4.0 * PI);
        let mut recip = Vec::new();
        for k1 in 0..=RECIP_CUT {
            for k2 in -RECIP_CUT..=RECIP_CUT {
                if k1 == 0 && k2 <= 0 {
                    continue;
                }
                let xi2 = 4.0 * PI * PI * (k1 * k1 + k2 * k2) as f64;
                let w = xi2.powf(-b) * gamma_ur(b, alpha * xi2);
                recip.push((k1 as f64, k2 as f64, w));
            }
        }
        Ok(Ewald {
            epsilon,
            a,
            alpha,
            norm: 1.0 / (4.0 * PI * gamma(b)),
            gamma_a: gamma(a),
            zero_mode: alpha.powf(b) / (b * gamma(b)),
            recip,
            c: kernel_constant(epsilon),
            g: green_constant(epsilon),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(phi(r), phi'(r) / r)` for an image at distance `r > 0`.
    fn screened(&self, r2: f64) -> (f64, f64) {
        let a = self.a;
        let z = r2 / (4.0 * self.alpha);
        let q = self.gamma_a * gamma_ur(a, z);
        let pw = (0.25 * r2).powf(-a);
        let phi = self.norm * pw * q;
        // d/dr [(r^2/4)^-a Gamma(a, z)] / r
        let dphi = self.norm * pw * (-2.0 * a * q / r2 - z.powf(a - 1.0) * (-z).exp() / (2.0 * self.alpha));
        (phi, dphi)
    }

    /// Series for `z^-a gamma(a, z)` and its derivative, fine for `z` of order one.
    fn lower_scaled(&self, z: f64) -> (f64, f64) {
        let a = self.a;
        let mut term = 1.0; // (-z)^n / n!
        let mut value = 0.0;
        let mut deriv = 0.0;
        for n in 0..80 {
            let nf = n as f64;
            value += term / (a + nf);
            deriv -= term / (a + nf + 1.0);
            term *= -z / (nf + 1.0);
            if term.abs() < 1e-18 {
                break;
            }
        }
        (value, deriv)
    }

    /// `G^1(eta) - g |eta|^(eps-1)` for `eta` in the unit cell.
    pub fn smooth_green(&self, eta: Vec2) -> f64 {
        self.smooth(eta, false).1
    }

    /// `K^1(eta) - c eta^perp |eta|^(eps-3)` for `eta` in the unit cell.
    pub fn smooth_kernel(&self, eta: Vec2) -> Vec2 {
        self.smooth(eta, true).0
    }

    fn smooth(&self, eta: Vec2, want_kernel: bool) -> (Vec2, f64) {
        let mut k = Vec2::ZERO;
        let mut g = 0.0;
        // own image minus the plane singularity: -norm alpha^-a z^-a gamma(a, z)
        let z0 = eta.norm_sq() / (4.0 * self.alpha);
        let (low, dlow) = self.lower_scaled(z0);
        let pre = -self.norm * self.alpha.powf(-self.a);
        g += pre * low;
        k += eta.perp() * (pre * dlow / (2.0 * self.alpha));
        for l1 in -REAL_CUT..=REAL_CUT {
            for l2 in -REAL_CUT..=REAL_CUT {
                if l1 == 0 && l2 == 0 {
                    continue;
                }
                let p = eta + Vec2::new(l1 as f64, l2 as f64);
                let (phi, dphi) = self.screened(p.norm_sq());
                g += phi;
                if want_kernel {
                    k += p.perp() * dphi;
                }
            }
        }
        for &(k1, k2, w) in &self.recip {
            let xi = Vec2::new(2.0 * PI * k1, 2.0 * PI * k2);
            let (s, c) = xi.dot(eta).sin_cos();
            g += 2.0 * w * c;
            k -= xi.perp() * (2.0 * w * s);
        }
        (k, g - self.zero_mode)
    }

    /// `K^1(eta)`; `eta` must be nonzero and in the unit cell.
    pub fn kernel(&self, eta: Vec2) -> Vec2 {
        self.smooth_kernel(eta) + super::plane_kernel_unchecked(self.c, self.epsilon, eta)
    }

    /// `G^1(eta)`; `eta` must be nonzero and in the unit cell.
    pub fn green(&self, eta: Vec2) -> f64 {
        self.smooth_green(eta) + self.g * eta.norm().powf(self.epsilon - 1.0)
    }
}
