//! Symmetric bikernels and the quadratic form `<omega (x) omega, f>` of a noise field.

mod cauchy;
mod identities;
mod l2;
mod transport;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::fast_size;
use crate::geometry::Vec2;
use crate::noise::{NoiseField, Pairing};
use crate::testfn::{TestFunction, TrigPolynomial};

pub use cauchy::{nonlinear_estimate, CauchyRow, Ensemble, LevelRow, NonlinearEstimate};
pub use identities::{bikernel_panel, identity_check, IdentityRow};
pub use l2::{band_distance_sq, h_l2_norm_sq, hl2_bound, HL2Bound};
pub(crate) use transport::velocity_multiplier;
pub use transport::{
    build_fn, build_fn_with, h_phi, BandCutoff, Transition, TransportBikernel, TransportPairing,
};

/// A symmetric function `f(x, y)` on the torus cell.
pub trait Bikernel: Send + Sync {
    fn id(&self) -> String;

    fn eval(&self, x: Vec2, y: Vec2) -> f64;

    /// `int f(x, x) dx` over the cell, by default the trapezoid rule on an `n x n` grid.
    fn diagonal_integral(&self, side: f64, n: usize) -> Result<f64> {
        let h = side / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = Vec2::new(-0.5 * side + h * i as f64, -0.5 * side + h * j as f64);
                acc += self.eval(x, x);
            }
        }
        Ok(acc * h * h)
    }

    /// The quadratic form through Fourier coefficients, when the bikernel has such a path.
    fn fourier_pair(&self, _field: &NoiseField) -> Option<Result<f64>> {
        None
    }
}

/// `f(x, y) = sum_j w_j (alpha_j(x) beta_j(y) + beta_j(x) alpha_j(y)) / 2` with trigonometric
/// factors.
#[derive(Clone, Debug)]
pub struct TrigBikernel {
    side: f64,
    terms: Vec<(f64, TrigPolynomial, TrigPolynomial)>,
}

impl TrigBikernel {
    pub fn new(side: f64, terms: Vec<(f64, TrigPolynomial, TrigPolynomial)>) -> Result<Self> {
        for (_, a, b) in &terms {
            if a.side != side || b.side != side {
                return Err(Error::DomainMismatch("bikernel factors on another torus"));
            }
        }
        Ok(TrigBikernel { side, terms })
    }

    /// `phi (x) phi`.
    pub fn tensor(phi: &TrigPolynomial) -> Self {
        TrigBikernel {
            side: phi.side,
            terms: vec![(1.0, phi.clone(), phi.clone())],
        }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, a, b)| a.degree().max(b.degree()))
            .max()
            .unwrap_or(0)
    }

    fn inner(&self, a: &TrigPolynomial, b: &TrigPolynomial) -> f64 {
        let d = a.degree().max(b.degree());
        let (ca, cb) = (a.coefficients(d).unwrap(), b.coefficients(d).unwrap());
        ca.inner(&cb).re
    }

    /// Exact `int f(x, x) dx`.
    pub fn exact_diagonal(&self) -> f64 {
        self.terms
            .iter()
            .map(|(w, a, b)| w * self.inner(a, b))
            .sum()
    }

    /// Exact `int int f^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for (w, a, b) in &self.terms {
            for (w2, a2, b2) in &self.terms {
                let direct = self.inner(a, a2) * self.inner(b, b2);
                let crossed = self.inner(a, b2) * self.inner(b, a2);
                s += w * w2 * 0.5 * (direct + crossed);
            }
        }
        s
    }
}

impl Bikernel for TrigBikernel {
    fn id(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, a, b)| format!("{w}*{}.{}", a.id(), b.id()))
            .collect();
        format!("sym[{}]", parts.join("+"))
    }

    fn eval(&self, x: Vec2, y: Vec2) -> f64 {
        self.terms
            .iter()
            .map(|(w, a, b)| 0.5 * w * (a.value(x) * b.value(y) + b.value(x) * a.value(y)))
            .sum()
    }

    fn diagonal_integral(&self, side: f64, _n: usize) -> Result<f64> {
        if (side - self.side).abs() > 1e-12 * self.side {
            return Err(Error::DomainMismatch("bikernel integrated on a torus of another side"));
        }
        Ok(self.exact_diagonal())
    }

    fn fourier_pair(&self, field: &NoiseField) -> Option<Result<f64>> {
        let run = || -> Result<f64> {
            let mut s = 0.0;
            for (w, a, b) in &self.terms {
                let pa = Pairing::new(a, field.side(), field.cutoff())?.apply(field);
                let pb = Pairing::new(b, field.side(), field.cutoff())?.apply(field);
                s += w * pa * pb;
            }
            Ok(s)
        };
        Some(run())
    }
}

/// Default grid for the double sum: exact for bikernels whose factors have degree `<= N`.
pub fn default_grid(field: &NoiseField) -> usize {
    fast_size(2 * field.cutoff() + 1)
}

/// `<omega (x) omega, f>`: the Fourier path when the bikernel has one, otherwise the double
/// grid sum on [`default_grid`] points per direction.
pub fn quad_pair(field: &NoiseField, f: &dyn Bikernel) -> Result<f64> {
    match f.fourier_pair(field) {
        Some(v) => v,
        None => quad_pair_grid(field, f, default_grid(field)),
    }
}

/// Double trapezoid sum `h^4 sum_ij f(x_i, x_j) omega(x_i) omega(x_j)` on `n x n` points.
pub fn quad_pair_grid(field: &NoiseField, f: &dyn Bikernel, n: usize) -> Result<f64> {
    if n <= 2 * field.cutoff() {
        return Err(Error::Resolution {
            what: "quadrature grid",
            detail: format!("{n} points cannot hold cutoff {}", field.cutoff()),
        });
    }
    let side = field.side();
    let h = side / n as f64;
    let omega = field.to_grid(n);
    let pts: Vec<Vec2> = (0..n * n)
        .map(|i| Vec2::new(-0.5 * side + h * (i / n) as f64, -0.5 * side + h * (i % n) as f64))
        .collect();
    let total: f64 = (0..n * n)
        .into_par_iter()
        .map(|i| {
            if omega[i] == 0.0 {
                return 0.0;
            }
            let row: f64 = (0..n * n).map(|j| f.eval(pts[i], pts[j]) * omega[j]).sum();
            row * omega[i]
        })
        .sum();
    Ok(total * h.powi(4))
}

/// `<omega (x) omega, f> - int f(x, x) dx`, the diagonal by quadrature on the field grid.
pub fn quad_pair_renormalized(field: &NoiseField, f: &dyn Bikernel) -> Result<f64> {
    let q = quad_pair(field, f)?;
    let d = f.diagonal_integral(field.side(), default_grid(field))?;
    Ok(q - d)
}
