//! Test functions paired against noise fields and used to build the weak nonlinearity.

use std::f64::consts::PI;
use std::fmt::Debug;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::fft::Fft2;
use crate::geometry::{Rect, Vec2};
use crate::modes::ModeTable;
use crate::quadrature::GaussLegendre;

pub trait TestFunction: Debug + Send + Sync {
    /// Short identifier used in reports.
    fn id(&self) -> String;

    fn value(&self, x: Vec2) -> f64;

    fn gradient(&self, x: Vec2) -> Vec2;

    /// Box containing the support, `None` for periodic functions.
    fn support(&self) -> Option<Rect>;

    /// Second derivatives `(xx, xy, yy)`.
    fn hessian(&self, x: Vec2) -> [f64; 3];

    /// Upper bound for `sup |grad phi|`.
    fn gradient_sup(&self) -> f64;

    /// Upper bound for the sup of the operator norm of the Hessian.
    fn hessian_sup(&self) -> f64;

    /// Coefficients `phi_k = <phi, e_k>` on the torus of side `side`, `|k|_inf <= cutoff`.
    fn torus_coefficients(&self, side: f64, cutoff: usize) -> Result<ModeTable> {
        check_in_cell(self, side)?;
        numeric_coefficients(self, side, cutoff)
    }

    /// `int phi^2` over the torus cell; pass an infinite side for the plane.
    fn l2_norm_sq(&self, side: f64) -> Result<f64>;

    /// Radius `R` with the support inside `[-R, R]^2`.
    fn support_radius(&self) -> Option<f64> {
        self.support()
            .map(|r| r.x0.abs().max(r.x1.abs()).max(r.y0.abs()).max(r.y1.abs()))
    }
}

fn check_in_cell<T: TestFunction + ?Sized>(f: &T, side: f64) -> Result<()> {
    if let Some(r) = f.support() {
        let h = 0.5 * side;
        if r.x0 < -h || r.x1 > h || r.y0 < -h || r.y1 > h {
            return Err(Error::SupportViolation(format!(
                "{} has support [{}, {}] x [{}, {}] outside the cell of side {side}",
                f.id(),
                r.x0,
                r.x1,
                r.y0,
                r.y1
            )));
        }
    }
    Ok(())
}

const MAX_GRID: usize = 4096;

/// Trapezoid-rule coefficients, refined by doubling until two grids agree.
fn numeric_coefficients<T: TestFunction + ?Sized>(
    f: &T,
    side: f64,
    cutoff: usize,
) -> Result<ModeTable> {
    let support_scale = f
        .support()
        .map(|r| (r.x1 - r.x0).min(r.y1 - r.y0))
        .unwrap_or(side);
    let mut n = (4 * (2 * cutoff + 1)).max(32);
    while side / n as f64 > support_scale / 24.0 {
        n *= 2;
    }
    let mut coarse = grid_coefficients(f, side, cutoff, n);
    loop {
        let fine = grid_coefficients(f, side, cutoff, 2 * n);
        let scale = fine
            .as_slice()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let diff = coarse
            .as_slice()
            .iter()
            .zip(fine.as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if diff <= 1e-9 * scale {
            return Ok(fine);
        }
        if 2 * n >= MAX_GRID {
            return Err(Error::Resolution {
                what: "test function",
                detail: format!(
                    "{}: coefficients still change by {:.2e} (relative) between {n} and {} grid points",
                    f.id(),
                    diff / scale,
                    2 * n
                ),
            });
        }
        coarse = fine;
        n *= 2;
    }
}

fn grid_coefficients<T: TestFunction + ?Sized>(
    f: &T,
    side: f64,
    cutoff: usize,
    n: usize,
) -> ModeTable {
    let h = side / n as f64;
    let mut grid: Vec<Complex64> = (0..n * n)
        .map(|idx| {
            let x = Vec2::new(-0.5 * side + h * (idx / n) as f64, -0.5 * side + h * (idx % n) as f64);
            Complex64::new(f.value(x), 0.0)
        })
        .collect();
    Fft2::new(n).forward(&mut grid);
    let mut t = ModeTable::zeros(cutoff);
    let w = h * h / side;
    let nn = cutoff as i64;
    for k1 in -nn..=nn {
        for k2 in -nn..=nn {
            let sign = if (k1 + k2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let i = k1.rem_euclid(n as i64) as usize;
            let j = k2.rem_euclid(n as i64) as usize;
            t.set([k1, k2], grid[i * n + j] * (w * sign));
        }
    }
    t
}

/// One real Fourier term `a cos(2 pi k.x/M) + b sin(2 pi k.x/M)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: [i64; 2],
    pub a: f64,
    pub b: f64,
}

/// Real trigonometric polynomial on the torus of side `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub side: f64,
    pub terms: Vec<TrigTerm>,
    #[serde(default)]
    pub name: Option<String>,
}

impl TrigPolynomial {
    pub fn new(side: f64, terms: Vec<TrigTerm>) -> Result<Self> {
        check_positive("M", side)?;
        Ok(TrigPolynomial {
            side,
            terms,
            name: None,
        })
    }

    pub fn cosine(side: f64, k: [i64; 2], amplitude: f64) -> Result<Self> {
        Self::new(side, vec![TrigTerm { k, a: amplitude, b: 0.0 }])
    }

    pub fn sine(side: f64, k: [i64; 2], amplitude: f64) -> Result<Self> {
        Self::new(side, vec![TrigTerm { k, a: 0.0, b: amplitude }])
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// `self * s + other * t` on the same torus.
    pub fn combine(&self, s: f64, other: &TrigPolynomial, t: f64) -> Result<Self> {
        if self.side != other.side {
            return Err(Error::DomainMismatch("trigonometric polynomials on different tori"));
        }
        let mut terms: Vec<TrigTerm> = self
            .terms
            .iter()
            .map(|x| TrigTerm { k: x.k, a: s * x.a, b: s * x.b })
            .collect();
        terms.extend(other.terms.iter().map(|x| TrigTerm { k: x.k, a: t * x.a, b: t * x.b }));
        Self::new(self.side, terms)
    }

    /// Largest `|k|_inf` among the terms.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.k[0].unsigned_abs().max(t.k[1].unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }

    fn wave(&self, k: [i64; 2]) -> Vec2 {
        Vec2::new(k[0] as f64, k[1] as f64) * (2.0 * PI / self.side)
    }

    /// Exact coefficient table `<phi, e_k>`; the cutoff must resolve every term.
    pub fn coefficients(&self, cutoff: usize) -> Result<ModeTable> {
        if self.degree() > cutoff {
            return Err(Error::Resolution {
                what: "trigonometric test function",
                detail: format!("degree {} exceeds mode cutoff {cutoff}", self.degree()),
            });
        }
        let mut t = ModeTable::zeros(cutoff);
        let m = self.side;
        for term in &self.terms {
            let k = term.k;
            let mk = [-k[0], -k[1]];
            if k == [0, 0] {
                let v = t.get(k) + Complex64::new(m * term.a, 0.0);
                t.set(k, v);
                continue;
            }
            // cos = (e + e*)/2, sin = (e - e*)/(2i); <phi, e_k> = M^-1 int phi e^(-i k x)
            let half = 0.5 * m;
            let vk = t.get(k) + Complex64::new(half * term.a, -half * term.b);
            t.set(k, vk);
            let vm = t.get(mk) + Complex64::new(half * term.a, half * term.b);
            t.set(mk, vm);
        }
        Ok(t)
    }
}

impl TestFunction for TrigPolynomial {
    fn id(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("{}c{}s({},{})", t.a, t.b, t.k[0], t.k[1]))
            .collect();
        format!("trig[{}]", parts.join("+"))
    }

    fn value(&self, x: Vec2) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (s, c) = self.wave(t.k).dot(x).sin_cos();
                t.a * c + t.b * s
            })
            .sum()
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        let mut g = Vec2::ZERO;
        for t in &self.terms {
            let w = self.wave(t.k);
            let (s, c) = w.dot(x).sin_cos();
            g += w * (-t.a * s + t.b * c);
        }
        g
    }

    fn hessian(&self, x: Vec2) -> [f64; 3] {
        let mut h = [0.0; 3];
        for t in &self.terms {
            let w = self.wave(t.k);
            let (s, c) = w.dot(x).sin_cos();
            let v = -(t.a * c + t.b * s);
            h[0] += v * w.x * w.x;
            h[1] += v * w.x * w.y;
            h[2] += v * w.y * w.y;
        }
        h
    }

    fn support(&self) -> Option<Rect> {
        None
    }

    fn gradient_sup(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.a.hypot(t.b) * self.wave(t.k).norm())
            .sum()
    }

    fn hessian_sup(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.a.hypot(t.b) * self.wave(t.k).norm_sq())
            .sum()
    }

    fn torus_coefficients(&self, side: f64, cutoff: usize) -> Result<ModeTable> {
        if (side - self.side).abs() > 1e-12 * self.side {
            return Err(Error::DomainMismatch(
                "trigonometric test function paired on a torus of another side",
            ));
        }
        Ok(self.coefficients(self.degree().max(cutoff))?.resized(cutoff))
    }

    fn l2_norm_sq(&self, side: f64) -> Result<f64> {
        let c = self.torus_coefficients(side, self.degree())?;
        Ok(c.norm_sq())
    }
}

/// Smooth bump `A exp(1 - 1/(1 - |x - c|^2 / R^2))` supported in the disc of radius `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: Vec2, radius: f64, amplitude: f64) -> Result<Self> {
        check_positive("radius", radius)?;
        Ok(Bump {
            center,
            radius,
            amplitude,
        })
    }

    /// Profile `F(t)` and derivatives in `t = r^2 / R^2`.
    fn profile(&self, t: f64) -> (f64, f64, f64) {
        if t >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let u = 1.0 - t;
        let f = self.amplitude * (1.0 - 1.0 / u).exp();
        let f1 = -f / (u * u);
        let f2 = f * (2.0 * t - 1.0) / (u * u * u * u);
        (f, f1, f2)
    }

    /// Radial samples of `(|grad|, |Hessian|)` for the sup bounds.
    fn radial_sups(&self) -> (f64, f64) {
        let r2 = self.radius * self.radius;
        let mut g: f64 = 0.0;
        let mut h: f64 = 0.0;
        let n = 20_000;
        for i in 0..n {
            let t = i as f64 / n as f64;
            let (_, f1, f2) = self.profile(t);
            let r = t.sqrt() * self.radius;
            g = g.max(f1.abs() * 2.0 * r / r2);
            let tangential = f1 * 2.0 / r2;
            let radial = f2 * 4.0 * r * r / (r2 * r2) + tangential;
            h = h.max(tangential.abs()).max(radial.abs());
        }
        // the sampling misses the maxima by a relative O(1/n^2); keep a margin
        (g * 1.001, h * 1.001)
    }

}

impl TestFunction for Bump {
    fn id(&self) -> String {
        format!(
            "bump(c=({},{}),R={},A={})",
            self.center.x, self.center.y, self.radius, self.amplitude
        )
    }

    fn value(&self, x: Vec2) -> f64 {
        let t = (x - self.center).norm_sq() / (self.radius * self.radius);
        self.profile(t).0
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        let d = x - self.center;
        let r2 = self.radius * self.radius;
        let (_, f1, _) = self.profile(d.norm_sq() / r2);
        d * (2.0 * f1 / r2)
    }

    fn support(&self) -> Option<Rect> {
        Some(Rect::centered(self.radius).translate(self.center))
    }

    fn hessian(&self, x: Vec2) -> [f64; 3] {
        let d = x - self.center;
        let r2 = self.radius * self.radius;
        let (_, f1, f2) = self.profile(d.norm_sq() / r2);
        let a = f2 * 4.0 / (r2 * r2);
        let b = f1 * 2.0 / r2;
        [a * d.x * d.x + b, a * d.x * d.y, a * d.y * d.y + b]
    }

    fn gradient_sup(&self) -> f64 {
        self.radial_sups().0
    }

    fn hessian_sup(&self) -> f64 {
        self.radial_sups().1
    }

    fn l2_norm_sq(&self, side: f64) -> Result<f64> {
        if side.is_finite() {
            check_in_cell(self, side)?;
        }
        let gl = GaussLegendre::new(20);
        let r2 = self.radius * self.radius;
        let v = gl.integrate_composite(0.0, self.radius, 16, |r| {
            let f = self.profile(r * r / r2).0;
            f * f * r
        });
        Ok(2.0 * PI * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_gradient(f: &dyn TestFunction, x: Vec2, h: f64) -> Vec2 {
        Vec2::new(
            (f.value(x + Vec2::new(h, 0.0)) - f.value(x - Vec2::new(h, 0.0))) / (2.0 * h),
            (f.value(x + Vec2::new(0.0, h)) - f.value(x - Vec2::new(0.0, h))) / (2.0 * h),
        )
    }

    #[test]
    fn trig_coefficients_are_exact() {
        let p = TrigPolynomial::new(
            4.0,
            vec![
                TrigTerm { k: [1, 2], a: 0.5, b: -1.0 },
                TrigTerm { k: [0, 0], a: 2.0, b: 0.0 },
            ],
        )
        .unwrap();
        let exact = p.coefficients(3).unwrap();
        let numeric = numeric_coefficients(&p, 4.0, 3).unwrap();
        for (a, b) in exact.as_slice().iter().zip(numeric.as_slice()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(exact.hermitian_defect() < 1e-15);
        // int phi^2 = M^2 (2^2 + (0.5^2 + 1)/2)
        assert!((p.l2_norm_sq(4.0).unwrap() - 16.0 * (4.0 + 0.625)).abs() < 1e-12);
        assert!(p.coefficients(1).is_err());
    }

    #[test]
    fn bump_coefficients_and_norm() {
        let b = Bump::new(Vec2::new(0.3, -0.2), 1.2, 1.5).unwrap();
        assert_eq!(b.value(b.center), 1.5);
        let c = b.torus_coefficients(4.0, 6).unwrap();
        assert!(c.hermitian_defect() < 1e-14);
        // the zero mode is M^-1 times the integral
        let gl = GaussLegendre::new(20);
        let integral = 2.0 * PI * gl.integrate_composite(0.0, 1.2, 16, |r| b.profile(r * r / 1.44).0 * r);
        assert!((c.get([0, 0]).re * 4.0 - integral).abs() < 1e-12);
        let far = Bump::new(Vec2::new(1.5, 0.0), 1.0, 1.0).unwrap();
        assert!(matches!(far.torus_coefficients(4.0, 4), Err(Error::SupportViolation(_))));
        let on_torus: f64 = b.l2_norm_sq(4.0).unwrap();
        assert!(on_torus > 0.0);
    }

    #[test]
    fn bump_sup_bounds_dominate_samples() {
        let b = Bump::new(Vec2::ZERO, 0.7, 2.0).unwrap();
        let (g, h) = (b.gradient_sup(), b.hessian_sup());
        for i in 0..200 {
            let x = Vec2::new(0.7 * i as f64 / 200.0, 0.1);
            assert!(b.gradient(x).norm() <= g);
            let [a, c, d] = b.hessian(x);
            let tr = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + c * c).sqrt();
            assert!((tr + disc).abs().max((tr - disc).abs()) <= h);
        }
    }

    proptest! {
        #[test]
        fn gradients_match_central_differences(x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let p = Vec2::new(x, y);
            let b = Bump::new(Vec2::new(0.1, 0.2), 1.3, 1.0).unwrap();
            let h = 1e-4;
            prop_assert!((b.gradient(p) - fd_gradient(&b, p, h)).norm() < 1e-5);
            let t = TrigPolynomial::new(3.0, vec![TrigTerm { k: [2, -1], a: 0.3, b: 0.8 }]).unwrap();
            prop_assert!((t.gradient(p) - fd_gradient(&t, p, h)).norm() < 1e-6);
        }

        #[test]
        fn hessians_match_differenced_gradients(x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let p = Vec2::new(x, y);
            let h = 1e-5;
            let b = Bump::new(Vec2::new(-0.1, 0.2), 1.3, 1.0).unwrap();
            let t = TrigPolynomial::new(3.0, vec![TrigTerm { k: [1, 2], a: -0.5, b: 0.9 }]).unwrap();
            for f in [&b as &dyn TestFunction, &t] {
                let dx = (f.gradient(p + Vec2::new(h, 0.0)) - f.gradient(p - Vec2::new(h, 0.0))) / (2.0 * h);
                let dy = (f.gradient(p + Vec2::new(0.0, h)) - f.gradient(p - Vec2::new(0.0, h))) / (2.0 * h);
                let [xx, xy, yy] = f.hessian(p);
                prop_assert!((xx - dx.x).abs() < 1e-5 && (xy - dx.y).abs() < 1e-5);
                prop_assert!((xy - dy.x).abs() < 1e-5 && (yy - dy.y).abs() < 1e-5);
            }
        }
    }
}
