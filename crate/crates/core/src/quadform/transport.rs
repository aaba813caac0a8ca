use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Bikernel;
use crate::error::{Error, Result};
use crate::fft::{fast_size, Fft2};
use crate::geometry::{reduce_to_cell, Vec2};
use crate::kernels::{kernel_constant, plane_kernel_unchecked, Domain, KernelEvaluator, KernelSpec};
use crate::modes::ModeTable;
use crate::noise::NoiseField;
use crate::quadrature::{bessel_j1, GaussLegendre};
use crate::testfn::TestFunction;

/// Shape of the ramp of `r_n` between `|x - y| = 1/(2 n^6)` and `1/n^6`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transition {
    /// `6t^5 - 15t^4 + 10t^3`
    #[default]
    Quintic,
    /// `e^(-1/t) / (e^(-1/t) + e^(-1/(1-t)))`, infinitely smooth
    Smooth,
}

impl Transition {
    pub fn ramp(self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self {
            Transition::Quintic => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
            Transition::Smooth => {
                let a = (-1.0 / t).exp();
                let b = (-1.0 / (1.0 - t)).exp();
                a / (a + b)
            }
        }
    }
}

/// The radial cutoff `r_n`: zero for `|u| <= 1/(2 n^6)`, one for `|u| >= 1/n^6`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandCutoff {
    pub n: u32,
    pub transition: Transition,
}

impl BandCutoff {
    pub fn new(n: u32) -> Self {
        BandCutoff {
            n,
            transition: Transition::Quintic,
        }
    }

    pub fn with_transition(mut self, t: Transition) -> Self {
        self.transition = t;
        self
    }

    /// Outer radius `1/n^6` of the band.
    pub fn delta(&self) -> f64 {
        (self.n as f64).powi(-6)
    }

    pub fn r(&self, rho: f64) -> f64 {
        let d = self.delta();
        self.transition.ramp((rho - 0.5 * d) / (0.5 * d))
    }
}

/// `r(rho)` of an optional cutoff, one when absent.
pub(crate) fn cutoff_r(c: &Option<BandCutoff>, rho: f64) -> f64 {
    c.as_ref().map_or(1.0, |c| c.r(rho))
}

/// `f(x, y) = 1/2 K(x - y) . (grad phi(x) - grad phi(y))`, the bikernel `H` of the weak form,
/// and its approximants `f_n`, where `K` is replaced by `K - (1 - r_n) K_plane`. On the plane
/// this is `r_n H`; on the torus it differs from `r_n H` by a smooth term of size
/// `O(|x - y|)` inside the band `|x - y| < 1/n^6`.
#[derive(Clone)]
pub struct TransportBikernel {
    spec: KernelSpec,
    kernel: KernelEvaluator,
    c: f64,
    phi: Arc<dyn TestFunction>,
    cutoff: Option<BandCutoff>,
}

impl fmt::Debug for TransportBikernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransportBikernel")
            .field("spec", &self.spec)
            .field("phi", &self.phi.id())
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

/// The bikernel `H` for `phi` and the kernel selected by `spec`, with `H(x, x) = 0`.
pub fn h_phi(spec: &KernelSpec, phi: Arc<dyn TestFunction>) -> Result<TransportBikernel> {
    TransportBikernel::new(spec, phi, None)
}

/// The approximant `f_n = r_n H`.
pub fn build_fn(spec: &KernelSpec, phi: Arc<dyn TestFunction>, n: u32) -> Result<TransportBikernel> {
    build_fn_with(spec, phi, BandCutoff::new(n))
}

pub fn build_fn_with(
    spec: &KernelSpec,
    phi: Arc<dyn TestFunction>,
    cutoff: BandCutoff,
) -> Result<TransportBikernel> {
    if cutoff.n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: "0".into(),
            expected: "an integer >= 1",
        });
    }
    TransportBikernel::new(spec, phi, Some(cutoff))
}

impl TransportBikernel {
    fn new(
        spec: &KernelSpec,
        phi: Arc<dyn TestFunction>,
        cutoff: Option<BandCutoff>,
    ) -> Result<Self> {
        let kernel = KernelEvaluator::new(spec)?;
        Self::with_evaluator(spec, kernel, phi, cutoff)
    }

    /// Reuse an evaluator built for `spec`.
    pub fn with_evaluator(
        spec: &KernelSpec,
        kernel: KernelEvaluator,
        phi: Arc<dyn TestFunction>,
        cutoff: Option<BandCutoff>,
    ) -> Result<Self> {
        if let (Domain::Torus { side }, Some(r)) = (spec.domain, phi.support()) {
            let h = 0.5 * side;
            if r.x0 < -h || r.x1 > h || r.y0 < -h || r.y1 > h {
                return Err(Error::SupportViolation(format!(
                    "{} does not fit in the cell of side {side}",
                    phi.id()
                )));
            }
        }
        Ok(TransportBikernel {
            spec: *spec,
            kernel,
            c: kernel_constant(spec.epsilon),
            phi,
            cutoff,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn phi(&self) -> &Arc<dyn TestFunction> {
        &self.phi
    }

    pub fn cutoff(&self) -> Option<BandCutoff> {
        self.cutoff
    }

    pub fn evaluator(&self) -> &KernelEvaluator {
        &self.kernel
    }
}

impl Bikernel for TransportBikernel {
    fn id(&self) -> String {
        match self.cutoff {
            None => format!("H[{}]", self.phi.id()),
            Some(c) => format!("f{}[{}]", c.n, self.phi.id()),
        }
    }

    fn eval(&self, x: Vec2, y: Vec2) -> f64 {
        let (x, y, u) = match self.spec.side() {
            Some(m) => {
                let (x, y) = (reduce_to_cell(x, m), reduce_to_cell(y, m));
                (x, y, reduce_to_cell(x - y, m))
            }
            None => (x, y, x - y),
        };
        if u == Vec2::ZERO {
            return 0.0;
        }
        // K - (1 - r) K_plane, which is r K on the plane and matches the torus multiplier
        let w = 1.0 - cutoff_r(&self.cutoff, u.norm());
        let mut k = self.kernel.kernel(u);
        if w != 0.0 {
            k -= plane_kernel_unchecked(self.c, self.spec.epsilon, u) * w;
        }
        0.5 * k.dot(self.phi.gradient(x) - self.phi.gradient(y))
    }

    fn diagonal_integral(&self, _side: f64, _n: usize) -> Result<f64> {
        Ok(0.0)
    }

    fn fourier_pair(&self, field: &NoiseField) -> Option<Result<f64>> {
        let pairing = TransportPairing::new(
            &self.spec,
            self.phi.as_ref(),
            field.cutoff(),
            &[self.cutoff],
        );
        Some(pairing.and_then(|p| p.apply(field).map(|v| v[0])))
    }
}

/// `int_0^a rho^(eps - 1) J_1(z rho) d rho`: the power series of `J_1` integrated term by term
/// up to `z rho = 4`, Gauss-Legendre beyond.
fn hankel_from_zero(eps: f64, z: f64, a: f64) -> f64 {
    let a0 = a.min(4.0 / z);
    let x = 0.5 * z * a0;
    let mut power = x;
    let mut fact = 1.0;
    let mut series = 0.0;
    for m in 0..60 {
        let term = power / ((2 * m + 1) as f64 + eps) / fact;
        series += if m % 2 == 0 { term } else { -term };
        if term < 1e-18 * series.abs() {
            break;
        }
        power *= x * x;
        fact *= ((m + 1) * (m + 2)) as f64;
    }
    let mut total = a0.powf(eps) * series;
    if a > a0 {
        let gl = GaussLegendre::new(16);
        let panels = 2 + (0.5 * z * (a - a0)).ceil() as usize;
        total += gl.integrate_composite(a0, a, panels, |rho| rho.powf(eps - 1.0) * bessel_j1(z * rho));
    }
    total
}

/// `int_0^delta (1 - r(rho)) rho^(eps - 1) J_1(z rho) d rho`.
fn band_hankel(eps: f64, z: f64, cutoff: &BandCutoff) -> f64 {
    let gl = GaussLegendre::new(16);
    let d = cutoff.delta();
    let panels = 2 + (0.5 * z * d).ceil() as usize;
    let outer = gl.integrate_composite(0.5 * d, d, panels, |rho| {
        (1.0 - cutoff.r(rho)) * rho.powf(eps - 1.0) * bessel_j1(z * rho)
    });
    hankel_from_zero(eps, z, 0.5 * d) + outer
}

/// Fourier multiplier of `r K` on the torus as a packed complex number `m_x + i m_y`, where
/// `(m_x, m_y)` is the vector multiplier at wave vector `q`.
///
/// The full kernel has `i q^perp |q|^(-1-eps)`. The band term is the transform of
/// `(1 - r) K_plane`, `-2 pi i c q^perp/|q| int (1 - r) rho^(eps-1) J_1(|q| rho) d rho`; the
/// smooth torus correction inside the band is `O(delta^4)` and is left out.
pub(crate) fn packed_multiplier(eps: f64, q: Vec2, cutoff: &Option<BandCutoff>) -> Complex64 {
    let qn = q.norm();
    if qn == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut s = qn.powf(-eps);
    if let Some(c) = cutoff {
        s += 2.0 * PI * kernel_constant(eps) * band_hankel(eps, qn, c);
    }
    let p = q.perp() / qn;
    // i (p_x + i p_y) s
    Complex64::new(-p.y * s, p.x * s)
}

/// `i q^perp |q|^(-1-eps)`, the multiplier of the velocity `K * omega`, packed as `m_x + i m_y`.
pub(crate) fn velocity_multiplier(eps: f64, q: Vec2) -> Complex64 {
    packed_multiplier(eps, q, &None)
}

/// Precomputed `field -> <omega (x) omega, f>` for transport bikernels sharing `phi`.
///
/// By the antisymmetry of `K`, `<omega (x) omega, f> = int omega grad phi . (rK * omega)`.
/// The convolution is a Fourier multiplier and the remaining integrand is a trigonometric
/// polynomial of degree `4N`, so the grid sum below is exact.
pub struct TransportPairing {
    side: f64,
    cutoff: usize,
    n: usize,
    /// `grad P_2N phi` packed as `g_x + i g_y`
    grad: Vec<Complex64>,
    multipliers: Vec<Vec<Complex64>>,
}

impl TransportPairing {
    pub fn new(
        spec: &KernelSpec,
        phi: &dyn TestFunction,
        cutoff: usize,
        variants: &[Option<BandCutoff>],
    ) -> Result<Self> {
        let side = spec.side().ok_or(Error::DomainMismatch(
            "the quadratic form of a noise field needs a torus kernel",
        ))?;
        let n = fast_size(4 * cutoff + 1);
        let coeffs = phi.torus_coefficients(side, 2 * cutoff)?;
        let w = 2.0 * PI / side;
        let mut packed = ModeTable::zeros(2 * cutoff);
        for (k, c) in coeffs.iter() {
            let q = Vec2::new(k[0] as f64, k[1] as f64) * w;
            // grad e_k = i q e_k
            let g = Complex64::new(0.0, 1.0) * c;
            packed.set(k, g * Complex64::new(q.x, q.y));
        }
        let mut fft = Fft2::new(n);
        let mut grad = vec![Complex64::new(0.0, 0.0); n * n];
        packed.synthesize_into(side, &mut fft, &mut grad);

        let table = ModeTable::zeros(cutoff);
        let multipliers = variants
            .iter()
            .map(|v| {
                (0..table.as_slice().len())
                    .map(|i| {
                        let k = table.mode(i);
                        let q = Vec2::new(k[0] as f64, k[1] as f64) * w;
                        packed_multiplier(spec.epsilon, q, v)
                    })
                    .collect()
            })
            .collect();
        Ok(TransportPairing {
            side,
            cutoff,
            n,
            grad,
            multipliers,
        })
    }

    pub fn variants(&self) -> usize {
        self.multipliers.len()
    }

    /// A plan for [`apply_with`](Self::apply_with).
    pub fn workspace(&self) -> Fft2 {
        Fft2::new(self.n)
    }

    pub fn apply(&self, field: &NoiseField) -> Result<Vec<f64>> {
        self.apply_with(field, &mut self.workspace())
    }

    pub fn apply_with(&self, field: &NoiseField, fft: &mut Fft2) -> Result<Vec<f64>> {
        self.check(field.side(), field.cutoff())?;
        self.bilinear(field.modes(), field.modes(), fft)
    }

    /// `int a grad phi . (rK * b)` for coefficient tables with the prepared cutoff; the
    /// quadratic form is the diagonal `a = b`.
    pub fn apply_bilinear(&self, a: &ModeTable, b: &ModeTable, fft: &mut Fft2) -> Result<Vec<f64>> {
        self.check(self.side, a.cutoff())?;
        self.check(self.side, b.cutoff())?;
        self.bilinear(a, b, fft)
    }

    fn check(&self, side: f64, cutoff: usize) -> Result<()> {
        if (side - self.side).abs() > 1e-12 * self.side {
            return Err(Error::DomainMismatch("noise field on a torus of another side"));
        }
        if cutoff != self.cutoff {
            return Err(Error::Resolution {
                what: "noise field",
                detail: format!("pairing prepared for cutoff {}, field has {cutoff}", self.cutoff),
            });
        }
        Ok(())
    }

    fn bilinear(&self, a: &ModeTable, b: &ModeTable, fft: &mut Fft2) -> Result<Vec<f64>> {
        let nn = self.n * self.n;
        let mut omega = vec![Complex64::new(0.0, 0.0); nn];
        a.synthesize_into(self.side, fft, &mut omega);
        let mut vel = vec![Complex64::new(0.0, 0.0); nn];
        let h2 = (self.side / self.n as f64).powi(2);
        let mut out = Vec::with_capacity(self.multipliers.len());
        for mult in &self.multipliers {
            b.synthesize_scaled_into(self.side, fft, &mut vel, |i| mult[i]);
            let mut acc = 0.0;
            for i in 0..nn {
                acc += omega[i].re * (vel[i] * self.grad[i].conj()).re;
            }
            out.push(acc * h2);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::Bump;

    #[test]
    fn ramps_are_monotone_partitions() {
        for t in [Transition::Quintic, Transition::Smooth] {
            assert_eq!(t.ramp(0.0), 0.0);
            assert_eq!(t.ramp(1.0), 1.0);
            assert!((t.ramp(0.3) + t.ramp(0.7) - 1.0).abs() < 1e-15);
            let mut prev = 0.0;
            for i in 1..90 {
                let v = t.ramp(i as f64 / 100.0);
                assert!(v > prev);
                prev = v;
            }
        }
        let c = BandCutoff::new(2);
        assert_eq!(c.r(c.delta() * 0.5), 0.0);
        assert_eq!(c.r(c.delta()), 1.0);
    }

    /// Band multiplier against a direct polar quadrature of `(1 - r) K e^(-i q.u)`.
    #[test]
    fn band_multiplier_matches_direct_transform() {
        let eps = 0.5;
        let c = kernel_constant(eps);
        let cut = BandCutoff::new(1);
        let q = Vec2::new(7.0, -3.0);
        let full = packed_multiplier(eps, q, &None);
        let with = packed_multiplier(eps, q, &Some(cut));
        let band = full - with;
        let gl = GaussLegendre::new(24);
        let (mut bx, mut by) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let nt = 256;
        for j in 0..nt {
            let th = 2.0 * PI * j as f64 / nt as f64;
            let e = Vec2::new(th.cos(), th.sin());
            // rho^(eps - 2) rho d rho with t = rho^eps
            let radial = |rho: f64| {
                let k = e.perp() * (c * rho.powf(eps - 2.0));
                let ph = Complex64::from_polar(1.0, -q.dot(e) * rho);
                (k, ph * ((1.0 - cut.r(rho)) * rho))
            };
            for (t, w) in gl.on(0.0, 0.5f64.powf(eps)).chain(gl.on(0.5f64.powf(eps), 1.0)) {
                let rho = t.powf(1.0 / eps);
                let jac = rho.powf(1.0 - eps) / eps;
                let (k, ph) = radial(rho);
                bx += ph * (k.x * w * jac);
                by += ph * (k.y * w * jac);
            }
        }
        let dth = 2.0 * PI / nt as f64;
        let direct = (bx + Complex64::new(0.0, 1.0) * by) * dth;
        assert!((direct - band).norm() < 1e-9 * band.norm(), "{direct} vs {band}");
    }

    #[test]
    fn pairing_rejects_foreign_fields() {
        let spec = KernelSpec::torus(0.5, 4.0).unwrap();
        let phi = Bump::new(Vec2::ZERO, 1.0, 1.0).unwrap();
        let p = TransportPairing::new(&spec, &phi, 4, &[None]).unwrap();
        let f = NoiseField::zero(4.0, 5).unwrap();
        assert!(p.apply(&f).is_err());
        let f = NoiseField::zero(5.0, 4).unwrap();
        assert!(p.apply(&f).is_err());
        assert!(TransportPairing::new(&KernelSpec::plane(0.5).unwrap(), &phi, 4, &[None]).is_err());
    }
}
