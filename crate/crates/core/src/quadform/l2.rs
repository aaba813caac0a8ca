//! `L^2` norms of transport bikernels and of their differences.
//!
//! With `u = x - y`, `int int f^2 = 1/4 int du w(|u|)^2 int dx (K(u) . (grad phi(x) - grad phi(x - u)))^2`
//! where `w` is the difference of the two radial cutoffs being compared. `K(u) = c rho^(eps-2) e^perp`
//! for `u = rho e`, so after `t = rho^(2 eps)` the radial integrand is bounded.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::transport::{cutoff_r, BandCutoff};
use crate::error::{check_positive, Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::kernels::kernel_constant;
use crate::quadrature::{composite_rect_nodes, GaussLegendre};
use crate::testfn::TestFunction;

const ANGLES: usize = 32;
const TRIG_GRID: usize = 64;

/// Evaluates `g(rho, theta) = rho^-2 int (e^perp . (grad phi(x) - grad phi(x - rho e)))^2 dx`.
struct Inner<'a> {
    phi: &'a dyn TestFunction,
    /// `int b^2`, `int b d`, `int d^2` with `b = phi_xy`, `d = (phi_yy - phi_xx)/2`
    moments: [f64; 3],
    /// below this radius the second-order Taylor expansion is used
    taylor_below: f64,
    gl: GaussLegendre,
    trig_side: Option<f64>,
}

impl<'a> Inner<'a> {
    fn new(phi: &'a dyn TestFunction, side: Option<f64>) -> Result<Self> {
        let trig_side = match (phi.support(), side) {
            (Some(_), _) => None,
            (None, Some(m)) => Some(m),
            (None, None) => {
                return Err(Error::DomainMismatch(
                    "periodic test functions need the side of the torus",
                ))
            }
        };
        let scale = phi.gradient_sup() / phi.hessian_sup().max(f64::MIN_POSITIVE);
        let mut me = Inner {
            phi,
            moments: [0.0; 3],
            taylor_below: 1e-4 * scale,
            gl: GaussLegendre::new(12),
            trig_side,
        };
        let m = me.integrate_x(Vec2::ZERO, |x, _| {
            let [a, b, d] = phi.hessian(x);
            let d = 0.5 * (d - a);
            [b * b, b * d, d * d]
        });
        me.moments = m;
        Ok(me)
    }

    /// Integrate a vector of three values over a region containing the supports of
    /// `phi` and `phi(. - u)`.
    fn integrate_x(&self, u: Vec2, f: impl Fn(Vec2, Vec2) -> [f64; 3]) -> [f64; 3] {
        let mut acc = [0.0; 3];
        let mut add = |x: Vec2, w: f64| {
            let v = f(x, u);
            for i in 0..3 {
                acc[i] += w * v[i];
            }
        };
        match (self.trig_side, self.phi.support()) {
            (Some(m), _) => {
                let h = m / TRIG_GRID as f64;
                for i in 0..TRIG_GRID {
                    for j in 0..TRIG_GRID {
                        add(Vec2::new(-0.5 * m + h * i as f64, -0.5 * m + h * j as f64), h * h);
                    }
                }
            }
            (None, Some(r)) => {
                let s = r.translate(u);
                let bbox = Rect::new(r.x0.min(s.x0), r.x1.max(s.x1), r.y0.min(s.y0), r.y1.max(s.y1));
                for (x, w) in composite_rect_nodes(&self.gl, bbox, 4) {
                    add(x, w);
                }
            }
            (None, None) => unreachable!(),
        }
        acc
    }

    /// `int_0^(2 pi) g(rho, theta) d theta`.
    fn angular(&self, rho: f64) -> f64 {
        if rho < self.taylor_below {
            let [bb, _, dd] = self.moments;
            return PI * (bb + dd);
        }
        // g(rho, theta + pi) = g(rho, theta) by the substitution x -> x + u
        let dth = PI / ANGLES as f64;
        let mut acc = 0.0;
        for j in 0..ANGLES {
            let th = dth * j as f64;
            let e = Vec2::new(th.cos(), th.sin());
            let ep = e.perp();
            let v = self.integrate_x(e * rho, |x, u| {
                let d = ep.dot(self.phi.gradient(x) - self.phi.gradient(x - u));
                [d * d, 0.0, 0.0]
            })[0];
            acc += v / (rho * rho);
        }
        2.0 * acc * dth
    }

    /// `1/4 int_lo^hi w(rho)^2 rho^(2 eps - 1) G(rho) d rho` with `t = rho^(2 eps)`.
    fn radial(&self, eps: f64, breaks: &[f64], w: impl Fn(f64) -> f64) -> f64 {
        let gl = GaussLegendre::new(16);
        let p = 2.0 * eps;
        let mut total = 0.0;
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0].powf(p), seg[1].powf(p));
            if b <= a {
                continue;
            }
            total += gl.integrate_composite(a, b, 4, |t| {
                let rho = t.powf(1.0 / p);
                let wv = w(rho);
                if wv == 0.0 {
                    return 0.0;
                }
                wv * wv * self.angular(rho)
            });
        }
        0.25 * total / p
    }
}

/// Radii where a cutoff changes smoothness.
fn cutoff_breaks(c: &Option<BandCutoff>) -> Vec<f64> {
    c.map_or(vec![], |c| vec![0.5 * c.delta(), c.delta()])
}

/// `int int (f_a - f_b)^2` for transport bikernels of `phi` that differ only in their radial
/// cutoffs, `None` standing for `H` itself. The kernel in the band is the plane kernel.
///
/// Compactly supported `phi` are integrated over the plane; periodic ones need `side` and are
/// integrated over the cell.
pub fn band_distance_sq(
    phi: &dyn TestFunction,
    epsilon: f64,
    side: Option<f64>,
    a: Option<BandCutoff>,
    b: Option<BandCutoff>,
) -> Result<f64> {
    if a.is_none() && b.is_none() {
        return Ok(0.0);
    }
    let inner = Inner::new(phi, side)?;
    let mut breaks = vec![0.0];
    breaks.extend(cutoff_breaks(&a));
    breaks.extend(cutoff_breaks(&b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let c = kernel_constant(epsilon);
    let v = inner.radial(epsilon, &breaks, |rho| cutoff_r(&a, rho) - cutoff_r(&b, rho));
    Ok(c * c * v)
}

/// `int int H^2` on the plane for a compactly supported `phi`.
///
/// Beyond the diagonal `rho_0` of the support box the two gradients never overlap and the
/// remaining integral is `c^2 pi int|grad phi|^2 rho_0^(2 eps - 2) / (4 - 4 eps)`.
pub fn h_l2_norm_sq(phi: &dyn TestFunction, epsilon: f64) -> Result<f64> {
    let r = phi.support().ok_or(Error::DomainMismatch(
        "the plane norm of H needs a compactly supported test function",
    ))?;
    let inner = Inner::new(phi, None)?;
    let rho0 = (r.x1 - r.x0).hypot(r.y1 - r.y0);
    let breaks = [0.0, rho0 / 64.0, rho0 / 16.0, rho0 / 4.0, rho0];
    let c = kernel_constant(epsilon);
    let near = inner.radial(epsilon, &breaks, |_| 1.0);
    let grad_sq = inner.integrate_x(Vec2::ZERO, |x, _| [phi.gradient(x).norm_sq(), 0.0, 0.0])[0];
    let tail = 0.5 * PI * grad_sq * rho0.powf(2.0 * epsilon - 2.0) / (2.0 - 2.0 * epsilon);
    Ok(c * c * (near + tail))
}

/// `int int H^2 <= C(R) (|D^2 phi|_inf^2 + |grad phi|_inf^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HL2Bound {
    /// `C(R) = pi c^2 |S| max(1/(2 eps), 1/(1 - eps))` with `|S|` the area of the support box
    pub constant: f64,
    pub bound: f64,
}

/// Splitting at `|u| = 1`: inside, `|grad phi(x) - grad phi(x-u)| <= |u| |D^2 phi|_inf` on a set
/// of area at most `2|S|`; outside, the squared difference integrates to at most
/// `4 |S| |grad phi|_inf^2`. With `|K(u)|^2 = c^2 |u|^(2 eps - 4)` the two radial integrals give
/// `pi c^2 |S| / (2 eps)` and `pi c^2 |S| / (1 - eps)`.
pub fn hl2_bound(phi: &dyn TestFunction, epsilon: f64) -> Result<HL2Bound> {
    check_positive("epsilon", epsilon)?;
    let r = phi.support().ok_or(Error::DomainMismatch(
        "the HL2 bound needs a compactly supported test function",
    ))?;
    let c = kernel_constant(epsilon);
    let constant = PI * c * c * r.area() * (0.5 / epsilon).max(1.0 / (1.0 - epsilon));
    let (g, h) = (phi.gradient_sup(), phi.hessian_sup());
    Ok(HL2Bound {
        constant,
        bound: constant * (h * h + g * g),
    })
}
