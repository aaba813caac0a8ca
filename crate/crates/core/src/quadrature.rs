//! Gauss–Legendre rules and a few composite helpers built on them.

use std::f64::consts::PI;

use crate::geometry::{Rect, Vec2};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule with `panels` equal sub-intervals.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Tensor rule over a rectangle.
    pub fn integrate_rect(&self, r: Rect, mut f: impl FnMut(Vec2) -> f64) -> f64 {
        let mut total = 0.0;
        for (x, wx) in self.on(r.x0, r.x1) {
            for (y, wy) in self.on(r.y0, r.y1) {
                total += wx * wy * f(Vec2::new(x, y));
            }
        }
        total
    }

    /// Tensor-rule nodes `(point, weight)` over a rectangle.
    pub fn rect_nodes(&self, r: Rect) -> Vec<(Vec2, f64)> {
        let ys: Vec<(f64, f64)> = self.on(r.y0, r.y1).collect();
        self.on(r.x0, r.x1)
            .flat_map(|(x, wx)| ys.iter().map(move |&(y, wy)| (Vec2::new(x, y), wx * wy)))
            .collect()
    }
}

/// Nodes of the composite tensor rule with `panels x panels` equal sub-rectangles.
pub fn composite_rect_nodes(gl: &GaussLegendre, r: Rect, panels: usize) -> Vec<(Vec2, f64)> {
    let hx = (r.x1 - r.x0) / panels as f64;
    let hy = (r.y1 - r.y0) / panels as f64;
    let mut out = Vec::with_capacity(panels * panels * gl.len() * gl.len());
    for i in 0..panels {
        for j in 0..panels {
            let x0 = r.x0 + i as f64 * hx;
            let y0 = r.y0 + j as f64 * hy;
            out.extend(gl.rect_nodes(Rect::new(x0, x0 + hx, y0, y0 + hy)));
        }
    }
    out
}

/// Bessel function `J_1`: power series for small arguments, otherwise the trapezoid rule
/// on `(1/pi) int_0^pi cos(t - x sin t) dt`, which converges geometrically.
pub fn bessel_j1(x: f64) -> f64 {
    if x.abs() <= 4.0 {
        let h = 0.5 * x;
        let h2 = h * h;
        let mut term = h;
        let mut sum = h;
        for m in 1..40 {
            term *= -h2 / (m as f64 * (m + 1) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    let n = 2 * (x.abs() as usize + 24);
    let h = PI / n as f64;
    let mut s = 0.5 * (PI - x * PI.sin()).cos() + 0.5;
    for i in 1..n {
        let t = i as f64 * h;
        s += (t - x * t.sin()).cos();
    }
    s / n as f64
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Radial breakpoints `r_max, r_max/2, ..., r_max/2^levels` for integrands that are
/// singular at `r = 0`; returned in increasing order, starting at the smallest.
pub fn dyadic_breaks(r_max: f64, levels: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..=levels).map(|j| r_max * 0.5f64.powi(j as i32)).collect();
    b.reverse();
    b
}
