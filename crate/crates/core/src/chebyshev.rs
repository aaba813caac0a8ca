//! Tensor Chebyshev interpolation on `[-h, h]^2` for smooth vector-valued functions.

use std::f64::consts::PI;

use crate::geometry::Vec2;

/// Interpolant of `C` smooth components on the square `[-h, h]^2`.
#[derive(Clone, Debug)]
pub struct Chebyshev2<const C: usize> {
    half: f64,
    n: usize,
    // coeffs[(p * n + q)] holds the C component coefficients of T_p(s) T_q(t)
    coeffs: Vec<[f64; C]>,
}

impl<const C: usize> Chebyshev2<C> {
    /// Interpolate `f` at the `n x n` Chebyshev points of the first kind.
    pub fn build(half: f64, n: usize, mut f: impl FnMut(Vec2) -> [f64; C]) -> Self {
        assert!(n >= 2);
        let theta: Vec<f64> = (0..n).map(|j| PI * (j as f64 + 0.5) / n as f64).collect();
        let nodes: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let mut values = vec![[0.0; C]; n * n];
        for (j, &s) in nodes.iter().enumerate() {
            for (k, &t) in nodes.iter().enumerate() {
                values[j * n + k] = f(Vec2::new(half * s, half * t));
            }
        }
        // cos(p theta_j) table
        let cosine: Vec<f64> = (0..n)
            .flat_map(|p| theta.iter().map(move |&th| (p as f64 * th).cos()))
            .collect();
        // transform along the second index, then the first
        let mut partial = vec![[0.0; C]; n * n];
        for j in 0..n {
            for q in 0..n {
                let mut acc = [0.0; C];
                for k in 0..n {
                    let w = cosine[q * n + k];
                    let v = &values[j * n + k];
                    for c in 0..C {
                        acc[c] += w * v[c];
                    }
                }
                partial[j * n + q] = acc;
            }
        }
        let mut coeffs = vec![[0.0; C]; n * n];
        let norm = |p: usize| if p == 0 { 1.0 } else { 2.0 } / n as f64;
        for p in 0..n {
            for q in 0..n {
                let mut acc = [0.0; C];
                for j in 0..n {
                    let w = cosine[p * n + j];
                    let v = &partial[j * n + q];
                    for c in 0..C {
                        acc[c] += w * v[c];
                    }
                }
                let s = norm(p) * norm(q);
                for a in acc.iter_mut() {
                    *a *= s;
                }
                coeffs[p * n + q] = acc;
            }
        }
        Chebyshev2 { half, n, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.n - 1
    }

    /// Evaluate at `p`, which must lie in the square.
    pub fn eval(&self, p: Vec2) -> [f64; C] {
        let n = self.n;
        let s = p.x / self.half;
        let t = p.y / self.half;
        let mut ts = [0.0; 64];
        debug_assert!(n <= 64);
        ts[0] = 1.0;
        if n > 1 {
            ts[1] = t;
        }
        for q in 2..n {
            ts[q] = 2.0 * t * ts[q - 1] - ts[q - 2];
        }
        // Clenshaw in s over rows that are already contracted in t
        let mut b1 = [0.0; C];
        let mut b2 = [0.0; C];
        for pi in (0..n).rev() {
            let row = &self.coeffs[pi * n..(pi + 1) * n];
            let mut r = [0.0; C];
            for (q, c) in row.iter().enumerate() {
                for k in 0..C {
                    r[k] += c[k] * ts[q];
                }
            }
            let mut b0 = [0.0; C];
            for k in 0..C {
                let factor = if pi == 0 { s } else { 2.0 * s };
                b0[k] = r[k] + factor * b1[k] - b2[k];
            }
            if pi == 0 {
                // T_0 row: result = r_0 + s*b1 - b2
                return b0;
            }
            b2 = b1;
            b1 = b0;
        }
        unreachable!()
    }

    /// Largest magnitude among the coefficients of total degree at least `n - 3`,
    /// a cheap indicator of the interpolation error.
    pub fn tail_magnitude(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p.max(q) + 3 >= n {
                    for c in &self.coeffs[p * n + q] {
                        m = m.max(c.abs());
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_functions() {
        let f = |p: Vec2| [(p.x * 1.3).sin() * (0.7 * p.y).exp(), p.x * p.y * p.y];
        let cheb = Chebyshev2::<2>::build(0.5, 20, f);
        for i in 0..11 {
            for j in 0..11 {
                let p = Vec2::new(-0.5 + 0.1 * i as f64, -0.5 + 0.1 * j as f64);
                let a = cheb.eval(p);
                let b = f(p);
                assert!((a[0] - b[0]).abs() < 1e-14, "{a:?} {b:?}");
                assert!((a[1] - b[1]).abs() < 1e-14);
            }
        }
        assert!(cheb.tail_magnitude() < 1e-14);
    }
}
