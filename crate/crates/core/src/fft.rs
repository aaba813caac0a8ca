//! Square two-dimensional FFTs on row-major buffers.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Smallest `n >= min` whose only prime factors are 2, 3 and 5.
pub fn fast_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Planned forward and inverse transforms of an `n x n` grid. Both are unnormalized:
/// `forward` computes `sum_j u_j e^(-2 pi i k.j/n)`, `inverse` the same with `+`.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Fft2 {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        let plan = Arc::clone(&self.fwd);
        self.run(&*plan, data);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let plan = Arc::clone(&self.inv);
        self.run(&*plan, data);
    }

    fn run(&mut self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n * self.n);
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, self.n);
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, self.n);
    }

    /// Transform only the rows in `rows`, then every column. Rows outside the list must be
    /// zero; this saves work when a spectrum is supported on few rows.
    pub fn inverse_sparse_rows(&mut self, data: &mut [Complex64], rows: &[usize]) {
        let n = self.n;
        let plan = Arc::clone(&self.inv);
        for &r in rows {
            plan.process_with_scratch(&mut data[r * n..(r + 1) * n], &mut self.scratch);
        }
        transpose(data, n);
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, n);
    }

    /// Forward transform of every row, then of the columns, keeping only the rows listed.
    /// Other rows of the output are left in an unspecified state.
    pub fn forward_sparse_rows(&mut self, data: &mut [Complex64], rows: &[usize]) {
        let n = self.n;
        let plan = Arc::clone(&self.fwd);
        // columns first so that the wanted output rows are contiguous at the end
        transpose(data, n);
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, n);
        for &r in rows {
            plan.process_with_scratch(&mut data[r * n..(r + 1) * n], &mut self.scratch);
        }
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft() {
        let n = 6;
        let data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut out = data.clone();
        let mut f = Fft2::new(n);
        f.forward(&mut out);
        for k1 in 0..n {
            for k2 in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..n {
                    for j2 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k1 * j1 + k2 * j2) as f64) / n as f64;
                        acc += data[j1 * n + j2] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - out[k1 * n + k2]).norm() < 1e-12);
            }
        }
        f.inverse(&mut out);
        for (a, b) in out.iter().zip(&data) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-14);
        }
    }

    #[test]
    fn sparse_row_variants_agree() {
        let n = 20;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        let rows = [0, 1, 2, 18, 19];
        for &r in &rows {
            for c in 0..n {
                data[r * n + c] = Complex64::new(r as f64 + 0.1 * c as f64, (c as f64).sin());
            }
        }
        let mut f = Fft2::new(n);
        let mut a = data.clone();
        f.inverse(&mut a);
        let mut b = data.clone();
        f.inverse_sparse_rows(&mut b, &rows);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-11);
        }
        let mut c = a.clone();
        f.forward(&mut c);
        let mut d = a.clone();
        f.forward_sparse_rows(&mut d, &rows);
        for &r in &rows {
            for j in 0..n {
                assert!((c[r * n + j] - d[r * n + j]).norm() < 1e-9);
            }
        }
    }
}
