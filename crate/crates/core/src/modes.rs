//! Dense tables of Fourier modes `|k|_inf <= N` on a torus of side `M`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::Fft2;

/// Mode amplitudes `c_k`, `k in [-N, N]^2`, stored row-major in `k1` then `k2`.
///
/// The represented function is `sum_k c_k e_k` with the orthonormal basis
/// `e_k(x) = M^-1 exp(2 pi i k.x / M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    cutoff: usize,
    data: Vec<Complex64>,
}

impl ModeTable {
    pub fn zeros(cutoff: usize) -> Self {
        let w = 2 * cutoff + 1;
        ModeTable {
            cutoff,
            data: vec![Complex64::new(0.0, 0.0); w * w],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn width(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn contains(&self, k: [i64; 2]) -> bool {
        let n = self.cutoff as i64;
        k[0].abs() <= n && k[1].abs() <= n
    }

    #[inline]
    pub fn index(&self, k: [i64; 2]) -> usize {
        let n = self.cutoff as i64;
        ((k[0] + n) as usize) * self.width() + (k[1] + n) as usize
    }

    #[inline]
    pub fn mode(&self, index: usize) -> [i64; 2] {
        let n = self.cutoff as i64;
        let w = self.width();
        [(index / w) as i64 - n, (index % w) as i64 - n]
    }

    /// Amplitude of mode `k`, zero outside the table.
    #[inline]
    pub fn get(&self, k: [i64; 2]) -> Complex64 {
        if self.contains(k) {
            self.data[self.index(k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    #[inline]
    pub fn set(&mut self, k: [i64; 2], v: Complex64) {
        let i = self.index(k);
        self.data[i] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        self.data.iter().enumerate().map(|(i, &c)| (self.mode(i), c))
    }

    /// Largest `|c_-k - conj(c_k)|`, zero for tables of real functions.
    pub fn hermitian_defect(&self) -> f64 {
        let last = self.data.len() - 1;
        (0..self.data.len())
            .map(|i| (self.data[last - i] - self.data[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `sum_k |c_k|^2`, the squared L2 norm of the represented function.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `sum_k a_k conj(b_k)`, the L2 inner product of the represented functions.
    pub fn inner(&self, other: &ModeTable) -> Complex64 {
        let n = self.cutoff.min(other.cutoff) as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in -n..=n {
            for k2 in -n..=n {
                acc += self.get([k1, k2]) * other.get([k1, k2]).conj();
            }
        }
        acc
    }

    /// Copy into a table with another cutoff, dropping or zero-padding modes.
    pub fn resized(&self, cutoff: usize) -> ModeTable {
        let mut out = ModeTable::zeros(cutoff);
        let n = self.cutoff.min(cutoff) as i64;
        for k1 in -n..=n {
            for k2 in -n..=n {
                out.set([k1, k2], self.get([k1, k2]));
            }
        }
        out
    }

    /// Values of the represented function on the `n x n` grid
    /// `x_(i,j) = (-M/2 + i M/n, -M/2 + j M/n)`, stored as `[i * n + j]`.
    pub fn synthesize(&self, side: f64, n: usize) -> Vec<Complex64> {
        let mut grid = vec![Complex64::new(0.0, 0.0); n * n];
        self.synthesize_into(side, &mut Fft2::new(n), &mut grid);
        grid
    }

    /// [`synthesize`](Self::synthesize) with a caller-owned plan and buffer.
    pub fn synthesize_into(&self, side: f64, fft: &mut Fft2, grid: &mut [Complex64]) {
        self.synthesize_scaled_into(side, fft, grid, |_| Complex64::new(1.0, 0.0));
    }

    /// Synthesize `sum_k mult(k) c_k e_k` on the grid of [`synthesize`](Self::synthesize).
    pub fn synthesize_scaled_into(
        &self,
        side: f64,
        fft: &mut Fft2,
        grid: &mut [Complex64],
        mult: impl Fn(usize) -> Complex64,
    ) {
        let n = fft.size();
        assert!(n > 2 * self.cutoff, "grid of {n} points cannot hold cutoff {}", self.cutoff);
        grid.fill(Complex64::new(0.0, 0.0));
        for (idx, &c) in self.data.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let k = self.mode(idx);
            // shift of origin to the corner -M/2: factor (-1)^(k1+k2)
            let sign = if (k[0] + k[1]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let i = k[0].rem_euclid(n as i64) as usize;
            let j = k[1].rem_euclid(n as i64) as usize;
            grid[i * n + j] = c * mult(idx) * (sign / side);
        }
        fft.inverse(grid);
    }

    /// Inverse of [`synthesize_into`](Self::synthesize_into): forward-transforms `grid` in place
    /// and returns the coefficients with `|k|_inf <= cutoff`, exact for band-limited grids.
    pub fn analyze_from(side: f64, fft: &mut Fft2, grid: &mut [Complex64], cutoff: usize) -> Self {
        let n = fft.size();
        assert!(n > 2 * cutoff, "grid of {n} points cannot hold cutoff {cutoff}");
        fft.forward(grid);
        let w = side / (n * n) as f64;
        let mut t = ModeTable::zeros(cutoff);
        for idx in 0..t.data.len() {
            let k = t.mode(idx);
            let sign = if (k[0] + k[1]).rem_euclid(2) == 0 { w } else { -w };
            let i = k[0].rem_euclid(n as i64) as usize;
            let j = k[1].rem_euclid(n as i64) as usize;
            t.data[idx] = grid[i * n + j] * sign;
        }
        t
    }

    /// Real part of [`synthesize`](Self::synthesize).
    pub fn synthesize_real(&self, side: f64, n: usize) -> Vec<f64> {
        self.synthesize(side, n).into_iter().map(|c| c.re).collect()
    }
}
