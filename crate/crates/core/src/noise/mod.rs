//! Truncated space white noise on the torus of side `M`.

mod covariance;
mod sobolev;
mod wnf;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::modes::ModeTable;
use crate::rng::stream_rng;
use crate::testfn::TestFunction;

pub use covariance::{covariance_panel, covariance_test, CovarianceRow};
pub use sobolev::{weighted_sobolev_norm_sq, WeightSpec, WeightedNorm};
pub use wnf::{read_wnf1, write_wnf1, FieldGrid};

/// A real field `sum_k G_k e_k` on the torus, `|k|_inf <= N`, with `G_-k = conj(G_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseField {
    side: f64,
    modes: ModeTable,
}

impl NoiseField {
    pub fn zero(side: f64, cutoff: usize) -> Result<Self> {
        check_positive("M", side)?;
        check_cutoff(cutoff)?;
        Ok(NoiseField {
            side,
            modes: ModeTable::zeros(cutoff),
        })
    }

    /// Wrap a coefficient table; it must be Hermitian to rounding.
    pub fn from_modes(side: f64, modes: ModeTable) -> Result<Self> {
        check_positive("M", side)?;
        let scale = modes
            .as_slice()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let defect = modes.hermitian_defect();
        if defect > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidParameter {
                name: "coeffs",
                value: format!("Hermitian defect {defect:.3e}"),
                expected: "coeffs[-k] = conj(coeffs[k])",
            });
        }
        Ok(NoiseField { side, modes })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cutoff(&self) -> usize {
        self.modes.cutoff()
    }

    pub fn modes(&self) -> &ModeTable {
        &self.modes
    }

    pub fn into_modes(self) -> ModeTable {
        self.modes
    }

    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        self.modes.get(k)
    }

    /// Set `G_k` and `G_-k = conj(G_k)` together; the zero mode keeps only its real part.
    pub fn set_coeff(&mut self, k: [i64; 2], v: Complex64) {
        if k == [0, 0] {
            self.modes.set(k, Complex64::new(v.re, 0.0));
        } else {
            self.modes.set(k, v);
            self.modes.set([-k[0], -k[1]], v.conj());
        }
    }

    /// Real samples on the `n x n` grid starting at the corner `(-M/2, -M/2)`.
    pub fn to_grid(&self, n: usize) -> Vec<f64> {
        self.modes.synthesize_real(self.side, n)
    }

    /// Sum of `|G_k|^2`.
    pub fn energy(&self) -> f64 {
        self.modes.norm_sq()
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: "0".into(),
            expected: "an integer >= 1",
        });
    }
    Ok(())
}

/// Draw number `index` of the white-noise ensemble seeded by `seed`.
///
/// `G_k` for `k` in the half lattice `{k1 > 0} u {k1 = 0, k2 > 0}` is `(u + i v)/sqrt 2` with
/// independent standard normals, `G_0` is a real standard normal and `G_-k = conj(G_k)`.
/// Modes are visited in a fixed order, so raising the cutoff changes every coefficient;
/// determinism holds for a fixed `(M, N, seed, index)`.
pub fn sample_draw(side: f64, cutoff: usize, seed: u64, index: u64) -> Result<NoiseField> {
    let mut field = NoiseField::zero(side, cutoff)?;
    let mut rng = stream_rng(seed, index);
    let n = cutoff as i64;
    let g0: f64 = rng.sample(StandardNormal);
    field.set_coeff([0, 0], Complex64::new(g0, 0.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for k1 in 0..=n {
        for k2 in -n..=n {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            field.set_coeff([k1, k2], Complex64::new(u * s, v * s));
        }
    }
    Ok(field)
}

/// The first draw of the ensemble.
pub fn sample_white_noise(side: f64, cutoff: usize, seed: u64) -> Result<NoiseField> {
    sample_draw(side, cutoff, seed, 0)
}

/// Precomputed pairing `omega -> <omega, phi> = sum_k G_k conj(phi_k)`.
#[derive(Clone, Debug)]
pub struct Pairing {
    side: f64,
    /// nonzero `(k, conj(phi_k))`
    terms: Vec<([i64; 2], Complex64)>,
    norm_sq: f64,
}

impl Pairing {
    pub fn new(phi: &dyn TestFunction, side: f64, cutoff: usize) -> Result<Self> {
        let c = phi.torus_coefficients(side, cutoff)?;
        let terms = c
            .iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(k, v)| (k, v.conj()))
            .collect();
        Ok(Pairing {
            side,
            terms,
            norm_sq: c.norm_sq(),
        })
    }

    pub fn apply(&self, field: &NoiseField) -> f64 {
        debug_assert_eq!(field.side(), self.side);
        self.terms
            .iter()
            .map(|&(k, c)| (field.coeff(k) * c).re)
            .sum()
    }

    /// Apply to a raw coefficient table on the same torus.
    pub fn apply_modes(&self, modes: &ModeTable) -> f64 {
        self.terms.iter().map(|&(k, c)| (modes.get(k) * c).re).sum()
    }

    /// `sum |phi_k|^2` over the retained modes: the variance of the pairing under the
    /// truncated white noise.
    pub fn variance(&self) -> f64 {
        self.norm_sq
    }
}

/// `<omega, phi>` for a field and a test function on the same torus.
pub fn pair(field: &NoiseField, phi: &dyn TestFunction) -> Result<f64> {
    Ok(Pairing::new(phi, field.side(), field.cutoff())?.apply(field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::{TrigPolynomial, TrigTerm};
    use proptest::prelude::*;

    #[test]
    fn sampling_is_deterministic_and_hermitian() {
        let a = sample_white_noise(8.0, 6, 11).unwrap();
        let b = sample_white_noise(8.0, 6, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.modes().hermitian_defect(), 0.0);
        assert_eq!(a.coeff([0, 0]).im, 0.0);
        let c = sample_draw(8.0, 6, 11, 1).unwrap();
        assert_ne!(a, c);
        let g = a.modes().synthesize(8.0, 16);
        assert!(g.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn parseval_on_the_grid() {
        let f = sample_white_noise(5.0, 7, 3).unwrap();
        let n = 32;
        let grid = f.to_grid(n);
        let h2 = (5.0 / n as f64).powi(2);
        let l2: f64 = grid.iter().map(|v| v * v * h2).sum();
        assert!((l2 - f.energy()).abs() < 1e-10 * f.energy());
    }

    #[test]
    fn zero_test_function_pairs_to_zero() {
        let f = sample_white_noise(4.0, 3, 1).unwrap();
        let z = TrigPolynomial::new(4.0, vec![]).unwrap();
        assert_eq!(pair(&f, &z).unwrap(), 0.0);
    }

    #[test]
    fn pairing_matches_grid_integral() {
        let f = sample_white_noise(4.0, 4, 9).unwrap();
        let phi = TrigPolynomial::new(
            4.0,
            vec![
                TrigTerm { k: [1, -2], a: 0.7, b: 0.2 },
                TrigTerm { k: [0, 0], a: 0.5, b: 0.0 },
            ],
        )
        .unwrap();
        let n = 16;
        let grid = f.to_grid(n);
        let h = 4.0 / n as f64;
        let mut direct = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = crate::Vec2::new(-2.0 + h * i as f64, -2.0 + h * j as f64);
                direct += grid[i * n + j] * phi.value(x) * h * h;
            }
        }
        assert!((pair(&f, &phi).unwrap() - direct).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pairing_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
            let f = sample_white_noise(6.0, 4, seed).unwrap();
            let phi = TrigPolynomial::cosine(6.0, [1, 3], 1.0).unwrap();
            let psi = TrigPolynomial::sine(6.0, [-2, 0], 0.5).unwrap();
            let mix = phi.combine(a, &psi, b).unwrap();
            let lhs = pair(&f, &mix).unwrap();
            let rhs = a * pair(&f, &phi).unwrap() + b * pair(&f, &psi).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
