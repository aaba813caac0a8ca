use serde::{Deserialize, Serialize};

use super::{sample_draw, Pairing};
use crate::error::{Error, Result};
use crate::stats::{par_draws, Estimate};
use crate::testfn::{TestFunction, TrigPolynomial, TrigTerm};

/// Empirical `E <omega, phi_i> <omega, phi_j>` against `<phi_i, phi_j>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub phi: String,
    pub psi: String,
    pub draws: usize,
    pub empirical: f64,
    pub target: f64,
    pub stderr: f64,
    pub z: f64,
    /// `z <= 4`
    pub pass: bool,
}

/// Five trigonometric test functions of degree at most 2, overlapping in pairs so that
/// the covariance matrix has off-diagonal entries.
pub fn covariance_panel(side: f64) -> Result<Vec<TrigPolynomial>> {
    let t = |k: [i64; 2], a: f64, b: f64| TrigTerm { k, a, b };
    let specs: [(&str, Vec<TrigTerm>); 5] = [
        ("cov0", vec![t([1, 0], 1.0, 0.0), t([0, 0], 0.5, 0.0)]),
        ("cov1", vec![t([1, 0], 0.5, 0.5), t([0, 1], 0.0, 1.0)]),
        ("cov2", vec![t([1, 1], 1.0, -0.5)]),
        ("cov3", vec![t([1, 1], 0.3, 0.0), t([2, -1], 0.0, 0.8)]),
        ("cov4", vec![t([0, 2], 0.7, 0.7), t([0, 1], 0.2, 0.0)]),
    ];
    specs
        .into_iter()
        .map(|(name, terms)| Ok(TrigPolynomial::new(side, terms)?.named(name)))
        .collect()
}

/// Monte Carlo check of the white-noise covariance over every pair of `panel`.
///
/// Draw `i` is `sample_draw(side, cutoff, seed, i)`; the functions must be resolved by the
/// cutoff, so that truncation is exact.
pub fn covariance_test(
    side: f64,
    cutoff: usize,
    panel: &[TrigPolynomial],
    draws: usize,
    seed: u64,
) -> Result<Vec<CovarianceRow>> {
    if draws < 2 {
        return Err(Error::InvalidParameter {
            name: "draws",
            value: draws.to_string(),
            expected: "at least 2 draws",
        });
    }
    if let Some(p) = panel.iter().find(|p| p.degree() > cutoff) {
        return Err(Error::Resolution {
            what: "test function panel",
            detail: format!("{} has degree {} above the cutoff {cutoff}", p.id(), p.degree()),
        });
    }
    let pairings: Vec<Pairing> = panel
        .iter()
        .map(|p| Pairing::new(p, side, cutoff))
        .collect::<Result<_>>()?;
    let coeffs: Vec<_> = panel
        .iter()
        .map(|p| p.coefficients(cutoff))
        .collect::<Result<_>>()?;
    let values: Vec<Vec<f64>> = par_draws(draws, |i| {
        let f = sample_draw(side, cutoff, seed, i).expect("parameters validated by Pairing::new");
        pairings.iter().map(|p| p.apply(&f)).collect()
    });
    let mut rows = Vec::new();
    for i in 0..panel.len() {
        for j in i..panel.len() {
            let products: Vec<f64> = values.iter().map(|v| v[i] * v[j]).collect();
            let est = Estimate::of(&products);
            let target = coeffs[i].inner(&coeffs[j]).re;
            let z = est.z_score(target);
            rows.push(CovarianceRow {
                phi: panel[i].id(),
                psi: panel[j].id(),
                draws,
                empirical: est.mean,
                target,
                stderr: est.stderr,
                z,
                pass: z <= 4.0,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_consistent() {
        let panel = covariance_panel(4.0).unwrap();
        let rows = covariance_test(4.0, 2, &panel, 4000, 3).unwrap();
        assert_eq!(rows.len(), 15);
        assert!(rows.iter().any(|r| r.phi != r.psi && r.target.abs() > 0.1));
        assert!(rows.iter().all(|r| r.z < 5.0), "{rows:?}");
        assert!(covariance_test(4.0, 1, &panel, 100, 3).is_err());
    }
}
