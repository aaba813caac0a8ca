use serde::{Deserialize, Serialize};

use super::{quad_pair, Bikernel, TrigBikernel};
use crate::error::{Error, Result};
use crate::noise::sample_draw;
use crate::stats::{par_draws, Estimate};
use crate::testfn::{TrigPolynomial, TrigTerm};

/// Monte Carlo mean and variance of `<omega (x) omega, f>` against `int f(x, x) dx` and
/// `2 |f|^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub bikernel: String,
    pub draws: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub diagonal: f64,
    pub mean_z: f64,
    pub variance: f64,
    /// from the fourth central moment
    pub variance_stderr: f64,
    pub target_variance: f64,
    pub variance_z: f64,
    /// mean of the renormalized form, target `0`
    pub renormalized_mean: f64,
    /// both scores at most `5`
    pub pass: bool,
}

fn trig(side: f64, name: &str, terms: &[([i64; 2], f64, f64)]) -> Result<TrigPolynomial> {
    let p = TrigPolynomial::new(side, terms.iter().map(|&(k, a, b)| TrigTerm { k, a, b }).collect())?;
    Ok(p.named(name))
}

/// Five symmetric trigonometric bikernels of degree at most 2 on the torus of side `side`.
pub fn bikernel_panel(side: f64) -> Result<Vec<TrigBikernel>> {
    let a = trig(side, "a", &[([1, 0], 1.0, 0.0), ([0, 0], 0.5, 0.0)])?;
    let b = trig(side, "b", &[([0, 1], 0.3, -0.7)])?;
    let c = trig(side, "c", &[([1, -1], 0.0, 1.0), ([2, 1], 0.4, 0.2)])?;
    let d = trig(side, "d", &[([1, 2], 0.6, 0.6)])?;
    Ok(vec![
        TrigBikernel::tensor(&a),
        TrigBikernel::new(side, vec![(1.0, a.clone(), b.clone())])?,
        TrigBikernel::new(side, vec![(2.0, c.clone(), c.clone()), (-1.0, a.clone(), d.clone())])?,
        TrigBikernel::new(side, vec![(0.5, b.clone(), d.clone()), (1.5, d.clone(), d.clone())])?,
        TrigBikernel::new(side, vec![(1.0, a, c.clone()), (1.0, b, c)])?,
    ])
}

/// Draw `i` of bikernel `j` is `sample_draw(side, cutoff, seed + j, i)`.
pub fn identity_check(
    panel: &[TrigBikernel],
    side: f64,
    cutoff: usize,
    draws: usize,
    seed: u64,
) -> Result<Vec<IdentityRow>> {
    if draws < 2 {
        return Err(Error::InvalidParameter {
            name: "draws",
            value: draws.to_string(),
            expected: "at least 2 draws",
        });
    }
    // validates the parameters once before the parallel loop
    sample_draw(side, cutoff, seed, 0)?;
    panel
        .iter()
        .enumerate()
        .map(|(j, b)| {
            if b.degree() > cutoff {
                return Err(Error::Resolution {
                    what: "bikernel",
                    detail: format!("{} has degree {} above the cutoff {cutoff}", b.id(), b.degree()),
                });
            }
            let vals: Vec<f64> = par_draws(draws, |i| {
                let f = sample_draw(side, cutoff, seed.wrapping_add(j as u64), i).expect("validated");
                quad_pair(&f, b).expect("trigonometric bikernels have a Fourier path")
            });
            let est = Estimate::of(&vals);
            let diagonal = b.exact_diagonal();
            let variance = est.sample_variance();
            let m4 = vals.iter().map(|v| (v - est.mean).powi(4)).sum::<f64>() / draws as f64;
            let variance_stderr = ((m4 - variance * variance).max(0.0) / draws as f64).sqrt();
            let target_variance = 2.0 * b.l2_norm_sq();
            let mean_z = est.z_score(diagonal);
            let variance_z = if variance_stderr > 0.0 {
                (variance - target_variance).abs() / variance_stderr
            } else if variance == target_variance {
                0.0
            } else {
                f64::INFINITY
            };
            Ok(IdentityRow {
                bikernel: b.id(),
                draws,
                mean: est.mean,
                mean_stderr: est.stderr,
                diagonal,
                mean_z,
                variance,
                variance_stderr,
                target_variance,
                variance_z,
                renormalized_mean: est.mean - diagonal,
                pass: mean_z <= 5.0 && variance_z <= 5.0,
            })
        })
        .collect()
}
