//! Statistical and deterministic checks of the dynamics: Gaussian marginals along the flow and
//! the residual of the weak formulation.

mod invariance;
mod residual;
mod vortex;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::stats::{ks_standard_normal, ks_uniform, Estimate, KsResult};
use crate::testfn::{TrigPolynomial, TrigTerm};

pub use invariance::{invariance_experiment, InvarianceConfig, InvarianceReport};
pub use residual::{
    residual_refinement, residual_test_function, two_mode_state, weakform_residual,
    RefinementLevel, RefinementRow, ResidualConfig, ResidualRefinement, ResidualReport,
    TimeQuadrature,
};
pub use vortex::{vortex_marginal_experiment, VortexMarginalConfig, VortexMarginalReport};

/// KS test of one set of pairings against `N(0, target)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianityReport {
    pub phi: String,
    pub t: f64,
    pub sample_size: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub mean: f64,
    pub variance: f64,
    pub target_variance: f64,
    /// `p_value > alpha / panel size`
    pub pass: bool,
}

impl GaussianityReport {
    /// `samples` are raw pairings; they are scaled by the target standard deviation.
    pub fn new(
        phi: String,
        t: f64,
        samples: &[f64],
        target_variance: f64,
        threshold: f64,
    ) -> Result<Self> {
        if samples.len() < 100 {
            return Err(Error::InvalidParameter {
                name: "ensemble",
                value: samples.len().to_string(),
                expected: "at least 100 samples per Gaussianity test",
            });
        }
        check_positive("target variance", target_variance)?;
        let sd = target_variance.sqrt();
        let scaled: Vec<f64> = samples.iter().map(|v| v / sd).collect();
        let ks = ks_standard_normal(&scaled);
        let est = Estimate::of(samples);
        Ok(GaussianityReport {
            phi,
            t,
            sample_size: samples.len(),
            ks_statistic: ks.statistic,
            p_value: ks.p_value,
            mean: est.mean,
            variance: est.sample_variance(),
            target_variance,
            pass: ks.p_value > threshold,
        })
    }
}

/// `count` real trigonometric test functions of degree at most 4 on the torus of side `side`.
/// Function `j` is `cos(2 pi k_j.x/M) + sin(2 pi k_(j+3).x/M)/2` over a fixed list of
/// low wave vectors.
pub fn trig_panel(side: f64, count: usize) -> Result<Vec<TrigPolynomial>> {
    const WAVES: [[i64; 2]; 20] = [
        [1, 0], [0, 1], [1, 1], [1, -1], [2, 0], [0, 2], [2, 1], [1, 2], [2, -1], [-1, 2],
        [3, 0], [0, 3], [3, 1], [1, 3], [2, 2], [2, -2], [3, -1], [1, -3], [4, 0], [0, 4],
    ];
    if count == 0 || count > WAVES.len() {
        return Err(Error::InvalidParameter {
            name: "panel",
            value: count.to_string(),
            expected: "between 1 and 20 test functions",
        });
    }
    (0..count)
        .map(|j| {
            let p = TrigPolynomial::new(
                side,
                vec![
                    TrigTerm { k: WAVES[j], a: 1.0, b: 0.0 },
                    TrigTerm { k: WAVES[(j + 3) % WAVES.len()], a: 0.0, b: 0.5 },
                ],
            )?;
            Ok(p.named(format!("panel{j:02}")))
        })
        .collect()
}

/// KS calibration: under the null, KS p-values are uniform and rejections happen at rate
/// `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub replicates: usize,
    pub sample_size: usize,
    pub alpha: f64,
    pub rejection_rate: f64,
    /// `alpha + 3 sqrt(alpha (1 - alpha) / replicates)`
    pub allowed_rate: f64,
    /// KS test of the p-values against the uniform law
    pub uniformity: KsResult,
    pub pass: bool,
}

/// Feed `replicates` batches of exact standard normal samples, one batch per replicate, produced
/// by `draw(replicate)`, to the KS machinery.
pub fn ks_calibration(
    replicates: usize,
    alpha: f64,
    draw: impl Fn(u64) -> Vec<f64> + Sync + Send,
) -> Calibration {
    let batches = crate::stats::par_draws(replicates, draw);
    let sample_size = batches.first().map_or(0, |b| b.len());
    let p: Vec<f64> = batches.iter().map(|b| ks_standard_normal(b).p_value).collect();
    let rejections = p.iter().filter(|&&v| v <= alpha).count();
    let rate = rejections as f64 / replicates as f64;
    let allowed = alpha + 3.0 * (alpha * (1.0 - alpha) / replicates as f64).sqrt();
    let uniformity = ks_uniform(&p);
    Calibration {
        replicates,
        sample_size,
        alpha,
        rejection_rate: rate,
        allowed_rate: allowed,
        uniformity,
        pass: rate <= allowed && uniformity.p_value > alpha,
    }
}

/// Number of passing reports at time `t`.
pub(crate) fn pass_count(reports: &[GaussianityReport], t: f64) -> usize {
    reports.iter().filter(|r| r.t == t && r.pass).count()
}
