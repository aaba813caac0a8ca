use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pass_count, trig_panel, GaussianityReport};
use crate::dynamics::{VortexState, VortexSystem};
use crate::error::{check_positive, Error, Result};
use crate::kernels::KernelSpec;
use crate::noise::Pairing;
use crate::stats::two_proportion_p_value;
use crate::testfn::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VortexMarginalConfig {
    pub epsilon: f64,
    pub side: f64,
    pub vortices: usize,
    pub ensemble: usize,
    pub t_final: f64,
    pub dt: f64,
    pub panel: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for VortexMarginalConfig {
    fn default() -> Self {
        VortexMarginalConfig {
            epsilon: 0.5,
            side: 8.0,
            vortices: 64,
            ensemble: 200,
            t_final: 0.1,
            dt: 5e-3,
            panel: 10,
            alpha: 0.01,
            seed: 20240601,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexMarginalReport {
    /// one report per test function at `0` and at `t_final`
    pub reports: Vec<GaussianityReport>,
    pub times: [f64; 2],
    pub panel_size: usize,
    /// members aborted by a collision, excluded from every report
    pub collisions: usize,
    pub pass_initial: usize,
    pub pass_final: usize,
    pub proportion_p_value: f64,
    /// pass counts at `0` and `t_final` are indistinguishable at level `alpha`
    pub pass: bool,
}

/// Pairings `N^(-1/2) sum_n xi_n phi(X_n)` of random vortex clouds, tested against the normal law
/// whose variance is the mean of `phi^2` under the uniform law on the cell.
pub fn vortex_marginal_experiment(cfg: &VortexMarginalConfig) -> Result<VortexMarginalReport> {
    if cfg.vortices < 16 {
        return Err(Error::InvalidParameter {
            name: "vortices",
            value: cfg.vortices.to_string(),
            expected: "at least 16 vortices",
        });
    }
    check_positive("t_final", cfg.t_final)?;
    check_positive("dt", cfg.dt)?;
    let steps = (cfg.t_final / cfg.dt).round().max(1.0) as usize;
    let spec = KernelSpec::torus(cfg.epsilon, cfg.side)?;
    let system = VortexSystem::new(&spec)?;
    let panel = trig_panel(cfg.side, cfg.panel)?;
    let targets: Vec<f64> = panel
        .iter()
        .map(|p| Ok(Pairing::new(p, cfg.side, p.degree())?.variance() / (cfg.side * cfg.side)))
        .collect::<Result<_>>()?;

    let pairings = |s: &VortexState| -> Vec<f64> {
        let scale = 1.0 / (s.len() as f64).sqrt();
        panel
            .iter()
            .map(|p| {
                s.positions
                    .iter()
                    .zip(&s.intensities)
                    .map(|(&x, &xi)| xi * p.value(x))
                    .sum::<f64>()
                    * scale
            })
            .collect()
    };
    let members: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..cfg.ensemble as u64)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut s = VortexState::random(cfg.side, cfg.vortices, cfg.seed, i)?;
            let initial = pairings(&s);
            match system.run(&mut s, cfg.dt, steps, steps, |_| Ok(())) {
                Ok(()) => Ok(Some((initial, pairings(&s)))),
                Err(Error::Collision { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let kept: Vec<&(Vec<f64>, Vec<f64>)> = members.iter().flatten().collect();
    let collisions = members.len() - kept.len();
    if collisions > 0 {
        log::warn!("{collisions} of {} vortex members collided", members.len());
    }

    let times = [0.0, steps as f64 * cfg.dt];
    let threshold = cfg.alpha / panel.len() as f64;
    let mut reports = Vec::with_capacity(2 * panel.len());
    for (slot, &t) in times.iter().enumerate() {
        for (j, p) in panel.iter().enumerate() {
            let samples: Vec<f64> = kept
                .iter()
                .map(|m| if slot == 0 { m.0[j] } else { m.1[j] })
                .collect();
            reports.push(GaussianityReport::new(p.id(), t, &samples, targets[j], threshold)?);
        }
    }
    let k = panel.len();
    let pass_initial = pass_count(&reports, times[0]);
    let pass_final = pass_count(&reports, times[1]);
    let p = two_proportion_p_value(pass_initial, k, pass_final, k);
    Ok(VortexMarginalReport {
        reports,
        times,
        panel_size: k,
        collisions,
        pass_initial,
        pass_final,
        proportion_p_value: p,
        pass: p > cfg.alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cloud_marginals() {
        let cfg = VortexMarginalConfig {
            vortices: 16,
            ensemble: 150,
            t_final: 0.02,
            dt: 0.01,
            panel: 4,
            ..Default::default()
        };
        let r = vortex_marginal_experiment(&cfg).unwrap();
        assert_eq!(r.reports.len(), 8);
        assert_eq!(r.collisions, 0);
        for rep in &r.reports {
            assert!((0.0..=1.0).contains(&rep.p_value));
            assert!((rep.variance / rep.target_variance - 1.0).abs() < 0.5, "{rep:?}");
        }
        assert!(r.pass);
    }

    #[test]
    fn too_few_vortices_rejected() {
        let cfg = VortexMarginalConfig { vortices: 8, ..Default::default() };
        assert!(vortex_marginal_experiment(&cfg).is_err());
    }
}
