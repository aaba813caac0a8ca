use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pass_count, trig_panel, GaussianityReport};
use crate::dynamics::{GalerkinSolver, SpectralState};
use crate::error::{check_positive, Error, Result};
use crate::noise::{sample_draw, Pairing};
use crate::stats::two_proportion_p_value;
use crate::testfn::{TestFunction, TrigPolynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceConfig {
    pub epsilon: f64,
    pub side: f64,
    pub cutoff: usize,
    pub ensemble: usize,
    pub t_final: f64,
    pub dt: f64,
    /// number of functions taken from [`trig_panel`]
    pub panel: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        InvarianceConfig {
            epsilon: 0.5,
            side: 8.0,
            cutoff: 32,
            ensemble: 2000,
            t_final: 0.5,
            dt: 0.005,
            panel: 20,
            alpha: 0.01,
            seed: 20240601,
        }
    }
}

impl InvarianceConfig {
    /// Number of steps, which must be even so that `t_final / 2` is a step time.
    pub fn steps(&self) -> Result<usize> {
        check_positive("t_final", self.t_final)?;
        check_positive("dt", self.dt)?;
        let steps = (self.t_final / self.dt).round() as usize;
        if steps == 0 || steps % 2 == 1 || (steps as f64 * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: self.dt.to_string(),
                expected: "a step dividing t_final into an even number of steps",
            });
        }
        Ok(steps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// one report per test function and time in `{0, t_final/2, t_final}`
    pub reports: Vec<GaussianityReport>,
    pub times: [f64; 3],
    pub panel_size: usize,
    pub pass_initial: usize,
    pub pass_final: usize,
    /// two-proportion test of the pass counts at `0` and `t_final`
    pub proportion_p_value: f64,
    pub indistinguishable: bool,
    /// at least 95% of the panel passes at `t_final`
    pub panel_pass: bool,
    pub pass: bool,
}

/// Propagate `ensemble` white-noise draws with the Galerkin flow and KS-test the normalized
/// pairings `<omega_t, phi>/|P_N phi|` against `N(0, 1)` at `0`, `t_final/2` and `t_final`.
///
/// Each test passes when its p-value exceeds `alpha / panel`.
pub fn invariance_experiment(cfg: &InvarianceConfig) -> Result<InvarianceReport> {
    let panel = trig_panel(cfg.side, cfg.panel)?;
    invariance_with_panel(cfg, &panel)
}

pub(crate) fn invariance_with_panel(
    cfg: &InvarianceConfig,
    panel: &[TrigPolynomial],
) -> Result<InvarianceReport> {
    let steps = cfg.steps()?;
    if let Some(p) = panel.iter().find(|p| p.degree() > cfg.cutoff) {
        return Err(Error::Resolution {
            what: "test function panel",
            detail: format!("{} has degree {} above the cutoff {}", p.id(), p.degree(), cfg.cutoff),
        });
    }
    let pairings: Vec<Pairing> = panel
        .iter()
        .map(|p| Pairing::new(p, cfg.side, cfg.cutoff))
        .collect::<Result<_>>()?;
    // validates epsilon, M and N before the ensemble starts
    GalerkinSolver::new(cfg.side, cfg.epsilon, cfg.cutoff)?;

    let member = |solver: &mut GalerkinSolver, i: u64| -> Result<Vec<f64>> {
        let mut state = SpectralState::new(sample_draw(cfg.side, cfg.cutoff, cfg.seed, i)?);
        let mut out = Vec::with_capacity(3 * pairings.len());
        solver.run(&mut state, cfg.dt, steps, steps / 2, |s| {
            out.extend(pairings.iter().map(|p| p.apply(&s.field)));
            Ok(())
        })?;
        Ok(out)
    };
    let rows: Vec<Vec<f64>> = (0..cfg.ensemble as u64)
        .into_par_iter()
        .map_init(
            || GalerkinSolver::new(cfg.side, cfg.epsilon, cfg.cutoff).expect("validated above"),
            member,
        )
        .collect::<Result<_>>()?;

    let times = [0.0, 0.5 * steps as f64 * cfg.dt, steps as f64 * cfg.dt];
    let threshold = cfg.alpha / panel.len() as f64;
    let k = pairings.len();
    let mut reports = Vec::with_capacity(3 * k);
    for (slot, &t) in times.iter().enumerate() {
        for (j, p) in panel.iter().enumerate() {
            let samples: Vec<f64> = rows.iter().map(|r| r[slot * k + j]).collect();
            reports.push(GaussianityReport::new(
                p.id(),
                t,
                &samples,
                pairings[j].variance(),
                threshold,
            )?);
        }
    }
    let pass_initial = pass_count(&reports, times[0]);
    let pass_final = pass_count(&reports, times[2]);
    let p = two_proportion_p_value(pass_initial, k, pass_final, k);
    let indistinguishable = p > cfg.alpha;
    let panel_pass = pass_final as f64 >= 0.95 * k as f64;
    Ok(InvarianceReport {
        reports,
        times,
        panel_size: k,
        pass_initial,
        pass_final,
        proportion_p_value: p,
        indistinguishable,
        panel_pass,
        pass: indistinguishable && panel_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ensemble_stays_gaussian() {
        let cfg = InvarianceConfig {
            cutoff: 6,
            ensemble: 300,
            t_final: 0.2,
            dt: 0.01,
            panel: 6,
            ..Default::default()
        };
        let r = invariance_experiment(&cfg).unwrap();
        assert_eq!(r.reports.len(), 18);
        assert!(r.reports.iter().filter(|x| x.t == 0.0).all(|x| x.pass));
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn rejects_bad_configs() {
        let odd = InvarianceConfig { t_final: 0.03, dt: 0.01, ..Default::default() };
        assert!(odd.steps().is_err());
        let coarse = InvarianceConfig { cutoff: 2, ensemble: 100, ..Default::default() };
        assert!(invariance_experiment(&coarse).is_err());
    }
}
