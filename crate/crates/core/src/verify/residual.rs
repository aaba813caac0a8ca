use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GalerkinSolver, SpectralState};
use crate::error::{check_positive, Error, Result};
use crate::kernels::KernelSpec;
use crate::modes::ModeTable;
use crate::noise::{NoiseField, Pairing};
use crate::quadform::TransportPairing;
use crate::testfn::{TestFunction, TrigPolynomial, TrigTerm};

/// Time quadrature of the nonlinear term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeQuadrature {
    /// composite trapezoid on the sample times
    Trapezoid,
    /// trapezoid with the Euler-Maclaurin end correction `-ds^2/12 (Q'(t) - Q'(0))`, where
    /// `Q'` comes from the Galerkin right-hand side; needs equally spaced samples
    #[default]
    EndCorrected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub phi: String,
    pub times: Vec<f64>,
    /// `r(t) = <omega_t, phi> - <omega_0, phi> - int_0^t <omega_s (x) omega_s, H_phi> ds`
    pub residuals: Vec<f64>,
    pub max_abs: f64,
}

/// Smooth real data with the two modes `(1, 0)` and `(0, 2)` of amplitude `amplitude`,
/// which interact because their wave numbers differ.
pub fn two_mode_state(side: f64, cutoff: usize, amplitude: f64) -> Result<SpectralState> {
    if cutoff < 2 {
        return Err(Error::Resolution {
            what: "two-mode data",
            detail: format!("cutoff {cutoff} does not hold the mode (0, 2)"),
        });
    }
    let mut modes = ModeTable::zeros(cutoff);
    for (k, c) in [([1, 0], Complex64::new(amplitude, 0.0)), ([0, 2], Complex64::new(0.0, 0.5 * amplitude))] {
        modes.set(k, c);
        modes.set([-k[0], -k[1]], c.conj());
    }
    Ok(SpectralState::new(NoiseField::from_modes(side, modes)?))
}

/// Residual of the weak formulation along a sampled Galerkin trajectory. The nonlinear pairing
/// is the exact grid quadrature of `<omega (x) omega, H_phi>` for band-limited states.
pub fn weakform_residual(
    trajectory: &[SpectralState],
    phi: &dyn TestFunction,
    epsilon: f64,
    quadrature: TimeQuadrature,
) -> Result<ResidualReport> {
    let first = trajectory.first().ok_or(Error::InvalidParameter {
        name: "trajectory",
        value: "empty".into(),
        expected: "at least one sample",
    })?;
    let (side, cutoff) = (first.field.side(), first.field.cutoff());
    if trajectory.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            value: "unordered sample times".into(),
            expected: "strictly increasing times",
        });
    }
    let spec = KernelSpec::torus(epsilon, side)?;
    let transport = TransportPairing::new(&spec, phi, cutoff, &[None])?;
    let linear = Pairing::new(phi, side, cutoff)?;
    let mut fft = transport.workspace();
    let q: Vec<f64> = trajectory
        .iter()
        .map(|s| Ok(transport.apply_with(&s.field, &mut fft)?[0]))
        .collect::<Result<_>>()?;
    let times: Vec<f64> = trajectory.iter().map(|s| s.t).collect();

    let correction = match quadrature {
        TimeQuadrature::Trapezoid => None,
        TimeQuadrature::EndCorrected => {
            let ds = times.get(1).map_or(0.0, |t| t - times[0]);
            if times
                .windows(2)
                .any(|w| ((w[1] - w[0]) - ds).abs() > 1e-9 * ds)
            {
                return Err(Error::InvalidParameter {
                    name: "trajectory",
                    value: "uneven sample times".into(),
                    expected: "equally spaced samples for the end-corrected trapezoid",
                });
            }
            let mut solver = GalerkinSolver::new(side, epsilon, cutoff)?;
            // Q' = B(omega', omega) + B(omega, omega')
            let dq: Vec<f64> = trajectory
                .iter()
                .map(|s| {
                    let m = s.field.modes();
                    let dm = solver.rhs(m);
                    let a = transport.apply_bilinear(&dm, m, &mut fft)?[0];
                    let b = transport.apply_bilinear(m, &dm, &mut fft)?[0];
                    Ok(a + b)
                })
                .collect::<Result<_>>()?;
            Some((ds, dq))
        }
    };

    let p0 = linear.apply(&first.field);
    let mut integral = 0.0;
    let mut residuals = Vec::with_capacity(trajectory.len());
    residuals.push(0.0);
    for j in 1..trajectory.len() {
        integral += 0.5 * (times[j] - times[j - 1]) * (q[j] + q[j - 1]);
        let mut total = integral;
        if let Some((ds, dq)) = &correction {
            total -= ds * ds / 12.0 * (dq[j] - dq[0]);
        }
        residuals.push(linear.apply(&trajectory[j].field) - p0 - total);
    }
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(ResidualReport {
        phi: phi.id(),
        times,
        residuals,
        max_abs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub dt: f64,
    pub cutoff: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub dt: f64,
    pub cutoff: usize,
    pub max_abs: f64,
    /// `log2` of the error ratio to the previous level over the `dt` ratio, absent on the first
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualConfig {
    pub epsilon: f64,
    pub side: f64,
    pub t_final: f64,
    pub amplitude: f64,
    pub levels: Vec<RefinementLevel>,
    pub quadrature: TimeQuadrature,
    /// minimal observed order between consecutive levels
    pub min_order: f64,
    /// bound on `max |r|` at the last level
    pub tolerance: f64,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        ResidualConfig {
            epsilon: 0.5,
            side: 8.0,
            t_final: 1.0,
            amplitude: 1.0,
            levels: vec![
                RefinementLevel { dt: 0.04, cutoff: 8 },
                RefinementLevel { dt: 0.02, cutoff: 16 },
                RefinementLevel { dt: 0.01, cutoff: 32 },
            ],
            quadrature: TimeQuadrature::EndCorrected,
            min_order: 2.0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRefinement {
    pub rows: Vec<RefinementRow>,
    /// the report at each level
    pub reports: Vec<ResidualReport>,
    pub pass: bool,
}

/// The degree-2 test function used by the refinement study.
pub fn residual_test_function(side: f64) -> Result<TrigPolynomial> {
    Ok(TrigPolynomial::new(
        side,
        vec![
            TrigTerm { k: [1, 1], a: 1.0, b: 0.0 },
            TrigTerm { k: [2, -1], a: 0.0, b: 0.5 },
            TrigTerm { k: [1, 2], a: 0.25, b: 0.25 },
        ],
    )?
    .named("residual-phi"))
}

/// Run the two-mode data to `t_final` at every level, sampling every step, and compare the
/// residuals. Passes when the observed order between consecutive levels is at least
/// `min_order` and the last level is within `tolerance`.
pub fn residual_refinement(cfg: &ResidualConfig) -> Result<ResidualRefinement> {
    check_positive("t_final", cfg.t_final)?;
    if cfg.levels.is_empty() {
        return Err(Error::InvalidParameter {
            name: "levels",
            value: "[]".into(),
            expected: "at least one refinement level",
        });
    }
    let phi = residual_test_function(cfg.side)?;
    let mut rows: Vec<RefinementRow> = Vec::new();
    let mut reports = Vec::new();
    for level in &cfg.levels {
        check_positive("dt", level.dt)?;
        if level.cutoff < phi.degree() {
            return Err(Error::Resolution {
                what: "refinement level",
                detail: format!("cutoff {} below the test function degree {}", level.cutoff, phi.degree()),
            });
        }
        let steps = (cfg.t_final / level.dt).round() as usize;
        if steps == 0 || (steps as f64 * level.dt - cfg.t_final).abs() > 1e-9 * cfg.t_final {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: level.dt.to_string(),
                expected: "a step dividing t_final",
            });
        }
        let mut state = two_mode_state(cfg.side, level.cutoff, cfg.amplitude)?;
        let mut solver = GalerkinSolver::new(cfg.side, cfg.epsilon, level.cutoff)?;
        let mut trajectory = Vec::with_capacity(steps + 1);
        solver.run(&mut state, level.dt, steps, 1, |s| {
            trajectory.push(s.clone());
            Ok(())
        })?;
        let report = weakform_residual(&trajectory, &phi, cfg.epsilon, cfg.quadrature)?;
        let order = rows.last().map(|prev| {
            (prev.max_abs / report.max_abs).ln() / (prev.dt / level.dt).ln()
        });
        rows.push(RefinementRow {
            dt: level.dt,
            cutoff: level.cutoff,
            max_abs: report.max_abs,
            order,
        });
        reports.push(report);
    }
    let orders_ok = rows.iter().filter_map(|r| r.order).all(|o| o >= cfg.min_order);
    let last_ok = rows.last().is_some_and(|r| r.max_abs <= cfg.tolerance);
    Ok(ResidualRefinement {
        rows,
        reports,
        pass: orders_ok && last_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trajectory(state: SpectralState, eps: f64, dt: f64, steps: usize) -> Vec<SpectralState> {
        let f = &state.field;
        let mut solver = GalerkinSolver::new(f.side(), eps, f.cutoff()).unwrap();
        let mut s = state.clone();
        let mut out = Vec::new();
        solver
            .run(&mut s, dt, steps, 1, |x| {
                out.push(x.clone());
                Ok(())
            })
            .unwrap();
        out
    }

    #[test]
    fn single_mode_residual_vanishes() {
        let mut modes = ModeTable::zeros(4);
        modes.set([1, 1], Complex64::new(0.7, 0.2));
        modes.set([-1, -1], Complex64::new(0.7, -0.2));
        let state = SpectralState::new(NoiseField::from_modes(4.0, modes).unwrap());
        let tr = trajectory(state, 0.5, 0.05, 20);
        let phi = residual_test_function(4.0).unwrap();
        let r = weakform_residual(&tr, &phi, 0.5, TimeQuadrature::Trapezoid).unwrap();
        assert_eq!(r.residuals[0], 0.0);
        assert!(r.max_abs < 1e-10, "{}", r.max_abs);
    }

    #[test]
    fn constant_test_function_gives_zero() {
        let tr = trajectory(two_mode_state(4.0, 4, 1.0).unwrap(), 0.5, 0.05, 20);
        let phi = TrigPolynomial::cosine(4.0, [0, 0], 1.0).unwrap();
        let r = weakform_residual(&tr, &phi, 0.5, TimeQuadrature::Trapezoid).unwrap();
        assert!(r.max_abs < 1e-12, "{}", r.max_abs);
    }

    #[test]
    fn two_mode_data_is_not_stationary() {
        let tr = trajectory(two_mode_state(8.0, 8, 1.0).unwrap(), 0.5, 0.05, 20);
        let phi = residual_test_function(8.0).unwrap();
        let p = Pairing::new(&phi, 8.0, 8).unwrap();
        let drift = (p.apply(&tr[20].field) - p.apply(&tr[0].field)).abs();
        assert!(drift > 1e-3, "{drift}");
    }

    #[test]
    fn end_correction_raises_the_order() {
        let phi = residual_test_function(8.0).unwrap();
        let errs: Vec<[f64; 2]> = [0.1, 0.05]
            .iter()
            .map(|&dt| {
                let tr = trajectory(two_mode_state(8.0, 8, 1.0).unwrap(), 0.5, dt, (1.0 / dt) as usize);
                [TimeQuadrature::Trapezoid, TimeQuadrature::EndCorrected]
                    .map(|q| weakform_residual(&tr, &phi, 0.5, q).unwrap().max_abs)
            })
            .collect();
        let plain = (errs[0][0] / errs[1][0]).log2();
        let corrected = (errs[0][1] / errs[1][1]).log2();
        assert!((plain - 2.0).abs() < 0.2, "{plain}");
        assert!(corrected > 3.5, "{corrected}");
    }

    #[test]
    fn rejects_bad_trajectories() {
        let phi = residual_test_function(4.0).unwrap();
        assert!(weakform_residual(&[], &phi, 0.5, TimeQuadrature::Trapezoid).is_err());
        let s = two_mode_state(4.0, 4, 1.0).unwrap();
        let tr = vec![s.clone(), s];
        assert!(weakform_residual(&tr, &phi, 0.5, TimeQuadrature::Trapezoid).is_err());
    }
}
