use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::l2::band_distance_sq;
use super::transport::{BandCutoff, Transition, TransportPairing};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::noise::{sample_draw, NoiseField};
use crate::stats::Estimate;
use crate::testfn::TestFunction;

/// Monte Carlo ensemble for the Cauchy diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub draws: usize,
    pub seed: u64,
}

/// `E (Q_n - Q_m)^2` against `2 |f_n - f_m|^2` for consecutive schedule entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub n: u32,
    pub m: u32,
    pub mean_sq: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Per-level values on the given field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: u32,
    /// renormalized form with `f_n`
    pub value: f64,
    /// the same with the smooth-transition alternative `f~_n`
    pub alt_value: f64,
    /// `|f~_n - f_n|_(L^2)`
    pub alt_distance: f64,
    /// `|f_n - H|_(L^2)`
    pub h_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearEstimate {
    /// renormalized form at the largest `n`
    pub value: f64,
    pub levels: Vec<LevelRow>,
    pub cauchy: Vec<CauchyRow>,
}

/// The nonlinear term `<omega (x) omega, H>` of `field` as the limit of the renormalized forms
/// with `f_n`, together with mean-square Cauchy diagnostics over an independent ensemble of
/// white-noise draws with the field's side and cutoff.
///
/// The forms with `f_n` vanish on the diagonal, so renormalization does not change them.
pub fn nonlinear_estimate(
    field: &NoiseField,
    phi: &dyn TestFunction,
    epsilon: f64,
    schedule: &[u32],
    ensemble: Ensemble,
) -> Result<NonlinearEstimate> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "schedule",
            value: format!("{schedule:?}"),
            expected: "a non-empty increasing list of integers >= 1",
        });
    }
    if schedule.len() > 1 && ensemble.draws < 2 {
        return Err(Error::InvalidParameter {
            name: "draws",
            value: ensemble.draws.to_string(),
            expected: "at least 2 draws for the Cauchy diagnostics",
        });
    }
    let side = field.side();
    let spec = KernelSpec::torus(epsilon, side)?;
    let cutoff = field.cutoff();
    let mut variants = Vec::with_capacity(2 * schedule.len());
    for &n in schedule {
        variants.push(Some(BandCutoff::new(n)));
    }
    for &n in schedule {
        variants.push(Some(BandCutoff::new(n).with_transition(Transition::Smooth)));
    }
    let pairing = TransportPairing::new(&spec, phi, cutoff, &variants)?;
    let on_field = pairing.apply(field)?;
    let k = schedule.len();
    let dist_side = phi.support().is_none().then_some(side);

    let mut levels = Vec::with_capacity(k);
    for (i, &n) in schedule.iter().enumerate() {
        let alt = band_distance_sq(phi, epsilon, dist_side, variants[i], variants[k + i])?;
        let h = band_distance_sq(phi, epsilon, dist_side, variants[i], None)?;
        levels.push(LevelRow {
            n,
            value: on_field[i],
            alt_value: on_field[k + i],
            alt_distance: alt.sqrt(),
            h_distance: h.sqrt(),
        });
    }

    let mut cauchy = Vec::new();
    if k > 1 {
        let draws: Vec<Vec<f64>> = (0..ensemble.draws as u64)
            .into_par_iter()
            .map_init(
                || pairing.workspace(),
                |fft, i| -> Result<Vec<f64>> {
                    let f = sample_draw(side, cutoff, ensemble.seed, i)?;
                    pairing.apply_with(&f, fft)
                },
            )
            .collect::<Result<_>>()?;
        for i in 0..k - 1 {
            let sq: Vec<f64> = draws.iter().map(|d| (d[i] - d[i + 1]).powi(2)).collect();
            let est = Estimate::of(&sq);
            let bound =
                2.0 * band_distance_sq(phi, epsilon, dist_side, variants[i], variants[i + 1])?;
            let pass = est.mean <= bound + 5.0 * est.stderr;
            if !pass {
                log::warn!(
                    "not Cauchy between n = {} and {}: mean square {:.3e} exceeds {:.3e} + 5 x {:.1e}",
                    schedule[i],
                    schedule[i + 1],
                    est.mean,
                    bound,
                    est.stderr
                );
            }
            cauchy.push(CauchyRow {
                n: schedule[i],
                m: schedule[i + 1],
                mean_sq: est.mean,
                stderr: est.stderr,
                bound,
                pass,
            });
        }
    }
    Ok(NonlinearEstimate {
        value: levels[k - 1].value,
        levels,
        cauchy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::noise::sample_white_noise;
    use crate::quadform::{build_fn, quad_pair_renormalized};
    use crate::testfn::Bump;
    use std::sync::Arc;

    #[test]
    fn single_level_schedule_is_the_plain_estimator() {
        let field = sample_white_noise(4.0, 4, 21).unwrap();
        let phi = Bump::new(Vec2::ZERO, 1.0, 1.0).unwrap();
        let est =
            nonlinear_estimate(&field, &phi, 0.5, &[3], Ensemble { draws: 0, seed: 0 }).unwrap();
        let spec = KernelSpec::torus(0.5, 4.0).unwrap();
        let f3 = build_fn(&spec, Arc::new(phi), 3).unwrap();
        let direct = quad_pair_renormalized(&field, &f3).unwrap();
        assert_eq!(est.value, direct);
        assert!(est.cauchy.is_empty());
    }

    #[test]
    fn rejects_bad_schedules() {
        let field = sample_white_noise(4.0, 2, 1).unwrap();
        let phi = Bump::new(Vec2::ZERO, 1.0, 1.0).unwrap();
        let e = Ensemble { draws: 10, seed: 0 };
        assert!(nonlinear_estimate(&field, &phi, 0.5, &[], e).is_err());
        assert!(nonlinear_estimate(&field, &phi, 0.5, &[4, 2], e).is_err());
        assert!(nonlinear_estimate(&field, &phi, 0.5, &[0, 2], e).is_err());
    }

    #[test]
    fn cauchy_bound_holds_and_does_not_depend_on_the_side() {
        let phi = Bump::new(Vec2::ZERO, 1.0, 1.0).unwrap();
        let mut bounds = Vec::new();
        for side in [4.0, 8.0, 16.0] {
            let field = sample_white_noise(side, 6, 2).unwrap();
            let est = nonlinear_estimate(
                &field,
                &phi,
                0.5,
                &[1, 2, 4],
                Ensemble { draws: 400, seed: 9 },
            )
            .unwrap();
            for row in &est.cauchy {
                assert!(row.pass, "M {side}: {row:?}");
                assert!(row.mean_sq > 0.0);
            }
            bounds.push(est.cauchy.iter().map(|r| r.bound).collect::<Vec<_>>());
            let h: Vec<f64> = est.levels.iter().map(|l| l.h_distance).collect();
            assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
        }
        assert_eq!(bounds[0], bounds[1]);
        assert_eq!(bounds[1], bounds[2]);
    }
}
