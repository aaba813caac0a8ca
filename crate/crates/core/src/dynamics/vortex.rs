use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{reduce_to_cell, Vec2};
use crate::kernels::{KernelEvaluator, KernelSpec};
use crate::rng::stream_rng;

/// Point vortices `omega = N^(-1/2) sum_i xi_i delta_(X_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexState {
    pub t: f64,
    pub positions: Vec<Vec2>,
    pub intensities: Vec<f64>,
}

impl VortexState {
    pub fn new(positions: Vec<Vec2>, intensities: Vec<f64>) -> Result<Self> {
        if positions.is_empty() || positions.len() != intensities.len() {
            return Err(Error::InvalidParameter {
                name: "vortices",
                value: format!("{} positions, {} intensities", positions.len(), intensities.len()),
                expected: "at least one vortex and one intensity per position",
            });
        }
        Ok(VortexState {
            t: 0.0,
            positions,
            intensities,
        })
    }

    /// Uniform positions in the cell of side `side` and standard Gaussian intensities.
    pub fn random(side: f64, count: usize, seed: u64, index: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, index);
        let positions = (0..count)
            .map(|_| {
                Vec2::new(
                    side * (rng.random::<f64>() - 0.5),
                    side * (rng.random::<f64>() - 0.5),
                )
            })
            .collect();
        let intensities = (0..count).map(|_| rng.sample(StandardNormal)).collect();
        Self::new(positions, intensities)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn circulation(&self) -> f64 {
        self.intensities.iter().sum()
    }
}

/// The vortex ODE `dX_i/dt = N^(-1/2) sum_j xi_j K(X_i - X_j)` for one kernel.
#[derive(Clone, Debug)]
pub struct VortexSystem {
    spec: KernelSpec,
    kernel: KernelEvaluator,
    collision_tol: f64,
}

impl VortexSystem {
    /// Collisions are flagged below `1e-6 M` on the torus and `1e-6` on the plane.
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        Ok(Self::with_evaluator(spec, KernelEvaluator::new(spec)?))
    }

    pub fn with_evaluator(spec: &KernelSpec, kernel: KernelEvaluator) -> Self {
        VortexSystem {
            spec: *spec,
            kernel,
            collision_tol: 1e-6 * spec.side().unwrap_or(1.0),
        }
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn collision_tol(&self) -> f64 {
        self.collision_tol
    }

    fn separation(&self, a: Vec2, b: Vec2) -> Vec2 {
        match self.spec.side() {
            Some(m) => reduce_to_cell(a - b, m),
            None => a - b,
        }
    }

    pub fn min_distance(&self, positions: &[Vec2]) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..positions.len() {
            for j in 0..i {
                d = d.min(self.separation(positions[i], positions[j]).norm());
            }
        }
        d
    }

    fn velocities_at(&self, t: f64, positions: &[Vec2], xi: &[f64]) -> Result<Vec<Vec2>> {
        let scale = 1.0 / (positions.len() as f64).sqrt();
        let rows: Vec<(Vec2, f64)> = positions
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let mut v = Vec2::ZERO;
                let mut dmin = f64::INFINITY;
                for (j, (&y, &s)) in positions.iter().zip(xi).enumerate() {
                    if j == i {
                        continue;
                    }
                    dmin = dmin.min(self.separation(x, y).norm());
                    v += self.kernel.kernel(x - y) * s;
                }
                (v * scale, dmin)
            })
            .collect();
        let distance = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        if distance < self.collision_tol {
            return Err(Error::Collision {
                t,
                distance,
                tolerance: self.collision_tol,
            });
        }
        Ok(rows.into_iter().map(|r| r.0).collect())
    }

    /// Velocity of every vortex; the self-term drops out through `K(0) = 0`.
    pub fn velocities(&self, state: &VortexState) -> Result<Vec<Vec2>> {
        self.velocities_at(state.t, &state.positions, &state.intensities)
    }

    /// `sum_(i<j) xi_i xi_j / N G(X_i - X_j)`.
    pub fn hamiltonian(&self, state: &VortexState) -> f64 {
        let n = state.len();
        let mut h = 0.0;
        for i in 0..n {
            for j in 0..i {
                let g = self.kernel.green(state.positions[i] - state.positions[j]);
                h += state.intensities[i] * state.intensities[j] * g;
            }
        }
        h / n as f64
    }

    /// One classical Runge-Kutta step; torus positions are reduced to the cell afterwards.
    pub fn step_rk4(&self, state: &mut VortexState, dt: f64) -> Result<()> {
        let xi = &state.intensities;
        let x0 = &state.positions;
        let shifted = |k: &[Vec2], h: f64| -> Vec<Vec2> {
            x0.iter().zip(k).map(|(&x, &v)| x + v * h).collect()
        };
        let t = state.t;
        let k1 = self.velocities_at(t, x0, xi)?;
        let k2 = self.velocities_at(t + 0.5 * dt, &shifted(&k1, 0.5 * dt), xi)?;
        let k3 = self.velocities_at(t + 0.5 * dt, &shifted(&k2, 0.5 * dt), xi)?;
        let k4 = self.velocities_at(t + dt, &shifted(&k3, dt), xi)?;
        let side = self.spec.side();
        for (i, x) in state.positions.iter_mut().enumerate() {
            *x += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            if let Some(m) = side {
                *x = reduce_to_cell(*x, m);
            }
        }
        state.t += dt;
        Ok(())
    }

    /// Advance `steps` steps, calling `observe` at the start, every `sample_every` steps and
    /// at the end.
    pub fn run(
        &self,
        state: &mut VortexState,
        dt: f64,
        steps: usize,
        sample_every: usize,
        mut observe: impl FnMut(&VortexState) -> Result<()>,
    ) -> Result<()> {
        check_stepping(dt, sample_every)?;
        observe(state)?;
        for s in 1..=steps {
            self.step_rk4(state, dt)?;
            if s % sample_every == 0 || s == steps {
                observe(state)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn check_stepping(dt: f64, sample_every: usize) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt.to_string(),
            expected: "a finite non-zero step",
        });
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameter {
            name: "sample_every",
            value: "0".into(),
            expected: "an integer >= 1",
        });
    }
    Ok(())
}

/// Velocities for a one-off kernel specification.
pub fn vortex_rhs(state: &VortexState, spec: &KernelSpec) -> Result<Vec<Vec2>> {
    VortexSystem::new(spec)?.velocities(state)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexSample {
    pub t: f64,
    pub hamiltonian: f64,
    pub circulation: f64,
    pub min_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec2>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexRun {
    pub samples: Vec<VortexSample>,
    pub final_state: VortexState,
}

/// RK4 trajectory with energy diagnostics every `sample_every` steps. Negative `dt` runs the
/// flow backwards.
pub fn integrate_vortex(
    state: &VortexState,
    system: &VortexSystem,
    dt: f64,
    steps: usize,
    sample_every: usize,
    keep_positions: bool,
) -> Result<VortexRun> {
    let mut s = state.clone();
    let mut samples = Vec::new();
    system.run(&mut s, dt, steps, sample_every, |st| {
        samples.push(VortexSample {
            t: st.t,
            hamiltonian: system.hamiltonian(st),
            circulation: st.circulation(),
            min_distance: system.min_distance(&st.positions),
            positions: keep_positions.then(|| st.positions.clone()),
        });
        Ok(())
    })?;
    Ok(VortexRun {
        samples,
        final_state: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a: Vec2, b: Vec2, xa: f64, xb: f64) -> VortexState {
        VortexState::new(vec![a, b], vec![xa, xb]).unwrap()
    }

    #[test]
    fn lone_vortex_does_not_move() {
        for spec in [KernelSpec::plane(0.5).unwrap(), KernelSpec::torus(0.5, 4.0).unwrap()] {
            let s = VortexState::new(vec![Vec2::new(0.3, -0.2)], vec![1.7]).unwrap();
            assert_eq!(vortex_rhs(&s, &spec).unwrap(), vec![Vec2::ZERO]);
        }
    }

    #[test]
    fn plane_pair_keeps_its_distance() {
        let spec = KernelSpec::plane(0.5).unwrap();
        let sys = VortexSystem::new(&spec).unwrap();
        let s = two(Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), 1.0, 1.0);
        let v = sys.velocities(&s).unwrap();
        let d = s.positions[0] - s.positions[1];
        assert!((v[0] - v[1]).dot(d).abs() < 1e-15);
        let run = integrate_vortex(&s, &sys, 1e-3, 10_000, 1000, false).unwrap();
        let f = &run.final_state;
        let drift = ((f.positions[0] - f.positions[1]).norm() - 1.0).abs();
        assert!(drift < 1e-8, "drift {drift}");
    }

    /// Opposite intensities translate rigidly with speed `|K(d)|/sqrt 2`, perpendicular to `d`.
    #[test]
    fn dipole_translates_rigidly() {
        let spec = KernelSpec::plane(0.5).unwrap();
        let sys = VortexSystem::new(&spec).unwrap();
        let s = two(Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), 1.0, -1.0);
        let run = integrate_vortex(&s, &sys, 1e-3, 2000, 2000, false).unwrap();
        let k = sys.kernel.kernel(Vec2::new(-1.0, 0.0));
        let v = k * (-1.0 / 2f64.sqrt());
        for (a, b) in run.final_state.positions.iter().zip(&s.positions) {
            assert!((*a - (*b + v * 2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn torus_hamiltonian_is_conserved() {
        let spec = KernelSpec::torus(0.5, 4.0).unwrap();
        let sys = VortexSystem::new(&spec).unwrap();
        let s = VortexState::random(4.0, 8, 3, 0).unwrap();
        let run = integrate_vortex(&s, &sys, 1e-3, 1000, 100, false).unwrap();
        let h0 = run.samples[0].hamiltonian;
        for smp in &run.samples {
            assert!((smp.hamiltonian - h0).abs() < 1e-6, "{} vs {h0}", smp.hamiltonian);
            assert!((smp.circulation - s.circulation()).abs() < 1e-14);
        }
    }

    #[test]
    fn reversed_run_returns_home() {
        let spec = KernelSpec::torus(0.5, 4.0).unwrap();
        let sys = VortexSystem::new(&spec).unwrap();
        let s = VortexState::random(4.0, 6, 8, 0).unwrap();
        let fwd = integrate_vortex(&s, &sys, 1e-3, 500, 500, false).unwrap();
        let back = integrate_vortex(&fwd.final_state, &sys, -1e-3, 500, 500, false).unwrap();
        for (a, b) in back.final_state.positions.iter().zip(&s.positions) {
            assert!(reduce_to_cell(*a - *b, 4.0).norm() < 1e-7);
        }
    }

    #[test]
    fn collisions_abort() {
        let spec = KernelSpec::torus(0.5, 4.0).unwrap();
        let s = two(Vec2::new(0.1, 0.1), Vec2::new(0.1, 0.1 + 1e-7), 1.0, 1.0);
        assert!(matches!(vortex_rhs(&s, &spec), Err(Error::Collision { .. })));
        let s = two(Vec2::new(-2.0, 0.0), Vec2::new(2.0 - 1e-9, 0.0), 1.0, 1.0);
        assert!(matches!(vortex_rhs(&s, &spec), Err(Error::Collision { .. })));
        assert!(VortexState::new(vec![], vec![]).is_err());
    }
}
