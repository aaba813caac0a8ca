use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::vortex::check_stepping;
use crate::error::{check_positive, Error, Result};
use crate::fft::{fast_size, Fft2};
use crate::geometry::Vec2;
use crate::kernels::KernelSpec;
use crate::modes::ModeTable;
use crate::noise::{NoiseField, Pairing};
use crate::quadform::velocity_multiplier;

/// A truncated field `omega_t` on the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    pub t: f64,
    pub field: NoiseField,
}

impl SpectralState {
    pub fn new(field: NoiseField) -> Self {
        SpectralState { t: 0.0, field }
    }
}

/// Galerkin truncation of `d omega/dt = -u . grad omega`, `u = K * omega`, to `|k|_inf <= N`.
///
/// The flux `u omega` is formed on a grid of at least `3N + 1` points, where the product of two
/// degree-`N` polynomials has no aliases inside the retained modes, so the right-hand side is
/// the exact projected convolution.
pub struct GalerkinSolver {
    side: f64,
    cutoff: usize,
    fft: Fft2,
    /// packed velocity multiplier per table index
    velocity: Vec<Complex64>,
    wave: Vec<Vec2>,
    omega: Vec<Complex64>,
    flux: Vec<Complex64>,
}

impl GalerkinSolver {
    pub fn new(side: f64, epsilon: f64, cutoff: usize) -> Result<Self> {
        check_positive("M", side)?;
        KernelSpec::torus(epsilon, side)?;
        if cutoff == 0 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: "0".into(),
                expected: "an integer >= 1",
            });
        }
        let n = fast_size(3 * cutoff + 1);
        let table = ModeTable::zeros(cutoff);
        let w = 2.0 * std::f64::consts::PI / side;
        let wave: Vec<Vec2> = (0..table.as_slice().len())
            .map(|i| {
                let k = table.mode(i);
                Vec2::new(k[0] as f64, k[1] as f64) * w
            })
            .collect();
        let velocity = wave.iter().map(|&q| velocity_multiplier(epsilon, q)).collect();
        Ok(GalerkinSolver {
            side,
            cutoff,
            fft: Fft2::new(n),
            velocity,
            wave,
            omega: vec![Complex64::new(0.0, 0.0); n * n],
            flux: vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    pub fn grid_size(&self) -> usize {
        self.fft.size()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn check(&self, field: &NoiseField) -> Result<()> {
        if field.cutoff() != self.cutoff || (field.side() - self.side).abs() > 1e-12 * self.side {
            return Err(Error::Resolution {
                what: "Galerkin state",
                detail: format!(
                    "solver for M = {}, N = {}; field has M = {}, N = {}",
                    self.side,
                    self.cutoff,
                    field.side(),
                    field.cutoff()
                ),
            });
        }
        Ok(())
    }

    /// `-P_N (u . grad omega)`, Hermitian with a zero mean mode by construction.
    pub fn rhs(&mut self, modes: &ModeTable) -> ModeTable {
        modes.synthesize_into(self.side, &mut self.fft, &mut self.omega);
        let vel = &self.velocity;
        modes.synthesize_scaled_into(self.side, &mut self.fft, &mut self.flux, |i| vel[i]);
        // (u_x + i u_y) omega = F_x + i F_y with real F
        for (f, w) in self.flux.iter_mut().zip(&self.omega) {
            *f *= w.re;
        }
        let z = ModeTable::analyze_from(self.side, &mut self.fft, &mut self.flux, self.cutoff);
        let mut out = ModeTable::zeros(self.cutoff);
        let n = self.cutoff as i64;
        let half = Complex64::new(0.5, 0.0);
        for k1 in 0..=n {
            for k2 in -n..=n {
                if k1 == 0 && k2 <= 0 {
                    continue;
                }
                let (zp, zm) = (z.get([k1, k2]), z.get([-k1, -k2]).conj());
                let fx = (zp + zm) * half;
                let fy = (zp - zm) * Complex64::new(0.0, -0.5);
                let q = self.wave[z.index([k1, k2])];
                // -div F
                let v = Complex64::new(0.0, -1.0) * (fx * q.x + fy * q.y);
                out.set([k1, k2], v);
                out.set([-k1, -k2], v.conj());
            }
        }
        out
    }

    /// One classical Runge-Kutta step.
    pub fn step_rk4(&mut self, state: &mut SpectralState, dt: f64) -> Result<()> {
        self.check(&state.field)?;
        let y0 = state.field.modes().clone();
        let shifted = |k: &ModeTable, h: f64| {
            let mut y = y0.clone();
            for (a, b) in y.as_mut_slice().iter_mut().zip(k.as_slice()) {
                *a += b * h;
            }
            y
        };
        let k1 = self.rhs(&y0);
        let k2 = self.rhs(&shifted(&k1, 0.5 * dt));
        let k3 = self.rhs(&shifted(&k2, 0.5 * dt));
        let k4 = self.rhs(&shifted(&k3, dt));
        let mut y = y0.clone();
        let c = dt / 6.0;
        for (i, a) in y.as_mut_slice().iter_mut().enumerate() {
            *a += (k1.as_slice()[i] + (k2.as_slice()[i] + k3.as_slice()[i]) * 2.0 + k4.as_slice()[i]) * c;
        }
        state.field = NoiseField::from_modes(self.side, y)?;
        state.t += dt;
        Ok(())
    }

    /// Advance `steps` steps, calling `observe` at the start, every `sample_every` steps and at
    /// the end. Aborts when the `L^2` norm grows tenfold or stops being finite.
    pub fn run(
        &mut self,
        state: &mut SpectralState,
        dt: f64,
        steps: usize,
        sample_every: usize,
        mut observe: impl FnMut(&SpectralState) -> Result<()>,
    ) -> Result<()> {
        check_stepping(dt, sample_every)?;
        self.check(&state.field)?;
        let e0 = state.field.energy();
        observe(state)?;
        for s in 1..=steps {
            self.step_rk4(state, dt)?;
            let e = state.field.energy();
            let growth = (e / e0).sqrt();
            if !e.is_finite() || (e0 > 0.0 && growth > 10.0) {
                return Err(Error::BlowUp {
                    t: state.t,
                    growth: if e.is_finite() { growth } else { f64::INFINITY },
                });
            }
            if s % sample_every == 0 || s == steps {
                observe(state)?;
            }
        }
        Ok(())
    }
}

/// Right-hand side for a one-off state.
pub fn galerkin_rhs(state: &SpectralState, epsilon: f64) -> Result<ModeTable> {
    let f = &state.field;
    Ok(GalerkinSolver::new(f.side(), epsilon, f.cutoff())?.rhs(f.modes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinSample {
    pub t: f64,
    /// `omega_0`, constant along the flow
    pub zero_mode: f64,
    /// `sum_k |omega_k|^2`
    pub l2_norm_sq: f64,
    pub pairings: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinRun {
    pub samples: Vec<GalerkinSample>,
    pub final_state: SpectralState,
}

/// RK4 trajectory recording the zero mode, the squared `L^2` norm and the given pairings.
pub fn integrate_galerkin(
    state: &SpectralState,
    epsilon: f64,
    dt: f64,
    steps: usize,
    sample_every: usize,
    pairings: &[Pairing],
) -> Result<GalerkinRun> {
    let f = &state.field;
    let mut solver = GalerkinSolver::new(f.side(), epsilon, f.cutoff())?;
    let mut s = state.clone();
    let mut samples = Vec::new();
    solver.run(&mut s, dt, steps, sample_every, |st| {
        samples.push(GalerkinSample {
            t: st.t,
            zero_mode: st.field.coeff([0, 0]).re,
            l2_norm_sq: st.field.energy(),
            pairings: pairings.iter().map(|p| p.apply(&st.field)).collect(),
        });
        Ok(())
    })?;
    Ok(GalerkinRun {
        samples,
        final_state: s,
    })
}
