//! Fast kernel evaluation for the dynamics and the quadratic forms.

use std::sync::Arc;

use super::{
    green_constant, kernel_constant, plane_kernel_unchecked, Domain, Ewald, KernelSpec,
};
use crate::chebyshev::Chebyshev2;
use crate::error::{check_epsilon, Result};
use crate::geometry::{reduce_to_cell, Vec2};

/// Chebyshev tables of the bounded parts `K^1 - K` and `G^1 - G` on the unit cell.
///
/// The periodic functions differ from the plane ones by functions that are analytic on a
/// neighbourhood of the cell (the nearest other singularity is a full period away), so a
/// tensor interpolant of modest degree reaches double precision.
#[derive(Clone, Debug)]
pub struct PeriodicTable {
    epsilon: f64,
    cheb: Chebyshev2<3>,
}

impl PeriodicTable {
    pub const DEFAULT_NODES: usize = 30;

    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_nodes(epsilon, Self::DEFAULT_NODES)
    }

    pub fn with_nodes(epsilon: f64, nodes: usize) -> Result<Self> {
        check_epsilon(epsilon)?;
        let ewald = Ewald::new(epsilon)?;
        let cheb = Chebyshev2::build(0.5, nodes, |eta| {
            let k = ewald.smooth_kernel(eta);
            [k.x, k.y, ewald.smooth_green(eta)]
        });
        Ok(PeriodicTable { epsilon, cheb })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Size of the highest retained Chebyshev coefficients.
    pub fn tail_magnitude(&self) -> f64 {
        self.cheb.tail_magnitude()
    }

    /// `(K^1 - K, G^1 - G)` at a point of `[-1/2, 1/2]^2`.
    #[inline]
    pub fn smooth(&self, eta: Vec2) -> (Vec2, f64) {
        let [kx, ky, g] = self.cheb.eval(eta);
        (Vec2::new(kx, ky), g)
    }
}

/// Kernel and stream function with the convention `K(0) = 0`, `G(0) = 0`.
///
/// This is the evaluator the dynamics and the bilinear forms use: the plane formulas, or
/// on the torus the plane formulas plus a tabulated smooth correction.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    epsilon: f64,
    c: f64,
    g: f64,
    side: Option<f64>,
    kscale: f64,
    gscale: f64,
    table: Option<Arc<PeriodicTable>>,
}

impl KernelEvaluator {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        spec.validate()?;
        let table = match spec.domain {
            Domain::Plane => None,
            Domain::Torus { .. } => Some(Arc::new(PeriodicTable::new(spec.epsilon)?)),
        };
        Ok(Self::assemble(spec, table))
    }

    /// Reuse a table built for the same exponent.
    pub fn with_table(spec: &KernelSpec, table: Arc<PeriodicTable>) -> Result<Self> {
        spec.validate()?;
        assert_eq!(table.epsilon(), spec.epsilon, "table built for another exponent");
        let table = spec.side().map(|_| table);
        Ok(Self::assemble(spec, table))
    }

    fn assemble(spec: &KernelSpec, table: Option<Arc<PeriodicTable>>) -> Self {
        KernelEvaluator {
            epsilon: spec.epsilon,
            c: kernel_constant(spec.epsilon),
            g: green_constant(spec.epsilon),
            side: spec.side(),
            kscale: spec.side().map_or(1.0, |m| m.powf(spec.epsilon - 2.0)),
            gscale: spec.side().map_or(1.0, |m| m.powf(spec.epsilon - 1.0)),
            table,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn side(&self) -> Option<f64> {
        self.side
    }

    pub fn table(&self) -> Option<&Arc<PeriodicTable>> {
        self.table.as_ref()
    }

    /// Velocity kernel `K(x)`.
    #[inline]
    pub fn kernel(&self, x: Vec2) -> Vec2 {
        match (self.side, &self.table) {
            (Some(m), Some(t)) => {
                let eta = reduce_to_cell(x, m) / m;
                if eta == Vec2::ZERO {
                    return Vec2::ZERO;
                }
                let k = plane_kernel_unchecked(self.c, self.epsilon, eta) + t.smooth(eta).0;
                k * self.kscale
            }
            _ => {
                if x == Vec2::ZERO {
                    return Vec2::ZERO;
                }
                plane_kernel_unchecked(self.c, self.epsilon, x)
            }
        }
    }

    /// Stream function `G(x)` with `K = grad^perp G`.
    #[inline]
    pub fn green(&self, x: Vec2) -> f64 {
        match (self.side, &self.table) {
            (Some(m), Some(t)) => {
                let eta = reduce_to_cell(x, m) / m;
                if eta == Vec2::ZERO {
                    return 0.0;
                }
                let g = self.g * eta.norm().powf(self.epsilon - 1.0) + t.smooth(eta).1;
                g * self.gscale
            }
            _ => {
                if x == Vec2::ZERO {
                    return 0.0;
                }
                self.g * x.norm().powf(self.epsilon - 1.0)
            }
        }
    }
}
