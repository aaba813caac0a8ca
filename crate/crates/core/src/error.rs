use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        expected: &'static str,
    },

    #[error("kernel domain mismatch: {0}")]
    DomainMismatch(&'static str),

    #[error("kernel singularity at ({}, {})", .0.x, .0.y)]
    Singularity(Vec2),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("quadrature grid does not resolve {what}: {detail}")]
    Resolution { what: &'static str, detail: String },

    #[error("weight window too small: tail bound {tail:.3e} exceeds 1% of {value:.3e}")]
    WindowTooSmall { tail: f64, value: f64 },

    #[error("test function support violates the torus cell: {0}")]
    SupportViolation(String),

    #[error("vortex collision at t = {t}: min pair distance {distance:.3e} below {tolerance:.3e}")]
    Collision {
        t: f64,
        distance: f64,
        tolerance: f64,
    },

    #[error("Galerkin integration blew up at t = {t}: L2 norm grew by a factor {growth:.3}")]
    BlowUp { t: f64, growth: f64 },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon.to_string(),
            expected: "a value in the open interval (0, 1)",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: value.to_string(),
            expected: "a finite positive number",
        })
    }
}
