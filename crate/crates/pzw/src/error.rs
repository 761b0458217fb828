use thiserror::Error;

/// Everything that can go wrong when building states or running checks.
///
/// Numerical identities that merely fail their tolerance are not errors;
/// they come back as failed report records. Errors are reserved for inputs
/// that violate a precondition outright.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid is invalid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids: {0}")]
    GridMismatch(String),

    #[error("source is not neutral: |mean rho| = {mean:.3e} > {tol:.1e} * rms(rho)")]
    NonNeutralSource { mean: f64, tol: f64 },

    #[error("smearing width {sigma:.4e} is narrower than 3 dx = {min:.4e}")]
    SmearingTooNarrow { sigma: f64, min: f64 },

    #[error("s-quadrature of order {order} too coarse: doubling it moves the result by {delta:.3e}")]
    QuadratureTooCoarse { order: usize, delta: f64 },

    #[error("expected a transverse field but relative divergence norm is {div_norm:.3e}")]
    NonTransverseInput { div_norm: f64 },

    #[error("point ({x:.4}, {y:.4}, {z:.4}) lies outside the trusted ball of radius {radius:.4}")]
    OutOfTrustedRegion { x: f64, y: f64, z: f64, radius: f64 },

    #[error("unknown field momentum variant `{0}`")]
    UnknownVariant(String),

    #[error("time step {dt:.4e} violates the stability bound {bound:.4e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("potentials are inconsistent with the state: reconstruction residual {residual:.3e}")]
    InconsistentPotentials { residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed snapshot file: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
