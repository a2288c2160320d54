//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive step size fell below the configured minimum.
    #[error("step size underflow at tau = {tau:.6e}: |h| = {h:.3e} below minimum {h_min:.3e}")]
    StepSizeUnderflow { tau: f64, h: f64, h_min: f64 },

    /// The step budget was exhausted before the integration finished.
    #[error("maximum step count {max_steps} exceeded at tau = {tau:.6e}")]
    MaxStepsExceeded { tau: f64, max_steps: usize },

    /// Event bracketing failed (the event function is degenerate over a step).
    #[error("degenerate event bracket at tau = {tau:.6e}: {detail}")]
    DegenerateEvent { tau: f64, detail: String },

    /// The requested radial minimum was not reached inside the time budget.
    #[error("reached tau = {tau:.6e} with {found} of {wanted} radial minima")]
    MissingEvent { tau: f64, found: usize, wanted: usize },

    /// The trajectory left the neighborhood of the primary (open Hill
    /// region) before reaching the requested event.
    #[error("trajectory escaped at tau = {tau:.6e} with rho = {rho:.3e}")]
    Escape { tau: f64, rho: f64 },

    /// A scalar root search failed to converge or to bracket.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// A momentum zero did not certify as a collision.
    #[error(
        "collision certification failed at theta0 = {theta0:.12}: \
         residual {residual:.3e} exceeds {threshold:.1e}"
    )]
    Certification {
        theta0: f64,
        residual: f64,
        threshold: f64,
    },

    /// A parameter sweep could not resolve a consistent root count.
    #[error("sweep failed: {0}")]
    Sweep(String),

    /// Context wrapper carrying the sample at which a propagation failed.
    #[error("momentum evaluation failed at theta0 = {theta0:.12}, energy = {energy:.12}")]
    AtSample {
        theta0: f64,
        energy: f64,
        #[source]
        source: Box<Error>,
    },

    /// Output or filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an error with the (θ₀, energy) sample at which it occurred.
    pub fn at_sample(self, theta0: f64, energy: f64) -> Self {
        Error::AtSample {
            theta0,
            energy,
            source: Box::new(self),
        }
    }
}
