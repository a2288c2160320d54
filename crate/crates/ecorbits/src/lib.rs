//! n-ejection-collision orbits of the planar circular restricted three-body
//! problem (RTBP) and of the Hill problem.
//!
//! The collision with the small primary is removed by Levi-Civita (LC)
//! regularization. Ejection orbits leave the primary with a one-parameter
//! family of directions θ₀ ∈ [0, π); an orbit is an *n-EC orbit* when it
//! collides again after exactly n radial maxima. Such orbits are located as
//! zeros of the angular momentum M(n, θ₀) = (U·V̇ − V·U̇)(τ*) evaluated at the
//! n-th radial minimum of the normalized trajectory.
//!
//! Module layout:
//! - [`dynamics`]: vector fields, transforms, first integrals, ejection
//!   initial conditions, the collinear-point Jacobi value C_{L1}.
//! - [`integrator`]: adaptive Runge-Kutta 7(8) with radial-event detection.
//! - [`analytic`]: closed-form series in ε = 1/√K (momentum, event time,
//!   solution terms) and the exact rotating-Kepler solution with its
//!   fundamental matrix.
//! - [`ecfinder`]: scans of M(n, θ₀), certified root finding, family labels.
//! - [`continuation`]: family continuation in C, bifurcation detection and
//!   refinement of Ĉ(μ, n), bifurcation diagrams.
//! - [`hill`]: the Hill problem behind the same system interface, K̂(n), and
//!   periodic ejection-collision orbit detection.
//! - [`output`]: deterministic CSV/JSON emission and run manifests.
//! - [`cli`]: the command-line surface used by the `ecorbits` binary.

pub mod analytic;
pub mod cli;
pub mod continuation;
pub mod dynamics;
pub mod ecfinder;
pub mod error;
pub mod hill;
pub mod integrator;
pub mod output;

pub use dynamics::{EjectionSystem, Params, State, System};
pub use error::{Error, Result};
