//! Numerical laboratory for the axially symmetric constant Q-curvature
//! equation on the 4-sphere,
//!
//! ```text
//!     alpha * P4 u + 6 (1 - e^{4u} / \int e^{4u} dw) = 0,
//! ```
//!
//! reduced to a fourth-order ODE on [-1, 1] and discretized in a Gegenbauer
//! polynomial basis. The crate provides
//!
//! * [`gegenbauer`] — the weighted orthogonal basis, Gauss-Legendre
//!   quadrature and the forward/inverse spectral transforms;
//! * [`operators`] — spherical Laplacian and Paneitz operators, the
//!   gradient field `G = (1-x^2) u'` and the energy functionals;
//! * [`solver`] — residual, Jacobian and damped Newton iteration in the
//!   parameter `rho = 6/alpha`, with a deflation mode for multiple
//!   solutions;
//! * [`continuation`] — bifurcation points on the trivial branch,
//!   branch switching and pseudo-arclength tracing, transcritical slope
//!   measurement and blowup extrapolation;
//! * [`identities`] — per-solution verification of the integral
//!   identities and a priori bounds satisfied by solutions, plus the
//!   axial conformal transform and center-of-mass normalization;
//! * [`thresholds`] — a replayable certificate engine for the
//!   inequality chains that bound the uniqueness threshold in `alpha`;
//! * [`sampling`] — randomized positivity suites for the energy
//!   functionals.

pub mod continuation;
pub mod error;
pub mod exact;
pub mod family;
pub mod gegenbauer;
pub mod identities;
pub mod operators;
pub mod sampling;
pub mod solver;
pub mod thresholds;

pub(crate) mod accsum;

pub use error::Error;
pub use gegenbauer::{GegenbauerBasis, QuadratureRule, SpectralField};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
