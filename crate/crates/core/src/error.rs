use thiserror::Error;

/// Errors reported by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree {degree} exceeds basis maximum {max_degree}")]
    DegreeOutOfRange { degree: usize, max_degree: usize },

    #[error("quadrature with {nodes} nodes cannot resolve degree {degree} projections")]
    InsufficientQuadrature { nodes: usize, degree: usize },

    #[error("quadrature rule needs at least 2 nodes, got {0}")]
    QuadratureOrder(usize),

    #[error("exponential overflow: max 4u = {0:.3e} exceeds the safe range")]
    ExponentialOverflow(f64),

    #[error("log argument {0:.3e} is not positive")]
    NonPositiveLogArgument(f64),

    #[error(
        "Jacobian is singular (smallest singular value {0:.3e}); likely near a bifurcation point"
    )]
    SingularJacobian(f64),

    #[error(
        "Newton iteration did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NoConvergence { residual: f64, iterations: usize },

    #[error("continuation step size underflow at rho = {rho}")]
    StepUnderflow { rho: f64 },

    #[error("no sign-changing bracket found for the first moment in ({lo}, {hi})")]
    NoBracket { lo: f64, hi: f64 },

    #[error("spectral tail {tail:.3e} exceeds {limit:.3e}: resolution loss")]
    ResolutionLoss { tail: f64, limit: f64 },

    #[error("{0}")]
    InvalidInput(String),
}
