use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain an operation accepts.
    #[error("input out of domain: {0}")]
    InputDomain(String),

    /// The inertia matrix could not be factorized.
    #[error("inertia matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    Degenerate { min_eigenvalue: f64 },

    /// The adaptive integrator could not make progress.
    #[error("step size underflow at t = {t} s (h = {step:e} s)")]
    StepUnderflow {
        t: f64,
        step: f64,
        last_state: Box<crate::integrator::SimState>,
    },

    /// The state left the finite range.
    #[error("non-finite state at t = {t} s")]
    Divergence { t: f64 },

    /// Inverse kinematics did not converge.
    #[error("inverse kinematics did not converge after {iterations} iterations (residual {residual:e})")]
    IkNoConvergence {
        iterations: usize,
        residual: f64,
        best: [f64; 9],
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InputDomain(_) => "input_domain",
            Error::Degenerate { .. } => "numerical_degeneracy",
            Error::StepUnderflow { .. } => "stiffness_failure",
            Error::Divergence { .. } => "divergence",
            Error::IkNoConvergence { .. } => "ik_no_convergence",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::InputDomain(msg.into())
}
