use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-positive radius {value} at t = {t}")]
    NonPositiveRadius { t: f64, value: f64 },

    #[error("degenerate parametrization: |z'(t)| = {jac} at t = {t}")]
    DegenerateJacobian { t: f64, jac: f64 },

    #[error("interior wavenumber squared is not positive (kappa1^2 = {0}); need mu1*eps1 > mu0*eps0*cos^2(theta)")]
    EvanescentInterior(f64),

    #[error("{context}: system is numerically singular (condition estimate {condition:.3e}); likely an irregular frequency, perturb omega")]
    IrregularFrequency { context: String, condition: f64 },

    #[error("conjugate gradient did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    CgNotConverged { residual: f64, iterations: usize },

    #[error("radius stayed non-positive after {halvings} step halvings at iteration {iteration}")]
    UnrecoverableRadius { iteration: usize, halvings: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
