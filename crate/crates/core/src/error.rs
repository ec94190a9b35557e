use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Arguments outside the envelope where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A bracketing scan did not find the requested sign change.
    #[error("root search failed: {0}")]
    Search(String),

    /// Observed values contradict a property that must hold (signals a bug upstream).
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// Boundary data with nonzero mean cannot be lifted to a normalized symmetric map.
    #[error("Schwarz problem not solvable: mean-zero violated (g_0 = {mean:e})")]
    Solvability { mean: f64 },

    #[error("Dirichlet fit did not converge: boundary residual {residual:e} > tolerance {tolerance:e}")]
    DirichletResidual { residual: f64, tolerance: f64 },

    #[error("Gauss-Newton did not converge at eps = {eps}: defect {defect:e} after {iterations} iterations")]
    NonConvergence {
        eps: f64,
        defect: f64,
        iterations: usize,
        /// Last iterate: free shape coefficients, then lambda, then c.
        last_iterate: Vec<f64>,
    },

    #[error("singular system: {0}")]
    Singular(String),

    /// Too few usable data points for a log-log fit.
    #[error("degenerate data: {0}")]
    DegenerateData(String),
}
