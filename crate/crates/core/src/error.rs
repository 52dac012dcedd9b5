use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration left the open set on which constraint `index` is smooth.
    #[error("configuration outside the domain of constraint {index} at t = {t}")]
    Domain { index: usize, t: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The polar parts of the active gradients cancel out, so no uniform
    /// advance direction exists. Usually means the inverse triangle constant
    /// is wrong for this family.
    #[error("degenerate cone: |sum of polar parts| = {norm:e}")]
    DegenerateCone { norm: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("linearized feasible set is empty (dual diverged)")]
    InfeasiblePolyhedron,

    #[error("no candidate active set yields a feasible point")]
    EmptyPolyhedron,

    #[error("time step {h:e} exceeds the admissible bound {h_max:e}")]
    StepTooLarge { h: f64, h_max: f64 },

    #[error("constraint {index} violated at t = {t}: value {value:e}")]
    Feasibility { index: usize, t: f64, value: f64 },

    #[error("step {k}: {source}")]
    AtStep {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("multiplier decomposition failed: residual {residual:e} for |F| = {norm:e}")]
    InfeasibleDecomposition { residual: f64, norm: f64 },

    #[error("degenerate convex hull: {0}")]
    DegenerateHull(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("initial configuration violates constraint {index} ({name}): value {value:e}")]
    Validation {
        index: usize,
        name: String,
        value: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips step annotations and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
