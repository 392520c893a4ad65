use thiserror::Error;

/// Library-wide error type.
///
/// Variants are grouped by the subsystem that raises them; the CLI maps
/// `is_infeasible` variants to exit code 2 and everything else to exit 1.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // -- polytope / cone construction --
    #[error("polytope is empty")]
    Empty,
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("body is not full-dimensional")]
    NotFullDim,
    #[error("cross section is unbounded: vector is not in the interior of the dual cone")]
    UnboundedSection,
    #[error("cone is not pointed")]
    NotPointed,
    #[error("Gorenstein vector does not exist: ray system is inconsistent")]
    NonGorenstein,

    // -- weights --
    #[error("weight is nonpositive on the polytope: {0}")]
    WeightNonpositive(String),
    #[error("weight is attached to a different polytope")]
    PolytopeMismatch,
    #[error("unsupported weight for this operation: {0}")]
    UnsupportedWeight(String),
    #[error("invalid weight expression: {0}")]
    BadExpression(String),

    // -- solvers --
    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(String),
    #[error("problem is infeasible: {0}")]
    Infeasible(String),
    #[error("iterate left the admissible weight domain")]
    WeightDomain,
    #[error("vector is outside the Reeb cone")]
    OutsideReebCone,
    #[error("normalized slice does not meet the interior of the Reeb cone")]
    EmptySlice,
    #[error("quotient requires a rational Reeb vector")]
    IrregularQuotient,

    // -- non-Archimedean calculus --
    #[error("zero vector is not a valid valuation")]
    ZeroVector,
    #[error("piecewise linear data is not concave: {0}")]
    NotConcave(String),

    // -- toric potentials --
    #[error("grid function is not convex")]
    NotConvex,
    #[error("quadrature diverged: truncation box too small (tail mass {0:e})")]
    QuadratureDiverged(f64),
    #[error("obstructed Futaki invariant: the necessary vanishing fails (moment {0:e})")]
    ObstructedFutaki(f64),

    // -- generic --
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Mathematical infeasibility (as opposed to malformed input or an
    /// internal failure). The CLI reports these with exit code 2.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::ObstructedFutaki(_)
                | Error::Infeasible(_)
                | Error::EmptySlice
                | Error::WeightDomain
                | Error::WeightNonpositive(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
