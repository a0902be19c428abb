use thiserror::Error;

/// Every failure the engine can report.
///
/// Variants that end in an identity or divisibility failure mean a checked
/// claim did not hold; the rest are precondition violations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division is not exact: nonzero remainder")]
    DivisionNotExact,
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite float value")]
    NonFinite,
    #[error("series has zero constant term")]
    ZeroConstantTerm,
    #[error("negative radicand")]
    NegativeRadicand,
    #[error("rational {0} is not a perfect square")]
    NonSquareRational(String),
    #[error("2x2 linear part is singular")]
    SingularJacobian,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("order {have} is below the required {need}")]
    OrderTooLow { have: usize, need: usize },
    #[error("order {have} exceeds the available {max}")]
    OrderTooHigh { have: usize, max: usize },
    #[error("polynomial uses variables of order {0}, too high for this total derivative")]
    OrderOverflow(usize),
    #[error("variable {0} has no value")]
    MissingVariable(&'static str),
    #[error("jets do not lie in the same fiber")]
    NotSameFiber,
    #[error("transversal field is tangent (A = 0)")]
    DegenerateTransversal,
    #[error("Hessian is degenerate")]
    DegenerateHessian,
    #[error("jet lies in the wrong Hessian region")]
    WrongRegion,
    #[error("cubic form is not a perfect cube")]
    NotRankOne,
    #[error("polynomial is not divisible")]
    NotDivisible,
    #[error("image of the surface is not a graph over the base point")]
    NonAdmissibleChart,
    #[error("identity failed: {0}")]
    IdentityFailed(String),
    #[error("jet does not satisfy the prolonged system")]
    NotOnProlongedManifold,
    #[error("jet does not satisfy the equation")]
    NotOnEquation,
    #[error("no real branch at sample ({0}, {1})")]
    NoRealBranch(String, String),
    #[error("degenerate sample ({0}, {1})")]
    DegenerateSample(String, String),
    #[error("pole at sample ({0}, {1})")]
    PoleAtSample(String, String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
