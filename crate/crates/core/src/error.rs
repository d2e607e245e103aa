use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid prime {0}: must be a prime >= 2")]
    InvalidPrime(u64),
    #[error("invalid precision {0}: must be >= 1")]
    InvalidPrecision(u32),
    #[error("modulus mismatch: {0}")]
    ModulusMismatch(String),
    #[error("element is not a unit (valuation {valuation})")]
    NotAUnit { valuation: u32 },
    #[error("inexact division: valuation {numerator} < {denominator}")]
    InexactDivision { numerator: u32, denominator: u32 },
    #[error("division by an element that is zero at precision")]
    DivisionByZero,
    #[error("matrix is not invertible at precision")]
    NotInvertible,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),
    #[error("substitution image for variable {var} has a nonzero constant term")]
    NonzeroConstantTerm { var: usize },
    #[error("coordinate {index} has valuation {valuation}, need at least {required}")]
    ValuationTooLow {
        index: usize,
        valuation: u32,
        required: u32,
    },

    #[error("point coordinate {index} has ideal order {order} below level {level}")]
    NotAPoint {
        index: usize,
        order: u32,
        level: u32,
    },
    #[error("level {level} violates the uniformity constraint for p = {prime}")]
    LevelConstraint { prime: u64, level: u32 },
    #[error("formal inverse did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("point is not a p^{exponent}-th power")]
    NotAPower { exponent: u32 },
    #[error("limit did not stabilize within {iterations} iterations")]
    NoStabilization { iterations: u32 },
    #[error("lattice is not powerful: {0}")]
    NotPowerful(String),
    #[error("operation requires a law over Zp (no t-variables), found {0} parameter variables")]
    NotOverZp(usize),
    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("invalid Lie lattice: {0}")]
    InvalidLattice(String),
    #[error("no representation strategy applies")]
    NoStrategyApplies,
    #[error("representation is not faithful at precision: {0}")]
    UnfaithfulRep(String),
    #[error("representation violates bracket relations: {0}")]
    RepRelationsFailed(String),
    #[error("coset transversal verification failed: {0}")]
    TransversalVerificationFailed(String),

    #[error("elements {first} and {second} are indistinguishable at precision")]
    IndistinguishableAtPrecision { first: usize, second: usize },
    #[error("specialized law is invalid at precision: {0}")]
    SpecializedLawInvalid(String),
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },

    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unknown constant g{0}")]
    UnknownConstant(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with stage tags stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
