use std::fmt;

/// Why a decay fit could not be produced.
#[derive(Clone, Debug, PartialEq)]
pub enum FitFailure {
    /// Every off-diagonal moment is exactly zero: nothing propagates.
    NoPropagation,
    /// Fewer than three points with a finite, positive moment.
    TooFewPoints(usize),
    /// The fitted slope is not negative.
    NonNegativeSlope(f64),
}

impl fmt::Display for FitFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitFailure::NoPropagation => write!(f, "all moments vanish"),
            FitFailure::TooFewPoints(n) => write!(f, "only {n} usable points"),
            FitFailure::NonNegativeSlope(s) => write!(f, "slope {s} is not negative"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("block {block} is numerically singular (condition estimate {condition:e})")]
    SingularBlock { block: usize, condition: f64 },

    #[error("shift is numerically singular for the dense oracle")]
    SingularShift,

    #[error("density vanishes at the reference block")]
    DegenerateDensity,

    #[error("degenerate fit: {0}")]
    FitDegenerate(FitFailure),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("no eigenvalue in the spectral window")]
    EmptyWindow,

    #[error("exponential moment overflows: {0}")]
    Overflow(String),

    #[error("too many rejected draws: {rejected} of {attempted}")]
    TooManyRejections { rejected: u64, attempted: u64 },

    #[error("eigensolver did not converge")]
    NoConvergence,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
