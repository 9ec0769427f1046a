//! Crate-wide error type with stable process exit codes.

use thiserror::Error;

/// Errors produced by validation, parsing, and the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyPlayerList: a game needs at least one player")]
    EmptyPlayerList,

    #[error("EmptyPlayerName: player names must be non-empty")]
    EmptyPlayerName,

    #[error("DuplicatePlayer: {name:?} appears more than once")]
    DuplicatePlayer { name: String },

    #[error("UnknownPlayer: {name:?} is not in the player list")]
    UnknownPlayer { name: String },

    #[error("MissingCoalition: {coalition}")]
    MissingCoalition { coalition: String },

    #[error("DuplicateCoalition: {coalition}")]
    DuplicateCoalition { coalition: String },

    #[error("ConstantColumn: {column:?} has zero variance")]
    ConstantColumn { column: String },

    #[error("TooFewRows: {rows} rows cannot fit {partners} partners (need at least partners + 1)")]
    TooFewRows { rows: usize, partners: usize },

    #[error("NonNumericCell: row {row}, column {column:?}")]
    NonNumericCell { row: usize, column: String },

    #[error("NonFinitePayoff: coalition {coalition}")]
    NonFinitePayoff { coalition: String },

    #[error("TooManyPlayers: permutation enumeration is capped at {max} players, got {n}")]
    TooManyPlayers { n: usize, max: usize },

    #[error("TooManyPartners: coalition enumeration is capped at {max} partners, got {n}")]
    TooManyPartners { n: usize, max: usize },

    #[error("OutOfRange: coalition size {s} must be below player count {n}")]
    OutOfRange { s: usize, n: usize },

    #[error("DegenerateGame: Shapley values sum to {total}, shares are undefined")]
    DegenerateGame { total: f64 },

    #[error("DimensionMismatch: {left} rows in X vs {right} rows in y")]
    DimensionMismatch { left: usize, right: usize },

    #[error("SingularSystem: regressors plus constant are exactly collinear")]
    SingularSystem,

    #[error("ZeroOutcomeTotal: outcome column sums to ~0, cannot attribute totals (is the data mean-centered?)")]
    ZeroOutcomeTotal,

    #[error("ZeroColumnSum: partner {partner:?} has a ~0 column sum, coefficient is undefined")]
    ZeroColumnSum { partner: String },

    #[error("ZeroAttribution: partner {partner:?} has spend but no attributed outcome")]
    ZeroAttribution { partner: String },

    #[error("NumericalFailure: {details}")]
    NumericalFailure { details: String },

    #[error("ParseError: row {row}, column {column:?}: {message}")]
    ParseError {
        row: usize,
        column: String,
        message: String,
    },

    #[error("HeaderMissing: {0}")]
    HeaderMissing(String),

    #[error("UsageError: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable exit code contract: 1 I/O, 2 validation/usage/parse, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            Error::NumericalFailure { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
