//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised while building weight tables, operators or partition functions.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A generator parameter or derived denominator is too close to zero.
    #[error("singular parameter: |{what}| = {magnitude:e} is below the singularity threshold")]
    SingularParameter {
        /// Name of the offending quantity.
        what: String,
        /// Its magnitude.
        magnitude: f64,
    },

    /// A document or operand was built for a different number of states.
    #[error("rank mismatch: expected N = {expected}, found N = {found}")]
    RankMismatch {
        /// Rank the caller asked for.
        expected: usize,
        /// Rank actually present.
        found: usize,
    },

    /// A weight required for a registered pair is absent.
    #[error("missing weight {kind} for pair ({x}, {y})")]
    MissingEntry {
        /// First rapidity label.
        x: String,
        /// Second rapidity label.
        y: String,
        /// Missing weight kind.
        kind: String,
    },

    /// A JSON document could not be parsed or has an invalid shape.
    #[error("malformed document: {0}")]
    MalformedDocument(String),

    /// A pair of rapidities is not registered in the table.
    #[error("unknown rapidity pair ({x}, {y})")]
    UnknownPair {
        /// First rapidity label.
        x: String,
        /// Second rapidity label.
        y: String,
    },

    /// A single rapidity label is not registered.
    #[error("unknown rapidity {0}")]
    UnknownRapidity(String),

    /// A weight kind string or index is not valid for the model rank.
    #[error("unknown weight kind {0}")]
    UnknownKind(String),

    /// A state, site or position index lies outside its range.
    #[error("{what} index {value} out of range 1..={max}")]
    IndexOutOfRange {
        /// What the index refers to.
        what: &'static str,
        /// Offending value.
        value: usize,
        /// Largest admissible value.
        max: usize,
    },

    /// A list of images does not describe a permutation.
    #[error("images {0:?} do not form a bijection of 1..=L")]
    NotABijection(Vec<usize>),

    /// Two operators or vectors live on incompatible spaces.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch {
        /// Description of the left operand.
        left: String,
        /// Description of the right operand.
        right: String,
    },

    /// A principal square root was requested on the negative real axis.
    #[error("weight {kind} of pair ({x}, {y}) lies on the square-root branch cut")]
    BranchCut {
        /// First rapidity label.
        x: String,
        /// Second rapidity label.
        y: String,
        /// Weight kind.
        kind: String,
    },

    /// A triangular matrix has a vanishing diagonal entry.
    #[error("diagonal entry {index} has magnitude {magnitude:e}")]
    SingularDiagonal {
        /// Linear index of the diagonal entry.
        index: usize,
        /// Its magnitude.
        magnitude: f64,
    },

    /// A closed-form expression divides by a weight that is nearly zero.
    #[error("division by {kind}({x}, {y}) with magnitude {magnitude:e}")]
    DivisionNearZero {
        /// First rapidity label.
        x: String,
        /// Second rapidity label.
        y: String,
        /// Weight kind in the denominator.
        kind: String,
        /// Its magnitude.
        magnitude: f64,
    },

    /// Too few rapidities are registered for the requested check.
    #[error("need at least {needed} rapidities, found {found}")]
    InsufficientRapidities {
        /// Required count.
        needed: usize,
        /// Available count.
        found: usize,
    },

    /// An operation is only defined for a specific rank or size.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
