//! Crate-wide error type and result alias.

use thiserror::Error;

/// Errors produced by geometry, weights, statistics, inference, simulation,
/// and file ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// A part was zero, negative, or below the numerical floor where logs stay finite.
    #[error("non-positive part{} (value {value:e}); compositions require strictly positive parts", fmt_row(.row))]
    NonPositivePart { row: Option<String>, value: f64 },

    /// Operands disagree on a dimension (part count, unit count, or coordinate length).
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A data row contains no positive entry, so no relative information survives.
    #[error("row {row} has no positive entry")]
    AllZeroRow { row: String },

    /// An edge references a unit id that is not part of the unit list.
    #[error("unknown unit label in edge list: {label}")]
    UnknownLabel { label: String },

    /// An edge connects a unit to itself.
    #[error("self edge on unit {label}")]
    SelfEdge { label: String },

    /// A unit has no neighbors, so its weight row cannot be standardized.
    #[error("unit {unit} has no neighbors (island); use drop policy or fix the adjacency")]
    IslandUnit { unit: String },

    /// An operation that requires row-standardized weights received raw weights.
    #[error("spatial weights are not row-standardized")]
    NotStandardized,

    /// All compositions coincide after closure, so the statistic is 0/0.
    #[error("degenerate sample: all compositions identical, statistic is undefined")]
    DegenerateSample,

    /// Fewer units than the operation supports.
    #[error("too few units: n = {n}, need at least {min}")]
    TooFewUnits { n: usize, min: usize },

    /// A real-valued Moran input is constant across units.
    #[error("constant vector{}: Moran's I is undefined", fmt_component(.component))]
    ConstantVector { component: Option<usize> },

    /// Exact enumeration was requested above the factorial cap.
    #[error("exact enumeration of {n}! permutations exceeds the cap of {cap} units")]
    TooManyUnits { n: usize, cap: usize },

    /// A permutation distribution with no values.
    #[error("empty permutation distribution")]
    EmptyDistribution,

    /// A covariance specification does not yield a symmetric positive definite matrix.
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    /// The autoregressive system could not be solved.
    #[error("singular spatial autoregressive system")]
    SingularSystem,

    /// Two rows in a composition file share a unit id.
    #[error("duplicate unit id: {id}")]
    DuplicateId { id: String },

    /// A composition file contains a negative value.
    #[error("negative value {value} in row {row}")]
    NegativeValue { row: String, value: f64 },

    /// A composition file row has the wrong number of fields.
    #[error("ragged row {row}: expected {expected} parts, found {found}")]
    RaggedRow {
        row: String,
        expected: usize,
        found: usize,
    },

    /// A parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_row(row: &Option<String>) -> String {
    match row {
        Some(r) => format!(" in row {r}"),
        None => String::new(),
    }
}

fn fmt_component(component: &Option<usize>) -> String {
    match component {
        Some(c) => format!(" in component {c}"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit code for the CLI: 2 input validation, 3 degenerate
    /// statistic, 4 resource cap, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateSample | Error::ConstantVector { .. } => 3,
            Error::TooManyUnits { .. } => 4,
            Error::NonPositivePart { .. }
            | Error::DimensionMismatch { .. }
            | Error::AllZeroRow { .. }
            | Error::UnknownLabel { .. }
            | Error::SelfEdge { .. }
            | Error::IslandUnit { .. }
            | Error::NotStandardized
            | Error::TooFewUnits { .. }
            | Error::EmptyDistribution
            | Error::NotPositiveDefinite
            | Error::SingularSystem
            | Error::DuplicateId { .. }
            | Error::NegativeValue { .. }
            | Error::RaggedRow { .. }
            | Error::InvalidParameter(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
