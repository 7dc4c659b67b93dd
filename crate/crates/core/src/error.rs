use thiserror::Error;

use crate::nnls::NnlsSolution;

pub type Result<T> = std::result::Result<T, PricingError>;

#[derive(Debug, Clone, Error)]
pub enum PricingError {
    #[error("scenario table is empty")]
    EmptyTable,

    #[error("usage history is empty")]
    EmptyHistory,

    #[error("probability masses sum to {sum}, which is not within 1e-6 of 1")]
    NonNormalizedPmf { sum: f64 },

    #[error("row {row}: negative probability mass {mass}")]
    NegativeMass { row: usize, mass: f64 },

    #[error("row {row}: negative starting price {price}")]
    NegativeStartingPrice { row: usize, price: f64 },

    #[error("row {row}: {field} is not a finite number")]
    NonFinite { row: usize, field: &'static str },

    #[error("row {row}: demand coordinate {index} is negative ({value})")]
    NegativeDemand {
        row: usize,
        index: usize,
        value: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("row {row}: duplicate demand vector with a different starting price or revenue")]
    InconsistentDuplicate { row: usize },

    #[error(
        "no non-negative water level recovers the expected starting price {expected_price}: \
         the clamped revenue reaches at most {attainable} (shortfall {})",
        expected_price - attainable
    )]
    InfeasibleFairness {
        expected_price: f64,
        attainable: f64,
    },

    #[error(
        "no non-negative linear price function is fair: residual {residual} did not shrink \
         (big M = {big_m})"
    )]
    FairnessUnreachable { residual: f64, big_m: f64 },

    #[error(
        "NNLS did not converge within {} iterations (KKT violation {})",
        partial.iterations,
        partial.kkt_violation
    )]
    NonConvergence { partial: Box<NnlsSolution> },

    #[error("instance too large for the brute-force oracle: {what} = {actual}, limit {limit}; shrink the table or coarsen the grid")]
    TooLarge {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: u64,
        message: String,
    },
}

impl PricingError {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            PricingError::EmptyTable => "EmptyTable",
            PricingError::EmptyHistory => "EmptyHistory",
            PricingError::NonNormalizedPmf { .. } => "NonNormalizedPmf",
            PricingError::NegativeMass { .. } => "NegativeMass",
            PricingError::NegativeStartingPrice { .. } => "NegativeStartingPrice",
            PricingError::NonFinite { .. } => "NonFinite",
            PricingError::NegativeDemand { .. } => "NegativeDemand",
            PricingError::DimensionMismatch { .. } => "DimensionMismatch",
            PricingError::InconsistentDuplicate { .. } => "InconsistentDuplicate",
            PricingError::InfeasibleFairness { .. } => "InfeasibleFairness",
            PricingError::FairnessUnreachable { .. } => "FairnessUnreachable",
            PricingError::NonConvergence { .. } => "NonConvergence",
            PricingError::TooLarge { .. } => "TooLarge",
            PricingError::InvalidArgument(_) => "InvalidArgument",
            PricingError::Parse { .. } => "ParseError",
        }
    }
}
