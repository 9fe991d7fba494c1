use thiserror::Error;

/// Errors raised by the library. Each variant names the module that detected it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DblError {
    #[error("{module}: shape mismatch: {detail}")]
    ShapeMismatch { module: &'static str, detail: String },

    #[error("{module}: matrix is not positive definite (failing pivot {pivot})")]
    NotPositiveDefinite { module: &'static str, pivot: usize },

    #[error("{module}: matrix is not symmetric: {detail}")]
    NotSymmetric { module: &'static str, detail: String },

    #[error("gaussian_core: observed covariance block is numerically singular")]
    SingularObservationCov,

    #[error("gaussian_core: inner Woodbury block is singular")]
    SingularInnerBlock,

    #[error("market_views: P Sigma P^T is singular (degenerate pick matrix)")]
    DegeneratePick,

    #[error("{module}: view Gram matrix P Sigma P^T + Omega is singular")]
    SingularViewGram { module: &'static str },

    #[error("policy_engine: view noise covariance Omega is singular")]
    SingularOmega,

    #[error("market_views: short-term view history missing for interval {interval}")]
    MissingHistory { interval: usize },

    #[error("market_views: view horizons must be sorted ascending")]
    UnsortedHorizons,

    #[error("bridge: covariance difference is indefinite, hitting times are not comparable")]
    NotComparable,

    #[error("{module}: grid out of range: {detail}")]
    GridOutOfRange { module: &'static str, detail: String },

    #[error("policy_engine: risk aversion must satisfy gamma > 1 (gamma = 1 is the log-utility limit), got {gamma}")]
    GammaOutOfRange { gamma: f64 },

    #[error("policy_engine: time {t} lies outside interval [{start}, {end})")]
    IntervalMismatch { t: f64, start: f64, end: f64 },

    #[error("mc_lab: wealth hit zero or below on {count} path(s) (first at path {first_path}, t = {t})")]
    BankruptcyUnderflow { count: usize, first_path: usize, t: f64 },

    #[error("mc_lab: certainty equivalent needs strictly positive wealth")]
    NonPositiveWealth,

    #[error("{module}: invalid input: {detail}")]
    InvalidInput { module: &'static str, detail: String },
}

impl DblError {
    /// True when the error stems from malformed input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            DblError::ShapeMismatch { .. }
                | DblError::NotSymmetric { .. }
                | DblError::MissingHistory { .. }
                | DblError::UnsortedHorizons
                | DblError::GridOutOfRange { .. }
                | DblError::GammaOutOfRange { .. }
                | DblError::IntervalMismatch { .. }
                | DblError::InvalidInput { .. }
        )
    }

    /// Short invariant name used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            DblError::ShapeMismatch { .. } => "ShapeMismatch",
            DblError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            DblError::NotSymmetric { .. } => "NotSymmetric",
            DblError::SingularObservationCov => "SingularObservationCov",
            DblError::SingularInnerBlock => "SingularInnerBlock",
            DblError::DegeneratePick => "DegeneratePick",
            DblError::SingularViewGram { .. } => "SingularViewGram",
            DblError::SingularOmega => "SingularOmega",
            DblError::MissingHistory { .. } => "MissingHistory",
            DblError::UnsortedHorizons => "UnsortedHorizons",
            DblError::NotComparable => "NotComparable",
            DblError::GridOutOfRange { .. } => "GridOutOfRange",
            DblError::GammaOutOfRange { .. } => "GammaOutOfRange",
            DblError::IntervalMismatch { .. } => "IntervalMismatch",
            DblError::BankruptcyUnderflow { .. } => "BankruptcyUnderflow",
            DblError::NonPositiveWealth => "NonPositiveWealth",
            DblError::InvalidInput { .. } => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, DblError>;
