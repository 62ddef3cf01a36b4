//! Crate-wide error type.
//!
//! One enum covers every failure mode the library surfaces; callers that
//! need to branch (missing data vs. bad config vs. version skew) match on
//! the variant rather than parsing messages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A file or string could not be parsed as the expected format.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    /// Data parsed fine but violates an invariant (duplicate ids, empty
    /// source text, winner not on either side of the pair, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An anchor set is missing a translation it is required to carry.
    #[error("incomplete anchor set: no translation for item `{item_id}` by model `{model_id}`")]
    Incomplete { item_id: String, model_id: String },

    /// A version string is not semver, or two versions cannot be related.
    #[error("version error: {0}")]
    Version(String),

    /// Filesystem failure, annotated with the path involved.
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Two inputs that must not overlap do (e.g. candidate id already an anchor).
    #[error("conflict: {0}")]
    Conflict(String),

    /// An operation was given nothing to work on.
    #[error("empty input: {0}")]
    Empty(String),

    /// Bad or missing configuration (unset API key env var, zero workers, ...).
    #[error("config error: {0}")]
    Config(String),

    /// A judgment log mixes matches from more than one candidate model.
    #[error("mixed candidates in judgment set: {0}")]
    MixedCandidates(String),

    /// A strength fit cannot be performed (too few models, bad prior).
    #[error("degenerate fit: {0}")]
    Degenerate(String),

    /// The strength fit ran out of iterations before reaching tolerance.
    #[error("fit did not converge within {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// A model id was referenced that the operation does not know about.
    #[error("unknown model: {0}")]
    UnknownModel(String),

    /// The judge produced unparseable output even after retries.
    #[error("malformed judge output after retries: {0}")]
    MalformedJudgeOutput(String),

    /// A caller-side precondition did not hold (e.g. judging a pair whose
    /// translations are absent from the store).
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Attach a path to an `std::io::Error`.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Attach a context label to a parse failure.
    pub fn parse(context: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse { context: context.into(), message: message.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
