use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain (loop {loop_index}, segment {segment}): {reason}")]
    InvalidDomain {
        loop_index: usize,
        segment: usize,
        reason: String,
    },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("empty spectrum: {0}")]
    EmptySpectrum(String),

    #[error("numerical failure in {context}: {detail}")]
    Numeric { context: String, detail: String },

    #[error("mesh generation failed near segment {segment} of loop {loop_index}: {reason}")]
    Mesh {
        loop_index: usize,
        segment: usize,
        reason: String,
    },

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("insufficient spectrum: {reason}; a cutoff of at least {required_cutoff:.6e} is required")]
    InsufficientSpectrum { reason: String, required_cutoff: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("parse error in {source_name}: {reason}")]
    Parse { source_name: String, reason: String },

    #[error("mismatched input: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numeric(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            reason: reason.into(),
        }
    }
}
