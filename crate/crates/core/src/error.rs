use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),

    #[error("unknown automorphism `{0}` on field {1}")]
    UnknownAutomorphism(String, String),

    #[error("invalid field description: {0}")]
    InvalidField(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown code `{0}`")]
    UnknownCode(String),

    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("enumeration budget exceeded: {needed} points requested, budget {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("integer overflow risk in exact arithmetic: {0}")]
    Overflow(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::FieldMismatch(..) => "field_mismatch",
            Error::UnknownAutomorphism(..) => "unknown_automorphism",
            Error::InvalidField(_) => "invalid_field",
            Error::Dimension(_) => "dimension",
            Error::InvalidInput(_) => "invalid_input",
            Error::UnknownCode(_) => "unknown_code",
            Error::DegenerateLattice(_) => "degenerate_lattice",
            Error::DegenerateChannel(_) => "degenerate_channel",
            Error::Budget { .. } => "budget",
            Error::Overflow(_) => "overflow",
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
        }
    }
}
