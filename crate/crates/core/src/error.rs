//! Error types shared across the toolkit.

use thiserror::Error;

/// All fallible operations in this crate return `Result<T, Error>`.
#[derive(Debug, Error)]
pub enum Error {
    /// A table, model, or file disagrees with its declared schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell, file, or JSON document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The same row identifier appeared more than once.
    #[error("duplicate row id: {0}")]
    DuplicateId(String),

    /// An invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Two row-aligned inputs could not be joined.
    #[error("join error: {0}")]
    Join(String),

    /// An annotation record is missing a required field or is malformed.
    #[error("annotation error: missing or invalid field `{0}`")]
    Annotation(String),

    /// An upstream artifact no longer matches the hash recorded in its manifest.
    #[error("stale artifact: {0}")]
    StaleArtifact(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable kind name used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(_) => "SchemaError",
            Error::Parse(_) => "ParseError",
            Error::DuplicateId(_) => "DuplicateIdError",
            Error::Config(_) => "ConfigError",
            Error::Join(_) => "JoinError",
            Error::Annotation(_) => "AnnotationError",
            Error::StaleArtifact(_) => "StaleArtifactError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
