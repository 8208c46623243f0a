//! Error type shared by every model module.
//!
//! Spec and scenario loading fails closed: unknown keys, missing keys, and
//! type mismatches are reported with the offending field. Physical
//! quantities must be positive unless a field explicitly allows zero.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A spec or scenario file could not be parsed. `origin` is the file
    /// path or builtin name, `message` comes from the parser and names the
    /// offending key.
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    /// A parsed value violates a model precondition. `field` is the
    /// dotted path of the offending field.
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: String, message: String },

    /// A name did not resolve to a bundled preset or a readable file.
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn parse(origin: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            origin: origin.into(),
            message: message.to_string(),
        }
    }

    pub fn unknown(kind: &'static str, name: impl Into<String>) -> Self {
        Error::Unknown {
            kind,
            name: name.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects non-finite or non-positive quantities.
pub(crate) fn require_positive(field: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::invalid(field, format!("must be positive, got {value}")));
    }
    Ok(())
}

/// Rejects values outside (0, 1].
pub(crate) fn require_fraction(field: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 || value > 1.0 {
        return Err(Error::invalid(field, format!("must be in (0, 1], got {value}")));
    }
    Ok(())
}
