//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// An edge that was asked to be removed is not present (or was listed twice).
    #[error("edge ({user}, {item}) not present in the graph")]
    EdgeNotFound { user: u64, item: u64 },

    /// A recommendation list refers to a user who owns no items, so the
    /// personalization metrics are undefined for it.
    #[error("user {user} owns no items; personalization metrics are undefined")]
    UserWithoutItems { user: u64 },

    #[error("unknown algorithm {name:?} (expected one of: pliers, probs, heats, hybrid, pd, bhc)")]
    UnknownAlgorithm { name: String },

    #[error("graph has {have} links but at least {need} are required")]
    InsufficientEdges { have: usize, need: usize },

    /// Rounding the removal fraction against the link count produced an empty
    /// probe set, so there is nothing to predict.
    #[error("removal fraction {fraction} of {links} links rounds to an empty probe set")]
    EmptyProbe { links: usize, fraction: f64 },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
}

impl Error {
    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
