use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Imaging channel of the topological derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Dielectric permittivity contrast (coefficients `A`).
    Permittivity,
    /// Magnetic permeability contrast (coefficients `B`).
    Permeability,
}

impl Channel {
    pub fn index(self) -> u64 {
        match self {
            Channel::Permittivity => 0,
            Channel::Permeability => 1,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Permittivity => "permittivity",
            Channel::Permeability => "permeability",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid scene: {0}")]
    Validation(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{channel} channel is degenerate at frequency index {frequency_index} (max |value| = {max_abs:e}); the scene has no contrast in this channel")]
    DegenerateChannel {
        channel: Channel,
        frequency_index: usize,
        max_abs: f64,
    },
    #[error("frequency index {index} out of range for {len} frequencies")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
