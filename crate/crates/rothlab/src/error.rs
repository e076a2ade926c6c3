use std::fmt;

/// Error type shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Precondition violation on caller input (bad ranges, mismatched moduli,
    /// malformed set data).
    InvalidInput(String),
    /// A computation would exceed the fixed integer width the kernels are
    /// sized for. Results are never allowed to wrap.
    Capacity(String),
    /// A request exceeds the configured resource ceiling (e.g. exhaustive
    /// search sizes).
    Budget(String),
    /// The balanced function is identically zero, so no increment exists.
    ZeroEnergy,
    /// The increment step found no subprogression with positive mean.
    NoIncrement,
    /// The rectified progression is shorter than the configured minimum.
    TooShort { len: u64, min_len: u64 },
    /// An internal invariant failed. Always a bug, never a data error.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity exceeded: {msg}"),
            Error::Budget(msg) => write!(f, "budget exceeded: {msg}"),
            Error::ZeroEnergy => write!(f, "zero energy: balanced function vanishes"),
            Error::NoIncrement => write!(f, "no subprogression with positive mean found"),
            Error::TooShort { len, min_len } => {
                write!(f, "progression of length {len} below minimum {min_len}")
            }
            Error::Internal(msg) => write!(f, "internal invariant violated: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
