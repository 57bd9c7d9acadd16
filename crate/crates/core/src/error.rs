use core::fmt;

/// Errors raised by ingestion, index construction and updates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two input points share a coordinate. Indexes store sets, not multisets.
    DuplicateCoordinate(u64),
    /// Coordinate 0 is reserved as the "no predecessor" sentinel.
    ZeroCoordinate,
    /// A query range with `a > b`.
    InvalidRange { a: u64, b: u64 },
    /// Deleting a coordinate that is not stored.
    NotFound(u64),
    /// A color id outside the registered palette.
    UnknownColor(u32),
    /// A stripe point with `y` outside `[1, H]`.
    HeightOutOfRange { y: u32, max: u32 },
    /// A parameter that makes the structure meaningless (block size < 2, ...).
    InvalidParameter(&'static str),
    /// Serialized index bytes that do not decode.
    Format(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicateCoordinate(v) => write!(f, "duplicate coordinate {v}"),
            Error::ZeroCoordinate => write!(f, "coordinate 0 is reserved"),
            Error::InvalidRange { a, b } => write!(f, "invalid range [{a}, {b}]"),
            Error::NotFound(v) => write!(f, "coordinate {v} not present"),
            Error::UnknownColor(c) => write!(f, "unknown color id {c}"),
            Error::HeightOutOfRange { y, max } => {
                write!(f, "height {y} outside [1, {max}]")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::Format(what) => write!(f, "malformed index file: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
