use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid points are not strictly increasing inside `[0, 1]`, or too few.
    InvalidGrid(String),
    /// A curve holds a NaN or infinite value.
    NonFinite { index: usize },
    /// A curve does not have one value per grid point.
    LengthMismatch { expected: usize, found: usize },
    /// Two objects that must share a grid do not.
    GridMismatch,
    ChannelMismatch { expected: usize, found: usize },
    EmptyDataset,
    /// Labels were required but the dataset has none, or they are malformed.
    Labels(String),
    InvalidConfig(String),
    /// A self-data dictionary was sampled without any curve to draw from.
    EmptyPool,
    /// A uniform indicator window never covered a grid point.
    EmptyWindow { attempts: usize },
    /// Direction importance needs a finite dictionary.
    InfiniteDictionary,
    /// AUC needs at least one observation of each class.
    SingleClass,
    /// A restored model references something it does not carry.
    CorruptModel(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid time grid: {msg}"),
            Error::NonFinite { index } => write!(f, "non-finite value at position {index}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "curve length {found} does not match grid length {expected}")
            }
            Error::GridMismatch => f.write_str("curves are not sampled on the same grid"),
            Error::ChannelMismatch { expected, found } => {
                write!(f, "expected {expected} channel(s), found {found}")
            }
            Error::EmptyDataset => f.write_str("dataset is empty"),
            Error::Labels(msg) => write!(f, "labels: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::EmptyPool => f.write_str("self-data dictionary has an empty curve pool"),
            Error::EmptyWindow { attempts } => write!(
                f,
                "uniform indicator window contained no grid point after {attempts} draws"
            ),
            Error::InfiniteDictionary => {
                f.write_str("direction importance requires a finite (materialized) dictionary")
            }
            Error::SingleClass => f.write_str("AUC needs at least one normal and one anomaly"),
            Error::CorruptModel(msg) => write!(f, "corrupt model: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
