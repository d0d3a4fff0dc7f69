use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A sequence was shorter than an operation requires.
    TooShort {
        needed: usize,
        got: usize,
    },
    /// `t^{(order)}(index)` needs `order + index` to be a valid position.
    OutOfRange {
        order: usize,
        index: usize,
        len: usize,
    },
    /// A moment vector must start with the order unit 1.
    NotNormalized,
    NotInterior,
    NotAMomentVector,
    /// The complexity cap of a rounding search was hit.
    DepthExhausted,
    /// An enclosure or halving loop hit its refinement cap.
    PrecisionExhausted,
    DepthCapExceeded {
        cap: u32,
    },
    MixedDescriptors,
    EmptyInterval,
    InvalidDescriptor(String),
    InvalidMeasure(String),
    InvalidRequest(String),
    InvalidWord(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooShort { needed, got } => {
                write!(f, "sequence too short: need {needed} entries, got {got}")
            }
            Error::OutOfRange { order, index, len } => write!(
                f,
                "difference of order {order} at index {index} is out of range for length {len}"
            ),
            Error::NotNormalized => f.write_str("moment vector must start with 1"),
            Error::NotInterior => f.write_str("moment vector is not in the relative interior"),
            Error::NotAMomentVector => f.write_str("not a truncated moment vector"),
            Error::DepthExhausted => f.write_str("rounding complexity cap exhausted"),
            Error::PrecisionExhausted => f.write_str("refinement cap exhausted"),
            Error::DepthCapExceeded { cap } => write!(f, "cylinder depth cap {cap} exceeded"),
            Error::MixedDescriptors => f.write_str("elements come from different subgroups"),
            Error::EmptyInterval => f.write_str("interval is empty"),
            Error::InvalidDescriptor(msg) => write!(f, "invalid subgroup: {msg}"),
            Error::InvalidMeasure(msg) => write!(f, "invalid measure: {msg}"),
            Error::InvalidRequest(msg) => write!(f, "invalid request: {msg}"),
            Error::InvalidWord(msg) => write!(f, "invalid word: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
