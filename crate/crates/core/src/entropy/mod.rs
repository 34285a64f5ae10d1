//! Entropy coding layer: an adaptive range coder over integer frequency
//! tables and the bit-level reader/writer shared with the Huffman code.

mod bits;
mod range;

pub use bits::{BitSink, BitSource};
pub use range::{CodingDistribution, RangeDecoder, RangeEncoder, MAX_TOTAL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoderError {
    #[error("coded stream ended early")]
    Truncated,
    #[error("coded stream is corrupt")]
    Corrupt,
    #[error("distribution has no slots")]
    EmptyDistribution,
    #[error("slot {0} has zero frequency")]
    ZeroFrequency(usize),
    #[error("slot {slot} out of range for {slots}-slot distribution")]
    SlotOutOfRange { slot: usize, slots: usize },
}
