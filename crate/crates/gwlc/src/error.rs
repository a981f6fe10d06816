//! Codec error type.

use std::io;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CodecError>;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("bad volume header: {0}")]
    Header(String),

    #[error("bit depth {0} outside 1..=16")]
    BitDepth(u8),

    #[error("payload holds {got} samples, header declares {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("slice index {z} outside 0..{slices}")]
    SliceOutOfRange { z: usize, slices: usize },

    #[error("plane dimensions {got:?} do not match {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("offset ({dx},{dy}) outside radius-{radius} box")]
    OffsetOutOfRange { dx: i32, dy: i32, radius: u8 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("symbol stream holds {got} symbols, masks require {expected}")]
    StreamLength { expected: usize, got: usize },

    #[error("corrupt bitstream: {0}")]
    Corrupt(String),

    #[error("bad container magic")]
    BadMagic,

    #[error("container version {got} unsupported (expected {expected})")]
    Version { expected: u16, got: u16 },
}
