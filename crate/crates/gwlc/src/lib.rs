//! Scalable lossless codec for dynamic integer sample volumes.
//!
//! The temporal axis is decomposed by one integer Haar lifting step whose
//! prediction runs along a per-pixel motion graph between each frame pair.
//! The graph is transmitted as a motion map: smoothed by per-pixel search
//! radii, masked by a binary motion mask, subsampled by a periodic density
//! pattern, Hilbert-scanned and arithmetic coded. Lowpass and highpass
//! subbands are coded losslessly with a reversible 5/3 wavelet stage, so a
//! decoder can reconstruct either the half-rate base layer alone or the
//! exact original volume.
//!
//! Entry points: [`container::encode_volume`], [`container::decode_volume`],
//! and the `gwlc` command-line tool.

pub mod block_mc;
pub mod container;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod lifting;
pub mod metrics;
pub mod motion_map;
pub mod plane;
pub mod report;
pub mod sampling;
pub mod subband;
pub mod util;
pub mod volume;

#[cfg(test)]
pub(crate) mod test_util;

pub use error::{CodecError, Result};
pub use plane::Plane;

/// Unsigned input frame, samples below `2^bit_depth`.
pub type Frame = Plane<u16>;
/// Signed temporal/spatial subband samples.
pub type SubbandPlane = Plane<i32>;
/// Per-pixel end-node symbols; 0 marks a masked-out position.
pub type MotionMap = Plane<u16>;
/// Per-pixel transmit/skip bits (1 = motion region).
pub type BinaryMask = Plane<u8>;
/// Per-pixel search radii.
pub type RadiusMap = Plane<u8>;
