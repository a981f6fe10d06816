//! Block-matching baseline: full-search SAD estimation on a block grid,
//! sharing the lifting machinery through the per-pixel adjacency the block
//! vectors induce.

use crate::entropy::{ac_decode, ac_encode, CodedBlob};
use crate::error::{CodecError, Result};
use crate::graph::ReducedAdjacency;
use crate::lifting::{mctf_forward, mctf_inverse, SubbandPair};
use crate::Frame;

/// One integer vector per block of the even frame, pointing into the odd
/// frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionVectorField {
    width: usize,
    height: usize,
    block_size: usize,
    vectors: Vec<(i16, i16)>,
}

impl MotionVectorField {
    pub fn blocks_x(&self) -> usize {
        self.width.div_ceil(self.block_size)
    }

    pub fn blocks_y(&self) -> usize {
        self.height.div_ceil(self.block_size)
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn vectors(&self) -> &[(i16, i16)] {
        &self.vectors
    }

    pub fn vector_at(&self, x: usize, y: usize) -> (i16, i16) {
        self.vectors[(y / self.block_size) * self.blocks_x() + x / self.block_size]
    }

    /// Per-pixel adjacency induced by the block vectors; end nodes are
    /// clamped into the frame (edge replication).
    pub fn to_adjacency(&self) -> ReducedAdjacency {
        let mut end = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let (dx, dy) = self.vector_at(x, y);
                let ex = (x as i64 + dx as i64).clamp(0, self.width as i64 - 1);
                let ey = (y as i64 + dy as i64).clamp(0, self.height as i64 - 1);
                end.push((ey * self.width as i64 + ex) as u32);
            }
        }
        ReducedAdjacency::from_end_indices(self.width, self.height, end)
            .expect("clamped ends are in bounds")
    }
}

/// Exhaustive SAD search over `[-search_range, search_range]^2` per block.
///
/// Reference pixels outside the odd frame are taken from the nearest edge.
/// Ties prefer the smaller Chebyshev magnitude, then the candidate visited
/// first in row-major `(dy, dx)` order.
pub fn block_search(
    f_odd: &Frame,
    f_even: &Frame,
    block_size: usize,
    search_range: u8,
) -> Result<MotionVectorField> {
    f_odd.check_dims(f_even)?;
    if block_size == 0 {
        return Err(CodecError::Config("block size must be positive".into()));
    }
    let (w, h) = f_odd.dims();
    let r = search_range as i64;
    let blocks_x = w.div_ceil(block_size);
    let blocks_y = h.div_ceil(block_size);
    let mut vectors = Vec::with_capacity(blocks_x * blocks_y);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let x0 = bx * block_size;
            let y0 = by * block_size;
            let x1 = (x0 + block_size).min(w);
            let y1 = (y0 + block_size).min(h);
            let mut best = (u64::MAX, i64::MAX);
            let mut best_v = (0i16, 0i16);
            for dy in -r..=r {
                for dx in -r..=r {
                    let mut sad = 0u64;
                    for y in y0..y1 {
                        let ry = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                        for x in x0..x1 {
                            let rx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                            sad += (f_even.get(x, y) as i64 - f_odd.get(rx, ry) as i64)
                                .unsigned_abs();
                        }
                    }
                    let key = (sad, dx.abs().max(dy.abs()));
                    if key < best {
                        best = key;
                        best_v = (dx as i16, dy as i16);
                    }
                }
            }
            vectors.push(best_v);
        }
    }
    Ok(MotionVectorField {
        width: w,
        height: h,
        block_size,
        vectors,
    })
}

/// Compensated lifting along the block vectors.
pub fn block_mctf_forward(
    f_odd: &Frame,
    f_even: &Frame,
    mvf: &MotionVectorField,
) -> Result<SubbandPair> {
    mctf_forward(f_odd, f_even, &mvf.to_adjacency())
}

/// Exact inverse of [`block_mctf_forward`].
pub fn block_mctf_inverse(pair: &SubbandPair, mvf: &MotionVectorField) -> Result<(Frame, Frame)> {
    mctf_inverse(pair, &mvf.to_adjacency())
}

/// Codes the vector field with the shared previous-symbol entropy coder.
pub fn mv_encode(mvf: &MotionVectorField, search_range: u8) -> Result<CodedBlob> {
    let side = 2 * search_range as i64 + 1;
    let symbols: Vec<u16> = mvf
        .vectors
        .iter()
        .map(|&(dx, dy)| {
            if dx.unsigned_abs() > search_range as u16 || dy.unsigned_abs() > search_range as u16 {
                return Err(CodecError::OffsetOutOfRange {
                    dx: dx as i32,
                    dy: dy as i32,
                    radius: search_range,
                });
            }
            Ok(((dx as i64 + search_range as i64) * side + dy as i64 + search_range as i64) as u16)
        })
        .collect::<Result<_>>()?;
    ac_encode(&symbols, (side * side) as usize)
}

/// Inverse of [`mv_encode`].
pub fn mv_decode(
    blob: &CodedBlob,
    width: usize,
    height: usize,
    block_size: usize,
    search_range: u8,
) -> Result<MotionVectorField> {
    let blocks = width.div_ceil(block_size) * height.div_ceil(block_size);
    if blob.symbol_count as usize != blocks {
        return Err(CodecError::Corrupt(format!(
            "vector blob holds {} symbols for {blocks} blocks",
            blob.symbol_count
        )));
    }
    let side = 2 * search_range as i64 + 1;
    let symbols = ac_decode(blob, (side * side) as usize)?;
    let vectors = symbols
        .iter()
        .map(|&s| {
            let v = s as i64;
            (
                (v / side - search_range as i64) as i16,
                (v % side - search_range as i64) as i16,
            )
        })
        .collect();
    Ok(MotionVectorField {
        width,
        height,
        block_size,
        vectors,
    })
}
