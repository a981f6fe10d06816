//! Entropy stage: Hilbert scanning, zero deletion, multi-context adaptive
//! arithmetic coding, and a context-modeled bi-level coder for the binary
//! masks.
//!
//! The arithmetic coder is a 32-bit range coder with byte-wise
//! renormalization and carry propagation. Symbol statistics are kept per
//! context as plain frequency counts, incremented by 1 after each coded
//! symbol and halved (rounding up) once a context total exceeds
//! [`RESCALE_LIMIT`]. The previous symbol selects the context; a dedicated
//! start context covers the first symbol.

use crate::error::{CodecError, Result};
use crate::plane::Plane;
use crate::{BinaryMask, MotionMap};
use crate::sampling::SamplingMask;

/// Frequency-count rescale threshold.
pub const RESCALE_LIMIT: u32 = 1 << 14;

const RANGE_TOP: u32 = 1 << 24;

/// Coded byte payload plus the number of symbols it decodes to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedBlob {
    pub symbol_count: u32,
    pub payload: Vec<u8>,
}

impl CodedBlob {
    /// Serializes as a 4-byte little-endian symbol count plus payload.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.payload.len());
        out.extend_from_slice(&self.symbol_count.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(CodecError::Corrupt("blob shorter than its header".into()));
        }
        Ok(Self {
            symbol_count: u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]),
            payload: bytes[4..].to_vec(),
        })
    }

    pub fn byte_len(&self) -> usize {
        4 + self.payload.len()
    }
}

// ---------------------------------------------------------------------------
// range coder

/// LZMA-style range encoder: 33-bit low with cache/pending bytes for carry
/// propagation.
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            out: Vec::new(),
        }
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low > 0xFFFF_FFFF {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.out.push(byte.wrapping_add(carry));
                byte = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low << 8) & 0xFFFF_FFFF;
    }

    /// Encodes one symbol occupying `[cum, cum + freq)` of `total`.
    pub fn encode(&mut self, cum: u32, freq: u32, total: u32) {
        debug_assert!(freq > 0 && cum + freq <= total);
        let r = self.range / total;
        self.low += (r as u64) * (cum as u64);
        self.range = r * freq;
        while self.range < RANGE_TOP {
            self.shift_low();
            self.range <<= 8;
        }
    }

    /// Encodes `count` raw bits of `value`, most significant first.
    pub fn encode_bits(&mut self, value: u32, count: u32) {
        for i in (0..count).rev() {
            self.range >>= 1;
            if (value >> i) & 1 == 1 {
                self.low += self.range as u64;
            }
            while self.range < RANGE_TOP {
                self.shift_low();
                self.range <<= 8;
            }
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        // the first byte is the initial cache placeholder
        self.out.remove(0);
        self.out
    }
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

/// Decoder matching [`RangeEncoder`].
pub struct RangeDecoder<'a> {
    code: u32,
    range: u32,
    input: &'a [u8],
    pos: usize,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        let mut dec = Self {
            code: 0,
            range: u32::MAX,
            input,
            pos: 0,
        };
        for _ in 0..4 {
            dec.code = (dec.code << 8) | dec.next_byte() as u32;
        }
        dec
    }

    fn next_byte(&mut self) -> u8 {
        let b = self.input.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// Returns a value in `[0, total)` locating the next symbol.
    pub fn decode_target(&mut self, total: u32) -> u32 {
        let r = self.range / total;
        (self.code / r).min(total - 1)
    }

    /// Consumes the symbol previously located by [`RangeDecoder::decode_target`].
    pub fn decode_update(&mut self, cum: u32, freq: u32, total: u32) {
        let r = self.range / total;
        self.code -= r * cum;
        self.range = r * freq;
        while self.range < RANGE_TOP {
            self.code = (self.code << 8) | self.next_byte() as u32;
            self.range <<= 8;
        }
    }

    pub fn decode_bits(&mut self, count: u32) -> u32 {
        let mut value = 0;
        for _ in 0..count {
            self.range >>= 1;
            let bit = if self.code >= self.range {
                self.code -= self.range;
                1
            } else {
                0
            };
            value = (value << 1) | bit;
            while self.range < RANGE_TOP {
                self.code = (self.code << 8) | self.next_byte() as u32;
                self.range <<= 8;
            }
        }
        value
    }
}

// ---------------------------------------------------------------------------
// adaptive frequency model

/// Adaptive frequency counts for one context.
#[derive(Debug, Clone)]
struct FreqTable {
    counts: Vec<u32>,
    total: u32,
}

impl FreqTable {
    fn new(alphabet: usize) -> Self {
        Self {
            counts: vec![1; alphabet],
            total: alphabet as u32,
        }
    }

    fn cum(&self, symbol: usize) -> u32 {
        self.counts[..symbol].iter().sum()
    }

    fn find(&self, target: u32) -> (usize, u32) {
        let mut cum = 0;
        for (sym, &c) in self.counts.iter().enumerate() {
            if target < cum + c {
                return (sym, cum);
            }
            cum += c;
        }
        unreachable!("target below total")
    }

    fn bump(&mut self, symbol: usize) {
        self.counts[symbol] += 1;
        self.total += 1;
        if self.total > RESCALE_LIMIT {
            self.total = 0;
            for c in self.counts.iter_mut() {
                *c = (*c + 1) >> 1;
                self.total += *c;
            }
        }
    }
}

/// Adaptive multi-context model keyed by the previous symbol, with a
/// dedicated start context for the first one.
pub struct ContextModel {
    contexts: Vec<FreqTable>,
    alphabet: usize,
    prev: usize,
}

impl ContextModel {
    pub fn new(alphabet: usize) -> Self {
        Self {
            // context 0 is the start-of-stream context
            contexts: (0..=alphabet).map(|_| FreqTable::new(alphabet)).collect(),
            alphabet,
            prev: 0,
        }
    }

    pub fn encode(&mut self, enc: &mut RangeEncoder, symbol: usize) {
        debug_assert!(symbol < self.alphabet);
        let table = &self.contexts[self.prev];
        enc.encode(table.cum(symbol), table.counts[symbol], table.total);
        self.contexts[self.prev].bump(symbol);
        self.prev = symbol + 1;
    }

    pub fn decode(&mut self, dec: &mut RangeDecoder) -> usize {
        let table = &self.contexts[self.prev];
        let target = dec.decode_target(table.total);
        let (sym, cum) = table.find(target);
        dec.decode_update(cum, table.counts[sym], table.total);
        self.contexts[self.prev].bump(sym);
        self.prev = sym + 1;
        sym
    }
}

/// Codes a symbol stream with previous-symbol context modeling.
///
/// Symbols must be below `alphabet_size`.
pub fn ac_encode(stream: &[u16], alphabet_size: usize) -> Result<CodedBlob> {
    let mut model = ContextModel::new(alphabet_size);
    let mut enc = RangeEncoder::new();
    for &s in stream {
        if s as usize >= alphabet_size {
            return Err(CodecError::Config(format!(
                "symbol {s} outside alphabet {alphabet_size}"
            )));
        }
        model.encode(&mut enc, s as usize);
    }
    Ok(CodedBlob {
        symbol_count: stream.len() as u32,
        payload: if stream.is_empty() {
            Vec::new()
        } else {
            enc.finish()
        },
    })
}

/// Inverse of [`ac_encode`].
pub fn ac_decode(blob: &CodedBlob, alphabet_size: usize) -> Result<Vec<u16>> {
    let n = blob.symbol_count as usize;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut model = ContextModel::new(alphabet_size);
    let mut dec = RangeDecoder::new(&blob.payload);
    Ok((0..n).map(|_| model.decode(&mut dec) as u16).collect())
}

// ---------------------------------------------------------------------------
// Hilbert scan

/// Smallest power-of-two side covering a `width x height` shape.
pub fn hilbert_order(width: usize, height: usize) -> usize {
    let side = width.max(height).max(1);
    side.next_power_of_two()
}

/// Maps a distance along the Hilbert curve of a `side x side` grid
/// (`side` a power of two) to coordinates. The first step goes along +y.
pub fn hilbert_d2xy(side: usize, d: u64) -> (usize, usize) {
    let mut x = 0u64;
    let mut y = 0u64;
    let mut t = d;
    let mut s = 1u64;
    while s < side as u64 {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s <<= 1;
    }
    (x as usize, y as usize)
}

/// Inverse of [`hilbert_d2xy`].
pub fn hilbert_xy2d(side: usize, x: usize, y: usize) -> u64 {
    let n = side as u64;
    let mut rx;
    let mut ry;
    let mut d = 0u64;
    let mut x = x as u64;
    let mut y = y as u64;
    let mut s = n / 2;
    while s > 0 {
        rx = u64::from((x & s) > 0);
        ry = u64::from((y & s) > 0);
        d += s * s * ((3 * rx) ^ ry);
        // the rotation works on the full grid here, unlike the decode
        // direction which rotates the growing sub-square
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

/// All in-bounds pixels of a `width x height` shape in Hilbert order of the
/// enclosing power-of-two grid.
pub fn hilbert_path(width: usize, height: usize) -> Vec<(usize, usize)> {
    let side = hilbert_order(width, height);
    let mut path = Vec::with_capacity(width * height);
    for d in 0..(side * side) as u64 {
        let (x, y) = hilbert_d2xy(side, d);
        if x < width && y < height {
            path.push((x, y));
        }
    }
    path
}

/// Reads a map along the Hilbert path.
pub fn hilbert_scan<T: Copy>(map: &Plane<T>) -> Vec<T> {
    hilbert_path(map.width(), map.height())
        .into_iter()
        .map(|(x, y)| map.get(x, y))
        .collect()
}

/// Inverse of [`hilbert_scan`].
pub fn hilbert_unscan<T: Copy + Default>(
    symbols: &[T],
    width: usize,
    height: usize,
) -> Result<Plane<T>> {
    if symbols.len() != width * height {
        return Err(CodecError::StreamLength {
            expected: width * height,
            got: symbols.len(),
        });
    }
    let mut plane = Plane::filled(width, height, T::default());
    for (s, (x, y)) in symbols.iter().zip(hilbert_path(width, height)) {
        plane.set(x, y, *s);
    }
    Ok(plane)
}

// ---------------------------------------------------------------------------
// zero deletion

/// Keeps only the scan positions that are transmitted (`B = 1` and `S = 1`).
pub fn delete_zeros(
    scanned: &[u16],
    mask: &BinaryMask,
    sampling: &SamplingMask,
) -> Result<Vec<u16>> {
    let path = hilbert_path(mask.width(), mask.height());
    if scanned.len() != path.len() {
        return Err(CodecError::StreamLength {
            expected: path.len(),
            got: scanned.len(),
        });
    }
    Ok(path
        .iter()
        .zip(scanned)
        .filter(|((x, y), _)| mask.get(*x, *y) != 0 && sampling.get(*x, *y))
        .map(|(_, &s)| s)
        .collect())
}

/// Restores zeros at untransmitted scan positions. Inverse of
/// [`delete_zeros`] given the same masks.
pub fn reinsert_zeros(
    stream: &[u16],
    mask: &BinaryMask,
    sampling: &SamplingMask,
) -> Result<Vec<u16>> {
    let path = hilbert_path(mask.width(), mask.height());
    let kept = path
        .iter()
        .filter(|(x, y)| mask.get(*x, *y) != 0 && sampling.get(*x, *y))
        .count();
    if stream.len() != kept {
        return Err(CodecError::StreamLength {
            expected: kept,
            got: stream.len(),
        });
    }
    let mut it = stream.iter();
    Ok(path
        .iter()
        .map(|&(x, y)| {
            if mask.get(x, y) != 0 && sampling.get(x, y) {
                *it.next().expect("stream length checked")
            } else {
                0
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// bi-level coder

/// 10-pixel causal template: three pixels two rows up, five pixels one row
/// up, two to the left. Out-of-bounds pixels read as 0.
const BILEVEL_TEMPLATE: [(i32, i32); 10] = [
    (-1, -2),
    (0, -2),
    (1, -2),
    (-2, -1),
    (-1, -1),
    (0, -1),
    (1, -1),
    (2, -1),
    (-2, 0),
    (-1, 0),
];

fn bilevel_context(mask: &Plane<u8>, x: usize, y: usize) -> usize {
    let mut ctx = 0usize;
    for &(dx, dy) in &BILEVEL_TEMPLATE {
        let px = x as i32 + dx;
        let py = y as i32 + dy;
        let bit = if px >= 0 && py >= 0 && (px as usize) < mask.width() {
            mask.get(px as usize, py as usize) as usize
        } else {
            0
        };
        ctx = (ctx << 1) | bit;
    }
    ctx
}

/// Codes a binary mask with per-template-context adaptive binary coding.
pub fn bilevel_encode(mask: &BinaryMask) -> CodedBlob {
    let mut tables = vec![[1u32, 1u32]; 1 << BILEVEL_TEMPLATE.len()];
    let mut enc = RangeEncoder::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let ctx = bilevel_context(mask, x, y);
            let bit = mask.get(x, y) as usize;
            let [c0, c1] = tables[ctx];
            let (cum, freq) = if bit == 0 { (0, c0) } else { (c0, c1) };
            enc.encode(cum, freq, c0 + c1);
            tables[ctx][bit] += 1;
            if tables[ctx][0] + tables[ctx][1] > RESCALE_LIMIT {
                tables[ctx][0] = (tables[ctx][0] + 1) >> 1;
                tables[ctx][1] = (tables[ctx][1] + 1) >> 1;
            }
        }
    }
    CodedBlob {
        symbol_count: (mask.width() * mask.height()) as u32,
        payload: enc.finish(),
    }
}

/// Inverse of [`bilevel_encode`].
pub fn bilevel_decode(blob: &CodedBlob, width: usize, height: usize) -> Result<BinaryMask> {
    if blob.symbol_count as usize != width * height {
        return Err(CodecError::Corrupt(format!(
            "mask blob holds {} bits for a {width}x{height} mask",
            blob.symbol_count
        )));
    }
    let mut tables = vec![[1u32, 1u32]; 1 << BILEVEL_TEMPLATE.len()];
    let mut dec = RangeDecoder::new(&blob.payload);
    let mut mask = Plane::filled(width, height, 0u8);
    for y in 0..height {
        for x in 0..width {
            let ctx = bilevel_context(&mask, x, y);
            let [c0, c1] = tables[ctx];
            let target = dec.decode_target(c0 + c1);
            let bit = usize::from(target >= c0);
            let (cum, freq) = if bit == 0 { (0, c0) } else { (c0, c1) };
            dec.decode_update(cum, freq, c0 + c1);
            mask.set(x, y, bit as u8);
            tables[ctx][bit] += 1;
            if tables[ctx][0] + tables[ctx][1] > RESCALE_LIMIT {
                tables[ctx][0] = (tables[ctx][0] + 1) >> 1;
                tables[ctx][1] = (tables[ctx][1] + 1) >> 1;
            }
        }
    }
    Ok(mask)
}

/// Hilbert-scans a masked motion map, drops untransmitted positions and
/// arithmetic codes the rest.
pub fn encode_motion_map(
    map: &MotionMap,
    mask: &BinaryMask,
    sampling: &SamplingMask,
    alphabet: usize,
) -> Result<CodedBlob> {
    let scanned = hilbert_scan(map);
    let stream = delete_zeros(&scanned, mask, sampling)?;
    // symbols are 1-based; 0 never survives deletion
    let shifted: Vec<u16> = stream
        .iter()
        .map(|&s| {
            s.checked_sub(1)
                .ok_or_else(|| CodecError::Corrupt("zero symbol at transmitted position".into()))
        })
        .collect::<Result<_>>()?;
    ac_encode(&shifted, alphabet)
}

/// Inverse of [`encode_motion_map`]; returns the subsampled masked map.
pub fn decode_motion_map(
    blob: &CodedBlob,
    mask: &BinaryMask,
    sampling: &SamplingMask,
    alphabet: usize,
) -> Result<MotionMap> {
    let shifted = ac_decode(blob, alphabet)?;
    let stream: Vec<u16> = shifted.iter().map(|&s| s + 1).collect();
    let scanned = reinsert_zeros(&stream, mask, sampling)?;
    hilbert_unscan(&scanned, mask.width(), mask.height())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::build_sampling_mask;
    use crate::test_util::random_adjacency;
    use crate::util::SplitMix64;

    #[test]
    fn hilbert_first_steps_and_golden_8x8() {
        assert_eq!(hilbert_d2xy(2, 0), (0, 0));
        assert_eq!(hilbert_d2xy(2, 1), (0, 1));
        assert_eq!(hilbert_d2xy(2, 2), (1, 1));
        assert_eq!(hilbert_d2xy(2, 3), (1, 0));

        // golden order of the 8x8 curve: value at (x, y) is the visit index
        let mut grid = [[0u64; 8]; 8];
        for d in 0..64 {
            let (x, y) = hilbert_d2xy(8, d);
            grid[y][x] = d;
        }
        let expected: [[u64; 8]; 8] = [
            [0, 3, 4, 5, 58, 59, 60, 63],
            [1, 2, 7, 6, 57, 56, 61, 62],
            [14, 13, 8, 9, 54, 55, 50, 49],
            [15, 12, 11, 10, 53, 52, 51, 48],
            [16, 17, 30, 31, 32, 33, 46, 47],
            [19, 18, 29, 28, 35, 34, 45, 44],
            [20, 23, 24, 27, 36, 39, 40, 43],
            [21, 22, 25, 26, 37, 38, 41, 42],
        ];
        assert_eq!(grid, expected);
    }

    #[test]
    fn hilbert_curve_orders() {
        assert_eq!(hilbert_order(512, 512), 512);
        assert_eq!(hilbert_order(144, 192), 256);
        assert_eq!(hilbert_order(1, 1), 1);
    }

    #[test]
    fn hilbert_bijective_on_awkward_shapes() {
        for (w, h) in [(1, 1), (5, 3), (7, 7), (13, 2), (144, 192)] {
            let path = hilbert_path(w, h);
            assert_eq!(path.len(), w * h);
            let mut seen = std::collections::HashSet::new();
            for &(x, y) in &path {
                assert!(x < w && y < h);
                assert!(seen.insert((x, y)));
            }
            let mut rng = SplitMix64::new((w * h) as u64);
            let map = Plane::from_fn(w, h, |_, _| rng.next_below(50) as u16);
            let scanned = hilbert_scan(&map);
            assert_eq!(hilbert_unscan(&scanned, w, h).unwrap(), map);
            for d in 0..(hilbert_order(w, h) * hilbert_order(w, h)) as u64 {
                let side = hilbert_order(w, h);
                let (x, y) = hilbert_d2xy(side, d);
                assert_eq!(hilbert_xy2d(side, x, y), d);
            }
        }
    }

    #[test]
    fn zero_deletion_round_trip() {
        let mut rng = SplitMix64::new(31);
        for trial in 0..20 {
            let w = 3 + trial % 7;
            let h = 2 + trial % 5;
            let mask = Plane::from_fn(w, h, |_, _| (rng.next_below(2)) as u8);
            let sampling = build_sampling_mask(1 + (trial as u8 % 16), w, h).unwrap();
            let map = Plane::from_fn(w, h, |x, y| {
                if mask.get(x, y) != 0 && sampling.get(x, y) {
                    1 + rng.next_below(49) as u16
                } else {
                    0
                }
            });
            let scanned = hilbert_scan(&map);
            let stream = delete_zeros(&scanned, &mask, &sampling).unwrap();
            let expected = scanned.iter().filter(|&&s| s != 0).count();
            assert_eq!(stream.len(), expected);
            let restored = reinsert_zeros(&stream, &mask, &sampling).unwrap();
            assert_eq!(restored, scanned);
        }

        let ones_mask = Plane::filled(6, 6, 1u8);
        let s16 = build_sampling_mask(16, 6, 6).unwrap();
        let map: MotionMap = Plane::filled(6, 6, 7u16);
        let stream = delete_zeros(&hilbert_scan(&map), &ones_mask, &s16).unwrap();
        assert_eq!(stream.len(), 36);

        let zero_mask = Plane::filled(6, 6, 0u8);
        let stream = delete_zeros(&hilbert_scan(&map), &zero_mask, &s16).unwrap();
        assert!(stream.is_empty());

        assert!(matches!(
            reinsert_zeros(&[1, 2, 3], &zero_mask, &s16),
            Err(CodecError::StreamLength { .. })
        ));
    }

    #[test]
    fn ac_empty_stream() {
        let blob = ac_encode(&[], 49).unwrap();
        assert_eq!(blob.symbol_count, 0);
        assert!(blob.payload.is_empty());
        assert!(ac_decode(&blob, 49).unwrap().is_empty());
    }

    #[test]
    fn ac_repetitive_stream_compresses_hard() {
        let stream = vec![7u16; 10_000];
        let blob = ac_encode(&stream, 49).unwrap();
        // an order-0 memoryless bound would be 10_000 * log2(49) / 8 ~ 7000
        // bytes; the adaptive model should get well under a tenth of that
        assert!(blob.payload.len() < 700, "payload {}", blob.payload.len());
        assert_eq!(ac_decode(&blob, 49).unwrap(), stream);
    }

    #[test]
    fn ac_random_stream_no_free_lunch() {
        let mut rng = SplitMix64::new(17);
        let stream: Vec<u16> = (0..10_000).map(|_| rng.next_below(49) as u16).collect();
        let blob = ac_encode(&stream, 49).unwrap();
        let entropy_bytes = 10_000.0 * (49f64).log2() / 8.0;
        assert!(blob.payload.len() as f64 > entropy_bytes * 0.98);
        assert_eq!(ac_decode(&blob, 49).unwrap(), stream);
    }

    #[test]
    fn ac_round_trip_various_alphabets() {
        let mut rng = SplitMix64::new(23);
        for alphabet in [2usize, 9, 25, 49, 257] {
            for len in [1usize, 2, 50, 3000] {
                let stream: Vec<u16> = (0..len)
                    .map(|_| rng.next_below(alphabet as u64) as u16)
                    .collect();
                let blob = ac_encode(&stream, alphabet).unwrap();
                assert_eq!(ac_decode(&blob, alphabet).unwrap(), stream, "a={alphabet} n={len}");
            }
        }
    }

    #[test]
    fn ac_rejects_out_of_alphabet() {
        assert!(ac_encode(&[49], 49).is_err());
    }

    #[test]
    fn ac_deterministic() {
        let mut rng = SplitMix64::new(40);
        let stream: Vec<u16> = (0..500).map(|_| rng.next_below(25) as u16).collect();
        assert_eq!(ac_encode(&stream, 25).unwrap(), ac_encode(&stream, 25).unwrap());
    }

    #[test]
    fn raw_bits_round_trip() {
        let mut enc = RangeEncoder::new();
        let values = [(0u32, 1u32), (1, 1), (5, 3), (0xFFFF, 16), (0, 9), (123, 7)];
        for &(v, n) in &values {
            enc.encode_bits(v, n);
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes);
        for &(v, n) in &values {
            assert_eq!(dec.decode_bits(n), v);
        }
    }

    #[test]
    fn bilevel_round_trip() {
        let zero = Plane::filled(40, 30, 0u8);
        let blob = bilevel_encode(&zero);
        assert!(blob.payload.len() <= 16, "all-zero mask payload {}", blob.payload.len());
        assert_eq!(bilevel_decode(&blob, 40, 30).unwrap(), zero);

        let mut rng = SplitMix64::new(3);
        for trial in 0..10 {
            let w = 3 + trial % 9;
            let h = 2 + trial % 7;
            let mask = Plane::from_fn(w, h, |_, _| rng.next_below(2) as u8);
            let blob = bilevel_encode(&mask);
            assert_eq!(bilevel_decode(&blob, w, h).unwrap(), mask);
        }
    }

    #[test]
    fn bilevel_structured_mask_below_tenth_bpp() {
        let mask = Plane::from_fn(256, 256, |x, y| {
            u8::from((60..180).contains(&x) && (40..200).contains(&y))
        });
        let blob = bilevel_encode(&mask);
        let bits_per_pixel = blob.payload.len() as f64 * 8.0 / (256.0 * 256.0);
        assert!(bits_per_pixel < 0.1, "got {bits_per_pixel} bpp");
        assert_eq!(bilevel_decode(&blob, 256, 256).unwrap(), mask);
    }

    #[test]
    fn motion_map_end_to_end() {
        let mut rng = SplitMix64::new(55);
        let (w, h) = (19, 11);
        let adj = random_adjacency(w, h, 3, &mut rng);
        let map = crate::motion_map::adjacency_to_map(&adj, 3).unwrap();
        let mask = Plane::from_fn(w, h, |_, _| rng.next_below(2) as u8);
        let sampling = build_sampling_mask(9, w, h).unwrap();
        let masked = crate::motion_map::apply_mask(&map, &mask).unwrap();
        let subsampled = crate::sampling::subsample(&masked, &sampling).unwrap();

        let blob = encode_motion_map(&subsampled, &mask, &sampling, 49).unwrap();
        let decoded = decode_motion_map(&blob, &mask, &sampling, 49).unwrap();
        assert_eq!(decoded, subsampled);
    }

    #[test]
    fn blob_serialization() {
        let blob = CodedBlob {
            symbol_count: 7,
            payload: vec![1, 2, 3],
        };
        let bytes = blob.to_bytes();
        assert_eq!(bytes.len(), blob.byte_len());
        assert_eq!(CodedBlob::from_bytes(&bytes).unwrap(), blob);
        assert!(CodedBlob::from_bytes(&[1, 2]).is_err());
    }
}
