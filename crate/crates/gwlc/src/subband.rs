//! Lossless spatial coding of subband frames.
//!
//! Frames pass through a reversible integer 5/3 wavelet (symmetric
//! boundary extension, quadrant layout, lowpass recursed per level) and the
//! coefficients are coded as magnitude-class symbols with the previous
//! coefficient's class as context, followed by raw refinement bits.

use crate::entropy::{CodedBlob, ContextModel, RangeDecoder, RangeEncoder};
use crate::error::{CodecError, Result};
use crate::plane::Plane;
use crate::SubbandPlane;

/// Spatial decomposition depth used by the codec.
pub const SPATIAL_LEVELS: u8 = 4;

/// Magnitude classes cover any folded 32-bit value.
const CLASS_ALPHABET: usize = 33;

#[inline]
fn floor_half(a: i64, b: i64) -> i64 {
    (a + b).div_euclid(2)
}

#[inline]
fn update_quarter(a: i64, b: i64) -> i64 {
    (a + b + 2).div_euclid(4)
}

/// One reversible 5/3 step; evens become the lowpass half, odds the
/// highpass half.
fn lift_1d(get: impl Fn(usize) -> i64, n: usize) -> (Vec<i64>, Vec<i64>) {
    let n_low = n.div_ceil(2);
    let n_high = n / 2;
    if n == 1 {
        return (vec![get(0)], Vec::new());
    }
    let mut high = Vec::with_capacity(n_high);
    for i in 0..n_high {
        let left = get(2 * i);
        // symmetric extension mirrors the second-to-last sample
        let right = if 2 * i + 2 < n { get(2 * i + 2) } else { get(n - 2) };
        high.push(get(2 * i + 1) - floor_half(left, right));
    }
    let mut low = Vec::with_capacity(n_low);
    for i in 0..n_low {
        let left = if i == 0 { high[0] } else { high[i - 1] };
        let right = if i < n_high { high[i] } else { high[n_high - 1] };
        low.push(get(2 * i) + update_quarter(left, right));
    }
    (low, high)
}

/// Exact inverse of [`lift_1d`].
fn unlift_1d(low: &[i64], high: &[i64]) -> Vec<i64> {
    let n = low.len() + high.len();
    if n == 1 {
        return vec![low[0]];
    }
    let n_low = low.len();
    let n_high = high.len();
    let mut even = Vec::with_capacity(n_low);
    for i in 0..n_low {
        let left = if i == 0 { high[0] } else { high[i - 1] };
        let right = if i < n_high { high[i] } else { high[n_high - 1] };
        even.push(low[i] - update_quarter(left, right));
    }
    let mut out = vec![0i64; n];
    for i in 0..n_low {
        out[2 * i] = even[i];
    }
    for i in 0..n_high {
        let left = out[2 * i];
        let right = if 2 * i + 2 < n { out[2 * i + 2] } else { out[n - 2] };
        out[2 * i + 1] = high[i] + floor_half(left, right);
    }
    out
}

/// Level dimensions actually decomposed: `(level input dims)` per step.
fn level_dims(width: usize, height: usize, levels: u8) -> Vec<(usize, usize)> {
    let mut dims = Vec::new();
    let (mut w, mut h) = (width, height);
    for _ in 0..levels {
        if w == 1 && h == 1 {
            break;
        }
        dims.push((w, h));
        w = w.div_ceil(2);
        h = h.div_ceil(2);
    }
    dims
}

/// Forward separable 5/3 transform with `levels` decomposition steps on the
/// lowpass quadrant. `levels = 0` is the identity.
pub fn dwt53_forward(frame: &SubbandPlane, levels: u8) -> SubbandPlane {
    let mut data: Vec<i64> = frame.samples().iter().map(|&v| v as i64).collect();
    let full_w = frame.width();
    for (w, h) in level_dims(frame.width(), frame.height(), levels) {
        for y in 0..h {
            let base = y * full_w;
            let (low, high) = lift_1d(|i| data[base + i], w);
            for (i, &v) in low.iter().chain(high.iter()).enumerate() {
                data[base + i] = v;
            }
        }
        for x in 0..w {
            let (low, high) = lift_1d(|i| data[i * full_w + x], h);
            for (i, &v) in low.iter().chain(high.iter()).enumerate() {
                data[i * full_w + x] = v;
            }
        }
    }
    Plane::from_vec(
        frame.width(),
        frame.height(),
        data.into_iter().map(|v| v as i32).collect(),
    )
    .expect("dims preserved")
}

/// Exact inverse of [`dwt53_forward`].
pub fn dwt53_inverse(coeffs: &SubbandPlane, levels: u8) -> SubbandPlane {
    let mut data: Vec<i64> = coeffs.samples().iter().map(|&v| v as i64).collect();
    let full_w = coeffs.width();
    for &(w, h) in level_dims(coeffs.width(), coeffs.height(), levels).iter().rev() {
        let n_low_h = h.div_ceil(2);
        for x in 0..w {
            let col: Vec<i64> = (0..h).map(|i| data[i * full_w + x]).collect();
            let out = unlift_1d(&col[..n_low_h], &col[n_low_h..]);
            for (i, &v) in out.iter().enumerate() {
                data[i * full_w + x] = v;
            }
        }
        let n_low_w = w.div_ceil(2);
        for y in 0..h {
            let base = y * full_w;
            let row: Vec<i64> = (0..w).map(|i| data[base + i]).collect();
            let out = unlift_1d(&row[..n_low_w], &row[n_low_w..]);
            for (i, &v) in out.iter().enumerate() {
                data[base + i] = v;
            }
        }
    }
    Plane::from_vec(
        coeffs.width(),
        coeffs.height(),
        data.into_iter().map(|v| v as i32).collect(),
    )
    .expect("dims preserved")
}

/// Raster order over the coefficient plane, one subband at a time: final
/// lowpass first, then highpass bands from coarse to fine.
fn subband_order(width: usize, height: usize, levels: u8) -> Vec<usize> {
    let dims = level_dims(width, height, levels);
    let mut order = Vec::with_capacity(width * height);
    let push_rect = |order: &mut Vec<usize>, x0: usize, x1: usize, y0: usize, y1: usize| {
        for y in y0..y1 {
            for x in x0..x1 {
                order.push(y * width + x);
            }
        }
    };
    let (lw, lh) = dims
        .last()
        .map(|&(w, h)| (w.div_ceil(2), h.div_ceil(2)))
        .unwrap_or((width, height));
    push_rect(&mut order, 0, lw, 0, lh);
    for &(w, h) in dims.iter().rev() {
        let (lw, lh) = (w.div_ceil(2), h.div_ceil(2));
        push_rect(&mut order, lw, w, 0, lh); // high x, low y
        push_rect(&mut order, 0, lw, lh, h); // low x, high y
        push_rect(&mut order, lw, w, lh, h); // high x, high y
    }
    order
}

#[inline]
fn fold_signed(v: i32) -> u32 {
    let v = v as i64;
    ((v << 1) ^ (v >> 63)) as u32
}

#[inline]
fn unfold_signed(f: u32) -> i32 {
    ((f >> 1) as i64 ^ -((f & 1) as i64)) as i32
}

#[inline]
fn magnitude_class(folded: u32) -> u32 {
    32 - folded.leading_zeros()
}

/// Transforms and codes one subband frame losslessly.
pub fn encode_subband_frame(frame: &SubbandPlane, levels: u8) -> CodedBlob {
    let coeffs = dwt53_forward(frame, levels);
    let order = subband_order(frame.width(), frame.height(), levels);
    let mut enc = RangeEncoder::new();
    let mut model = ContextModel::new(CLASS_ALPHABET);
    let samples = coeffs.samples();
    for &idx in &order {
        let folded = fold_signed(samples[idx]);
        let class = magnitude_class(folded);
        model.encode(&mut enc, class as usize);
        if class > 1 {
            enc.encode_bits(folded & ((1 << (class - 1)) - 1), class - 1);
        }
    }
    CodedBlob {
        symbol_count: order.len() as u32,
        payload: enc.finish(),
    }
}

/// Inverse of [`encode_subband_frame`]; dimensions and level count come
/// from the container record.
pub fn decode_subband_frame(
    blob: &CodedBlob,
    width: usize,
    height: usize,
    levels: u8,
) -> Result<SubbandPlane> {
    if blob.symbol_count as usize != width * height {
        return Err(CodecError::Corrupt(format!(
            "subband blob holds {} coefficients for a {width}x{height} frame",
            blob.symbol_count
        )));
    }
    let order = subband_order(width, height, levels);
    let mut data = vec![0i32; width * height];
    let mut dec = RangeDecoder::new(&blob.payload);
    let mut model = ContextModel::new(CLASS_ALPHABET);
    for &idx in &order {
        let class = model.decode(&mut dec) as u32;
        let folded = match class {
            0 => 0,
            1 => 1,
            c => (1 << (c - 1)) | dec.decode_bits(c - 1),
        };
        data[idx] = unfold_signed(folded);
    }
    let coeffs = Plane::from_vec(width, height, data)?;
    Ok(dwt53_inverse(&coeffs, levels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;
    use crate::volume::{generate_phantom, PhantomMotion};

    fn random_signed(w: usize, h: usize, span: u32, rng: &mut SplitMix64) -> SubbandPlane {
        Plane::from_fn(w, h, |_, _| rng.next_signed(span) as i32)
    }

    #[test]
    fn zero_levels_is_identity() {
        let mut rng = SplitMix64::new(1);
        let f = random_signed(9, 7, 4095, &mut rng);
        assert_eq!(dwt53_forward(&f, 0), f);
        assert_eq!(dwt53_inverse(&f, 0), f);
    }

    #[test]
    fn transform_round_trip_awkward_dims() {
        let mut rng = SplitMix64::new(2);
        for (w, h) in [(1, 1), (2, 1), (1, 5), (3, 3), (8, 8), (17, 5), (13, 26), (31, 2)] {
            for levels in [1u8, 2, 4, 6] {
                let f = random_signed(w, h, 65535, &mut rng);
                let coeffs = dwt53_forward(&f, levels);
                assert_eq!(dwt53_inverse(&coeffs, levels), f, "{w}x{h} levels {levels}");
            }
        }
    }

    #[test]
    fn constant_frame_has_zero_details() {
        let f: SubbandPlane = Plane::filled(16, 16, 1234i32);
        let coeffs = dwt53_forward(&f, 4);
        let order = subband_order(16, 16, 4);
        // only the final 1x1 lowpass carries the constant
        for (rank, &idx) in order.iter().enumerate() {
            let v = coeffs.samples()[idx];
            if rank == 0 {
                assert_eq!(v, 1234);
            } else {
                assert_eq!(v, 0, "detail coefficient {rank} nonzero");
            }
        }
    }

    #[test]
    fn fold_round_trip() {
        for v in [-70000, -4095, -1, 0, 1, 2, 4095, 70000, i32::MIN / 4, i32::MAX / 4] {
            assert_eq!(unfold_signed(fold_signed(v)), v);
        }
        assert_eq!(magnitude_class(0), 0);
        assert_eq!(magnitude_class(1), 1);
        assert_eq!(magnitude_class(2), 2);
        assert_eq!(magnitude_class(3), 2);
        assert_eq!(magnitude_class(4), 3);
    }

    #[test]
    fn coding_round_trip() {
        let mut rng = SplitMix64::new(3);
        for (w, h) in [(1, 1), (5, 3), (16, 16), (23, 11)] {
            let f = random_signed(w, h, 65535, &mut rng);
            let blob = encode_subband_frame(&f, SPATIAL_LEVELS);
            assert_eq!(
                decode_subband_frame(&blob, w, h, SPATIAL_LEVELS).unwrap(),
                f
            );
        }
    }

    #[test]
    fn all_zero_frame_codes_tiny() {
        let f: SubbandPlane = Plane::filled(64, 64, 0i32);
        let blob = encode_subband_frame(&f, SPATIAL_LEVELS);
        assert!(blob.byte_len() < 64, "got {} bytes", blob.byte_len());
        assert_eq!(decode_subband_frame(&blob, 64, 64, SPATIAL_LEVELS).unwrap(), f);
    }

    #[test]
    fn smooth_phantom_below_source_rate() {
        let seq = generate_phantom(64, 64, 1, 12, &PhantomMotion::still(), 0).unwrap();
        let frame: SubbandPlane = seq[0].map(|v| v as i32);
        let blob = encode_subband_frame(&frame, SPATIAL_LEVELS);
        let bits_per_sample = blob.payload.len() as f64 * 8.0 / (64.0 * 64.0);
        assert!(bits_per_sample < 12.0, "got {bits_per_sample} bits/sample");
        assert_eq!(
            decode_subband_frame(&blob, 64, 64, SPATIAL_LEVELS).unwrap(),
            frame
        );
    }

    #[test]
    fn deterministic_payload() {
        let mut rng = SplitMix64::new(8);
        let f = random_signed(20, 20, 4095, &mut rng);
        assert_eq!(
            encode_subband_frame(&f, SPATIAL_LEVELS),
            encode_subband_frame(&f, SPATIAL_LEVELS)
        );
    }
}
