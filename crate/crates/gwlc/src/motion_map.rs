//! Motion maps: per-pixel end-node indices plus the smoothing and masking
//! stages that make them cheap to transmit.
//!
//! An offset `(dx, dy)` inside the `(2*r_max+1)^2` box is embedded as a
//! column-major index, counting down each column left to right, starting at
//! 1. Index 0 is reserved for "masked out". Offsets found with a smaller
//! search radius keep their maximum-radius index so the alphabet is shared.

use crate::error::{CodecError, Result};
use crate::graph::ReducedAdjacency;
use crate::plane::Plane;
use crate::{BinaryMask, Frame, MotionMap, RadiusMap};

/// Breakpoints of the normalized-difference intervals that select the
/// search radius: `[0, SMOOTH_BREAK_LOW)` picks the smallest radius,
/// `[SMOOTH_BREAK_LOW, SMOOTH_BREAK_HIGH)` the middle one, the rest the
/// largest.
pub const SMOOTH_BREAK_LOW: f64 = 0.12;
pub const SMOOTH_BREAK_HIGH: f64 = 0.29;

/// Alphabet size of motion symbols for a maximum radius (excluding 0).
pub fn symbol_count(r_max: u8) -> u16 {
    let side = 2 * r_max as u16 + 1;
    side * side
}

/// Identity symbol (offset `(0, 0)`) for a maximum radius.
pub fn identity_symbol(r_max: u8) -> u16 {
    embed_index(0, 0, r_max).expect("zero offset always embeds")
}

/// Embeds an offset into the shared index range of the maximum radius.
pub fn embed_index(dx: i32, dy: i32, r_max: u8) -> Result<u16> {
    let r = r_max as i32;
    if dx.abs() > r || dy.abs() > r {
        return Err(CodecError::OffsetOutOfRange {
            dx,
            dy,
            radius: r_max,
        });
    }
    Ok(((dx + r) * (2 * r + 1) + (dy + r) + 1) as u16)
}

/// Inverse of [`embed_index`]. Symbol 0 decodes to the identity offset.
pub fn decode_index(symbol: u16, r_max: u8) -> Result<(i32, i32)> {
    if symbol == 0 {
        return Ok((0, 0));
    }
    let side = 2 * r_max as i32 + 1;
    let v = symbol as i32 - 1;
    if v >= side * side {
        return Err(CodecError::Corrupt(format!(
            "motion symbol {symbol} outside alphabet for r_max {r_max}"
        )));
    }
    Ok((v / side - r_max as i32, v % side - r_max as i32))
}

/// Stores, for every start pixel, the embedded index of its end node.
pub fn adjacency_to_map(adjacency: &ReducedAdjacency, r_max: u8) -> Result<MotionMap> {
    let (w, h) = adjacency.dims();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = adjacency.offset_of(x, y);
            data.push(embed_index(dx, dy, r_max)?);
        }
    }
    Plane::from_vec(w, h, data)
}

/// Rebuilds the adjacency from a motion map. Symbol 0 falls back to the
/// identity offset; offsets are clipped to the frame bounds.
pub fn map_to_adjacency(map: &MotionMap, r_max: u8) -> Result<ReducedAdjacency> {
    let (w, h) = map.dims();
    let mut end = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = decode_index(map.get(x, y), r_max)?;
            let ex = (x as i64 + dx as i64).clamp(0, w as i64 - 1);
            let ey = (y as i64 + dy as i64).clamp(0, h as i64 - 1);
            end.push((ey * w as i64 + ex) as u32);
        }
    }
    ReducedAdjacency::from_end_indices(w, h, end)
}

/// Absolute inter-frame difference scaled into `[0, 1]` by its maximum.
/// Identical frames normalize to all zeros.
pub fn normalized_difference(f_odd: &Frame, f_even: &Frame) -> Result<Plane<f64>> {
    f_odd.check_dims(f_even)?;
    let diff = Plane::from_fn(f_odd.width(), f_odd.height(), |x, y| {
        (f_odd.get(x, y) as i32 - f_even.get(x, y) as i32).unsigned_abs()
    });
    let max = diff.samples().iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Ok(Plane::filled(f_odd.width(), f_odd.height(), 0.0));
    }
    Ok(diff.map(|v| v as f64 / max as f64))
}

/// Assigns a search radius per pixel from the normalized difference.
///
/// For `r_max = 3` the intervals are `[0, 0.12) -> 1`, `[0.12, 0.29) -> 2`,
/// `[0.29, 1] -> 3`; smaller maxima merge the upper intervals.
pub fn radius_assignment(f_odd: &Frame, f_even: &Frame, r_max: u8) -> Result<RadiusMap> {
    if r_max == 0 {
        return Err(CodecError::Config("r_max must be at least 1".into()));
    }
    let n = normalized_difference(f_odd, f_even)?;
    Ok(n.map(|v| match r_max {
        1 => 1,
        2 => {
            if v < SMOOTH_BREAK_LOW {
                1
            } else {
                2
            }
        }
        _ => {
            if v < SMOOTH_BREAK_LOW {
                r_max - 2
            } else if v < SMOOTH_BREAK_HIGH {
                r_max - 1
            } else {
                r_max
            }
        }
    }))
}

/// Mean squared error between two frames.
pub fn frame_mse(f_odd: &Frame, f_even: &Frame) -> Result<f64> {
    f_odd.check_dims(f_even)?;
    let sum: f64 = f_odd
        .samples()
        .iter()
        .zip(f_even.samples())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok(sum / f_odd.len() as f64)
}

/// Mean squared error that would reach a PSNR target at peak amplitude
/// `a_max`.
pub fn target_mse(psnr_target: f64, a_max: u16) -> f64 {
    let a = a_max as f64;
    a * a / 10f64.powf(psnr_target / 10.0)
}

/// Binarization threshold relating the target MSE to the actual inter-frame
/// MSE; infinite when the frames are identical.
pub fn compute_threshold(
    f_odd: &Frame,
    f_even: &Frame,
    psnr_target: f64,
    a_max: u16,
) -> Result<f64> {
    let mse = frame_mse(f_odd, f_even)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(target_mse(psnr_target, a_max) / mse)
}

/// Thresholds the normalized difference: 1 marks motion regions whose map
/// symbols are transmitted. A threshold of 1 or more yields an all-zero
/// mask (the frames already meet the quality target without motion data).
pub fn build_binary_mask(f_odd: &Frame, f_even: &Frame, threshold: f64) -> Result<BinaryMask> {
    let n = normalized_difference(f_odd, f_even)?;
    if threshold >= 1.0 {
        return Ok(Plane::filled(f_odd.width(), f_odd.height(), 0));
    }
    Ok(n.map(|v| u8::from(v >= threshold)))
}

/// Zeroes map symbols outside the motion regions.
pub fn apply_mask(map: &MotionMap, mask: &BinaryMask) -> Result<MotionMap> {
    map.check_dims(mask)?;
    Ok(Plane::from_fn(map.width(), map.height(), |x, y| {
        if mask.get(x, y) != 0 {
            map.get(x, y)
        } else {
            0
        }
    }))
}

/// Replaces remaining 0 symbols with the identity symbol.
pub fn fill_identity(map: &MotionMap, r_max: u8) -> MotionMap {
    let id = identity_symbol(r_max);
    map.map(|s| if s == 0 { id } else { s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_adjacency, random_frame};
    use crate::util::SplitMix64;
    use crate::volume::{generate_phantom, PhantomMotion};

    #[test]
    fn embedding_constants() {
        assert_eq!(embed_index(-3, -3, 3).unwrap(), 1);
        assert_eq!(embed_index(0, 0, 3).unwrap(), 25);
        assert_eq!(embed_index(0, 0, 1).unwrap(), 5);
        assert_eq!(embed_index(3, 3, 3).unwrap(), 49);
        // radius-1 offsets under the radius-3 embedding
        let mut inner = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                inner.push(embed_index(dx, dy, 3).unwrap());
            }
        }
        inner.sort_unstable();
        assert_eq!(inner, [17, 18, 19, 24, 25, 26, 31, 32, 33]);
    }

    #[test]
    fn embedding_bijective() {
        for r_max in 1u8..=3 {
            let mut seen = std::collections::HashSet::new();
            for dx in -(r_max as i32)..=r_max as i32 {
                for dy in -(r_max as i32)..=r_max as i32 {
                    let s = embed_index(dx, dy, r_max).unwrap();
                    assert!(s >= 1 && s <= symbol_count(r_max));
                    assert!(seen.insert(s));
                    assert_eq!(decode_index(s, r_max).unwrap(), (dx, dy));
                }
            }
            assert_eq!(seen.len(), symbol_count(r_max) as usize);
        }
        assert!(embed_index(4, 0, 3).is_err());
        assert!(decode_index(50, 3).is_err());
        assert_eq!(decode_index(0, 3).unwrap(), (0, 0));
    }

    #[test]
    fn adjacency_map_round_trip() {
        let id = ReducedAdjacency::identity(6, 4);
        let map = adjacency_to_map(&id, 3).unwrap();
        assert!(map.samples().iter().all(|&s| s == 25));

        let mut rng = SplitMix64::new(14);
        let adj = random_adjacency(7, 5, 3, &mut rng);
        let map = adjacency_to_map(&adj, 3).unwrap();
        assert_eq!(map_to_adjacency(&map, 3).unwrap(), adj);

        let zeros = Plane::filled(7, 5, 0u16);
        assert_eq!(
            map_to_adjacency(&zeros, 3).unwrap(),
            ReducedAdjacency::identity(7, 5)
        );
    }

    #[test]
    fn radius_intervals() {
        let a = Plane::filled(4, 4, 100u16);
        let all_one = radius_assignment(&a, &a, 3).unwrap();
        assert!(all_one.samples().iter().all(|&r| r == 1));

        // diffs 0, 12, 29, 100 normalize to 0, 0.12, 0.29, 1.0
        let odd = Plane::from_vec(4, 1, vec![100u16, 100, 100, 100]).unwrap();
        let even = Plane::from_vec(4, 1, vec![100u16, 112, 129, 200]).unwrap();
        let r = radius_assignment(&odd, &even, 3).unwrap();
        assert_eq!(r.samples(), &[1, 2, 3, 3]);

        let r2 = radius_assignment(&odd, &even, 2).unwrap();
        assert_eq!(r2.samples(), &[1, 2, 2, 2]);
        let r1 = radius_assignment(&odd, &even, 1).unwrap();
        assert_eq!(r1.samples(), &[1, 1, 1, 1]);
    }

    #[test]
    fn threshold_math() {
        let mse = target_mse(50.0, 4095);
        assert!((mse - 167.69025).abs() < 1e-9);

        let a = Plane::filled(4, 4, 7u16);
        assert_eq!(
            compute_threshold(&a, &a, 50.0, 4095).unwrap(),
            f64::INFINITY
        );

        // frames with MSE 100 give threshold target/100
        let odd = Plane::from_vec(2, 1, vec![0u16, 0]).unwrap();
        let even = Plane::from_vec(2, 1, vec![10u16, 10]).unwrap();
        let tau = compute_threshold(&odd, &even, 50.0, 4095).unwrap();
        assert!((tau - target_mse(50.0, 4095) / 100.0).abs() < 1e-12);
    }

    #[test]
    fn binary_mask_extremes() {
        let mut rng = SplitMix64::new(3);
        let a = random_frame(6, 6, 12, &mut rng);
        let b = random_frame(6, 6, 12, &mut rng);
        let all = build_binary_mask(&a, &b, 0.0).unwrap();
        assert!(all.samples().iter().all(|&v| v == 1));
        let none = build_binary_mask(&a, &b, f64::INFINITY).unwrap();
        assert!(none.samples().iter().all(|&v| v == 0));
        let at_one = build_binary_mask(&a, &b, 1.0).unwrap();
        assert!(at_one.samples().iter().all(|&v| v == 0));
    }

    #[test]
    fn mask_support_follows_motion() {
        let motion = PhantomMotion {
            velocity: (1, 0),
            noise_amplitude: 0,
        };
        let seq = generate_phantom(32, 32, 2, 12, &motion, 0).unwrap();
        let mask = build_binary_mask(&seq[0], &seq[1], 0.01).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let changed = seq[0].get(x, y) != seq[1].get(x, y);
                assert_eq!(mask.get(x, y) == 1, changed, "at ({x},{y})");
            }
        }
        assert!(mask.samples().iter().any(|&v| v == 1));
        assert!(mask.samples().iter().any(|&v| v == 0));
    }

    #[test]
    fn mask_support_monotone_in_psnr_target() {
        let motion = PhantomMotion {
            velocity: (1, 1),
            noise_amplitude: 4,
        };
        let seq = generate_phantom(32, 32, 2, 12, &motion, 11).unwrap();
        let mut prev_support = usize::MAX;
        for target in [70.0, 60.0, 50.0, 40.0, 30.0] {
            let tau = compute_threshold(&seq[0], &seq[1], target, 4095).unwrap();
            let mask = build_binary_mask(&seq[0], &seq[1], tau).unwrap();
            let support = mask.samples().iter().filter(|&&v| v == 1).count();
            assert!(support <= prev_support, "target {target}: {support}");
            prev_support = support;
        }
    }

    #[test]
    fn apply_and_fill() {
        let mut rng = SplitMix64::new(4);
        let adj = random_adjacency(6, 5, 3, &mut rng);
        let map = adjacency_to_map(&adj, 3).unwrap();
        let ones = Plane::filled(6, 5, 1u8);
        assert_eq!(apply_mask(&map, &ones).unwrap(), map);

        let zeros = Plane::filled(6, 5, 0u8);
        let masked = apply_mask(&map, &zeros).unwrap();
        assert!(masked.samples().iter().all(|&s| s == 0));
        let filled = fill_identity(&masked, 3);
        assert!(filled.samples().iter().all(|&s| s == 25));
        assert_eq!(
            map_to_adjacency(&filled, 3).unwrap(),
            ReducedAdjacency::identity(6, 5)
        );

        let mut mask = Plane::filled(6, 5, 1u8);
        mask.set(2, 2, 0);
        mask.set(4, 1, 0);
        let partial = fill_identity(&apply_mask(&map, &mask).unwrap(), 3);
        for (x, y, v) in partial.enumerate() {
            if mask.get(x, y) == 1 {
                assert_eq!(v, map.get(x, y));
            } else {
                assert_eq!(v, 25);
            }
        }
    }
}
