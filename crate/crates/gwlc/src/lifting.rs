//! Integer Haar lifting in the temporal direction, plain and compensated.
//!
//! The compensated transform predicts each even-frame pixel from its end
//! node in the odd frame and updates each odd-frame pixel with the average
//! of the highpass values that reference it, weighted by `1 / (1 + d)`
//! where `d` is the number of referencing pixels. For a single-edge
//! predictor this per-cluster average is the exact closed form of the
//! optimal update operator; with the identity graph it degenerates to the
//! plain Haar transform. All rounding is floor toward negative infinity,
//! so the inverse is exact for every input.

use crate::error::{CodecError, Result};
use crate::graph::ReducedAdjacency;
use crate::plane::Plane;
use crate::{Frame, SubbandPlane};

/// Lowpass/highpass result of one temporal decomposition of a frame pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbandPair {
    pub lp: SubbandPlane,
    pub hp: SubbandPlane,
}

#[inline]
fn floor_div(n: i64, d: i64) -> i64 {
    n.div_euclid(d)
}

fn to_u16_frame(plane: Plane<i64>) -> Result<Frame> {
    let (w, h) = plane.dims();
    let mut data = Vec::with_capacity(plane.len());
    for &v in plane.samples() {
        if !(0..=u16::MAX as i64).contains(&v) {
            return Err(CodecError::Corrupt(
                "subband pair does not reconstruct to unsigned samples".into(),
            ));
        }
        data.push(v as u16);
    }
    Plane::from_vec(w, h, data)
}

/// Plain integer Haar step: `hp = even - odd`, `lp = odd + floor(hp / 2)`.
pub fn haar_forward(f_odd: &Frame, f_even: &Frame) -> Result<SubbandPair> {
    f_odd.check_dims(f_even)?;
    let hp = Plane::from_fn(f_odd.width(), f_odd.height(), |x, y| {
        f_even.get(x, y) as i32 - f_odd.get(x, y) as i32
    });
    let lp = Plane::from_fn(f_odd.width(), f_odd.height(), |x, y| {
        f_odd.get(x, y) as i32 + floor_div(hp.get(x, y) as i64, 2) as i32
    });
    Ok(SubbandPair { lp, hp })
}

/// Exact inverse of [`haar_forward`].
pub fn haar_inverse(pair: &SubbandPair) -> Result<(Frame, Frame)> {
    pair.lp.check_dims(&pair.hp)?;
    let odd = Plane::from_fn(pair.lp.width(), pair.lp.height(), |x, y| {
        pair.lp.get(x, y) as i64 - floor_div(pair.hp.get(x, y) as i64, 2)
    });
    let even = Plane::from_fn(pair.lp.width(), pair.lp.height(), |x, y| {
        pair.hp.get(x, y) as i64 + odd.get(x, y)
    });
    Ok((to_u16_frame(odd)?, to_u16_frame(even)?))
}

/// Compensated Haar step along the edges of `adjacency`.
///
/// `hp(i) = even(i) - odd(j(i))` and
/// `lp(j) = odd(j) + floor(sum of referencing hp / (1 + d_j))`.
pub fn mctf_forward(
    f_odd: &Frame,
    f_even: &Frame,
    adjacency: &ReducedAdjacency,
) -> Result<SubbandPair> {
    f_odd.check_dims(f_even)?;
    if f_odd.dims() != adjacency.dims() {
        return Err(CodecError::DimensionMismatch {
            expected: f_odd.dims(),
            got: adjacency.dims(),
        });
    }
    let n = f_odd.len();
    let odd = f_odd.samples();
    let even = f_even.samples();
    let mut hp = Vec::with_capacity(n);
    let mut cluster_sum = vec![0i64; n];
    let mut cluster_count = vec![0i64; n];
    for i in 0..n {
        let j = adjacency.end_index(i);
        let d = even[i] as i32 - odd[j] as i32;
        hp.push(d);
        cluster_sum[j] += d as i64;
        cluster_count[j] += 1;
    }
    let lp = (0..n)
        .map(|j| odd[j] as i32 + floor_div(cluster_sum[j], 1 + cluster_count[j]) as i32)
        .collect();
    Ok(SubbandPair {
        lp: Plane::from_vec(f_odd.width(), f_odd.height(), lp)?,
        hp: Plane::from_vec(f_odd.width(), f_odd.height(), hp)?,
    })
}

/// Exact inverse of [`mctf_forward`] given the same adjacency.
pub fn mctf_inverse(pair: &SubbandPair, adjacency: &ReducedAdjacency) -> Result<(Frame, Frame)> {
    pair.lp.check_dims(&pair.hp)?;
    if pair.lp.dims() != adjacency.dims() {
        return Err(CodecError::DimensionMismatch {
            expected: pair.lp.dims(),
            got: adjacency.dims(),
        });
    }
    let n = pair.lp.len();
    let hp = pair.hp.samples();
    let lp = pair.lp.samples();
    let mut cluster_sum = vec![0i64; n];
    let mut cluster_count = vec![0i64; n];
    for i in 0..n {
        let j = adjacency.end_index(i);
        cluster_sum[j] += hp[i] as i64;
        cluster_count[j] += 1;
    }
    let mut odd = Vec::with_capacity(n);
    for j in 0..n {
        odd.push(lp[j] as i64 - floor_div(cluster_sum[j], 1 + cluster_count[j]));
    }
    let even = (0..n)
        .map(|i| hp[i] as i64 + odd[adjacency.end_index(i)])
        .collect();
    let (w, h) = pair.lp.dims();
    Ok((
        to_u16_frame(Plane::from_vec(w, h, odd)?)?,
        to_u16_frame(Plane::from_vec(w, h, even)?)?,
    ))
}
