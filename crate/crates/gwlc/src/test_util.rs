//! Helpers shared across unit tests.

use crate::graph::ReducedAdjacency;
use crate::plane::Plane;
use crate::util::SplitMix64;
use crate::{Frame, RadiusMap};

pub fn uniform_radius(w: usize, h: usize, r: u8) -> RadiusMap {
    Plane::filled(w, h, r)
}

pub fn random_frame(w: usize, h: usize, bits: u8, rng: &mut SplitMix64) -> Frame {
    Plane::from_fn(w, h, |_, _| rng.next_below(1 << bits) as u16)
}

pub fn random_adjacency(w: usize, h: usize, r_max: i64, rng: &mut SplitMix64) -> ReducedAdjacency {
    let mut end = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let x0 = (x as i64 - r_max).max(0);
            let x1 = (x as i64 + r_max).min(w as i64 - 1);
            let y0 = (y as i64 - r_max).max(0);
            let y1 = (y as i64 + r_max).min(h as i64 - 1);
            let ex = x0 + rng.next_below((x1 - x0 + 1) as u64) as i64;
            let ey = y0 + rng.next_below((y1 - y0 + 1) as u64) as i64;
            end.push((ey * w as i64 + ex) as u32);
        }
    }
    ReducedAdjacency::from_end_indices(w, h, end).unwrap()
}
