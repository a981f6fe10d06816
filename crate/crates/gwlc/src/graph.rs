//! Reduced prediction graphs between a frame pair.
//!
//! Every pixel of the even frame (a start node) keeps exactly one edge to a
//! pixel of the odd frame (its end node) inside a per-pixel search box. The
//! kept weight is always 1, so the graph is fully described by the end-node
//! coordinates.

use crate::error::{CodecError, Result};
use crate::plane::Plane;
use crate::{Frame, RadiusMap};

/// One end node per start node; end nodes stored as linear indices into the
/// odd frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedAdjacency {
    width: usize,
    height: usize,
    end: Vec<u32>,
}

impl ReducedAdjacency {
    /// Adjacency mapping every pixel to itself.
    pub fn identity(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            end: (0..(width * height) as u32).collect(),
        }
    }

    pub fn from_end_indices(width: usize, height: usize, end: Vec<u32>) -> Result<Self> {
        if end.len() != width * height {
            return Err(CodecError::DimensionMismatch {
                expected: (width, height),
                got: (end.len(), 1),
            });
        }
        let n = (width * height) as u32;
        if end.iter().any(|&e| e >= n) {
            return Err(CodecError::Corrupt("adjacency end node out of bounds".into()));
        }
        Ok(Self { width, height, end })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.end.len()
    }

    pub fn is_empty(&self) -> bool {
        self.end.is_empty()
    }

    /// Linear end index for start pixel `i` (linear).
    #[inline]
    pub fn end_index(&self, i: usize) -> usize {
        self.end[i] as usize
    }

    /// End coordinates for start pixel `(x, y)`.
    #[inline]
    pub fn end_of(&self, x: usize, y: usize) -> (usize, usize) {
        let e = self.end[y * self.width + x] as usize;
        (e % self.width, e / self.width)
    }

    /// Offset `(dx, dy)` from start pixel `(x, y)` to its end node.
    #[inline]
    pub fn offset_of(&self, x: usize, y: usize) -> (i32, i32) {
        let (ex, ey) = self.end_of(x, y);
        (ex as i32 - x as i32, ey as i32 - y as i32)
    }

    /// Number of start nodes mapped to each odd pixel.
    pub fn column_counts(&self) -> Plane<u32> {
        let mut counts = Plane::filled(self.width, self.height, 0u32);
        for &e in &self.end {
            counts.samples_mut()[e as usize] += 1;
        }
        counts
    }

    /// Largest Chebyshev offset over all start nodes.
    pub fn max_offset(&self) -> u32 {
        let mut best = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                let (dx, dy) = self.offset_of(x, y);
                best = best.max(dx.unsigned_abs().max(dy.unsigned_abs()));
            }
        }
        best
    }
}

/// Picks, for every even-frame pixel, the most similar odd-frame pixel inside
/// the clipped search box of the per-pixel radius.
///
/// Similarity is the absolute intensity difference; ties go to the offset
/// with the smaller Chebyshev magnitude, then the lexicographically smaller
/// `(dx, dy)`, which biases the maps toward zero motion.
pub fn estimate_motion(
    f_odd: &Frame,
    f_even: &Frame,
    radius_map: &RadiusMap,
) -> Result<ReducedAdjacency> {
    f_odd.check_dims(f_even)?;
    f_odd.check_dims(radius_map)?;
    let (w, h) = f_odd.dims();
    let mut end = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let r = radius_map.get(x, y) as i64;
            let target = f_even.get(x, y) as i64;
            let x0 = (x as i64 - r).max(0);
            let x1 = (x as i64 + r).min(w as i64 - 1);
            let y0 = (y as i64 - r).max(0);
            let y1 = (y as i64 + r).min(h as i64 - 1);
            let mut best = (i64::MAX, i64::MAX, i64::MAX, i64::MAX);
            let mut best_index = 0u32;
            for ey in y0..=y1 {
                for ex in x0..=x1 {
                    let diff = (f_odd.get(ex as usize, ey as usize) as i64 - target).abs();
                    let dx = ex - x as i64;
                    let dy = ey - y as i64;
                    let key = (diff, dx.abs().max(dy.abs()), dx, dy);
                    if key < best {
                        best = key;
                        best_index = (ey as usize * w + ex as usize) as u32;
                    }
                }
            }
            end.push(best_index);
        }
    }
    Ok(ReducedAdjacency {
        width: w,
        height: h,
        end,
    })
}

/// Number of (start, end) candidate edges for a fully connected neighborhood
/// of radius `r`, with search boxes clipped at the frame borders.
pub fn count_candidates(width: usize, height: usize, r: u32) -> u64 {
    let (w, h, r) = (width as i64, height as i64, r as i64);
    let mut total = 0u64;
    for y in 0..h {
        for x in 0..w {
            let bw = (x + r).min(w - 1) - (x - r).max(0) + 1;
            let bh = (y + r).min(h - 1) - (y - r).max(0) + 1;
            total += (bw * bh) as u64;
        }
    }
    total
}

/// Pulls each start pixel's value from its end node: `out(i) = frame(j(i))`.
pub fn warp<T: Copy>(frame: &Plane<T>, adjacency: &ReducedAdjacency) -> Result<Plane<T>> {
    if frame.dims() != adjacency.dims() {
        return Err(CodecError::DimensionMismatch {
            expected: adjacency.dims(),
            got: frame.dims(),
        });
    }
    let samples = frame.samples();
    let data = (0..frame.len())
        .map(|i| samples[adjacency.end_index(i)])
        .collect();
    Plane::from_vec(frame.width(), frame.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_adjacency, random_frame, uniform_radius};
    use crate::util::SplitMix64;
    use crate::volume::{generate_phantom, PhantomMotion};

    #[test]
    fn identical_frames_give_identity() {
        let mut rng = SplitMix64::new(11);
        let f = random_frame(9, 6, 12, &mut rng);
        let adj = estimate_motion(&f, &f, &uniform_radius(9, 6, 3)).unwrap();
        assert_eq!(adj, ReducedAdjacency::identity(9, 6));
    }

    #[test]
    fn translated_structure_recovered() {
        let motion = PhantomMotion {
            velocity: (1, 0),
            noise_amplitude: 0,
        };
        let seq = generate_phantom(24, 24, 2, 12, &motion, 0).unwrap();
        let (f_odd, f_even) = (&seq[0], &seq[1]);
        let adj = estimate_motion(f_odd, f_even, &uniform_radius(24, 24, 1)).unwrap();
        // inside the moving structures, the end node is the source pixel one
        // step to the left
        let structure_floor = 4095 / 2;
        let mut checked = 0;
        for y in 1..23 {
            for x in 1..23 {
                let moving = f_even.get(x, y) > structure_floor;
                let interior = f_even.get(x, y) == f_odd.get(x - 1, y)
                    && f_even.get(x, y) != f_odd.get(x, y);
                if moving && interior {
                    assert_eq!(adj.offset_of(x, y), (-1, 0), "at ({x},{y})");
                    checked += 1;
                }
            }
        }
        assert!(checked > 20, "phantom produced too few moving pixels");
    }

    #[test]
    fn tie_breaking_is_pinned() {
        // even pixel differs from all odd candidates by the same amount;
        // zero offset must win
        let f_odd = Plane::filled(5, 5, 100u16);
        let f_even = Plane::filled(5, 5, 103u16);
        let adj = estimate_motion(&f_odd, &f_even, &uniform_radius(5, 5, 2)).unwrap();
        assert_eq!(adj, ReducedAdjacency::identity(5, 5));

        // two equally good candidates at Chebyshev distance 1: (dx,dy)=(-1,0)
        // precedes (0,-1) lexicographically
        let mut f_odd = Plane::filled(3, 3, 50u16);
        f_odd.set(0, 1, 77);
        f_odd.set(1, 0, 77);
        let f_even = Plane::filled(3, 3, 77u16);
        let adj = estimate_motion(&f_odd, &f_even, &uniform_radius(3, 3, 1)).unwrap();
        assert_eq!(adj.offset_of(1, 1), (-1, 0));
    }

    #[test]
    fn determinism() {
        let mut rng = SplitMix64::new(3);
        let a = random_frame(12, 10, 12, &mut rng);
        let b = random_frame(12, 10, 12, &mut rng);
        let r = uniform_radius(12, 10, 3);
        assert_eq!(
            estimate_motion(&a, &b, &r).unwrap(),
            estimate_motion(&a, &b, &r).unwrap()
        );
    }

    #[test]
    fn larger_radius_never_worse() {
        let mut rng = SplitMix64::new(8);
        let a = random_frame(10, 8, 12, &mut rng);
        let b = random_frame(10, 8, 12, &mut rng);
        for r in 1u8..3 {
            let small = estimate_motion(&a, &b, &uniform_radius(10, 8, r)).unwrap();
            let large = estimate_motion(&a, &b, &uniform_radius(10, 8, r + 1)).unwrap();
            for y in 0..8 {
                for x in 0..10 {
                    let (sx, sy) = small.end_of(x, y);
                    let (lx, ly) = large.end_of(x, y);
                    let ds = (a.get(sx, sy) as i32 - b.get(x, y) as i32).abs();
                    let dl = (a.get(lx, ly) as i32 - b.get(x, y) as i32).abs();
                    assert!(dl <= ds);
                }
            }
        }
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(count_candidates(5, 5, 1), 169);
        assert_eq!(count_candidates(1, 1, 1), 1);
        // frozen from the same clipped-window summation evaluated by hand:
        // row sums 3+4+5+4+3 = 19 per axis, 19 * 19 = 361
        assert_eq!(count_candidates(5, 5, 2), 361);
        // separable cross-check
        let row: i64 = (0..7)
            .map(|x: i64| (x + 3).min(6) - (x - 3).max(0) + 1)
            .sum();
        assert_eq!(count_candidates(7, 7, 3), (row * row) as u64);
    }

    #[test]
    fn reduction_keeps_one_edge_per_start_node() {
        let mut rng = SplitMix64::new(21);
        let a = random_frame(5, 5, 12, &mut rng);
        let b = random_frame(5, 5, 12, &mut rng);
        let adj = estimate_motion(&a, &b, &uniform_radius(5, 5, 1)).unwrap();
        assert_eq!(adj.len(), 25);
        assert!(adj.max_offset() <= 1);
    }

    #[test]
    fn warp_basics() {
        let id = ReducedAdjacency::identity(4, 3);
        let mut rng = SplitMix64::new(2);
        let f = random_frame(4, 3, 12, &mut rng);
        assert_eq!(warp(&f, &id).unwrap(), f);

        let c = Plane::filled(4, 3, 7u16);
        let adj = random_adjacency(4, 3, 2, &mut rng);
        assert_eq!(warp(&c, &adj).unwrap(), c);

        let motion = PhantomMotion {
            velocity: (1, 0),
            noise_amplitude: 0,
        };
        let seq = generate_phantom(24, 24, 2, 12, &motion, 0).unwrap();
        let adj = estimate_motion(&seq[0], &seq[1], &uniform_radius(24, 24, 1)).unwrap();
        let warped = warp(&seq[0], &adj).unwrap();
        for y in 0..24 {
            for x in 1..24 {
                // wherever a perfect match is reachable, the warp hits the
                // even frame exactly
                if seq[0].get(x - 1, y) == seq[1].get(x, y) {
                    assert_eq!(warped.get(x, y), seq[1].get(x, y));
                }
            }
        }
    }

    #[test]
    fn column_count_properties() {
        let id = ReducedAdjacency::identity(6, 4);
        assert!(id.column_counts().samples().iter().all(|&d| d == 1));

        let all_corner = ReducedAdjacency::from_end_indices(3, 3, vec![0; 9]).unwrap();
        let counts = all_corner.column_counts();
        assert_eq!(counts.get(0, 0), 9);
        assert_eq!(counts.samples().iter().sum::<u32>(), 9);

        let mut rng = SplitMix64::new(77);
        let adj = random_adjacency(8, 5, 3, &mut rng);
        assert_eq!(adj.column_counts().samples().iter().sum::<u32>(), 40);
    }
}
