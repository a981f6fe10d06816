//! Sparse sampling of masked motion maps and decoder-side reconstruction.
//!
//! Sampling masks are 4x4 binary patches tiled over the frame. Patch `k`
//! carries exactly `k` of 16 ones and the patches are nested, so the
//! density grows in 6.25% steps. Untransmitted motion symbols are
//! reconstructed by interpolating the offset planes from the transmitted
//! ones; the encoder runs the same reconstruction so both sides transform
//! with identical graphs.

use std::fmt;
use std::str::FromStr;

use crate::error::{CodecError, Result};
use crate::motion_map::{decode_index, embed_index, identity_symbol};
use crate::plane::Plane;
use crate::{BinaryMask, MotionMap};

/// Order in which patch positions are switched on: one position of the
/// inner 2x2 block at a time, replicated quadrant by quadrant.
const PATCH_OFFSETS: [(usize, usize); 4] = [(0, 0), (1, 1), (1, 0), (0, 1)];
const QUADRANT_ORIGINS: [(usize, usize); 4] = [(0, 0), (0, 2), (2, 0), (2, 2)];

/// Periodic density pattern: density index `k` in `1..=16` keeps `k` of
/// every 16 pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    k: u8,
    width: usize,
    height: usize,
    patch: [bool; 16],
}

/// Builds the canonical density-`k` mask for a `width x height` frame.
pub fn build_sampling_mask(k: u8, width: usize, height: usize) -> Result<SamplingMask> {
    if !(1..=16).contains(&k) {
        return Err(CodecError::Config(format!(
            "density index {k} outside 1..=16"
        )));
    }
    let mut patch = [false; 16];
    for step in 0..k as usize {
        let (oy, ox) = PATCH_OFFSETS[step / 4];
        let (qy, qx) = QUADRANT_ORIGINS[step % 4];
        patch[(qy + oy) * 4 + (qx + ox)] = true;
    }
    Ok(SamplingMask {
        k,
        width,
        height,
        patch,
    })
}

impl SamplingMask {
    pub fn density_index(&self) -> u8 {
        self.k
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Density as a fraction of pixels kept.
    pub fn density(&self) -> f64 {
        self.k as f64 / 16.0
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.patch[(y % 4) * 4 + (x % 4)]
    }

    pub fn ones_in_patch(&self) -> usize {
        self.patch.iter().filter(|&&b| b).count()
    }
}

/// Zeroes map symbols at skipped positions.
pub fn subsample(map: &MotionMap, sampling: &SamplingMask) -> Result<MotionMap> {
    if map.dims() != (sampling.width, sampling.height) {
        return Err(CodecError::DimensionMismatch {
            expected: (sampling.width, sampling.height),
            got: map.dims(),
        });
    }
    Ok(Plane::from_fn(map.width(), map.height(), |x, y| {
        if sampling.get(x, y) {
            map.get(x, y)
        } else {
            0
        }
    }))
}

/// Reconstruction method for subsampled motion maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpMethod {
    Nearest,
    Linear,
    Natural,
}

impl fmt::Display for InterpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            InterpMethod::Nearest => "nearest",
            InterpMethod::Linear => "linear",
            InterpMethod::Natural => "natural",
        };
        f.write_str(name)
    }
}

impl FromStr for InterpMethod {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(InterpMethod::Nearest),
            "linear" => Ok(InterpMethod::Linear),
            "natural" => Ok(InterpMethod::Natural),
            other => Err(CodecError::Config(format!(
                "unknown interpolation method {other}"
            ))),
        }
    }
}

impl InterpMethod {
    pub const ALL: [InterpMethod; 3] = [
        InterpMethod::Nearest,
        InterpMethod::Linear,
        InterpMethod::Natural,
    ];

    pub fn tag(self) -> u8 {
        match self {
            InterpMethod::Nearest => 0,
            InterpMethod::Linear => 1,
            InterpMethod::Natural => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(InterpMethod::Nearest),
            1 => Ok(InterpMethod::Linear),
            2 => Ok(InterpMethod::Natural),
            other => Err(CodecError::Corrupt(format!(
                "unknown interpolation tag {other}"
            ))),
        }
    }
}

/// Nearest integer with ties toward zero.
fn round_toward_zero(v: f64) -> i32 {
    let a = v.abs();
    let f = a.floor();
    let r = if a - f > 0.5 { f + 1.0 } else { f };
    (r as i32) * if v < 0.0 { -1 } else { 1 }
}

/// Rebuilds a complete motion map from the transmitted samples.
///
/// Known samples sit where the binary mask and the sampling mask are both
/// set. Their offsets are interpolated onto the remaining motion positions
/// (mask set, sampling skipped), rounded toward zero and clamped into the
/// radius box and the frame. Positions outside the mask take the identity
/// symbol; so does everything if no sample was transmitted.
pub fn interpolate(
    map: &MotionMap,
    mask: &BinaryMask,
    sampling: &SamplingMask,
    r_max: u8,
    method: InterpMethod,
) -> Result<MotionMap> {
    map.check_dims(mask)?;
    if map.dims() != (sampling.width, sampling.height) {
        return Err(CodecError::DimensionMismatch {
            expected: (sampling.width, sampling.height),
            got: map.dims(),
        });
    }
    let (w, h) = map.dims();
    let id = identity_symbol(r_max);

    let mut sites = Vec::new();
    let mut queries = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) == 0 {
                continue;
            }
            if sampling.get(x, y) {
                let (dx, dy) = decode_index(map.get(x, y), r_max)?;
                sites.push(Site {
                    x: x as i64,
                    y: y as i64,
                    dx: dx as f64,
                    dy: dy as f64,
                });
            } else {
                queries.push((x, y));
            }
        }
    }

    let mut out = Plane::filled(w, h, id);
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) != 0 && sampling.get(x, y) {
                out.set(x, y, map.get(x, y));
            }
        }
    }
    if sites.is_empty() || queries.is_empty() {
        return Ok(out);
    }

    let estimates: Vec<(f64, f64)> = match method {
        InterpMethod::Nearest => nearest_estimates(&sites, &queries),
        InterpMethod::Linear => linear_estimates(&sites, &queries),
        InterpMethod::Natural => natural_estimates(&sites, &queries, w, h),
    };

    let r = r_max as i64;
    for (&(x, y), &(ex, ey)) in queries.iter().zip(&estimates) {
        let dx = (round_toward_zero(ex) as i64)
            .clamp(-r, r)
            .clamp(-(x as i64), (w - 1 - x) as i64);
        let dy = (round_toward_zero(ey) as i64)
            .clamp(-r, r)
            .clamp(-(y as i64), (h - 1 - y) as i64);
        out.set(x, y, embed_index(dx as i32, dy as i32, r_max)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Site {
    x: i64,
    y: i64,
    dx: f64,
    dy: f64,
}

// ---------------------------------------------------------------------------
// nearest-site queries

/// Uniform bucket grid over the sites for exact nearest-site queries with a
/// pinned tie rule: smallest squared distance, then smallest (y, x).
struct SiteIndex<'a> {
    sites: &'a [Site],
    cell: i64,
    cols: i64,
    rows: i64,
    min_x: i64,
    min_y: i64,
    buckets: Vec<Vec<u32>>,
}

impl<'a> SiteIndex<'a> {
    fn new(sites: &'a [Site]) -> Self {
        let min_x = sites.iter().map(|s| s.x).min().unwrap();
        let max_x = sites.iter().map(|s| s.x).max().unwrap();
        let min_y = sites.iter().map(|s| s.y).min().unwrap();
        let max_y = sites.iter().map(|s| s.y).max().unwrap();
        let cell = 4;
        let cols = (max_x - min_x) / cell + 1;
        let rows = (max_y - min_y) / cell + 1;
        let mut buckets = vec![Vec::new(); (cols * rows) as usize];
        for (i, s) in sites.iter().enumerate() {
            let bx = (s.x - min_x) / cell;
            let by = (s.y - min_y) / cell;
            buckets[(by * cols + bx) as usize].push(i as u32);
        }
        Self {
            sites,
            cell,
            cols,
            rows,
            min_x,
            min_y,
            buckets,
        }
    }

    /// Index of the nearest site and its squared distance.
    fn nearest(&self, qx: i64, qy: i64) -> (usize, i64) {
        let bx = ((qx - self.min_x) / self.cell).clamp(0, self.cols - 1);
        let by = ((qy - self.min_y) / self.cell).clamp(0, self.rows - 1);
        let max_ring = self.cols.max(self.rows);
        let mut best: Option<(i64, i64, i64, usize)> = None;
        for ring in 0..=max_ring {
            if let Some((d2, _, _, _)) = best {
                // any site in a farther ring is at least this far away
                let bound = (ring - 1).max(0) * self.cell + 1;
                if bound * bound > d2 {
                    break;
                }
            }
            let mut visit = |cx: i64, cy: i64| {
                if cx < 0 || cy < 0 || cx >= self.cols || cy >= self.rows {
                    return;
                }
                for &i in &self.buckets[(cy * self.cols + cx) as usize] {
                    let s = &self.sites[i as usize];
                    let ddx = s.x - qx;
                    let ddy = s.y - qy;
                    let key = (ddx * ddx + ddy * ddy, s.y, s.x, i as usize);
                    if best.is_none() || key < best.unwrap() {
                        best = Some(key);
                    }
                }
            };
            if ring == 0 {
                visit(bx, by);
            } else {
                for cx in bx - ring..=bx + ring {
                    visit(cx, by - ring);
                    visit(cx, by + ring);
                }
                for cy in by - ring + 1..by + ring {
                    visit(bx - ring, cy);
                    visit(bx + ring, cy);
                }
            }
        }
        let (d2, _, _, i) = best.expect("at least one site");
        (i, d2)
    }
}

fn nearest_estimates(sites: &[Site], queries: &[(usize, usize)]) -> Vec<(f64, f64)> {
    let index = SiteIndex::new(sites);
    queries
        .iter()
        .map(|&(x, y)| {
            let (i, _) = index.nearest(x as i64, y as i64);
            (sites[i].dx, sites[i].dy)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// linear interpolation on a Delaunay triangulation

fn orient2d(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i128 {
    let acx = (a.0 - c.0) as i128;
    let acy = (a.1 - c.1) as i128;
    let bcx = (b.0 - c.0) as i128;
    let bcy = (b.1 - c.1) as i128;
    acx * bcy - acy * bcx
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counter-clockwise triangle `(a, b, c)`.
fn incircle(a: (i64, i64), b: (i64, i64), c: (i64, i64), d: (i64, i64)) -> i128 {
    let adx = (a.0 - d.0) as i128;
    let ady = (a.1 - d.1) as i128;
    let bdx = (b.0 - d.0) as i128;
    let bdy = (b.1 - d.1) as i128;
    let cdx = (c.0 - d.0) as i128;
    let cdy = (c.1 - d.1) as i128;
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - cdy * bd) - ady * (bdx * cd - cdx * bd) + ad * (bdx * cdy - cdx * bdy)
}

/// Incremental Bowyer-Watson triangulation over integer points.
struct Delaunay {
    points: Vec<(i64, i64)>,
    triangles: Vec<[usize; 3]>,
}

impl Delaunay {
    fn build(sites: &[Site]) -> Self {
        // the far triangle encloses every pixel coordinate we ever see
        let m: i64 = 1 << 21;
        let mut points: Vec<(i64, i64)> = vec![(-m, -m), (4 * m, -m), (-m, 4 * m)];
        let super_count = points.len();
        points.extend(sites.iter().map(|s| (s.x, s.y)));
        let mut triangles = vec![[0usize, 1, 2]];

        for p in super_count..points.len() {
            let pt = points[p];
            let mut bad = Vec::new();
            for (ti, tri) in triangles.iter().enumerate() {
                if incircle(points[tri[0]], points[tri[1]], points[tri[2]], pt) > 0 {
                    bad.push(ti);
                }
            }
            let mut boundary: Vec<(usize, usize)> = Vec::new();
            for &ti in &bad {
                let t = triangles[ti];
                for k in 0..3 {
                    let edge = (t[k], t[(k + 1) % 3]);
                    // an edge is on the cavity boundary when its twin is not
                    // in another bad triangle
                    let shared = bad.iter().any(|&tj| {
                        if tj == ti {
                            return false;
                        }
                        let u = triangles[tj];
                        u.contains(&edge.0) && u.contains(&edge.1)
                    });
                    if !shared {
                        boundary.push(edge);
                    }
                }
            }
            let mut keep = Vec::with_capacity(triangles.len());
            for (ti, tri) in triangles.iter().enumerate() {
                if !bad.contains(&ti) {
                    keep.push(*tri);
                }
            }
            triangles = keep;
            for (a, b) in boundary {
                if orient2d(points[a], points[b], pt) != 0 {
                    // store counter-clockwise
                    if orient2d(points[a], points[b], pt) > 0 {
                        triangles.push([a, b, p]);
                    } else {
                        triangles.push([b, a, p]);
                    }
                }
            }
        }

        // drop triangles touching the far corners
        triangles.retain(|t| t.iter().all(|&v| v >= super_count));
        Self { points, triangles }
    }

    /// Triangle containing `(x, y)` plus its normalized barycentric weights.
    fn locate(&self, x: i64, y: i64) -> Option<([usize; 3], [f64; 3])> {
        let q = (x, y);
        for tri in &self.triangles {
            let a = self.points[tri[0]];
            let b = self.points[tri[1]];
            let c = self.points[tri[2]];
            let wa = orient2d(b, c, q);
            let wb = orient2d(c, a, q);
            let wc = orient2d(a, b, q);
            if wa >= 0 && wb >= 0 && wc >= 0 {
                let area = (wa + wb + wc) as f64;
                if area == 0.0 {
                    continue;
                }
                return Some((*tri, [wa as f64 / area, wb as f64 / area, wc as f64 / area]));
            }
        }
        None
    }
}

fn linear_estimates(sites: &[Site], queries: &[(usize, usize)]) -> Vec<(f64, f64)> {
    let tri = Delaunay::build(sites);
    let index = SiteIndex::new(sites);
    // site i is triangulation point i + 3 (after the far corners)
    queries
        .iter()
        .map(|&(x, y)| {
            if let Some((verts, w)) = tri.locate(x as i64, y as i64) {
                let mut dx = 0.0;
                let mut dy = 0.0;
                for (v, wv) in verts.iter().zip(w) {
                    let s = &sites[v - 3];
                    dx += wv * s.dx;
                    dy += wv * s.dy;
                }
                (dx, dy)
            } else {
                // outside the convex hull (or no triangle at all)
                let (i, _) = index.nearest(x as i64, y as i64);
                (sites[i].dx, sites[i].dy)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// natural neighbor (discrete Sibson weights)

/// Sibson weights on the pixel lattice: inserting the query into the
/// nearest-site partition steals pixels from existing cells; each donor
/// site is weighted by its stolen pixel count.
fn natural_estimates(
    sites: &[Site],
    queries: &[(usize, usize)],
    width: usize,
    height: usize,
) -> Vec<(f64, f64)> {
    let index = SiteIndex::new(sites);
    let mut owner = vec![0u32; width * height];
    let mut dist2 = vec![0i64; width * height];
    let mut max_d2 = 0i64;
    for y in 0..height {
        for x in 0..width {
            let (i, d2) = index.nearest(x as i64, y as i64);
            owner[y * width + x] = i as u32;
            dist2[y * width + x] = d2;
            max_d2 = max_d2.max(d2);
        }
    }
    // every stolen pixel is closer to the query than to its site, so it
    // lies within this radius of the query
    let reach = (max_d2 as f64).sqrt().ceil() as i64;

    let mut weights: Vec<(u32, i64)> = Vec::new();
    queries
        .iter()
        .map(|&(qx, qy)| {
            weights.clear();
            let (qx, qy) = (qx as i64, qy as i64);
            let x0 = (qx - reach).max(0);
            let x1 = (qx + reach).min(width as i64 - 1);
            let y0 = (qy - reach).max(0);
            let y1 = (qy + reach).min(height as i64 - 1);
            for py in y0..=y1 {
                for px in x0..=x1 {
                    let ddx = px - qx;
                    let ddy = py - qy;
                    let idx = (py as usize) * width + px as usize;
                    if ddx * ddx + ddy * ddy < dist2[idx] {
                        let site = owner[idx];
                        match weights.iter_mut().find(|(s, _)| *s == site) {
                            Some((_, w)) => *w += 1,
                            None => weights.push((site, 1)),
                        }
                    }
                }
            }
            let total: i64 = weights.iter().map(|(_, w)| w).sum();
            debug_assert!(total > 0, "query pixel always steals itself");
            let mut dx = 0.0;
            let mut dy = 0.0;
            for &(site, w) in &weights {
                let s = &sites[site as usize];
                dx += w as f64 * s.dx;
                dy += w as f64 * s.dy;
            }
            (dx / total as f64, dy / total as f64)
        })
        .collect()
}
