//! Raw volume storage and synthetic test sequences.
//!
//! A volume is stored as two files: `<name>` holds the samples as
//! little-endian unsigned 16-bit words (x fastest, then y, z, t) and
//! `<name>.hdr` is a plain-text `key = value` sidecar describing the
//! dimensions and bit depth. See the README for the exact layout.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CodecError, Result};
use crate::plane::Plane;
use crate::util::SplitMix64;
use crate::Frame;

/// Dimensions and sample precision of a stored volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VolumeHeader {
    pub width: usize,
    pub height: usize,
    pub slices: usize,
    pub frames: usize,
    pub bit_depth: u8,
}

impl VolumeHeader {
    pub fn sample_count(&self) -> usize {
        self.width * self.height * self.slices * self.frames
    }

    pub fn max_amplitude(&self) -> u16 {
        ((1u32 << self.bit_depth) - 1) as u16
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.slices == 0 || self.frames == 0 {
            return Err(CodecError::Header("all dimensions must be >= 1".into()));
        }
        if self.bit_depth == 0 || self.bit_depth > 16 {
            return Err(CodecError::BitDepth(self.bit_depth));
        }
        Ok(())
    }
}

/// A dynamic volume: `frames x slices` grids of unsigned samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Volume {
    header: VolumeHeader,
    // indexed z + slices * t
    planes: Vec<Frame>,
}

impl Volume {
    pub fn new(header: VolumeHeader, planes: Vec<Frame>) -> Result<Self> {
        header.validate()?;
        if planes.len() != header.slices * header.frames {
            return Err(CodecError::SizeMismatch {
                expected: header.slices * header.frames,
                got: planes.len(),
            });
        }
        let amax = header.max_amplitude();
        for p in &planes {
            if p.dims() != (header.width, header.height) {
                return Err(CodecError::DimensionMismatch {
                    expected: (header.width, header.height),
                    got: p.dims(),
                });
            }
            if p.samples().iter().any(|&s| s > amax) {
                return Err(CodecError::Header(format!(
                    "sample exceeds {}-bit range",
                    header.bit_depth
                )));
            }
        }
        Ok(Self { header, planes })
    }

    /// Builds a single-slice volume from a temporal sequence.
    pub fn from_sequence(frames: Vec<Frame>, bit_depth: u8) -> Result<Self> {
        let (width, height) = frames
            .first()
            .map(|f| f.dims())
            .ok_or_else(|| CodecError::Header("empty sequence".into()))?;
        let header = VolumeHeader {
            width,
            height,
            slices: 1,
            frames: frames.len(),
            bit_depth,
        };
        Volume::new(header, frames)
    }

    pub fn header(&self) -> &VolumeHeader {
        &self.header
    }

    pub fn frame(&self, z: usize, t: usize) -> &Frame {
        &self.planes[z + self.header.slices * t]
    }

    /// All frames at slice `z`, in acquisition order.
    pub fn temporal_sequence(&self, z: usize) -> Result<Vec<&Frame>> {
        if z >= self.header.slices {
            return Err(CodecError::SliceOutOfRange {
                z,
                slices: self.header.slices,
            });
        }
        Ok((0..self.header.frames).map(|t| self.frame(z, t)).collect())
    }

    pub fn planes(&self) -> &[Frame] {
        &self.planes
    }
}

fn header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

fn parse_header(text: &str, path: &Path) -> Result<(VolumeHeader, String)> {
    let mut width = None;
    let mut height = None;
    let mut slices = None;
    let mut frames = None;
    let mut bit_depth = None;
    let mut sample_format = String::from("u16");
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CodecError::Header(format!("{}: line {}: expected key = value", path.display(), lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let parse = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| CodecError::Header(format!("bad value for {key}: {v}")))
        };
        match key {
            "width" => width = Some(parse(value)?),
            "height" => height = Some(parse(value)?),
            "slices" => slices = Some(parse(value)?),
            "frames" => frames = Some(parse(value)?),
            "bit_depth" => bit_depth = Some(parse(value)?),
            "sample_format" => sample_format = value.to_string(),
            // unknown keys are ignored for forward compatibility
            _ => {}
        }
    }
    let missing = |name: &str| CodecError::Header(format!("{}: missing key {name}", path.display()));
    let header = VolumeHeader {
        width: width.ok_or_else(|| missing("width"))?,
        height: height.ok_or_else(|| missing("height"))?,
        slices: slices.ok_or_else(|| missing("slices"))?,
        frames: frames.ok_or_else(|| missing("frames"))?,
        bit_depth: bit_depth.ok_or_else(|| missing("bit_depth"))? as u8,
    };
    header.validate()?;
    Ok((header, sample_format))
}

fn render_header(header: &VolumeHeader, sample_format: &str) -> String {
    format!(
        "width = {}\nheight = {}\nslices = {}\nframes = {}\nbit_depth = {}\nsample_format = {}\n",
        header.width, header.height, header.slices, header.frames, header.bit_depth, sample_format
    )
}

/// Loads a raw volume plus its `.hdr` sidecar.
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let hdr_text = fs::read_to_string(header_path(path))?;
    let (header, sample_format) = parse_header(&hdr_text, path)?;
    if sample_format != "u16" {
        return Err(CodecError::Header(format!(
            "sample_format {sample_format} is not a u16 volume"
        )));
    }
    let payload = fs::read(path)?;
    if payload.len() != header.sample_count() * 2 {
        return Err(CodecError::SizeMismatch {
            expected: header.sample_count(),
            got: payload.len() / 2,
        });
    }
    let amax = header.max_amplitude();
    let plane_len = header.width * header.height;
    let mut planes = Vec::with_capacity(header.slices * header.frames);
    for chunk in 0..header.slices * header.frames {
        let base = chunk * plane_len * 2;
        let mut data = Vec::with_capacity(plane_len);
        for i in 0..plane_len {
            let off = base + 2 * i;
            let v = u16::from_le_bytes([payload[off], payload[off + 1]]);
            if v > amax {
                return Err(CodecError::Header(format!(
                    "sample {v} exceeds {}-bit range",
                    header.bit_depth
                )));
            }
            data.push(v);
        }
        planes.push(Plane::from_vec(header.width, header.height, data)?);
    }
    Volume::new(header, planes)
}

/// Stores a volume as raw samples plus sidecar. Inverse of [`load_volume`].
pub fn save_volume(path: impl AsRef<Path>, volume: &Volume) -> Result<()> {
    let path = path.as_ref();
    let mut payload = Vec::with_capacity(volume.header.sample_count() * 2);
    for plane in &volume.planes {
        for &s in plane.samples() {
            payload.extend_from_slice(&s.to_le_bytes());
        }
    }
    fs::write(path, payload)?;
    fs::write(header_path(path), render_header(&volume.header, "u16"))?;
    Ok(())
}

/// Stores a signed lowpass-only volume (`sample_format = i32`).
///
/// Used for base-layer dumps, whose samples can leave the unsigned range of
/// the source bit depth.
pub fn save_lowpass_volume(
    path: impl AsRef<Path>,
    header: &VolumeHeader,
    planes: &[Plane<i32>],
) -> Result<()> {
    let path = path.as_ref();
    if planes.len() != header.slices * header.frames {
        return Err(CodecError::SizeMismatch {
            expected: header.slices * header.frames,
            got: planes.len(),
        });
    }
    let mut payload = Vec::with_capacity(header.sample_count() * 4);
    for plane in planes {
        for &s in plane.samples() {
            payload.extend_from_slice(&s.to_le_bytes());
        }
    }
    fs::write(path, payload)?;
    fs::write(header_path(path), render_header(header, "i32"))?;
    Ok(())
}

/// Loads a signed lowpass-only volume written by [`save_lowpass_volume`].
pub fn load_lowpass_volume(path: impl AsRef<Path>) -> Result<(VolumeHeader, Vec<Plane<i32>>)> {
    let path = path.as_ref();
    let hdr_text = fs::read_to_string(header_path(path))?;
    let (header, sample_format) = parse_header(&hdr_text, path)?;
    if sample_format != "i32" {
        return Err(CodecError::Header(format!(
            "sample_format {sample_format} is not an i32 volume"
        )));
    }
    let payload = fs::read(path)?;
    if payload.len() != header.sample_count() * 4 {
        return Err(CodecError::SizeMismatch {
            expected: header.sample_count(),
            got: payload.len() / 4,
        });
    }
    let plane_len = header.width * header.height;
    let mut planes = Vec::with_capacity(header.slices * header.frames);
    for chunk in 0..header.slices * header.frames {
        let base = chunk * plane_len * 4;
        let data = (0..plane_len)
            .map(|i| {
                let off = base + 4 * i;
                i32::from_le_bytes([
                    payload[off],
                    payload[off + 1],
                    payload[off + 2],
                    payload[off + 3],
                ])
            })
            .collect();
        planes.push(Plane::from_vec(header.width, header.height, data)?);
    }
    Ok((header, planes))
}

/// Motion description for synthetic phantoms: bright textured structures
/// translating over a static textured background, with optional additive
/// pseudo-noise.
#[derive(Debug, Clone, Copy)]
pub struct PhantomMotion {
    /// Translation per frame, in pixels.
    pub velocity: (i32, i32),
    /// Uniform noise in `[-amplitude, amplitude]`, clamped to the bit depth.
    pub noise_amplitude: u16,
}

impl PhantomMotion {
    pub fn still() -> Self {
        Self {
            velocity: (0, 0),
            noise_amplitude: 0,
        }
    }
}

struct PhantomRect {
    x0: i64,
    y0: i64,
    w: i64,
    h: i64,
    level: u32,
    stripe: u32,
}

/// Deterministic synthetic temporal sequence.
///
/// The background is a static integer texture; each structure carries its
/// own texture that translates with it, so consecutive frames are exact
/// shifted copies inside the moving support (before noise).
pub fn generate_phantom(
    width: usize,
    height: usize,
    frames: usize,
    bit_depth: u8,
    motion: &PhantomMotion,
    noise_seed: u64,
) -> Result<Vec<Frame>> {
    if width < 8 || height < 8 {
        return Err(CodecError::Config(format!(
            "phantom dimensions {width}x{height} below minimum 8x8"
        )));
    }
    if frames == 0 {
        return Err(CodecError::Config("phantom needs at least one frame".into()));
    }
    if bit_depth == 0 || bit_depth > 16 {
        return Err(CodecError::BitDepth(bit_depth));
    }
    let amax = (1u32 << bit_depth) - 1;
    let w = width as i64;
    let h = height as i64;
    let rects = [
        PhantomRect {
            x0: w / 8,
            y0: h / 8,
            w: (w / 3).max(2),
            h: (h / 3).max(2),
            level: amax * 3 / 4,
            stripe: (amax / 8).max(1),
        },
        PhantomRect {
            x0: w / 2,
            y0: h / 2,
            w: (w / 4).max(2),
            h: (h / 5).max(2),
            level: amax * 5 / 8,
            stripe: (amax / 10).max(1),
        },
    ];
    let background = |x: i64, y: i64| -> u32 {
        let base = amax / 6;
        let diag = ((x * 13 + y * 7) % 29) as u32 * (amax / 10).max(1) / 29;
        let block = (((x / 8) + (y / 8)) % 2) as u32 * (amax / 24).max(1);
        base + diag + block
    };
    let mut rng = SplitMix64::new(noise_seed);
    let mut out = Vec::with_capacity(frames);
    for t in 0..frames {
        let dx = motion.velocity.0 as i64 * t as i64;
        let dy = motion.velocity.1 as i64 * t as i64;
        let mut frame = Plane::from_fn(width, height, |x, y| {
            let (x, y) = (x as i64, y as i64);
            let mut v = background(x, y);
            for r in &rects {
                // local coordinates of the structure's own texture
                let lx = x - (r.x0 + dx);
                let ly = y - (r.y0 + dy);
                if lx >= 0 && lx < r.w && ly >= 0 && ly < r.h {
                    v = r.level + ((lx * 5 + ly * 3) % 11) as u32 * r.stripe / 11;
                }
            }
            v.min(amax) as u16
        });
        if motion.noise_amplitude > 0 {
            for s in frame.samples_mut() {
                let n = *s as i64 + rng.next_signed(motion.noise_amplitude as u32);
                *s = n.clamp(0, amax as i64) as u16;
            }
        }
        out.push(frame);
    }
    Ok(out)
}

/// Random volume with full-range samples, for tests and benchmarks.
pub fn random_volume(
    width: usize,
    height: usize,
    slices: usize,
    frames: usize,
    bit_depth: u8,
    seed: u64,
) -> Volume {
    let mut rng = SplitMix64::new(seed);
    let amax = (1u64 << bit_depth) - 1;
    let planes = (0..slices * frames)
        .map(|_| Plane::from_fn(width, height, |_, _| rng.next_below(amax + 1) as u16))
        .collect();
    Volume::new(
        VolumeHeader {
            width,
            height,
            slices,
            frames,
            bit_depth,
        },
        planes,
    )
    .expect("random volume construction")
}
