//! Container format and encoder/decoder orchestration.
//!
//! A coded volume is a 32-byte global header followed by length-prefixed
//! records: for every slice and frame pair the coded binary mask, motion
//! symbol stream (or block vector field), lowpass and highpass payloads,
//! then one lowpass record per slice for the unpaired final frame of an
//! odd-length sequence. Records carry explicit lengths so a base-layer
//! decoder can skip everything but the lowpass payloads. The byte layout
//! is documented in the README and pinned by a golden-file test.
//!
//! Encoding is closed-loop: the motion map is masked, subsampled and then
//! reconstructed exactly as the decoder will see it, and the lifting runs
//! with that reconstructed graph. Lossless decoding therefore holds at
//! every sampling density.

use rayon::prelude::*;

use crate::entropy::{bilevel_decode, bilevel_encode, decode_motion_map, encode_motion_map, CodedBlob};
use crate::error::{CodecError, Result};
use crate::block_mc::{block_search, mv_decode, mv_encode};
use crate::graph::{estimate_motion, ReducedAdjacency};
use crate::lifting::{haar_forward, mctf_forward, mctf_inverse, SubbandPair};
use crate::motion_map::{
    adjacency_to_map, apply_mask, build_binary_mask, compute_threshold, map_to_adjacency,
    radius_assignment, symbol_count,
};
use crate::plane::Plane;
use crate::sampling::{build_sampling_mask, interpolate, subsample, InterpMethod, SamplingMask};
use crate::subband::{decode_subband_frame, encode_subband_frame, SPATIAL_LEVELS};
use crate::volume::{Volume, VolumeHeader};
use crate::{BinaryMask, Frame, RadiusMap, SubbandPlane};

pub const MAGIC: [u8; 4] = *b"GWLC";
pub const VERSION: u16 = 1;

/// How the per-pixel search radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusMode {
    /// Every pixel searches the full `r_max` box.
    Fixed,
    /// Radii follow the normalized inter-frame difference.
    Smooth,
}

impl RadiusMode {
    fn tag(self) -> u8 {
        match self {
            RadiusMode::Fixed => 0,
            RadiusMode::Smooth => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(RadiusMode::Fixed),
            1 => Ok(RadiusMode::Smooth),
            other => Err(CodecError::Corrupt(format!("unknown radius mode {other}"))),
        }
    }
}

/// Temporal compensation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McMode {
    /// Plain Haar lifting without compensation.
    None,
    /// Graph-based compensation with coded motion maps.
    Graph,
    /// Block-matching baseline with the given block size.
    Block { block_size: u8 },
}

impl McMode {
    fn tags(self) -> (u8, u8) {
        match self {
            McMode::None => (0, 0),
            McMode::Graph => (1, 0),
            McMode::Block { block_size } => (2, block_size),
        }
    }

    fn from_tags(mode: u8, block_size: u8) -> Result<Self> {
        match mode {
            0 => Ok(McMode::None),
            1 => Ok(McMode::Graph),
            2 => Ok(McMode::Block { block_size }),
            other => Err(CodecError::Corrupt(format!("unknown mc mode {other}"))),
        }
    }
}

/// Encoder settings.
#[derive(Debug, Clone, Copy)]
pub struct EncodeConfig {
    pub r_max: u8,
    pub radius_mode: RadiusMode,
    /// Lowpass quality target driving the binary mask; `None` transmits the
    /// full motion map (mask all ones).
    pub psnr_target: Option<f64>,
    pub density_index: u8,
    pub method: InterpMethod,
    pub mc: McMode,
    pub levels: u8,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        Self {
            r_max: 3,
            radius_mode: RadiusMode::Smooth,
            psnr_target: Some(50.0),
            density_index: 16,
            method: InterpMethod::Nearest,
            mc: McMode::Graph,
            levels: SPATIAL_LEVELS,
        }
    }
}

impl EncodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.r_max) {
            return Err(CodecError::Config(format!(
                "r_max {} outside 1..=3",
                self.r_max
            )));
        }
        if !(1..=16).contains(&self.density_index) {
            return Err(CodecError::Config(format!(
                "density index {} outside 1..=16",
                self.density_index
            )));
        }
        if let Some(p) = self.psnr_target {
            if !(p > 0.0) {
                return Err(CodecError::Config(format!("psnr target {p} must be > 0")));
            }
        }
        if let McMode::Block { block_size } = self.mc {
            if ![2, 4, 8].contains(&block_size) {
                return Err(CodecError::Config(format!(
                    "block size {block_size} not in {{2, 4, 8}}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Mask,
    MotionStream,
    MotionVectors,
    Lowpass,
    Highpass,
    LowpassTail,
}

impl RecordKind {
    fn tag(self) -> u8 {
        match self {
            RecordKind::Mask => 1,
            RecordKind::MotionStream => 2,
            RecordKind::MotionVectors => 3,
            RecordKind::Lowpass => 4,
            RecordKind::Highpass => 5,
            RecordKind::LowpassTail => 6,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(RecordKind::Mask),
            2 => Ok(RecordKind::MotionStream),
            3 => Ok(RecordKind::MotionVectors),
            4 => Ok(RecordKind::Lowpass),
            5 => Ok(RecordKind::Highpass),
            6 => Ok(RecordKind::LowpassTail),
            other => Err(CodecError::Corrupt(format!("unknown record kind {other}"))),
        }
    }

    fn is_subband(self) -> bool {
        matches!(
            self,
            RecordKind::Lowpass | RecordKind::Highpass | RecordKind::LowpassTail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub kind: RecordKind,
    pub blob: CodedBlob,
}

/// Global header fields of a coded volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub width: usize,
    pub height: usize,
    pub slices: usize,
    pub frames: usize,
    pub bit_depth: u8,
    pub r_max: u8,
    pub radius_mode: RadiusMode,
    pub masking: bool,
    pub density_index: u8,
    pub method: InterpMethod,
    pub mc: McMode,
    pub levels: u8,
}

impl ContainerHeader {
    pub fn pair_count(&self) -> usize {
        self.frames / 2
    }

    pub fn has_tail(&self) -> bool {
        self.frames % 2 == 1
    }

    /// Frames per slice of the base layer.
    pub fn base_layer_frames(&self) -> usize {
        self.frames.div_ceil(2)
    }

    fn kinds_per_pair(&self) -> &'static [RecordKind] {
        match self.mc {
            McMode::Graph => &[
                RecordKind::Mask,
                RecordKind::MotionStream,
                RecordKind::Lowpass,
                RecordKind::Highpass,
            ],
            McMode::Block { .. } => &[
                RecordKind::MotionVectors,
                RecordKind::Lowpass,
                RecordKind::Highpass,
            ],
            McMode::None => &[RecordKind::Lowpass, RecordKind::Highpass],
        }
    }

    fn volume_header(&self) -> VolumeHeader {
        VolumeHeader {
            width: self.width,
            height: self.height,
            slices: self.slices,
            frames: self.frames,
            bit_depth: self.bit_depth,
        }
    }
}

/// A coded volume: header plus records in stream order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub header: ContainerHeader,
    pub records: Vec<Record>,
}

/// Byte extent of one record in the serialized container.
#[derive(Debug, Clone, Copy)]
pub struct RecordSpan {
    pub kind: RecordKind,
    /// Offset of the record (kind byte) in the file.
    pub offset: usize,
    /// Record length including its kind/length framing.
    pub len: usize,
    /// Payload bytes only (blob plus subband prefix).
    pub payload_offset: usize,
    pub payload_len: usize,
}

impl Container {
    pub const HEADER_LEN: usize = 32;

    fn record_payload_len(&self, r: &Record) -> usize {
        r.blob.byte_len() + if r.kind.is_subband() { 9 } else { 0 }
    }

    /// Byte extents of every record under the canonical serialization.
    pub fn byte_map(&self) -> Vec<RecordSpan> {
        let mut offset = Self::HEADER_LEN;
        self.records
            .iter()
            .map(|r| {
                let payload_len = self.record_payload_len(r);
                let span = RecordSpan {
                    kind: r.kind,
                    offset,
                    len: 5 + payload_len,
                    payload_offset: offset + 5,
                    payload_len,
                };
                offset += span.len;
                span
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.header.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.header.height as u32).to_le_bytes());
        out.extend_from_slice(&(self.header.slices as u32).to_le_bytes());
        out.extend_from_slice(&(self.header.frames as u32).to_le_bytes());
        out.push(self.header.bit_depth);
        out.push(self.header.r_max);
        out.push(self.header.radius_mode.tag());
        out.push(u8::from(self.header.masking));
        out.push(self.header.density_index);
        out.push(self.header.method.tag());
        let (mc, bs) = self.header.mc.tags();
        out.push(mc);
        out.push(bs);
        out.push(self.header.levels);
        out.push(0);
        debug_assert_eq!(out.len(), Self::HEADER_LEN);
        for r in &self.records {
            out.push(r.kind.tag());
            out.extend_from_slice(&(self.record_payload_len(r) as u32).to_le_bytes());
            if r.kind.is_subband() {
                out.extend_from_slice(&(self.header.width as u32).to_le_bytes());
                out.extend_from_slice(&(self.header.height as u32).to_le_bytes());
                out.push(self.header.levels);
            }
            out.extend_from_slice(&r.blob.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < Self::HEADER_LEN {
            return Err(CodecError::Corrupt("container shorter than header".into()));
        }
        if bytes[0..4] != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(CodecError::Version {
                expected: VERSION,
                got: version,
            });
        }
        let read_u32 =
            |o: usize| u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]);
        let header = ContainerHeader {
            width: read_u32(6) as usize,
            height: read_u32(10) as usize,
            slices: read_u32(14) as usize,
            frames: read_u32(18) as usize,
            bit_depth: bytes[22],
            r_max: bytes[23],
            radius_mode: RadiusMode::from_tag(bytes[24])?,
            masking: bytes[25] != 0,
            density_index: bytes[26],
            method: InterpMethod::from_tag(bytes[27])?,
            mc: McMode::from_tags(bytes[28], bytes[29])?,
            levels: bytes[30],
        };
        header.volume_header().validate().map_err(|e| {
            CodecError::Corrupt(format!("container header invalid: {e}"))
        })?;
        let mut records = Vec::new();
        let mut offset = Self::HEADER_LEN;
        while offset < bytes.len() {
            if offset + 5 > bytes.len() {
                return Err(CodecError::Corrupt("truncated record framing".into()));
            }
            let kind = RecordKind::from_tag(bytes[offset])?;
            let payload_len = read_u32(offset + 1) as usize;
            let start = offset + 5;
            let end = start + payload_len;
            if end > bytes.len() {
                return Err(CodecError::Corrupt("record overruns container".into()));
            }
            let blob_start = if kind.is_subband() {
                if payload_len < 9 {
                    return Err(CodecError::Corrupt("subband record too short".into()));
                }
                let w = read_u32(start) as usize;
                let h = read_u32(start + 4) as usize;
                let levels = bytes[start + 8];
                if w != header.width || h != header.height || levels != header.levels {
                    return Err(CodecError::Corrupt(
                        "subband record disagrees with header".into(),
                    ));
                }
                start + 9
            } else {
                start
            };
            records.push(Record {
                kind,
                blob: CodedBlob::from_bytes(&bytes[blob_start..end])?,
            });
            offset = end;
        }
        let container = Self { header, records };
        container.check_record_sequence()?;
        Ok(container)
    }

    fn check_record_sequence(&self) -> Result<()> {
        let expected: Vec<RecordKind> = self.expected_kinds();
        if self.records.len() != expected.len() {
            return Err(CodecError::Corrupt(format!(
                "container holds {} records, layout requires {}",
                self.records.len(),
                expected.len()
            )));
        }
        for (r, want) in self.records.iter().zip(&expected) {
            if r.kind != *want {
                return Err(CodecError::Corrupt(format!(
                    "record kind {:?} where {want:?} expected",
                    r.kind
                )));
            }
        }
        Ok(())
    }

    fn expected_kinds(&self) -> Vec<RecordKind> {
        let h = &self.header;
        let mut kinds = Vec::new();
        for _ in 0..h.slices * h.pair_count() {
            kinds.extend_from_slice(h.kinds_per_pair());
        }
        if h.has_tail() {
            kinds.extend(std::iter::repeat_n(RecordKind::LowpassTail, h.slices));
        }
        kinds
    }

    /// Records of one `(slice, pair)` work item.
    fn pair_records(&self, z: usize, pair: usize) -> &[Record] {
        let per_pair = self.header.kinds_per_pair().len();
        let idx = (z * self.header.pair_count() + pair) * per_pair;
        &self.records[idx..idx + per_pair]
    }

    fn tail_record(&self, z: usize) -> &Record {
        let base = self.header.slices * self.header.pair_count() * self.header.kinds_per_pair().len();
        &self.records[base + z]
    }
}

fn full_mask(width: usize, height: usize) -> BinaryMask {
    Plane::filled(width, height, 1)
}

fn encoder_radius_map(f_odd: &Frame, f_even: &Frame, config: &EncodeConfig) -> Result<RadiusMap> {
    match config.radius_mode {
        RadiusMode::Fixed => Ok(Plane::filled(f_odd.width(), f_odd.height(), config.r_max)),
        RadiusMode::Smooth => radius_assignment(f_odd, f_even, config.r_max),
    }
}

/// Motion side information of one coded pair, as the decoder reconstructs
/// it.
struct PairMotion {
    records: Vec<Record>,
    adjacency: ReducedAdjacency,
}

fn encode_pair_motion(
    f_odd: &Frame,
    f_even: &Frame,
    config: &EncodeConfig,
    sampling: &SamplingMask,
    a_max: u16,
) -> Result<PairMotion> {
    match config.mc {
        McMode::None => Ok(PairMotion {
            records: Vec::new(),
            adjacency: ReducedAdjacency::identity(f_odd.width(), f_odd.height()),
        }),
        McMode::Block { block_size } => {
            let mvf = block_search(f_odd, f_even, block_size as usize, config.r_max)?;
            let blob = mv_encode(&mvf, config.r_max)?;
            Ok(PairMotion {
                records: vec![Record {
                    kind: RecordKind::MotionVectors,
                    blob,
                }],
                adjacency: mvf.to_adjacency(),
            })
        }
        McMode::Graph => {
            let radius_map = encoder_radius_map(f_odd, f_even, config)?;
            let adjacency = estimate_motion(f_odd, f_even, &radius_map)?;
            let map = adjacency_to_map(&adjacency, config.r_max)?;
            let mask = match config.psnr_target {
                Some(target) => {
                    let tau = compute_threshold(f_odd, f_even, target, a_max)?;
                    build_binary_mask(f_odd, f_even, tau)?
                }
                None => full_mask(f_odd.width(), f_odd.height()),
            };
            let subsampled = subsample(&apply_mask(&map, &mask)?, sampling)?;
            // closed loop: transform with the map the decoder will rebuild
            let decoder_map =
                interpolate(&subsampled, &mask, sampling, config.r_max, config.method)?;
            let adjacency = map_to_adjacency(&decoder_map, config.r_max)?;
            let alphabet = symbol_count(config.r_max) as usize;
            let stream_blob = encode_motion_map(&subsampled, &mask, sampling, alphabet)?;
            Ok(PairMotion {
                records: vec![
                    Record {
                        kind: RecordKind::Mask,
                        blob: bilevel_encode(&mask),
                    },
                    Record {
                        kind: RecordKind::MotionStream,
                        blob: stream_blob,
                    },
                ],
                adjacency,
            })
        }
    }
}

fn decode_pair_motion(
    container: &Container,
    records: &[Record],
    sampling: &SamplingMask,
) -> Result<ReducedAdjacency> {
    let h = &container.header;
    match h.mc {
        McMode::None => Ok(ReducedAdjacency::identity(h.width, h.height)),
        McMode::Block { block_size } => {
            let mvf = mv_decode(
                &records[0].blob,
                h.width,
                h.height,
                block_size as usize,
                h.r_max,
            )?;
            Ok(mvf.to_adjacency())
        }
        McMode::Graph => {
            let mask = bilevel_decode(&records[0].blob, h.width, h.height)?;
            let alphabet = symbol_count(h.r_max) as usize;
            let subsampled = decode_motion_map(&records[1].blob, &mask, sampling, alphabet)?;
            let map = interpolate(&subsampled, &mask, sampling, h.r_max, h.method)?;
            map_to_adjacency(&map, h.r_max)
        }
    }
}

fn encode_pair(
    volume: &Volume,
    z: usize,
    pair: usize,
    config: &EncodeConfig,
    sampling: &SamplingMask,
) -> Result<Vec<Record>> {
    let f_odd = volume.frame(z, 2 * pair);
    let f_even = volume.frame(z, 2 * pair + 1);
    let a_max = volume.header().max_amplitude();
    let motion = encode_pair_motion(f_odd, f_even, config, sampling, a_max)?;
    let subbands = match config.mc {
        McMode::None => haar_forward(f_odd, f_even)?,
        _ => mctf_forward(f_odd, f_even, &motion.adjacency)?,
    };
    let mut records = motion.records;
    records.push(Record {
        kind: RecordKind::Lowpass,
        blob: encode_subband_frame(&subbands.lp, config.levels),
    });
    records.push(Record {
        kind: RecordKind::Highpass,
        blob: encode_subband_frame(&subbands.hp, config.levels),
    });
    Ok(records)
}

/// Encodes a volume under the given settings.
pub fn encode_volume(volume: &Volume, config: &EncodeConfig) -> Result<Container> {
    config.validate()?;
    let h = *volume.header();
    let sampling = build_sampling_mask(config.density_index, h.width, h.height)?;
    let pairs = h.frames / 2;
    let items: Vec<(usize, usize)> = (0..h.slices)
        .flat_map(|z| (0..pairs).map(move |p| (z, p)))
        .collect();
    let coded: Result<Vec<Vec<Record>>> = items
        .par_iter()
        .map(|&(z, p)| encode_pair(volume, z, p, config, &sampling))
        .collect();
    let mut records: Vec<Record> = coded?.into_iter().flatten().collect();
    if h.frames % 2 == 1 {
        let tails: Result<Vec<Record>> = (0..h.slices)
            .into_par_iter()
            .map(|z| {
                let frame = volume.frame(z, h.frames - 1).map(|v| v as i32);
                Ok(Record {
                    kind: RecordKind::LowpassTail,
                    blob: encode_subband_frame(&frame, config.levels),
                })
            })
            .collect();
        records.extend(tails?);
    }
    Ok(Container {
        header: ContainerHeader {
            width: h.width,
            height: h.height,
            slices: h.slices,
            frames: h.frames,
            bit_depth: h.bit_depth,
            r_max: config.r_max,
            radius_mode: config.radius_mode,
            masking: config.psnr_target.is_some(),
            density_index: config.density_index,
            method: config.method,
            mc: config.mc,
            levels: config.levels,
        },
        records,
    })
}

fn decode_subband_record(container: &Container, record: &Record) -> Result<SubbandPlane> {
    decode_subband_frame(
        &record.blob,
        container.header.width,
        container.header.height,
        container.header.levels,
    )
}

fn tail_to_frame(container: &Container, plane: &SubbandPlane) -> Result<Frame> {
    let a_max = container.header.volume_header().max_amplitude() as i32;
    let mut data = Vec::with_capacity(plane.len());
    for &v in plane.samples() {
        if !(0..=a_max).contains(&v) {
            return Err(CodecError::Corrupt(
                "tail frame sample outside bit depth".into(),
            ));
        }
        data.push(v as u16);
    }
    Plane::from_vec(plane.width(), plane.height(), data)
}

/// Fully decodes a container back to the original volume.
pub fn decode_volume(container: &Container) -> Result<Volume> {
    container.check_record_sequence()?;
    let h = &container.header;
    let sampling = build_sampling_mask(h.density_index, h.width, h.height)?;
    let items: Vec<(usize, usize)> = (0..h.slices)
        .flat_map(|z| (0..h.pair_count()).map(move |p| (z, p)))
        .collect();
    let decoded: Result<Vec<(Frame, Frame)>> = items
        .par_iter()
        .map(|&(z, p)| {
            let records = container.pair_records(z, p);
            let adjacency = decode_pair_motion(container, records, &sampling)?;
            let skip = records.len() - 2;
            let lp = decode_subband_record(container, &records[skip])?;
            let hp = decode_subband_record(container, &records[skip + 1])?;
            mctf_inverse(&SubbandPair { lp, hp }, &adjacency)
        })
        .collect();
    let decoded = decoded?;
    let mut planes: Vec<Frame> = vec![Plane::filled(h.width, h.height, 0u16); h.slices * h.frames];
    for (&(z, p), (odd, even)) in items.iter().zip(decoded) {
        planes[z + h.slices * (2 * p)] = odd;
        planes[z + h.slices * (2 * p + 1)] = even;
    }
    if h.has_tail() {
        for z in 0..h.slices {
            let plane = decode_subband_record(container, container.tail_record(z))?;
            planes[z + h.slices * (h.frames - 1)] = tail_to_frame(container, &plane)?;
        }
    }
    Volume::new(container.header.volume_header(), planes)
}

/// Decodes only the lowpass (base-layer) frames, without touching highpass
/// or motion payloads. Frames are indexed `z + slices * pair`.
pub fn decode_base_layer(container: &Container) -> Result<(VolumeHeader, Vec<SubbandPlane>)> {
    container.check_record_sequence()?;
    let h = &container.header;
    let mut planes = vec![Plane::filled(h.width, h.height, 0i32); h.slices * h.base_layer_frames()];
    for z in 0..h.slices {
        for p in 0..h.pair_count() {
            let records = container.pair_records(z, p);
            let lp_record = &records[records.len() - 2];
            planes[z + h.slices * p] = decode_subband_record(container, lp_record)?;
        }
        if h.has_tail() {
            planes[z + h.slices * h.pair_count()] =
                decode_subband_record(container, container.tail_record(z))?;
        }
    }
    let mut header = container.header.volume_header();
    header.frames = h.base_layer_frames();
    Ok((header, planes))
}

/// Decoder-side view of one pair used by the metrics harness.
pub struct PairAnalysis {
    pub z: usize,
    pub pair: usize,
    pub lowpass: SubbandPlane,
    pub highpass: SubbandPlane,
    pub adjacency: ReducedAdjacency,
}

/// Decodes lowpass frames together with the reconstructed motion graphs.
pub fn decode_pair_analysis(container: &Container) -> Result<Vec<PairAnalysis>> {
    container.check_record_sequence()?;
    let h = &container.header;
    let sampling = build_sampling_mask(h.density_index, h.width, h.height)?;
    let items: Vec<(usize, usize)> = (0..h.slices)
        .flat_map(|z| (0..h.pair_count()).map(move |p| (z, p)))
        .collect();
    items
        .par_iter()
        .map(|&(z, p)| {
            let records = container.pair_records(z, p);
            let adjacency = decode_pair_motion(container, records, &sampling)?;
            let skip = records.len() - 2;
            Ok(PairAnalysis {
                z,
                pair: p,
                lowpass: decode_subband_record(container, &records[skip])?,
                highpass: decode_subband_record(container, &records[skip + 1])?,
                adjacency,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rate_report;
    use crate::volume::{generate_phantom, random_volume, PhantomMotion};

    fn phantom_volume(seed: u64, frames: usize) -> Volume {
        let seq = generate_phantom(
            16,
            16,
            frames,
            12,
            &PhantomMotion {
                velocity: (1, 1),
                noise_amplitude: 6,
            },
            seed,
        )
        .unwrap();
        Volume::from_sequence(seq, 12).unwrap()
    }

    #[test]
    fn round_trip_default_config() {
        let vol = phantom_volume(1, 6);
        let container = encode_volume(&vol, &EncodeConfig::default()).unwrap();
        assert_eq!(decode_volume(&container).unwrap(), vol);
    }

    #[test]
    fn round_trip_through_bytes() {
        let vol = phantom_volume(2, 5); // odd length exercises the tail
        let container = encode_volume(&vol, &EncodeConfig::default()).unwrap();
        let bytes = container.to_bytes();
        let parsed = Container::from_bytes(&bytes).unwrap();
        assert_eq!(parsed, container);
        assert_eq!(decode_volume(&parsed).unwrap(), vol);
        // serialization is canonical
        assert_eq!(parsed.to_bytes(), bytes);
    }

    #[test]
    fn round_trip_all_modes_small() {
        let vol = random_volume(9, 8, 2, 4, 12, 7);
        for mc in [
            McMode::None,
            McMode::Graph,
            McMode::Block { block_size: 4 },
        ] {
            for density in [1u8, 7, 16] {
                let config = EncodeConfig {
                    mc,
                    density_index: density,
                    ..EncodeConfig::default()
                };
                let container = encode_volume(&vol, &config).unwrap();
                assert_eq!(decode_volume(&container).unwrap(), vol, "{mc:?} d={density}");
            }
        }
    }

    #[test]
    fn static_volume_codes_to_silence() {
        let frame = generate_phantom(16, 16, 1, 12, &PhantomMotion::still(), 3).unwrap();
        let planes: Vec<Frame> = (0..4).map(|_| frame[0].clone()).collect();
        let vol = Volume::from_sequence(planes, 12).unwrap();
        let container = encode_volume(&vol, &EncodeConfig::default()).unwrap();
        for analysis in decode_pair_analysis(&container).unwrap() {
            assert!(analysis.highpass.samples().iter().all(|&v| v == 0));
            assert_eq!(
                analysis.adjacency,
                ReducedAdjacency::identity(16, 16),
                "static pair must fall back to identity"
            );
        }
        let report = rate_report(&container);
        // nothing moves: motion side information is a handful of bytes per pair
        assert!(report.motion < 64, "m_tx = {}", report.motion);
        assert_eq!(decode_volume(&container).unwrap(), vol);
    }

    #[test]
    fn full_density_unmasked_matches_encoder_map() {
        let vol = phantom_volume(4, 2);
        let config = EncodeConfig {
            psnr_target: None,
            density_index: 16,
            ..EncodeConfig::default()
        };
        let container = encode_volume(&vol, &config).unwrap();
        let analysis = decode_pair_analysis(&container).unwrap();
        let f_odd = vol.frame(0, 0);
        let f_even = vol.frame(0, 1);
        let radius_map = encoder_radius_map(f_odd, f_even, &config).unwrap();
        let expected = estimate_motion(f_odd, f_even, &radius_map).unwrap();
        assert_eq!(analysis[0].adjacency, expected);
    }

    #[test]
    fn base_layer_skips_highpass_bytes() {
        let vol = phantom_volume(5, 7);
        let container = encode_volume(&vol, &EncodeConfig::default()).unwrap();
        let (bl_header, bl_planes) = decode_base_layer(&container).unwrap();
        assert_eq!(bl_header.frames, 4);
        assert_eq!(bl_planes.len(), 4);

        // corrupting every highpass payload byte must not change the result
        let mut bytes = container.to_bytes();
        for span in container.byte_map() {
            if span.kind == RecordKind::Highpass {
                for b in &mut bytes[span.payload_offset + 9 + 4..span.payload_offset + span.payload_len]
                {
                    *b ^= 0xFF;
                }
            }
        }
        let corrupted = Container::from_bytes(&bytes).unwrap();
        let (_, bl_corrupted) = decode_base_layer(&corrupted).unwrap();
        assert_eq!(bl_corrupted, bl_planes);
        // while the full decode does depend on them
        match decode_volume(&corrupted) {
            Err(_) => {}
            Ok(decoded) => assert_ne!(decoded, vol),
        }
    }

    #[test]
    fn deterministic_bytes() {
        let vol = phantom_volume(6, 4);
        let config = EncodeConfig::default();
        let a = encode_volume(&vol, &config).unwrap().to_bytes();
        let b = encode_volume(&vol, &config).unwrap().to_bytes();
        assert_eq!(a, b);
    }

    #[test]
    fn accounting_identity() {
        let vol = phantom_volume(8, 6);
        let container = encode_volume(&vol, &EncodeConfig::default()).unwrap();
        let report = rate_report(&container);
        let bytes = container.to_bytes();
        assert_eq!(report.file_total(), bytes.len());
        assert_eq!(
            report.payload_total(),
            bytes.len() - Container::HEADER_LEN
        );

        let empty = Container {
            header: container.header,
            records: Vec::new(),
        };
        let r = rate_report(&empty);
        assert_eq!((r.lowpass, r.highpass, r.motion), (0, 0, 0));
    }

    #[test]
    fn config_validation() {
        let vol = phantom_volume(9, 2);
        for config in [
            EncodeConfig {
                r_max: 0,
                ..EncodeConfig::default()
            },
            EncodeConfig {
                r_max: 4,
                ..EncodeConfig::default()
            },
            EncodeConfig {
                density_index: 0,
                ..EncodeConfig::default()
            },
            EncodeConfig {
                density_index: 17,
                ..EncodeConfig::default()
            },
            EncodeConfig {
                mc: McMode::Block { block_size: 3 },
                ..EncodeConfig::default()
            },
            EncodeConfig {
                psnr_target: Some(0.0),
                ..EncodeConfig::default()
            },
        ] {
            assert!(encode_volume(&vol, &config).is_err(), "{config:?}");
        }
    }

    #[test]
    fn corrupt_containers_rejected() {
        let vol = phantom_volume(10, 2);
        let container = encode_volume(&vol, &EncodeConfig::default()).unwrap();
        let bytes = container.to_bytes();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            Container::from_bytes(&bad_magic),
            Err(CodecError::BadMagic)
        ));

        let mut bad_version = bytes.clone();
        bad_version[4] = 99;
        assert!(matches!(
            Container::from_bytes(&bad_version),
            Err(CodecError::Version { got: 99, .. })
        ));

        let truncated = &bytes[..bytes.len() - 3];
        assert!(Container::from_bytes(truncated).is_err());
    }
}
