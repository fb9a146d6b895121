//! Audio containers: locating the immutable header and the mutable body.
//!
//! A RIFF/WAVE file is walked chunk by chunk; the header boundary is the
//! offset of the first byte of the `data` chunk payload. Anything that is not
//! RIFF can still be used as a carrier in raw mode, where the caller states how
//! many leading bytes must be preserved.

use std::ops::Range;

use thiserror::Error;

const RIFF_HEADER_LEN: usize = 12;
const CHUNK_HEADER_LEN: usize = 8;
const MIN_FMT_LEN: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContainerError {
    #[error("carrier file is empty")]
    Empty,
    #[error("malformed RIFF/WAVE: {0}")]
    MalformedRiff(String),
    #[error("unknown container format; pass an explicit header size for raw mode")]
    UnknownFormat,
    #[error("header size {header} is not smaller than the file length {len}")]
    HeaderExceedsFile { header: usize, len: usize },
    #[error("unsupported sample depth: {0} bits (expected 16)")]
    UnsupportedDepth(u16),
    #[error("carrier is not PCM audio")]
    NotPcm,
}

fn malformed(msg: impl Into<String>) -> ContainerError {
    ContainerError::MalformedRiff(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainerKind {
    WavPcm,
    Raw,
}

/// Format metadata. For raw carriers the audio fields are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatInfo {
    pub kind: ContainerKind,
    /// Samples per second per channel.
    pub sample_rate: u32,
    pub bits_per_sample: u16,
    pub channels: u16,
    pub block_align: u16,
    /// Offset of the first audio byte.
    pub data_offset: usize,
    /// Declared length of the audio data, excluding any RIFF pad byte.
    pub data_len: usize,
}

impl FormatInfo {
    /// Duration of the audio data in seconds, if the carrier is PCM.
    pub fn duration_secs(&self) -> Option<f64> {
        if self.kind != ContainerKind::WavPcm || self.block_align == 0 || self.sample_rate == 0 {
            return None;
        }
        let frames = self.data_len / self.block_align as usize;
        Some(frames as f64 / f64::from(self.sample_rate))
    }
}

/// A parsed carrier file.
///
/// Bytes `[0, header_len)` are never touched by stego operations. The body is
/// `[header_len, body_end)`; for WAV that is exactly the `data` payload, so
/// trailing chunks and the pad byte of an odd-sized `data` chunk stay intact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioCarrier {
    bytes: Vec<u8>,
    header_len: usize,
    body_end: usize,
    format: FormatInfo,
}

impl AudioCarrier {
    /// Parses `file_bytes`, detecting RIFF/WAVE. Non-RIFF input requires
    /// `raw_header_override`.
    pub fn parse(
        file_bytes: Vec<u8>,
        raw_header_override: Option<usize>,
    ) -> Result<Self, ContainerError> {
        if file_bytes.is_empty() {
            return Err(ContainerError::Empty);
        }
        if is_riff_wave(&file_bytes) || file_bytes.starts_with(b"RIFF") {
            let format = walk_riff(&file_bytes)?;
            return Ok(Self {
                header_len: format.data_offset,
                body_end: format.data_offset + format.data_len,
                bytes: file_bytes,
                format,
            });
        }
        let header = raw_header_override.ok_or(ContainerError::UnknownFormat)?;
        if header >= file_bytes.len() {
            return Err(ContainerError::HeaderExceedsFile {
                header,
                len: file_bytes.len(),
            });
        }
        let len = file_bytes.len();
        Ok(Self {
            bytes: file_bytes,
            header_len: header,
            body_end: len,
            format: FormatInfo {
                kind: ContainerKind::Raw,
                sample_rate: 0,
                bits_per_sample: 0,
                channels: 0,
                block_align: 0,
                data_offset: header,
                data_len: len - header,
            },
        })
    }

    pub fn header_len(&self) -> usize {
        self.header_len
    }

    pub fn format(&self) -> &FormatInfo {
        &self.format
    }

    /// End of the region stego operations may address (exclusive). This is
    /// the carrier size `M` used by capacity calculations.
    pub fn body_end(&self) -> usize {
        self.body_end
    }

    pub fn body_range(&self) -> Range<usize> {
        self.header_len..self.body_end
    }

    /// The full file.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// The addressable prefix `[0, body_end)`, header included.
    pub fn addressable(&self) -> &[u8] {
        &self.bytes[..self.body_end]
    }

    /// Mutable view of the addressable prefix. Callers are responsible for
    /// leaving `[0, header_len)` unchanged; the stego module does.
    pub(crate) fn addressable_mut(&mut self) -> &mut [u8] {
        &mut self.bytes[..self.body_end]
    }

    pub fn body(&self) -> &[u8] {
        &self.bytes[self.body_range()]
    }

    pub fn body_mut(&mut self) -> &mut [u8] {
        let range = self.body_range();
        &mut self.bytes[range]
    }

    pub fn serialize(&self) -> Vec<u8> {
        self.bytes.clone()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Decodes the `data` payload as interleaved little-endian `i16` samples.
    pub fn samples_16(&self) -> Result<Vec<i16>, ContainerError> {
        if self.format.kind != ContainerKind::WavPcm {
            return Err(ContainerError::NotPcm);
        }
        if self.format.bits_per_sample != 16 {
            return Err(ContainerError::UnsupportedDepth(
                self.format.bits_per_sample,
            ));
        }
        Ok(self
            .body()
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]))
            .collect())
    }
}

pub fn parse_carrier(
    file_bytes: Vec<u8>,
    raw_header_override: Option<usize>,
) -> Result<AudioCarrier, ContainerError> {
    AudioCarrier::parse(file_bytes, raw_header_override)
}

fn is_riff_wave(bytes: &[u8]) -> bool {
    bytes.len() >= RIFF_HEADER_LEN && &bytes[0..4] == b"RIFF" && &bytes[8..12] == b"WAVE"
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct FmtChunk {
    sample_rate: u32,
    bits_per_sample: u16,
    channels: u16,
    block_align: u16,
}

fn walk_riff(bytes: &[u8]) -> Result<FormatInfo, ContainerError> {
    if bytes.len() < RIFF_HEADER_LEN {
        return Err(malformed("truncated RIFF header"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("RIFF form type is not WAVE"));
    }
    let riff_end = 8usize
        .checked_add(read_u32(bytes, 4) as usize)
        .ok_or_else(|| malformed("RIFF size overflow"))?;
    if riff_end > bytes.len() {
        return Err(malformed(format!(
            "RIFF declares {riff_end} bytes but the file has {}",
            bytes.len()
        )));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<(usize, usize)> = None;
    let mut pos = RIFF_HEADER_LEN;

    while pos < riff_end {
        if riff_end - pos < CHUNK_HEADER_LEN {
            return Err(malformed(format!("truncated chunk header at offset {pos}")));
        }
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let payload = pos + CHUNK_HEADER_LEN;
        let padded = size + (size & 1);
        if padded > riff_end - payload {
            return Err(malformed(format!(
                "chunk {:?} at offset {pos} declares {size} bytes past the end of the file",
                String::from_utf8_lossy(id)
            )));
        }
        match id {
            b"fmt " => {
                if fmt.is_some() {
                    return Err(malformed("duplicate fmt chunk"));
                }
                fmt = Some(parse_fmt(&bytes[payload..payload + size])?);
            }
            b"data" => {
                if fmt.is_none() {
                    return Err(malformed("data chunk precedes fmt chunk"));
                }
                if data.is_some() {
                    return Err(malformed("multiple data chunks"));
                }
                data = Some((payload, size));
            }
            _ => {}
        }
        pos = payload + padded;
    }

    let fmt = fmt.ok_or_else(|| malformed("missing fmt chunk"))?;
    let (data_offset, data_len) = data.ok_or_else(|| malformed("missing data chunk"))?;
    Ok(FormatInfo {
        kind: ContainerKind::WavPcm,
        sample_rate: fmt.sample_rate,
        bits_per_sample: fmt.bits_per_sample,
        channels: fmt.channels,
        block_align: fmt.block_align,
        data_offset,
        data_len,
    })
}

fn parse_fmt(chunk: &[u8]) -> Result<FmtChunk, ContainerError> {
    if chunk.len() < MIN_FMT_LEN {
        return Err(malformed(format!("fmt chunk is {} bytes", chunk.len())));
    }
    let channels = read_u16(chunk, 2);
    let sample_rate = read_u32(chunk, 4);
    let block_align = read_u16(chunk, 12);
    let bits_per_sample = read_u16(chunk, 14);
    if channels == 0 {
        return Err(malformed("zero channels"));
    }
    if sample_rate == 0 {
        return Err(malformed("zero sample rate"));
    }
    Ok(FmtChunk {
        sample_rate,
        bits_per_sample,
        channels,
        block_align,
    })
}

/// Builds a PCM WAV file. Extra chunks are inserted between `fmt ` and
/// `data` in the given order.
pub fn build_wav(
    sample_rate: u32,
    channels: u16,
    bits_per_sample: u16,
    data: &[u8],
    extra_chunks: &[([u8; 4], Vec<u8>)],
) -> Vec<u8> {
    fn push_chunk(out: &mut Vec<u8>, id: &[u8; 4], payload: &[u8]) {
        out.extend_from_slice(id);
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(payload);
        if payload.len() % 2 == 1 {
            out.push(0);
        }
    }

    let block_align = channels * (bits_per_sample / 8);
    let mut fmt = Vec::with_capacity(16);
    fmt.extend_from_slice(&1u16.to_le_bytes());
    fmt.extend_from_slice(&channels.to_le_bytes());
    fmt.extend_from_slice(&sample_rate.to_le_bytes());
    fmt.extend_from_slice(&(sample_rate * u32::from(block_align)).to_le_bytes());
    fmt.extend_from_slice(&block_align.to_le_bytes());
    fmt.extend_from_slice(&bits_per_sample.to_le_bytes());

    let mut body = Vec::new();
    body.extend_from_slice(b"WAVE");
    push_chunk(&mut body, b"fmt ", &fmt);
    for (id, payload) in extra_chunks {
        push_chunk(&mut body, id, payload);
    }
    push_chunk(&mut body, b"data", data);

    let mut out = Vec::with_capacity(body.len() + 8);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

/// Builds a 16-bit PCM WAV from samples.
pub fn build_wav_16(sample_rate: u32, channels: u16, samples: &[i16]) -> Vec<u8> {
    let data: Vec<u8> = samples.iter().flat_map(|s| s.to_le_bytes()).collect();
    build_wav(sample_rate, channels, 16, &data, &[])
}
