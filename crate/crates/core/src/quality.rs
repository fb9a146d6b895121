//! Distortion and fidelity metrics: segmental SNR, normalized
//! cross-correlation, and per-plane byte diffs.

use thiserror::Error;

/// Per-frame SNR ceiling, used for frames with no distortion.
pub const SNR_CAP_DB: f64 = 100.0;

/// Default frame length in milliseconds.
pub const DEFAULT_FRAME_MS: f64 = 10.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QualityError {
    #[error("inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input of {len} samples is shorter than one frame of {frame_len}")]
    TooShort { len: usize, frame_len: usize },
    #[error("frame length must be at least one sample")]
    ZeroFrame,
    #[error("every frame of the original signal is silent")]
    NoSignal,
    #[error("input is empty")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentalSnr {
    pub db: f64,
    /// Frames that contributed (non-silent frames of the original).
    pub frames_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCorrelation {
    pub peak: f64,
    pub lag: isize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlaneDiff {
    /// Bytes whose bit 0 changed.
    pub plane0: usize,
    /// Bytes whose bit 1 changed.
    pub plane1: usize,
    /// Bytes with any change in bits 2..=7.
    pub other: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub seg_snr_db: f64,
    pub frames_used: usize,
    pub xcorr_peak: f64,
    pub xcorr_lag: isize,
    pub modified_bytes_plane0: usize,
    pub modified_bytes_plane1: usize,
    pub modified_bytes_other: usize,
}

impl QualityReport {
    /// `key=value` lines, one field per line.
    pub fn to_key_values(&self) -> String {
        format!(
            "seg_snr_db={:.6}\nframes_used={}\nxcorr_peak={:.9}\nxcorr_lag={}\n\
             modified_bytes_plane0={}\nmodified_bytes_plane1={}\nmodified_bytes_other={}\n",
            self.seg_snr_db,
            self.frames_used,
            self.xcorr_peak,
            self.xcorr_lag,
            self.modified_bytes_plane0,
            self.modified_bytes_plane1,
            self.modified_bytes_other,
        )
    }
}

/// Frame length covering `frame_ms` milliseconds at `sample_rate`, counted in
/// interleaved samples of one channel stream. Never less than one.
pub fn frame_len_for(sample_rate: u32, frame_ms: f64) -> usize {
    ((f64::from(sample_rate) * frame_ms / 1000.0).round() as usize).max(1)
}

/// Mean over frames of `10 log10(sum s_c^2 / sum (s_c - s_s)^2)`.
///
/// Only whole frames are used. Frames where the original is silent are
/// skipped; frames with no distortion contribute [`SNR_CAP_DB`], and no frame
/// contributes more than that.
pub fn segmental_snr<T: Copy + Into<f64>>(
    original: &[T],
    stego: &[T],
    frame_len: usize,
) -> Result<SegmentalSnr, QualityError> {
    if original.len() != stego.len() {
        return Err(QualityError::LengthMismatch(original.len(), stego.len()));
    }
    if frame_len == 0 {
        return Err(QualityError::ZeroFrame);
    }
    if original.len() < frame_len {
        return Err(QualityError::TooShort {
            len: original.len(),
            frame_len,
        });
    }

    let mut total = 0.0;
    let mut used = 0usize;
    for (clean, marked) in original
        .chunks_exact(frame_len)
        .zip(stego.chunks_exact(frame_len))
    {
        let mut signal = 0.0;
        let mut noise = 0.0;
        for (&c, &s) in clean.iter().zip(marked) {
            let (c, s): (f64, f64) = (c.into(), s.into());
            signal += c * c;
            noise += (c - s) * (c - s);
        }
        if signal == 0.0 {
            continue;
        }
        let frame_db = if noise == 0.0 {
            SNR_CAP_DB
        } else {
            (10.0 * (signal / noise).log10()).min(SNR_CAP_DB)
        };
        total += frame_db;
        used += 1;
    }
    if used == 0 {
        return Err(QualityError::NoSignal);
    }
    Ok(SegmentalSnr {
        db: total / used as f64,
        frames_used: used,
    })
}

/// Peak of `r(l) = sum_t a[t] b[t+l] / sqrt(sum a^2 * sum b^2)` for
/// `|l| <= max_lag`.
///
/// Energies are taken over the full sequences, so `|r| <= 1`. The peak is the
/// largest signed value; ties go to the smaller `|l|`, then to the negative
/// lag. If either input has zero energy every `r(l)` is 0.
pub fn waveform_compare<T: Copy + Into<f64>>(
    a: &[T],
    b: &[T],
    max_lag: usize,
) -> Result<CrossCorrelation, QualityError> {
    if a.is_empty() || b.is_empty() {
        return Err(QualityError::EmptyInput);
    }
    let a: Vec<f64> = a.iter().map(|&x| x.into()).collect();
    let b: Vec<f64> = b.iter().map(|&x| x.into()).collect();
    let norm = correlation_norm(&a, &b);
    let r = |lag| lagged_dot(&a, &b, lag) / norm;

    if norm == 0.0 {
        return Ok(CrossCorrelation { peak: 0.0, lag: 0 });
    }
    let max_lag = max_lag.min(a.len().max(b.len())) as isize;
    let mut best = CrossCorrelation { peak: r(0), lag: 0 };
    for d in 1..=max_lag {
        for lag in [-d, d] {
            let v = r(lag);
            if v > best.peak {
                best = CrossCorrelation { peak: v, lag };
            }
        }
    }
    Ok(best)
}

fn correlation_norm(a: &[f64], b: &[f64]) -> f64 {
    let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    (energy(a) * energy(b)).sqrt()
}

/// `sum_t a[t] b[t+lag]` over the overlapping region.
fn lagged_dot(a: &[f64], b: &[f64], lag: isize) -> f64 {
    let t_start = (-lag).max(0) as usize;
    let t_end = (a.len() as isize).min(b.len() as isize - lag).max(0) as usize;
    (t_start..t_end.max(t_start))
        .map(|t| a[t] * b[(t as isize + lag) as usize])
        .sum()
}

/// Normalized correlation `r(lag)` of two sequences; 0 if either is silent.
pub fn correlation_at<T: Copy + Into<f64>>(a: &[T], b: &[T], lag: isize) -> f64 {
    let a: Vec<f64> = a.iter().map(|&x| x.into()).collect();
    let b: Vec<f64> = b.iter().map(|&x| x.into()).collect();
    let norm = correlation_norm(&a, &b);
    if norm == 0.0 {
        0.0
    } else {
        lagged_dot(&a, &b, lag) / norm
    }
}

pub fn bitplane_diff(before: &[u8], after: &[u8]) -> Result<PlaneDiff, QualityError> {
    if before.len() != after.len() {
        return Err(QualityError::LengthMismatch(before.len(), after.len()));
    }
    let mut diff = PlaneDiff::default();
    for (x, y) in before.iter().zip(after) {
        let d = x ^ y;
        diff.plane0 += usize::from(d & 0x01 != 0);
        diff.plane1 += usize::from(d & 0x02 != 0);
        diff.other += usize::from(d & 0xFC != 0);
    }
    Ok(diff)
}

/// Full report for two 16-bit sample streams and their encoded bytes.
pub fn quality_report(
    original: &[i16],
    stego: &[i16],
    original_bytes: &[u8],
    stego_bytes: &[u8],
    frame_len: usize,
    max_lag: usize,
) -> Result<QualityReport, QualityError> {
    let snr = segmental_snr(original, stego, frame_len)?;
    let xc = waveform_compare(original, stego, max_lag)?;
    let diff = bitplane_diff(original_bytes, stego_bytes)?;
    Ok(QualityReport {
        seg_snr_db: snr.db,
        frames_used: snr.frames_used,
        xcorr_peak: xc.peak,
        xcorr_lag: xc.lag,
        modified_bytes_plane0: diff.plane0,
        modified_bytes_plane1: diff.plane1,
        modified_bytes_other: diff.other,
    })
}
