//! PCM audio: WAV decode/encode, mono downmix and windowed-sinc resampling.

use std::f64::consts::PI;
use std::io::Cursor;

use crate::error::{Error, Result};

/// Internal processing rate every input is normalized to.
pub const CANONICAL_RATE: u32 = 44_100;

/// Taps on each side of the resampling kernel, measured in input samples at
/// unity cutoff.
const SINC_HALF_TAPS: usize = 32;

/// Mono PCM audio at a known sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Range(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::Unsupported => Error::Unsupported("codec or layout not supported".into()),
        hound::Error::FormatError(msg) => Error::Format(msg.to_string()),
        hound::Error::IoError(e) => Error::Format(format!("truncated or unreadable stream: {e}")),
        other => Error::Format(other.to_string()),
    }
}

/// Format tag of the first `fmt ` chunk, if the RIFF layout gets that far.
fn format_tag(bytes: &[u8]) -> Option<u16> {
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return None;
    }
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().ok()?) as usize;
        if id == b"fmt " {
            let tag = bytes.get(pos + 8..pos + 10)?;
            return Some(u16::from_le_bytes([tag[0], tag[1]]));
        }
        pos = pos.checked_add(8 + size + (size & 1))?;
    }
    None
}

/// Decodes a RIFF/WAVE byte stream into a mono clip.
///
/// Integer PCM (8 to 32 bit) and 32-bit float are accepted; stereo is
/// averaged down to one channel.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    // PCM, IEEE float, WAVE_FORMAT_EXTENSIBLE
    if let Some(tag) = format_tag(bytes).filter(|t| ![1, 3, 0xFFFE].contains(t)) {
        return Err(Error::Unsupported(format!("format tag {tag:#06x}")));
    }
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(Error::Unsupported(format!("{channels} channels")));
    }

    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (hound::SampleFormat::Int, bits @ 1..=32) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| (v as f64 * scale) as f32))
                .collect::<std::result::Result<_, _>>()
                .map_err(map_hound)?
        }
        (fmt, bits) => {
            return Err(Error::Unsupported(format!(
                "{fmt:?} with {bits} bits per sample"
            )));
        }
    };

    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(2)
            .map(|frame| 0.5 * (frame[0] + frame[1]))
            .collect()
    };
    AudioClip::new(mono, spec.sample_rate)
}

/// Encodes a clip as 16-bit PCM mono WAV. Samples are clamped to [-1, 1].
pub fn encode_wav(clip: &AudioClip) -> Result<Vec<u8>> {
    if clip.is_empty() {
        return Err(Error::EmptyInput("cannot encode an empty clip"));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::with_capacity(44 + 2 * clip.len()));
    {
        let mut writer = hound::WavWriter::new(&mut cursor, spec).map_err(map_hound)?;
        let mut samples = writer.get_i16_writer(clip.len() as u32);
        for &s in &clip.samples {
            samples.write_sample(quantize(s));
        }
        samples.flush().map_err(map_hound)?;
        writer.finalize().map_err(map_hound)?;
    }
    Ok(cursor.into_inner())
}

fn quantize(sample: f32) -> i16 {
    let v = (sample.clamp(-1.0, 1.0) as f64 * 32768.0).round();
    v.clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

/// Resamples with a Hann-windowed sinc kernel.
///
/// The kernel is renormalized at every output position so DC is preserved
/// exactly, including near the clip edges.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if target_rate == 0 {
        return Err(Error::Config("target sample rate must be positive".into()));
    }
    if target_rate == clip.sample_rate {
        return Ok(clip.clone());
    }
    let input = &clip.samples;
    let step = clip.sample_rate as f64 / target_rate as f64;
    let out_len = (input.len() as f64 / step).round() as usize;
    // Lowpass at the lower Nyquist when decimating.
    let cutoff = (1.0 / step).min(1.0);
    let half_width = SINC_HALF_TAPS as f64 / cutoff;

    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let center = n as f64 * step;
        let lo = (center - half_width).ceil().max(0.0) as usize;
        let hi = ((center + half_width).floor() as usize).min(input.len().saturating_sub(1));
        let mut acc = 0.0;
        let mut norm = 0.0;
        for (k, &x) in input.iter().enumerate().take(hi + 1).skip(lo) {
            let d = k as f64 - center;
            let w = 0.5 * (1.0 + (PI * d / half_width).cos());
            let h = cutoff * sinc(cutoff * d) * w;
            acc += h * x as f64;
            norm += h;
        }
        out.push(if norm.abs() > 1e-12 {
            (acc / norm) as f32
        } else {
            0.0
        });
    }
    AudioClip::new(out, target_rate)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}
