use std::f64::consts::PI;

use num_complex::Complex64;

use super::stft::{istft, stft, ComplexSpectrogram};
use crate::audio::AudioClip;
use crate::error::{Error, Result};

pub const MIN_STRETCH: f64 = 0.5;
pub const MAX_STRETCH: f64 = 2.0;

fn wrap_phase(phase: f64) -> f64 {
    phase - 2.0 * PI * (phase / (2.0 * PI)).round()
}

/// Time-stretches a spectrogram so the output lasts `ratio` times as long.
///
/// Output frame `k` reads the input at fractional position `k / ratio`.
/// Magnitudes are interpolated linearly between the two neighbouring input
/// frames; phases advance by each bin's measured instantaneous frequency.
pub fn phase_vocoder_stretch(spec: &ComplexSpectrogram, ratio: f64) -> Result<ComplexSpectrogram> {
    if !(MIN_STRETCH..=MAX_STRETCH).contains(&ratio) {
        return Err(Error::Range(format!(
            "stretch ratio {ratio} outside [{MIN_STRETCH}, {MAX_STRETCH}]"
        )));
    }
    if ratio == 1.0 || spec.frames() == 0 {
        return Ok(spec.clone());
    }

    let bins = spec.bins();
    let frames = spec.frames();
    let out_frames = (frames as f64 * ratio).ceil() as usize;
    let expected_advance: Vec<f64> = (0..bins)
        .map(|b| 2.0 * PI * b as f64 * spec.hop() as f64 / spec.fft_size() as f64)
        .collect();

    let mut phase: Vec<f64> = spec.frame(0).iter().map(|z| z.arg()).collect();
    let mut values = Vec::with_capacity(out_frames * bins);
    for k in 0..out_frames {
        let pos = (k as f64 / ratio).min((frames - 1) as f64);
        let i0 = pos.floor() as usize;
        let i1 = (i0 + 1).min(frames - 1);
        let frac = pos - i0 as f64;
        let (f0, f1) = (spec.frame(i0), spec.frame(i1));
        for b in 0..bins {
            let mag = (1.0 - frac) * f0[b].norm() + frac * f1[b].norm();
            values.push(Complex64::from_polar(mag, phase[b]));
            let deviation = wrap_phase(f1[b].arg() - f0[b].arg() - expected_advance[b]);
            phase[b] += expected_advance[b] + deviation;
        }
    }
    Ok(spec.with_values(out_frames, values))
}

/// Stretches a clip in time by `ratio` without changing its pitch.
///
/// The result is trimmed to `round(len * ratio)` samples.
pub fn stretch_clip(
    clip: &AudioClip,
    ratio: f64,
    fft_size: usize,
    hop: usize,
) -> Result<AudioClip> {
    if !(MIN_STRETCH..=MAX_STRETCH).contains(&ratio) {
        return Err(Error::Range(format!(
            "stretch ratio {ratio} outside [{MIN_STRETCH}, {MAX_STRETCH}]"
        )));
    }
    if ratio == 1.0 {
        return Ok(clip.clone());
    }
    let spec = stft(clip, fft_size, hop)?;
    let stretched = phase_vocoder_stretch(&spec, ratio)?;
    let mut samples = istft(&stretched)?.into_samples();
    samples.truncate((clip.len() as f64 * ratio).round() as usize);
    for s in &mut samples {
        *s = s.clamp(-1.0, 1.0);
    }
    AudioClip::new(samples, clip.sample_rate())
}
