use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// Lowest representable dB value; silent bins are clamped here.
pub const DB_FLOOR: f64 = -100.0;

/// Frames x bins complex STFT, stored frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    frames: usize,
    bins: usize,
    fft_size: usize,
    hop: usize,
    sample_rate: u32,
    values: Vec<Complex64>,
}

impl ComplexSpectrogram {
    pub fn new(
        values: Vec<Complex64>,
        frames: usize,
        fft_size: usize,
        hop: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        check_params(fft_size, hop)?;
        let bins = fft_size / 2 + 1;
        if values.len() != frames * bins {
            return Err(Error::Shape(format!(
                "{} values for {frames} frames x {bins} bins",
                values.len()
            )));
        }
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Range(
                "spectrogram contains non-finite values".into(),
            ));
        }
        Ok(Self {
            frames,
            bins,
            fft_size,
            hop,
            sample_rate,
            values,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }
    pub fn bins(&self) -> usize {
        self.bins
    }
    pub fn fft_size(&self) -> usize {
        self.fft_size
    }
    pub fn hop(&self) -> usize {
        self.hop
    }
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        self.values[frame * self.bins + bin]
    }
    pub fn frame(&self, frame: usize) -> &[Complex64] {
        &self.values[frame * self.bins..(frame + 1) * self.bins]
    }

    /// Copies `count` frames starting at `first` into a new spectrogram.
    pub fn slice_frames(&self, first: usize, count: usize) -> Result<Self> {
        if first + count > self.frames {
            return Err(Error::Range(format!(
                "frames {first}..{} outside 0..{}",
                first + count,
                self.frames
            )));
        }
        let values = self.values[first * self.bins..(first + count) * self.bins].to_vec();
        Ok(self.with_values(count, values))
    }

    /// Same bins and transform parameters with the frames replaced.
    pub(crate) fn with_values(&self, frames: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), frames * self.bins);
        Self {
            frames,
            bins: self.bins,
            fft_size: self.fft_size,
            hop: self.hop,
            sample_rate: self.sample_rate,
            values,
        }
    }
}

/// Real dB magnitudes, frames x bins, frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DbSpectrogram {
    frames: usize,
    bins: usize,
    fft_size: usize,
    hop: usize,
    sample_rate: u32,
    values: Vec<f64>,
}

impl DbSpectrogram {
    pub fn new(
        values: Vec<f64>,
        frames: usize,
        bins: usize,
        fft_size: usize,
        hop: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        if values.len() != frames * bins {
            return Err(Error::Shape(format!(
                "{} values for {frames} frames x {bins} bins",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < DB_FLOOR) {
            return Err(Error::Range(format!(
                "dB values must be finite and >= {DB_FLOOR}"
            )));
        }
        Ok(Self {
            frames,
            bins,
            fft_size,
            hop,
            sample_rate,
            values,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }
    pub fn bins(&self) -> usize {
        self.bins
    }
    pub fn fft_size(&self) -> usize {
        self.fft_size
    }
    pub fn hop(&self) -> usize {
        self.hop
    }
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn get(&self, frame: usize, bin: usize) -> f64 {
        self.values[frame * self.bins + bin]
    }
    pub fn frame(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.bins..(frame + 1) * self.bins]
    }

    /// Shifts all values so the loudest bin sits at 0 dB, flooring at
    /// [`DB_FLOOR`]. Used for display.
    pub fn relative_to_peak(&self) -> Self {
        let peak = self.values.iter().copied().fold(DB_FLOOR, f64::max);
        let values = self
            .values
            .iter()
            .map(|v| (v - peak).max(DB_FLOOR))
            .collect();
        Self {
            values,
            ..self.clone()
        }
    }
}

fn check_params(fft_size: usize, hop: usize) -> Result<()> {
    if !fft_size.is_power_of_two() || fft_size < 2 {
        return Err(Error::Size(fft_size));
    }
    if hop == 0 || hop > fft_size {
        return Err(Error::Config(format!(
            "hop {hop} must be in 1..={fft_size}"
        )));
    }
    Ok(())
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

struct FrameAnalyzer {
    plan: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    hop: usize,
}

impl FrameAnalyzer {
    fn new(fft_size: usize, hop: usize) -> Self {
        let plan = FftPlanner::new().plan_fft_forward(fft_size);
        let scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        Self {
            plan,
            window: hann_window(fft_size),
            buf: vec![Complex64::default(); fft_size],
            scratch,
            hop,
        }
    }

    /// Transforms frame `t` of `samples` and returns the one-sided spectrum.
    fn analyze(&mut self, samples: &[f32], t: usize) -> &[Complex64] {
        let start = t * self.hop;
        for (i, (slot, w)) in self.buf.iter_mut().zip(&self.window).enumerate() {
            let x = samples.get(start + i).copied().unwrap_or(0.0) as f64;
            *slot = Complex64::new(x * w, 0.0);
        }
        self.plan
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        &self.buf[..self.window.len() / 2 + 1]
    }
}

/// Short-time Fourier transform with a periodic Hann window.
///
/// Frame `t` covers samples `[t*hop, t*hop + fft_size)`, zero-padded past
/// the end of the clip; there are `ceil(len / hop)` frames.
pub fn stft(clip: &AudioClip, fft_size: usize, hop: usize) -> Result<ComplexSpectrogram> {
    if clip.is_empty() {
        return Err(Error::EmptyInput("cannot transform an empty clip"));
    }
    check_params(fft_size, hop)?;
    stft_frames(clip, fft_size, hop, 0, clip.len().div_ceil(hop))
}

/// Computes frames `first..first + count` of the STFT of `clip`, exactly as
/// [`stft`] would, without materializing the rest.
pub fn stft_frames(
    clip: &AudioClip,
    fft_size: usize,
    hop: usize,
    first: usize,
    count: usize,
) -> Result<ComplexSpectrogram> {
    check_params(fft_size, hop)?;
    let bins = fft_size / 2 + 1;
    let mut analyzer = FrameAnalyzer::new(fft_size, hop);
    let mut values = Vec::with_capacity(count * bins);
    for t in first..first + count {
        values.extend_from_slice(analyzer.analyze(clip.samples(), t));
    }
    Ok(ComplexSpectrogram {
        frames: count,
        bins,
        fft_size,
        hop,
        sample_rate: clip.sample_rate(),
        values,
    })
}

/// Equivalent to `magnitude_db(&stft(clip, ..)?)` without holding the
/// complex spectrogram in memory.
pub fn stft_db(clip: &AudioClip, fft_size: usize, hop: usize) -> Result<DbSpectrogram> {
    if clip.is_empty() {
        return Err(Error::EmptyInput("cannot transform an empty clip"));
    }
    check_params(fft_size, hop)?;
    let frames = clip.len().div_ceil(hop);
    let bins = fft_size / 2 + 1;
    let mut analyzer = FrameAnalyzer::new(fft_size, hop);
    let mut values = Vec::with_capacity(frames * bins);
    for t in 0..frames {
        values.extend(
            analyzer
                .analyze(clip.samples(), t)
                .iter()
                .map(|z| to_db(z.norm())),
        );
    }
    Ok(DbSpectrogram {
        frames,
        bins,
        fft_size,
        hop,
        sample_rate: clip.sample_rate(),
        values,
    })
}

fn to_db(magnitude: f64) -> f64 {
    (20.0 * magnitude.log10()).max(DB_FLOOR)
}

/// `max(20 log10 |z|, -100)` for every cell.
pub fn magnitude_db(spec: &ComplexSpectrogram) -> DbSpectrogram {
    DbSpectrogram {
        frames: spec.frames,
        bins: spec.bins,
        fft_size: spec.fft_size,
        hop: spec.hop,
        sample_rate: spec.sample_rate,
        values: spec.values.iter().map(|z| to_db(z.norm())).collect(),
    }
}

/// Checks that a Hann window of `fft_size` at `hop` can be inverted by
/// [`istft`].
pub fn validate_cola(fft_size: usize, hop: usize) -> Result<()> {
    check_params(fft_size, hop)?;
    check_cola(&hann_window(fft_size), hop)
}

/// Checks that shifted squared windows sum to a constant.
fn check_cola(window: &[f64], hop: usize) -> Result<()> {
    let sums: Vec<f64> = (0..hop)
        .map(|n| window.iter().skip(n).step_by(hop).map(|w| w * w).sum())
        .collect();
    let max = sums.iter().copied().fold(f64::MIN, f64::max);
    let min = sums.iter().copied().fold(f64::MAX, f64::min);
    if max <= 0.0 || (max - min) / max > 1e-6 {
        return Err(Error::Config(format!(
            "fft size {} with hop {hop} does not satisfy constant overlap-add",
            window.len()
        )));
    }
    Ok(())
}

/// Inverse STFT by weighted overlap-add, normalized by the summed squared
/// window. Output length is `(frames - 1) * hop + fft_size`.
pub fn istft(spec: &ComplexSpectrogram) -> Result<AudioClip> {
    let n = spec.fft_size;
    let hop = spec.hop;
    let window = hann_window(n);
    check_cola(&window, hop)?;
    if spec.frames == 0 {
        return AudioClip::new(Vec::new(), spec.sample_rate);
    }

    let out_len = (spec.frames - 1) * hop + n;
    let mut acc = vec![0.0f64; out_len];
    let mut norm = vec![0.0f64; out_len];
    let plan = FftPlanner::new().plan_fft_inverse(n);
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n];
    let scale = 1.0 / n as f64;

    for t in 0..spec.frames {
        let half = spec.frame(t);
        buf[..half.len()].copy_from_slice(half);
        // Hermitian mirror; DC and Nyquist are taken as real.
        buf[0].im = 0.0;
        buf[n / 2].im = 0.0;
        for k in 1..n / 2 {
            buf[n - k] = half[k].conj();
        }
        plan.process_with_scratch(&mut buf, &mut scratch);
        let start = t * hop;
        for (i, w) in window.iter().enumerate() {
            acc[start + i] += buf[i].re * scale * w;
            norm[start + i] += w * w;
        }
    }

    let samples = acc
        .iter()
        .zip(&norm)
        .map(|(a, w)| if *w > 1e-8 { (a / w) as f32 } else { 0.0 })
        .collect();
    AudioClip::new(samples, spec.sample_rate)
}
