//! Tempo estimation and beat tracking.
//!
//! The onset envelope is spectral flux over a dB spectrogram. Tempo comes
//! from its autocorrelation weighted by a log-normal prior, and beats from
//! a dynamic program that trades onset strength against deviation from the
//! tempo period.

use serde::Serialize;

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::spectral::{stft_db, DbSpectrogram};

/// Minimum envelope length accepted by [`estimate_tempo`].
pub const MIN_TEMPO_SECS: f64 = 5.0;

/// Below this normalized autocorrelation peak the tempo is flagged as
/// low-confidence.
const MIN_CONFIDENCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TempoConfig {
    pub min_bpm: f64,
    pub max_bpm: f64,
    /// Center of the log-normal tempo prior.
    pub prior_bpm: f64,
    /// Standard deviation of the prior in octaves.
    pub prior_octaves: f64,
    /// Weight of the interval penalty in the beat tracker.
    pub tightness: f64,
}

impl Default for TempoConfig {
    fn default() -> Self {
        Self {
            min_bpm: 60.0,
            max_bpm: 180.0,
            prior_bpm: 120.0,
            prior_octaves: 1.0,
            tightness: 100.0,
        }
    }
}

/// Per-frame onset strength.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsetEnvelope {
    pub values: Vec<f64>,
    pub hop: usize,
    pub sample_rate: u32,
    /// Seconds from a frame's start sample to the time its value describes.
    ///
    /// Flux at frame `t` is driven by the `hop` samples that entered the
    /// window since frame `t - 1`, so the value is stamped at the middle of
    /// that newly entered block.
    pub offset_secs: f64,
}

impl OnsetEnvelope {
    pub fn frames_per_sec(&self) -> f64 {
        self.sample_rate as f64 / self.hop as f64
    }

    pub fn duration_secs(&self) -> f64 {
        self.values.len() as f64 / self.frames_per_sec()
    }

    pub fn frame_time(&self, frame: usize) -> f64 {
        frame as f64 / self.frames_per_sec() + self.offset_secs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TempoEstimate {
    pub bpm: f64,
    /// Autocorrelation peak relative to the zero-lag energy.
    pub confidence: f64,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeatGrid {
    pub tempo_bpm: f64,
    pub beat_times: Vec<f64>,
}

impl BeatGrid {
    pub fn new(tempo_bpm: f64, beat_times: Vec<f64>) -> Result<Self> {
        if !(tempo_bpm.is_finite() && tempo_bpm > 0.0) {
            return Err(Error::Range(format!("tempo {tempo_bpm} must be positive")));
        }
        if beat_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Range(
                "beat times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            tempo_bpm,
            beat_times,
        })
    }

    pub fn len(&self) -> usize {
        self.beat_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beat_times.is_empty()
    }

    pub fn median_interval(&self) -> Option<f64> {
        let mut gaps: Vec<f64> = self.beat_times.windows(2).map(|w| w[1] - w[0]).collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_by(f64::total_cmp);
        let mid = gaps.len() / 2;
        Some(if gaps.len() % 2 == 1 {
            gaps[mid]
        } else {
            0.5 * (gaps[mid - 1] + gaps[mid])
        })
    }
}

/// Spectral flux: summed positive dB increase per frame, then mean-removed
/// and half-wave rectified.
pub fn onset_envelope(spec: &DbSpectrogram) -> Result<OnsetEnvelope> {
    let frames = spec.frames();
    if frames < 2 {
        return Err(Error::TooShort(format!(
            "onset envelope needs 2 frames, got {frames}"
        )));
    }
    let mut values = Vec::with_capacity(frames);
    values.push(0.0);
    for t in 1..frames {
        let flux = spec
            .frame(t)
            .iter()
            .zip(spec.frame(t - 1))
            .map(|(cur, prev)| (cur - prev).max(0.0))
            .sum::<f64>();
        values.push(flux);
    }
    let mean = values.iter().sum::<f64>() / frames as f64;
    for v in &mut values {
        *v = (*v - mean).max(0.0);
    }
    let offset_samples = spec.fft_size() as f64 - spec.hop() as f64 / 2.0;
    Ok(OnsetEnvelope {
        values,
        hop: spec.hop(),
        sample_rate: spec.sample_rate(),
        offset_secs: offset_samples / spec.sample_rate() as f64,
    })
}

fn prior_weight(bpm: f64, cfg: &TempoConfig) -> f64 {
    let octaves = (bpm / cfg.prior_bpm).log2() / cfg.prior_octaves;
    (-0.5 * octaves * octaves).exp()
}

/// Short Hann smoothing. Without it a click train whose period falls
/// between two integer lags splits its autocorrelation peak across both,
/// which can hand the win to the next octave down.
fn smooth(values: &[f64]) -> Vec<f64> {
    const KERNEL: [f64; 5] = [0.25, 0.75, 1.0, 0.75, 0.25];
    let half = KERNEL.len() / 2;
    (0..values.len())
        .map(|t| {
            KERNEL
                .iter()
                .enumerate()
                .filter_map(|(k, w)| {
                    (t + k)
                        .checked_sub(half)
                        .and_then(|i| values.get(i))
                        .map(|v| v * w)
                })
                .sum::<f64>()
                / 3.0
        })
        .collect()
}

pub fn estimate_tempo(env: &OnsetEnvelope) -> Result<TempoEstimate> {
    estimate_tempo_with(env, &TempoConfig::default())
}

/// Autocorrelation tempo estimate over `[min_bpm, max_bpm]`.
///
/// The winning lag is refined by fitting a parabola through it and its two
/// neighbours, so the estimate is not limited to integer-frame periods.
pub fn estimate_tempo_with(env: &OnsetEnvelope, cfg: &TempoConfig) -> Result<TempoEstimate> {
    if env.duration_secs() < MIN_TEMPO_SECS {
        return Err(Error::TooShort(format!(
            "tempo estimation needs {MIN_TEMPO_SECS} s of audio, got {:.2} s",
            env.duration_secs()
        )));
    }
    let fps = env.frames_per_sec();
    let x = &smooth(&env.values);
    let n = x.len();
    let fallback = TempoEstimate {
        bpm: cfg.prior_bpm,
        confidence: 0.0,
        low_confidence: true,
    };

    let energy: f64 = x.iter().map(|v| v * v).sum();
    if energy <= 0.0 {
        return Ok(fallback);
    }

    let lag_min = ((60.0 * fps / cfg.max_bpm).floor() as usize).max(1);
    let lag_max = ((60.0 * fps / cfg.min_bpm).ceil() as usize).min(n - 1);
    if lag_min + 2 > lag_max {
        return Ok(fallback);
    }
    // One lag of margin on both sides for the parabolic fit.
    let lags: Vec<usize> = (lag_min.saturating_sub(1).max(1)..=(lag_max + 1).min(n - 1)).collect();
    let weighted: Vec<(usize, f64, f64)> = lags
        .iter()
        .map(|&lag| {
            let acf: f64 = x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
            let bpm = 60.0 * fps / lag as f64;
            (lag, acf, acf * prior_weight(bpm, cfg))
        })
        .collect();

    let in_range = |lag: usize| {
        let bpm = 60.0 * fps / lag as f64;
        bpm >= cfg.min_bpm - 1e-9 && bpm <= cfg.max_bpm + 1e-9
    };
    let Some(best) = (0..weighted.len())
        .filter(|&i| in_range(weighted[i].0))
        .max_by(|&a, &b| weighted[a].2.total_cmp(&weighted[b].2))
    else {
        return Ok(fallback);
    };
    let (best_lag, best_acf, best_w) = weighted[best];
    if best_w <= 0.0 {
        return Ok(fallback);
    }

    let mut lag = best_lag as f64;
    if best > 0 && best + 1 < weighted.len() {
        let (l, c, r) = (weighted[best - 1].2, best_w, weighted[best + 1].2);
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            lag += (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
        }
    }
    let bpm = (60.0 * fps / lag).clamp(cfg.min_bpm, cfg.max_bpm);
    let confidence = best_acf / energy;
    Ok(TempoEstimate {
        bpm,
        confidence,
        low_confidence: confidence < MIN_CONFIDENCE,
    })
}

pub fn track_beats(env: &OnsetEnvelope, tempo_bpm: f64) -> Result<BeatGrid> {
    track_beats_with(env, tempo_bpm, &TempoConfig::default())
}

/// Dynamic-programming beat tracker.
///
/// Maximizes `sum(onset at beats) - tightness * sum(ln(gap / period)^2)`
/// with gaps restricted to `[period / 2, 2 * period]`. The envelope is
/// scaled to unit standard deviation first so `tightness` has a fixed
/// meaning regardless of signal level.
pub fn track_beats_with(
    env: &OnsetEnvelope,
    tempo_bpm: f64,
    cfg: &TempoConfig,
) -> Result<BeatGrid> {
    if !(cfg.min_bpm..=cfg.max_bpm).contains(&tempo_bpm) {
        return Err(Error::Range(format!(
            "tempo {tempo_bpm:.2} outside [{}, {}]",
            cfg.min_bpm, cfg.max_bpm
        )));
    }
    let n = env.values.len();
    if n == 0 {
        return Err(Error::TooShort("empty onset envelope".into()));
    }
    let period = 60.0 * env.frames_per_sec() / tempo_bpm;

    let mean = env.values.iter().sum::<f64>() / n as f64;
    let std = (env.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let scale = if std > 0.0 { 1.0 / std } else { 0.0 };

    let min_gap = ((period / 2.0).round() as usize).max(1);
    let max_gap = (2.0 * period).round() as usize;
    let mut score = vec![0.0f64; n];
    let mut back: Vec<Option<usize>> = vec![None; n];
    for t in 0..n {
        let local = env.values[t] * scale;
        let mut best: Option<(usize, f64)> = None;
        if t >= min_gap {
            let lo = t.saturating_sub(max_gap);
            for (prev, &prior) in score.iter().enumerate().take(t - min_gap + 1).skip(lo) {
                let gap = (t - prev) as f64;
                let candidate = prior - cfg.tightness * (gap / period).ln().powi(2);
                // Ties go to the latest predecessor.
                if best.is_none_or(|(_, s)| candidate >= s) {
                    best = Some((prev, candidate));
                }
            }
        }
        match best {
            Some((prev, s)) => {
                score[t] = local + s;
                back[t] = Some(prev);
            }
            None => score[t] = local,
        }
    }

    // The last beat is the best-scoring frame within one period of the end.
    let tail = n.saturating_sub(period.round() as usize);
    let mut last = tail;
    for t in tail..n {
        if score[t] > score[last] {
            last = t;
        }
    }
    let mut frames = vec![last];
    while let Some(prev) = back[*frames.last().unwrap()] {
        frames.push(prev);
    }
    frames.reverse();
    let times = frames.into_iter().map(|f| env.frame_time(f)).collect();
    BeatGrid::new(tempo_bpm, times)
}

/// Tempo and beats for one clip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackAnalysis {
    pub tempo: TempoEstimate,
    pub grid: BeatGrid,
}

/// Runs the full analysis chain on a clip: dB spectrogram, onset envelope,
/// tempo, beats.
pub fn analyze_clip(
    clip: &AudioClip,
    fft_size: usize,
    hop: usize,
    cfg: &TempoConfig,
) -> Result<TrackAnalysis> {
    let env = onset_envelope(&stft_db(clip, fft_size, hop)?)?;
    let tempo = estimate_tempo_with(&env, cfg)?;
    let grid = track_beats_with(&env, tempo.bpm, cfg)?;
    Ok(TrackAnalysis { tempo, grid })
}

/// Beats for a clip whose tempo is already known.
pub fn beats_at_tempo(
    clip: &AudioClip,
    fft_size: usize,
    hop: usize,
    tempo_bpm: f64,
    cfg: &TempoConfig,
) -> Result<BeatGrid> {
    let env = onset_envelope(&stft_db(clip, fft_size, hop)?)?;
    track_beats_with(&env, tempo_bpm, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(values: Vec<f64>, frames: usize, bins: usize) -> DbSpectrogram {
        DbSpectrogram::new(values, frames, bins, 2048, 512, 44100).unwrap()
    }

    #[test]
    fn constant_spectrogram_has_no_flux() {
        let env = onset_envelope(&db(vec![-20.0; 40], 10, 4)).unwrap();
        assert!(env.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn step_up_is_localized() {
        let mut v = vec![-40.0; 40];
        for x in v.iter_mut().skip(6 * 4) {
            *x = -34.0;
        }
        let env = onset_envelope(&db(v, 10, 4)).unwrap();
        let max = env.values.iter().copied().fold(f64::MIN, f64::max);
        let peaks: Vec<usize> = (0..10).filter(|&t| env.values[t] == max).collect();
        assert_eq!(peaks, vec![6]);
    }

    #[test]
    fn decreasing_spectrogram_is_all_zero() {
        let v: Vec<f64> = (0..10).flat_map(|t| vec![-(t as f64) * 3.0; 4]).collect();
        let env = onset_envelope(&db(v, 10, 4)).unwrap();
        assert!(env.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_frame_is_too_short() {
        assert!(matches!(
            onset_envelope(&db(vec![0.0; 4], 1, 4)),
            Err(Error::TooShort(_))
        ));
    }

    fn flat_env(secs: f64) -> OnsetEnvelope {
        let n = (secs * 44100.0 / 512.0) as usize;
        OnsetEnvelope {
            values: vec![0.0; n],
            hop: 512,
            sample_rate: 44100,
            offset_secs: 0.0,
        }
    }

    #[test]
    fn silence_falls_back_to_prior() {
        let est = estimate_tempo(&flat_env(10.0)).unwrap();
        assert_eq!(est.bpm, 120.0);
        assert!(est.low_confidence);
    }

    #[test]
    fn short_envelope_is_rejected() {
        assert!(matches!(
            estimate_tempo(&flat_env(4.0)),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn flat_envelope_beats_are_near_isochronous() {
        let env = flat_env(20.0);
        let grid = track_beats(&env, 100.0).unwrap();
        let tau = 0.6;
        for w in grid.beat_times.windows(2) {
            let gap = w[1] - w[0];
            assert!((gap - tau).abs() < 0.1 * tau, "gap {gap}");
        }
    }

    #[test]
    fn tempo_outside_range_is_rejected() {
        assert!(track_beats(&flat_env(10.0), 200.0).is_err());
    }

    #[test]
    fn grid_rejects_unsorted_times() {
        assert!(BeatGrid::new(120.0, vec![1.0, 1.0]).is_err());
        assert_eq!(
            BeatGrid::new(120.0, vec![0.0, 0.5, 1.1])
                .unwrap()
                .median_interval(),
            Some(0.55)
        );
    }
}
