//! End-to-end orchestration shared by the command-line tool and the C API.

use log::{debug, info, warn};
use serde::Serialize;

use crate::align::{
    compute_stretch_ratio, extract_segments, plan_overlap_at, FrameGrid, OverlapPlan,
    DEFAULT_OVERLAP_BEATS,
};
use crate::audio::{resample, AudioClip, CANONICAL_RATE};
use crate::beats::{analyze_clip, beats_at_tempo, BeatGrid, TempoConfig, TempoEstimate};
use crate::error::{Error, Result};
use crate::mincut::{build_grid_graph, extract_seam, max_flow_min_cut, FlowNetwork, Seam};
use crate::render::{composite, render_transition, TransitionResult};
use crate::spectral::{
    istft, magnitude_db, stft, stft_frames, stretch_clip, validate_cola, DbSpectrogram,
    DEFAULT_FFT_SIZE, DEFAULT_HOP,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub fft_size: usize,
    pub hop: usize,
    pub overlap_beats: usize,
    pub tempo: TempoConfig,
    /// Proceed even when a tempo estimate is flagged low-confidence.
    pub force_tempo: bool,
    /// Explicit start of A's overlap window in seconds (snapped to a beat).
    pub a_start: Option<f64>,
    /// Explicit start of B's overlap window in seconds of the stretched
    /// track (snapped to a beat).
    pub b_start: Option<f64>,
    /// Keep the flow network in the outcome for dumping.
    pub keep_network: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            fft_size: DEFAULT_FFT_SIZE,
            hop: DEFAULT_HOP,
            overlap_beats: DEFAULT_OVERLAP_BEATS,
            tempo: TempoConfig::default(),
            force_tempo: false,
            a_start: None,
            b_start: None,
            keep_network: false,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        validate_cola(self.fft_size, self.hop)?;
        if self.overlap_beats == 0 {
            return Err(Error::Config("overlap must span at least one beat".into()));
        }
        let t = &self.tempo;
        if !(t.min_bpm > 0.0 && t.min_bpm < t.max_bpm) {
            return Err(Error::Config(format!(
                "bad tempo range {}..{}",
                t.min_bpm, t.max_bpm
            )));
        }
        if !(t.prior_bpm > 0.0 && t.prior_octaves > 0.0 && t.tightness >= 0.0) {
            return Err(Error::Config(
                "tempo prior and tightness must be positive".into(),
            ));
        }
        Ok(())
    }

    fn frame_grid(&self) -> FrameGrid {
        FrameGrid {
            hop: self.hop,
            sample_rate: CANONICAL_RATE,
        }
    }
}

/// Everything produced by a full transition run.
#[derive(Debug, Clone)]
pub struct TransitionOutcome {
    pub result: TransitionResult,
    pub tempo_a: TempoEstimate,
    pub tempo_b: TempoEstimate,
    pub grid_a: BeatGrid,
    pub grid_b_stretched: BeatGrid,
    /// dB magnitudes of the composited overlap, for display.
    pub overlap_db: DbSpectrogram,
    pub network: Option<FlowNetwork>,
}

/// Output of cutting two pre-aligned segments.
#[derive(Debug, Clone)]
pub struct CutOutcome {
    pub output: AudioClip,
    pub seam: Seam,
    pub cut_cost: f64,
    pub overlap_db: DbSpectrogram,
    pub network: Option<FlowNetwork>,
}

/// Seam metadata written next to the audio.
#[derive(Debug, Clone, Serialize)]
pub struct SeamReport {
    pub cut_cost: f64,
    pub tempo_a: Option<f64>,
    pub tempo_b: Option<f64>,
    pub stretch_ratio: f64,
    /// Flip frame indices per frequency bin.
    pub seams: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<OverlapPlan>,
}

impl TransitionOutcome {
    pub fn report(&self) -> SeamReport {
        SeamReport {
            cut_cost: self.result.cut_cost,
            tempo_a: Some(self.tempo_a.bpm),
            tempo_b: Some(self.tempo_b.bpm),
            stretch_ratio: self.result.plan.stretch_ratio,
            seams: self.result.seam.flips.clone(),
            plan: Some(self.result.plan.clone()),
        }
    }
}

impl CutOutcome {
    pub fn report(&self) -> SeamReport {
        SeamReport {
            cut_cost: self.cut_cost,
            tempo_a: None,
            tempo_b: None,
            stretch_ratio: 1.0,
            seams: self.seam.flips.clone(),
            plan: None,
        }
    }
}

fn to_canonical(clip: &AudioClip) -> Result<AudioClip> {
    if clip.sample_rate() != CANONICAL_RATE {
        debug!(
            "resampling {} Hz -> {CANONICAL_RATE} Hz",
            clip.sample_rate()
        );
    }
    resample(clip, CANONICAL_RATE)
}

/// Tempo-matches B to A, overlaps them by `overlap_beats` beats and
/// renders the min-cut transition.
pub fn run_transition(
    track_a: &AudioClip,
    track_b: &AudioClip,
    cfg: &Config,
) -> Result<TransitionOutcome> {
    cfg.validate()?;
    let a = to_canonical(track_a)?;
    let b = to_canonical(track_b)?;

    let analysis_a = analyze_clip(&a, cfg.fft_size, cfg.hop, &cfg.tempo)?;
    let analysis_b = analyze_clip(&b, cfg.fft_size, cfg.hop, &cfg.tempo)?;
    info!(
        "tempo A {:.2} BPM (confidence {:.3}), B {:.2} BPM (confidence {:.3})",
        analysis_a.tempo.bpm,
        analysis_a.tempo.confidence,
        analysis_b.tempo.bpm,
        analysis_b.tempo.confidence
    );
    for (name, est) in [
        ("track A", &analysis_a.tempo),
        ("track B", &analysis_b.tempo),
    ] {
        if est.low_confidence {
            if cfg.force_tempo {
                warn!(
                    "{name}: low-confidence tempo {:.2} BPM, continuing",
                    est.bpm
                );
            } else {
                return Err(Error::LowConfidence(name));
            }
        }
    }

    let ratio = compute_stretch_ratio(analysis_a.tempo.bpm, analysis_b.tempo.bpm)?;
    let (b_stretched, grid_b) = if ratio == 1.0 {
        (b, analysis_b.grid.clone())
    } else {
        info!("stretching B by {ratio:.4}");
        let stretched = stretch_clip(&b, ratio, cfg.fft_size, cfg.hop)?;
        let grid = beats_at_tempo(
            &stretched,
            cfg.fft_size,
            cfg.hop,
            analysis_a.tempo.bpm,
            &cfg.tempo,
        )?;
        (stretched, grid)
    };

    let mut plan = plan_overlap_at(
        &analysis_a.grid,
        &grid_b,
        cfg.overlap_beats,
        cfg.a_start,
        cfg.b_start,
        cfg.frame_grid(),
    )?;
    plan.stretch_ratio = ratio;
    info!(
        "overlap: A {:.3}-{:.3} s, B {:.3}-{:.3} s, {} frames",
        plan.a_start_time, plan.a_end_time, plan.b_start_time, plan.b_end_time, plan.frames
    );

    let seg_a = stft_frames(&a, cfg.fft_size, cfg.hop, plan.a_start_frame, plan.frames)?;
    let seg_b = stft_frames(
        &b_stretched,
        cfg.fft_size,
        cfg.hop,
        plan.b_start_frame,
        plan.frames,
    )?;
    let net = build_grid_graph(&magnitude_db(&seg_a), &magnitude_db(&seg_b))?;
    debug!(
        "flow network: {} nodes, {} grid edges",
        net.node_count(),
        net.edges().len()
    );
    let labels = max_flow_min_cut(&net);
    info!("cut cost {:.3}", labels.cut_cost());

    let overlap = composite(&seg_a, &seg_b, &labels)?;
    let result = render_transition(&a, &b_stretched, &plan, &overlap, &labels)?;
    Ok(TransitionOutcome {
        result,
        tempo_a: analysis_a.tempo,
        tempo_b: analysis_b.tempo,
        grid_a: analysis_a.grid,
        grid_b_stretched: grid_b,
        overlap_db: magnitude_db(&overlap),
        network: cfg.keep_network.then_some(net),
    })
}

/// Cuts between two already aligned segments, skipping tempo analysis.
/// The longer segment is truncated to the shorter one.
pub fn run_cut(seg_a: &AudioClip, seg_b: &AudioClip, cfg: &Config) -> Result<CutOutcome> {
    cfg.validate()?;
    let a = to_canonical(seg_a)?;
    let b = to_canonical(seg_b)?;
    let spec_a = stft(&a, cfg.fft_size, cfg.hop)?;
    let spec_b = stft(&b, cfg.fft_size, cfg.hop)?;
    let frames = spec_a.frames().min(spec_b.frames());
    if frames < 2 {
        return Err(Error::TooShort(format!(
            "segments span {frames} frames; at least 2 needed"
        )));
    }
    let plan = OverlapPlan {
        overlap_beats: 0,
        a_start_time: 0.0,
        a_end_time: frames as f64 * cfg.frame_grid().frame_secs(),
        b_start_time: 0.0,
        b_end_time: frames as f64 * cfg.frame_grid().frame_secs(),
        stretch_ratio: 1.0,
        a_start_frame: 0,
        b_start_frame: 0,
        frames,
    };
    let (seg_a, seg_b) = extract_segments(&spec_a, &spec_b, &plan)?;
    let net = build_grid_graph(&magnitude_db(&seg_a), &magnitude_db(&seg_b))?;
    let labels = max_flow_min_cut(&net);
    info!("cut cost {:.3}", labels.cut_cost());
    let overlap = composite(&seg_a, &seg_b, &labels)?;

    let mut samples = istft(&overlap)?.into_samples();
    samples.truncate(a.len().min(b.len()));
    for s in &mut samples {
        *s = s.clamp(-1.0, 1.0);
    }
    Ok(CutOutcome {
        output: AudioClip::new(samples, CANONICAL_RATE)?,
        seam: extract_seam(&labels),
        cut_cost: labels.cut_cost(),
        overlap_db: magnitude_db(&overlap),
        network: cfg.keep_network.then_some(net),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn rejects_non_cola_hop() {
        let cfg = Config {
            hop: 1024,
            ..Config::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = Config {
            fft_size: 1000,
            hop: 250,
            ..Config::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = Config {
            fft_size: 4096,
            hop: 512,
            ..Config::default()
        };
        cfg.validate().unwrap();
    }

    #[test]
    fn cut_requires_two_frames() {
        let clip = AudioClip::new(vec![0.1; 300], CANONICAL_RATE).unwrap();
        assert!(matches!(
            run_cut(&clip, &clip, &Config::default()),
            Err(Error::TooShort(_))
        ));
    }
}
