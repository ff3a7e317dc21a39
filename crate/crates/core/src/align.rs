//! Tempo matching and overlap planning between two tracks.

use serde::Serialize;

use crate::beats::BeatGrid;
use crate::error::{Error, Result};
use crate::spectral::{ComplexSpectrogram, MAX_STRETCH, MIN_STRETCH};

/// Default overlap length in beats.
pub const DEFAULT_OVERLAP_BEATS: usize = 64;

/// Maps between seconds and STFT frame indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGrid {
    pub hop: usize,
    pub sample_rate: u32,
}

impl FrameGrid {
    /// Nearest frame whose start sample is closest to `secs`.
    pub fn frame_at(&self, secs: f64) -> usize {
        (secs * self.sample_rate as f64 / self.hop as f64)
            .round()
            .max(0.0) as usize
    }

    pub fn frame_secs(&self) -> f64 {
        self.hop as f64 / self.sample_rate as f64
    }
}

/// Where the two tracks overlap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapPlan {
    pub overlap_beats: usize,
    pub a_start_time: f64,
    pub a_end_time: f64,
    pub b_start_time: f64,
    pub b_end_time: f64,
    /// Duration factor applied to track B before planning.
    pub stretch_ratio: f64,
    /// First overlap frame in A's STFT.
    pub a_start_frame: usize,
    /// First overlap frame in stretched B's STFT.
    pub b_start_frame: usize,
    /// Overlap length in frames, the shorter of the two beat windows.
    pub frames: usize,
}

/// Duration factor that brings B's tempo to A's.
pub fn compute_stretch_ratio(tempo_a: f64, tempo_b: f64) -> Result<f64> {
    if !(tempo_a > 0.0 && tempo_b > 0.0) {
        return Err(Error::Range(format!(
            "tempi must be positive: {tempo_a}, {tempo_b}"
        )));
    }
    let ratio = tempo_b / tempo_a;
    if !(MIN_STRETCH..=MAX_STRETCH).contains(&ratio) {
        return Err(Error::IncompatibleTempo {
            tempo_a,
            tempo_b,
            ratio,
        });
    }
    Ok(ratio)
}

/// Overlaps the last `overlap_beats` beats of A with the first
/// `overlap_beats` beats of B.
pub fn plan_overlap(
    grid_a: &BeatGrid,
    grid_b: &BeatGrid,
    overlap_beats: usize,
    frames: FrameGrid,
) -> Result<OverlapPlan> {
    plan_overlap_at(grid_a, grid_b, overlap_beats, None, None, frames)
}

fn nearest_beat(grid: &BeatGrid, secs: f64) -> usize {
    (0..grid.len())
        .min_by(|&a, &b| {
            (grid.beat_times[a] - secs)
                .abs()
                .total_cmp(&(grid.beat_times[b] - secs).abs())
        })
        .unwrap_or(0)
}

/// Like [`plan_overlap`], but either window may start at an explicit time.
/// Explicit starts snap to the nearest beat of that track's grid.
pub fn plan_overlap_at(
    grid_a: &BeatGrid,
    grid_b: &BeatGrid,
    overlap_beats: usize,
    a_start: Option<f64>,
    b_start: Option<f64>,
    frames: FrameGrid,
) -> Result<OverlapPlan> {
    if overlap_beats == 0 {
        return Err(Error::Config("overlap must span at least one beat".into()));
    }
    let need = overlap_beats + 1;
    for (name, grid) in [("track A", grid_a), ("track B", grid_b)] {
        if grid.len() < need {
            return Err(Error::TooShort(format!(
                "{name} has {} beats; a {overlap_beats}-beat overlap needs {need}",
                grid.len()
            )));
        }
    }

    let a_first = match a_start {
        Some(t) => nearest_beat(grid_a, t),
        None => grid_a.len() - need,
    };
    let b_first = match b_start {
        Some(t) => nearest_beat(grid_b, t),
        None => 0,
    };
    for (name, first, grid) in [("track A", a_first, grid_a), ("track B", b_first, grid_b)] {
        if first + overlap_beats >= grid.len() {
            return Err(Error::TooShort(format!(
                "{name}: only {} beats follow the requested start",
                grid.len() - 1 - first
            )));
        }
    }

    let a_start_time = grid_a.beat_times[a_first];
    let a_end_time = grid_a.beat_times[a_first + overlap_beats];
    let b_start_time = grid_b.beat_times[b_first];
    let b_end_time = grid_b.beat_times[b_first + overlap_beats];

    let a_start_frame = frames.frame_at(a_start_time);
    let b_start_frame = frames.frame_at(b_start_time);
    let a_len = frames.frame_at(a_end_time) - a_start_frame;
    let b_len = frames.frame_at(b_end_time) - b_start_frame;
    let overlap_frames = a_len.min(b_len);
    if overlap_frames < 2 {
        return Err(Error::TooShort(format!(
            "overlap covers {overlap_frames} frames; at least 2 are needed"
        )));
    }

    Ok(OverlapPlan {
        overlap_beats,
        a_start_time,
        a_end_time,
        b_start_time,
        b_end_time,
        stretch_ratio: 1.0,
        a_start_frame,
        b_start_frame,
        frames: overlap_frames,
    })
}

/// Cuts the planned windows out of both spectrograms. Both outputs have
/// `plan.frames` frames.
pub fn extract_segments(
    spec_a: &ComplexSpectrogram,
    spec_b: &ComplexSpectrogram,
    plan: &OverlapPlan,
) -> Result<(ComplexSpectrogram, ComplexSpectrogram)> {
    if spec_a.bins() != spec_b.bins() || spec_a.hop() != spec_b.hop() {
        return Err(Error::Shape(format!(
            "spectrograms differ: {} bins / hop {} vs {} bins / hop {}",
            spec_a.bins(),
            spec_a.hop(),
            spec_b.bins(),
            spec_b.hop()
        )));
    }
    let a = spec_a.slice_frames(plan.a_start_frame, plan.frames)?;
    let b = spec_b.slice_frames(plan.b_start_frame, plan.frames)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    const GRID: FrameGrid = FrameGrid {
        hop: 512,
        sample_rate: 44100,
    };

    fn regular(bpm: f64, count: usize, first: f64) -> BeatGrid {
        let step = 60.0 / bpm;
        BeatGrid::new(bpm, (0..count).map(|i| first + i as f64 * step).collect()).unwrap()
    }

    #[test]
    fn stretch_ratios() {
        assert_eq!(compute_stretch_ratio(120.0, 120.0).unwrap(), 1.0);
        assert!((compute_stretch_ratio(100.0, 130.0).unwrap() - 1.3).abs() < 1e-12);
        assert!(matches!(
            compute_stretch_ratio(60.0, 170.0),
            Err(Error::IncompatibleTempo { .. })
        ));
    }

    #[test]
    fn tail_of_a_meets_head_of_b() {
        // last beat at 100.0 s
        let a = regular(120.0, 201, 0.0);
        assert_eq!(*a.beat_times.last().unwrap(), 100.0);
        let b = regular(120.0, 100, 0.3);
        let plan = plan_overlap(&a, &b, 64, GRID).unwrap();
        assert!((plan.a_start_time - 68.0).abs() < 1e-9);
        assert!((plan.a_end_time - 100.0).abs() < 1e-9);
        assert!((plan.b_start_time - 0.3).abs() < 1e-9);
        assert!((plan.b_end_time - 32.3).abs() < 1e-9);
        let a_beats = a
            .beat_times
            .iter()
            .filter(|&&t| t >= plan.a_start_time && t < plan.a_end_time)
            .count();
        assert_eq!(a_beats, 64);
    }

    #[test]
    fn one_beat_overlap() {
        let a = regular(120.0, 10, 0.0);
        let b = regular(120.0, 10, 1.0);
        let plan = plan_overlap(&a, &b, 1, GRID).unwrap();
        assert!((plan.a_end_time - plan.a_start_time - 0.5).abs() < 1e-9);
        assert!((plan.b_end_time - plan.b_start_time - 0.5).abs() < 1e-9);
    }

    #[test]
    fn self_pairing_has_equal_windows() {
        let a = regular(117.0, 90, 0.21);
        let plan = plan_overlap(&a, &a, 64, GRID).unwrap();
        let dur_a = plan.a_end_time - plan.a_start_time;
        let dur_b = plan.b_end_time - plan.b_start_time;
        assert!((dur_a - dur_b).abs() <= GRID.frame_secs());
    }

    #[test]
    fn too_few_beats() {
        let a = regular(120.0, 64, 0.0);
        let b = regular(120.0, 100, 0.0);
        assert!(matches!(
            plan_overlap(&a, &b, 64, GRID),
            Err(Error::TooShort(_))
        ));
        assert!(matches!(
            plan_overlap(&b, &a, 64, GRID),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn explicit_starts_snap_to_beats() {
        let a = regular(120.0, 100, 0.0);
        let plan = plan_overlap_at(&a, &a, 8, Some(5.1), Some(5.2), GRID).unwrap();
        assert_eq!(plan.a_start_time, 5.0);
        assert_eq!(plan.b_start_time, 5.0);
        assert_eq!(plan.a_start_frame, plan.b_start_frame);
        assert!(matches!(
            plan_overlap_at(&a, &a, 8, Some(47.0), None, GRID),
            Err(Error::TooShort(_))
        ));
    }

    fn spec(frames: usize, offset: f64) -> ComplexSpectrogram {
        let values = (0..frames * 5)
            .map(|i| Complex64::new(i as f64 + offset, 0.0))
            .collect();
        ComplexSpectrogram::new(values, frames, 8, 2, 8000).unwrap()
    }

    fn plan(a_start: usize, b_start: usize, frames: usize) -> OverlapPlan {
        OverlapPlan {
            overlap_beats: 1,
            a_start_time: 0.0,
            a_end_time: 0.0,
            b_start_time: 0.0,
            b_end_time: 0.0,
            stretch_ratio: 1.0,
            a_start_frame: a_start,
            b_start_frame: b_start,
            frames,
        }
    }

    #[test]
    fn segments_share_shape() {
        let (a, b) = extract_segments(&spec(20, 0.0), &spec(20, 0.5), &plan(3, 7, 6)).unwrap();
        assert_eq!((a.frames(), a.bins()), (6, 5));
        assert_eq!((b.frames(), b.bins()), (6, 5));
        assert_eq!(a.get(0, 0).re, 15.0);
        assert_eq!(b.get(0, 0).re, 35.5);
    }

    #[test]
    fn whole_window_is_identity() {
        let (sa, sb) = (spec(9, 0.0), spec(9, 1.0));
        let (a, b) = extract_segments(&sa, &sb, &plan(0, 0, 9)).unwrap();
        assert_eq!(a, sa);
        assert_eq!(b, sb);
    }

    #[test]
    fn window_out_of_range() {
        let r = extract_segments(&spec(9, 0.0), &spec(9, 0.0), &plan(5, 0, 5));
        assert!(matches!(r, Err(Error::Range(_))));
    }
}
