mod common;

use proptest::prelude::*;

use common::Track;
use spectraseam::align::plan_overlap_at;
use spectraseam::beats::analyze_clip;
use spectraseam::{
    compute_stretch_ratio, extract_segments, plan_overlap, stft, BeatGrid, Error, FrameGrid,
};

const GRID: FrameGrid = FrameGrid {
    hop: 512,
    sample_rate: 44100,
};

fn regular(bpm: f64, beats: usize, offset: f64) -> BeatGrid {
    let period = 60.0 / bpm;
    BeatGrid::new(
        bpm,
        (0..beats).map(|k| offset + k as f64 * period).collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn self_overlap_windows_match(
        bpm in 60.0f64..180.0,
        beats in 20usize..120,
        overlap in 1usize..16,
        offset in 0.0f64..2.0,
    ) {
        let grid = regular(bpm, beats, offset);
        let plan = plan_overlap(&grid, &grid, overlap, GRID).unwrap();
        let a_secs = plan.a_end_time - plan.a_start_time;
        let b_secs = plan.b_end_time - plan.b_start_time;
        prop_assert!((a_secs - b_secs).abs() <= GRID.frame_secs());
        let inside = grid
            .beat_times
            .iter()
            .filter(|&&t| t >= plan.a_start_time && t < plan.a_end_time)
            .count();
        prop_assert_eq!(inside, overlap);
    }

    #[test]
    fn ratio_gate(ta in 40.0f64..250.0, tb in 40.0f64..250.0) {
        let r = tb / ta;
        match compute_stretch_ratio(ta, tb) {
            Ok(ratio) => prop_assert!((0.5..=2.0).contains(&ratio) && (ratio - r).abs() < 1e-12),
            Err(Error::IncompatibleTempo { .. }) => prop_assert!(!(0.5..=2.0).contains(&r)),
            Err(e) => prop_assert!(false, "unexpected {}", e),
        }
    }
}

#[test]
fn explicit_starts_snap_to_beats() {
    let grid = regular(120.0, 40, 0.1);
    let plan = plan_overlap_at(&grid, &grid, 8, Some(3.07), Some(1.4), GRID).unwrap();
    assert!((plan.a_start_time - 3.1).abs() < 1e-9);
    assert!((plan.b_start_time - 1.6).abs() < 1e-9 || (plan.b_start_time - 1.1).abs() < 1e-9);
    assert!(matches!(
        plan_overlap_at(&grid, &grid, 8, Some(19.0), None, GRID),
        Err(Error::TooShort(_))
    ));
}

#[test]
fn segments_from_real_tracks_share_shape() {
    let cfg = Default::default();
    let a = Track::clicks(120.0, 12.0).render();
    let b = Track {
        seed: 3,
        ..Track::clicks(120.0, 12.0)
    }
    .render();
    let ga = analyze_clip(&a, 2048, 512, &cfg).unwrap().grid;
    let gb = analyze_clip(&b, 2048, 512, &cfg).unwrap().grid;
    let plan = plan_overlap(&ga, &gb, 8, GRID).unwrap();
    let (sa, sb) = extract_segments(
        &stft(&a, 2048, 512).unwrap(),
        &stft(&b, 2048, 512).unwrap(),
        &plan,
    )
    .unwrap();
    assert_eq!((sa.frames(), sa.bins()), (sb.frames(), sb.bins()));
    assert_eq!(sa.frames(), plan.frames);
}
