use std::ffi::CStr;
use std::ptr;

use spectraseam_ffi::*;

fn last_error() -> String {
    let p = ss_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn click_track(bpm: f64, secs: f64, chord: &[f64]) -> Vec<f32> {
    let rate = 44100.0;
    let n = (secs * rate) as usize;
    let mut s: Vec<f64> = (0..n)
        .map(|i| {
            chord
                .iter()
                .map(|f| 0.08 * (2.0 * std::f64::consts::PI * f * i as f64 / rate).sin())
                .sum()
        })
        .collect();
    let mut state = 12345u32;
    let mut t = 0.25;
    while t < secs - 0.05 {
        let start = (t * rate) as usize;
        for j in 0..882.min(n - start) {
            state = state.wrapping_mul(1664525).wrapping_add(1013904223);
            let noise = (state >> 8) as f64 / (1u32 << 24) as f64 * 2.0 - 1.0;
            s[start + j] += 0.4 * (-(j as f64) / (0.004 * rate)).exp() * noise;
        }
        t += 60.0 / bpm;
    }
    s.into_iter().map(|v| v.clamp(-1.0, 1.0) as f32).collect()
}

unsafe fn clip(samples: &[f32]) -> *mut SsClip {
    let mut out = ptr::null_mut();
    assert_eq!(
        ss_clip_from_samples(samples.as_ptr(), samples.len(), 44100, &mut out),
        SsStatus::Ok
    );
    out
}

#[test]
fn clip_round_trips_through_wav() {
    unsafe {
        let samples = [0.0f32, 0.5, -0.5, 0.25];
        let c = clip(&samples);
        assert_eq!(ss_clip_len(c), 4);
        assert_eq!(ss_clip_sample_rate(c), 44100);

        let mut buf = SsBuffer {
            data: ptr::null_mut(),
            len: 0,
        };
        assert_eq!(ss_clip_encode_wav(c, &mut buf), SsStatus::Ok);
        assert_eq!(buf.len, 44 + 8);

        let mut back = ptr::null_mut();
        assert_eq!(ss_clip_from_wav(buf.data, buf.len, &mut back), SsStatus::Ok);
        let decoded = std::slice::from_raw_parts(ss_clip_samples(back), ss_clip_len(back));
        for (a, b) in decoded.iter().zip(samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
        ss_buffer_free(buf);
        ss_clip_free(back);
        ss_clip_free(c);
    }
}

#[test]
fn errors_map_to_statuses() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            ss_clip_from_wav(b"RIFF".as_ptr(), 4, &mut out),
            SsStatus::Format
        );
        assert!(out.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(
            ss_clip_from_samples(ptr::null(), 3, 44100, &mut out),
            SsStatus::InvalidArgument
        );
        assert_eq!(
            ss_clip_from_samples([0.0f32].as_ptr(), 1, 44100, ptr::null_mut()),
            SsStatus::InvalidArgument
        );
        assert_eq!(
            ss_clip_from_samples([f32::NAN].as_ptr(), 1, 44100, &mut out),
            SsStatus::Range
        );
        assert_eq!(
            ss_clip_from_samples([0.0f32].as_ptr(), 1, 0, &mut out),
            SsStatus::Config
        );

        let empty = clip(&[]);
        let mut buf = SsBuffer {
            data: ptr::null_mut(),
            len: 0,
        };
        assert_eq!(ss_clip_encode_wav(empty, &mut buf), SsStatus::EmptyInput);
        ss_clip_free(empty);

        // null handles are tolerated by accessors and free functions
        assert_eq!(ss_clip_len(ptr::null()), 0);
        ss_clip_free(ptr::null_mut());
        ss_transition_free(ptr::null_mut());
        assert!(ss_transition_cut_cost(ptr::null()).is_nan());
    }
}

#[test]
fn min_cut_on_a_raw_grid() {
    // A fades out while B fades in. Per-frame differences are 60, 30, 30, 60
    // dB, so the cheapest switch is between frames 1 and 2 in every bin.
    let a = [0.0, 0.0, 0.0, 0.0, -30.0, -30.0, -60.0, -60.0];
    let b = [-60.0, -60.0, -30.0, -30.0, 0.0, 0.0, 0.0, 0.0];
    let (frames, bins) = (4, 2);
    let mut labels = [SsLabel::B; 8];
    let mut cost = -1.0;
    let status = unsafe {
        ss_min_cut(
            a.as_ptr(),
            b.as_ptr(),
            frames,
            bins,
            labels.as_mut_ptr(),
            &mut cost,
        )
    };
    assert_eq!(status, SsStatus::Ok);
    for t in 0..frames {
        for bin in 0..bins {
            let expected = if t < 2 { SsLabel::A } else { SsLabel::B };
            assert_eq!(labels[t * bins + bin], expected);
        }
    }
    // two time edges of weight 30 + 30
    assert_eq!(cost, 120.0);

    let status = unsafe { ss_min_cut(a.as_ptr(), b.as_ptr(), 1, 8, ptr::null_mut(), &mut cost) };
    assert_eq!(status, SsStatus::TooShort);
    let nan = [f64::NAN; 8];
    let status = unsafe {
        ss_min_cut(
            nan.as_ptr(),
            b.as_ptr(),
            4,
            2,
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, SsStatus::Range);
}

#[test]
fn config_defaults() {
    let c = ss_config_default();
    assert_eq!((c.fft_size, c.hop, c.overlap_beats), (2048, 512, 64));
    assert!(!c.force_tempo && !c.has_a_start && !c.has_b_start);
    let v = unsafe { CStr::from_ptr(ss_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn transition_end_to_end() {
    let a = click_track(120.0, 14.0, &[220.0, 277.18]);
    let b = click_track(120.0, 14.0, &[329.63, 415.3]);
    unsafe {
        let (ca, cb) = (clip(&a), clip(&b));
        let mut cfg = ss_config_default();
        cfg.overlap_beats = 8;
        let mut t = ptr::null_mut();
        assert_eq!(
            ss_transition(ca, cb, &cfg, &mut t),
            SsStatus::Ok,
            "{}",
            last_error()
        );
        assert!((ss_transition_tempo_a(t) - 120.0).abs() < 2.0);
        assert!((ss_transition_stretch_ratio(t) - 1.0).abs() < 0.02);
        assert!(ss_transition_cut_cost(t) >= 0.0);
        assert_eq!(ss_transition_bins(t), 1025);
        let frames = ss_transition_frames(t);
        assert!(frames > 2);
        for bin in [0, 512, 1024] {
            let (mut flips, mut count) = (ptr::null(), 0);
            assert_eq!(
                ss_transition_seam(t, bin, &mut flips, &mut count),
                SsStatus::Ok
            );
            let flips = std::slice::from_raw_parts(flips, count);
            assert_eq!(count % 2, 1);
            assert!(flips.iter().all(|&f| f > 0 && f < frames));
        }
        let (mut flips, mut count) = (ptr::null(), 0);
        assert_eq!(
            ss_transition_seam(t, 1025, &mut flips, &mut count),
            SsStatus::Range
        );

        let out = ss_transition_output(t);
        assert!(ss_clip_len(out) > 0);
        let samples = std::slice::from_raw_parts(ss_clip_samples(out), ss_clip_len(out));
        assert!(samples.iter().all(|s| s.is_finite() && s.abs() <= 1.0));

        cfg.overlap_beats = 500;
        let mut t2 = ptr::null_mut();
        assert_eq!(ss_transition(ca, cb, &cfg, &mut t2), SsStatus::TooShort);
        assert!(t2.is_null());

        let slow = clip(&click_track(60.0, 14.0, &[]));
        let fast = clip(&click_track(130.0, 14.0, &[]));
        assert_eq!(
            ss_transition(slow, fast, &cfg, &mut t2),
            SsStatus::IncompatibleTempo
        );

        ss_transition_free(t);
        for c in [ca, cb, slow, fast] {
            ss_clip_free(c);
        }
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/spectraseam.h"
    ))
    .unwrap();
    for name in [
        "ss_clip_from_samples",
        "ss_clip_from_wav",
        "ss_clip_free",
        "ss_clip_encode_wav",
        "ss_buffer_free",
        "ss_transition",
        "ss_transition_seam",
        "ss_transition_free",
        "ss_min_cut",
        "ss_last_error_message",
        "SS_STATUS_INCOMPATIBLE_TEMPO",
        "typedef struct SsClip SsClip",
        "typedef struct SsTransition SsTransition",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
