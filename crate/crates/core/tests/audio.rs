mod common;

use proptest::prelude::*;

use common::{peak_bin, tone};
use spectraseam::{decode_wav, encode_wav, resample, stft, AudioClip};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encode_decode_within_one_step(
        samples in prop::collection::vec(-1.0f32..=1.0, 1..500),
        rate in prop::sample::select(vec![8000u32, 22050, 44100, 48000]),
    ) {
        let clip = AudioClip::new(samples, rate).unwrap();
        let back = decode_wav(&encode_wav(&clip).unwrap()).unwrap();
        prop_assert_eq!(back.sample_rate(), rate);
        prop_assert_eq!(back.len(), clip.len());
        for (a, b) in back.samples().iter().zip(clip.samples()) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn same_rate_resample_is_exact(samples in prop::collection::vec(-1.0f32..=1.0, 0..300)) {
        let clip = AudioClip::new(samples, 22050).unwrap();
        prop_assert_eq!(resample(&clip, 22050).unwrap(), clip);
    }
}

fn peak_hz(clip: &AudioClip) -> f64 {
    let spec = stft(clip, 4096, 1024).unwrap();
    let bin = peak_bin(spec.frame(spec.frames() / 2));
    bin as f64 * clip.sample_rate() as f64 / 4096.0
}

#[test]
fn resample_keeps_tone_frequency() {
    for (freq, from, to) in [
        (440.0, 44100, 48000),
        (1000.0, 48000, 44100),
        (3000.0, 22050, 44100),
        (5000.0, 96000, 44100),
    ] {
        let clip = tone(freq, 1.0, from);
        let out = resample(&clip, to).unwrap();
        let expected_len = clip.len() as f64 * to as f64 / from as f64;
        assert!((out.len() as f64 - expected_len).abs() <= 1.0);
        let bin_width = to as f64 / 4096.0;
        assert!(
            (peak_hz(&out) - freq).abs() <= bin_width,
            "{freq} Hz {from}->{to}: {}",
            peak_hz(&out)
        );
    }
}

#[test]
fn resampled_sine_length() {
    let out = resample(&tone(440.0, 1.0, 44100), 48000).unwrap();
    assert!(out.len().abs_diff(48000) <= 1);
}
