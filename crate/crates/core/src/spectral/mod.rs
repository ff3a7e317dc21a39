//! FFT, STFT/ISTFT, dB magnitudes and phase-vocoder time stretching.

mod fft;
mod stft;
mod vocoder;

pub use fft::fft;
pub use stft::{
    hann_window, istft, magnitude_db, stft, stft_db, stft_frames, validate_cola,
    ComplexSpectrogram, DbSpectrogram, DB_FLOOR,
};
pub use vocoder::{phase_vocoder_stretch, stretch_clip, MAX_STRETCH, MIN_STRETCH};

/// Default analysis window length in samples.
pub const DEFAULT_FFT_SIZE: usize = 2048;
/// Default hop between frames in samples.
pub const DEFAULT_HOP: usize = 512;
