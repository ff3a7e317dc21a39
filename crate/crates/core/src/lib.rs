//! Frequency-dependent transitions between two music tracks.
//!
//! The pipeline tempo-matches and beat-aligns two tracks, overlaps them by a
//! number of beats, and then chooses, for every frequency bin independently,
//! the frame at which playback switches from the first track to the second.
//! Those switch points come from a minimum cut over a 4-connected grid built
//! from the two overlapped dB spectrograms.
//!
//! ```text
//! decode -> resample -> onset envelope -> tempo/beats -> stretch B
//!        -> plan overlap -> STFT segments -> grid graph -> min-cut
//!        -> composite -> ISTFT -> splice
//! ```

pub mod align;
pub mod audio;
pub mod beats;
pub mod error;
pub mod mincut;
pub mod pipeline;
pub mod render;
pub mod spectral;

pub use align::{compute_stretch_ratio, extract_segments, plan_overlap, FrameGrid, OverlapPlan};
pub use audio::{decode_wav, encode_wav, resample, AudioClip, CANONICAL_RATE};
pub use beats::{
    estimate_tempo, onset_envelope, track_beats, BeatGrid, OnsetEnvelope, TempoEstimate,
};
pub use error::{Error, Result};
pub use mincut::{
    build_grid_graph, edge_weight, extract_seam, max_flow_min_cut, CutLabeling, FlowNetwork, Label,
    Seam,
};
pub use pipeline::{run_cut, run_transition, Config, CutOutcome, TransitionOutcome};
pub use render::{composite, render_transition, spectrogram_png, TransitionResult};
pub use spectral::{
    fft, istft, magnitude_db, phase_vocoder_stretch, stft, ComplexSpectrogram, DbSpectrogram,
};
