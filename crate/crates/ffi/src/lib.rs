//! C interface to spectraseam.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns an
//! [`SsStatus`]; on failure a description is available from
//! [`ss_last_error_message`] on the same thread until the next failing
//! call. Panics never unwind into C; they surface as
//! [`SsStatus::Internal`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use spectraseam::mincut::Seam;
use spectraseam::{
    decode_wav, edge_weight, encode_wav, max_flow_min_cut, run_transition, AudioClip, Config,
    Error, FlowNetwork, Label,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    /// A required pointer was null or a length was inconsistent.
    InvalidArgument = 1,
    /// Malformed or truncated WAV data.
    Format = 2,
    /// Valid WAV in a codec or layout that is not handled.
    Unsupported = 3,
    /// The tempo ratio between the tracks is outside [0.5, 2].
    IncompatibleTempo = 4,
    /// Not enough audio, beats or frames.
    TooShort = 5,
    /// Tempo could not be estimated reliably.
    LowConfidence = 6,
    /// Invalid configuration, such as a non-COLA hop.
    Config = 7,
    /// A value was out of range.
    Range = 8,
    /// Array shapes did not match.
    Shape = 9,
    /// Empty input where samples are required.
    EmptyInput = 10,
    /// I/O or image encoding failure.
    Io = 11,
    /// A panic was caught at the boundary.
    Internal = 12,
}

/// Cell label in a cut: which input the cell is taken from.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsLabel {
    A = 0,
    B = 1,
}

/// Pipeline settings. Obtain defaults from [`ss_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SsConfig {
    pub fft_size: usize,
    pub hop: usize,
    pub overlap_beats: usize,
    /// Continue when a tempo estimate is low-confidence.
    pub force_tempo: bool,
    pub has_a_start: bool,
    /// Start of A's overlap in seconds; used when `has_a_start` is set.
    pub a_start: f64,
    pub has_b_start: bool,
    /// Start of B's overlap in seconds of the stretched track.
    pub b_start: f64,
}

/// Byte buffer owned by the library; release with [`ss_buffer_free`].
#[repr(C)]
#[derive(Debug)]
pub struct SsBuffer {
    pub data: *mut u8,
    pub len: usize,
}

/// Mono audio clip.
pub struct SsClip(AudioClip);

/// Output of [`ss_transition`].
pub struct SsTransition {
    output: SsClip,
    seam: Seam,
    cut_cost: f64,
    tempo_a: f64,
    tempo_b: f64,
    stretch_ratio: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SsStatus {
    match err {
        Error::Format(_) => SsStatus::Format,
        Error::Unsupported(_) => SsStatus::Unsupported,
        Error::EmptyInput(_) => SsStatus::EmptyInput,
        Error::Size(_) | Error::Config(_) => SsStatus::Config,
        Error::Range(_) => SsStatus::Range,
        Error::TooShort(_) => SsStatus::TooShort,
        Error::Shape(_) => SsStatus::Shape,
        Error::IncompatibleTempo { .. } => SsStatus::IncompatibleTempo,
        Error::LowConfidence(_) => SsStatus::LowConfidence,
        Error::Image(_) | Error::Io(_) => SsStatus::Io,
    }
}

fn invalid(msg: &str) -> SsStatus {
    set_error(msg.to_string());
    SsStatus::InvalidArgument
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), SsStatus>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            SsStatus::Internal
        }
    }
}

fn lift<T>(r: spectraseam::Result<T>) -> Result<T, SsStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn input<'a, T>(data: *const T, len: usize) -> Result<&'a [T], SsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(invalid("null data pointer with non-zero length"));
    }
    Ok(slice::from_raw_parts(data, len))
}

/// Message describing the most recent failure on this thread, or null if
/// there has been none. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ss_config_default() -> SsConfig {
    let c = Config::default();
    SsConfig {
        fft_size: c.fft_size,
        hop: c.hop,
        overlap_beats: c.overlap_beats,
        force_tempo: c.force_tempo,
        has_a_start: false,
        a_start: 0.0,
        has_b_start: false,
        b_start: 0.0,
    }
}

impl From<&SsConfig> for Config {
    fn from(c: &SsConfig) -> Self {
        Config {
            fft_size: c.fft_size,
            hop: c.hop,
            overlap_beats: c.overlap_beats,
            force_tempo: c.force_tempo,
            a_start: c.has_a_start.then_some(c.a_start),
            b_start: c.has_b_start.then_some(c.b_start),
            ..Config::default()
        }
    }
}

/// Copies `len` samples into a new clip.
#[no_mangle]
pub unsafe extern "C" fn ss_clip_from_samples(
    samples: *const f32,
    len: usize,
    sample_rate: u32,
    out: *mut *mut SsClip,
) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let samples = input(samples, len)?.to_vec();
        let clip = lift(AudioClip::new(samples, sample_rate))?;
        *out = Box::into_raw(Box::new(SsClip(clip)));
        Ok(())
    })
}

/// Decodes WAV bytes (PCM or 32-bit float, mono or stereo) into a clip.
#[no_mangle]
pub unsafe extern "C" fn ss_clip_from_wav(
    data: *const u8,
    len: usize,
    out: *mut *mut SsClip,
) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let clip = lift(decode_wav(input(data, len)?))?;
        *out = Box::into_raw(Box::new(SsClip(clip)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ss_clip_free(clip: *mut SsClip) {
    if !clip.is_null() {
        drop(Box::from_raw(clip));
    }
}

/// Number of samples, or 0 for a null clip.
#[no_mangle]
pub unsafe extern "C" fn ss_clip_len(clip: *const SsClip) -> usize {
    clip.as_ref().map_or(0, |c| c.0.len())
}

/// Sample rate in Hz, or 0 for a null clip.
#[no_mangle]
pub unsafe extern "C" fn ss_clip_sample_rate(clip: *const SsClip) -> u32 {
    clip.as_ref().map_or(0, |c| c.0.sample_rate())
}

/// Borrowed pointer to the samples; valid while the clip lives.
#[no_mangle]
pub unsafe extern "C" fn ss_clip_samples(clip: *const SsClip) -> *const f32 {
    clip.as_ref()
        .map_or(ptr::null(), |c| c.0.samples().as_ptr())
}

/// Encodes the clip as 16-bit PCM WAV into `out`.
#[no_mangle]
pub unsafe extern "C" fn ss_clip_encode_wav(clip: *const SsClip, out: *mut SsBuffer) -> SsStatus {
    guard(|| {
        let (Some(clip), false) = (clip.as_ref(), out.is_null()) else {
            return Err(invalid("clip or out is null"));
        };
        let bytes = lift(encode_wav(&clip.0))?.into_boxed_slice();
        let len = bytes.len();
        *out = SsBuffer {
            data: Box::into_raw(bytes).cast(),
            len,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ss_buffer_free(buffer: SsBuffer) {
    if !buffer.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(
            buffer.data,
            buffer.len,
        )));
    }
}

/// Runs the full pipeline from track `a` into track `b`.
#[no_mangle]
pub unsafe extern "C" fn ss_transition(
    a: *const SsClip,
    b: *const SsClip,
    config: *const SsConfig,
    out: *mut *mut SsTransition,
) -> SsStatus {
    guard(|| {
        let (Some(a), Some(b), false) = (a.as_ref(), b.as_ref(), out.is_null()) else {
            return Err(invalid("a, b or out is null"));
        };
        let cfg = config.as_ref().map_or_else(Config::default, Config::from);
        let outcome = lift(run_transition(&a.0, &b.0, &cfg))?;
        let t = SsTransition {
            output: SsClip(outcome.result.output),
            seam: outcome.result.seam,
            cut_cost: outcome.result.cut_cost,
            tempo_a: outcome.tempo_a.bpm,
            tempo_b: outcome.tempo_b.bpm,
            stretch_ratio: outcome.result.plan.stretch_ratio,
        };
        *out = Box::into_raw(Box::new(t));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ss_transition_free(t: *mut SsTransition) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Borrowed output audio; valid while the transition lives.
#[no_mangle]
pub unsafe extern "C" fn ss_transition_output(t: *const SsTransition) -> *const SsClip {
    t.as_ref().map_or(ptr::null(), |t| &t.output)
}

#[no_mangle]
pub unsafe extern "C" fn ss_transition_cut_cost(t: *const SsTransition) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.cut_cost)
}

#[no_mangle]
pub unsafe extern "C" fn ss_transition_tempo_a(t: *const SsTransition) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.tempo_a)
}

#[no_mangle]
pub unsafe extern "C" fn ss_transition_tempo_b(t: *const SsTransition) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.tempo_b)
}

#[no_mangle]
pub unsafe extern "C" fn ss_transition_stretch_ratio(t: *const SsTransition) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.stretch_ratio)
}

/// Overlap length in STFT frames.
#[no_mangle]
pub unsafe extern "C" fn ss_transition_frames(t: *const SsTransition) -> usize {
    t.as_ref().map_or(0, |t| t.seam.frames)
}

/// Number of frequency bins in the seam.
#[no_mangle]
pub unsafe extern "C" fn ss_transition_bins(t: *const SsTransition) -> usize {
    t.as_ref().map_or(0, |t| t.seam.bins())
}

/// Flip frames of one bin. `flips` receives a borrowed pointer valid while
/// the transition lives.
#[no_mangle]
pub unsafe extern "C" fn ss_transition_seam(
    t: *const SsTransition,
    bin: usize,
    flips: *mut *const usize,
    count: *mut usize,
) -> SsStatus {
    guard(|| {
        let (Some(t), false, false) = (t.as_ref(), flips.is_null(), count.is_null()) else {
            return Err(invalid("t, flips or count is null"));
        };
        let Some(row) = t.seam.flips.get(bin) else {
            set_error(format!("bin {bin} outside 0..{}", t.seam.bins()));
            return Err(SsStatus::Range);
        };
        *flips = row.as_ptr();
        *count = row.len();
        Ok(())
    })
}

/// Min-cut between two frame-major `frames x bins` dB grids.
///
/// Writes one [`SsLabel`] per cell into `labels` (same layout) and the cut
/// cost into `cost`. Either output may be null if not wanted.
#[no_mangle]
pub unsafe extern "C" fn ss_min_cut(
    a_db: *const f64,
    b_db: *const f64,
    frames: usize,
    bins: usize,
    labels: *mut SsLabel,
    cost: *mut f64,
) -> SsStatus {
    guard(|| {
        let cells = frames
            .checked_mul(bins)
            .ok_or_else(|| invalid("frames x bins overflows"))?;
        let a = input(a_db, cells)?;
        let b = input(b_db, cells)?;
        if let Some(i) = a.iter().chain(b).position(|v| !v.is_finite()) {
            set_error(format!("value {i} is not finite"));
            return Err(SsStatus::Range);
        }
        let net = lift(FlowNetwork::grid(frames, bins, |(t, f), (k, l)| {
            edge_weight(
                a[t * bins + f],
                b[t * bins + f],
                a[k * bins + l],
                b[k * bins + l],
            )
        }))?;
        let cut = max_flow_min_cut(&net);
        if !labels.is_null() {
            let out = slice::from_raw_parts_mut(labels, cells);
            for (dst, src) in out.iter_mut().zip(cut.labels()) {
                *dst = match src {
                    Label::Source => SsLabel::A,
                    Label::Sink => SsLabel::B,
                };
            }
        }
        if let Some(cost) = cost.as_mut() {
            *cost = cut.cut_cost();
        }
        Ok(())
    })
}
