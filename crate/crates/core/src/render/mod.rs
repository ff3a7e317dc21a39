//! Compositing along the cut, reconstruction, splicing and seam images.

mod colormap;

use crate::align::OverlapPlan;
use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::mincut::{extract_seam, CutLabeling, Label, Seam};
use crate::spectral::{istft, stft_frames, ComplexSpectrogram, DbSpectrogram, DB_FLOOR};

/// Seam overlay color (cyan); no colormap entry uses it.
pub const SEAM_COLOR: [u8; 3] = [0, 255, 255];

/// A finished transition.
#[derive(Debug, Clone)]
pub struct TransitionResult {
    pub output: AudioClip,
    pub seam: Seam,
    pub cut_cost: f64,
    pub plan: OverlapPlan,
}

/// Takes each cell from A where the labeling says source, otherwise from B.
pub fn composite(
    spec_a: &ComplexSpectrogram,
    spec_b: &ComplexSpectrogram,
    labels: &CutLabeling,
) -> Result<ComplexSpectrogram> {
    let shape_a = (spec_a.frames(), spec_a.bins());
    let shape_b = (spec_b.frames(), spec_b.bins());
    let shape_l = (labels.frames(), labels.bins());
    if shape_a != shape_b || shape_a != shape_l || spec_a.hop() != spec_b.hop() {
        return Err(Error::Shape(format!(
            "cannot composite {shape_a:?} with {shape_b:?} under a {shape_l:?} labeling"
        )));
    }
    let values = spec_a
        .values()
        .iter()
        .zip(spec_b.values())
        .zip(labels.labels())
        .map(|((a, b), label)| match label {
            Label::Source => *a,
            Label::Sink => *b,
        })
        .collect();
    Ok(spec_a.with_values(spec_a.frames(), values))
}

/// Reconstructs the overlap and splices it between A's lead-in and B's
/// remainder.
///
/// The output is A up to the first overlap frame, then the inverse
/// transform of `overlap_spec` for `plan.frames * hop` samples, then B from
/// the end of its overlap window. A's frames just before the window are
/// prepended to the inverse transform so the first overlap samples are
/// fully covered by the overlap-add; frame 0 of the overlap is always
/// taken from A, so the join with A's lead-in is continuous.
pub fn render_transition(
    track_a: &AudioClip,
    track_b_stretched: &AudioClip,
    plan: &OverlapPlan,
    overlap_spec: &ComplexSpectrogram,
    labels: &CutLabeling,
) -> Result<TransitionResult> {
    let hop = overlap_spec.hop();
    let n = overlap_spec.fft_size();
    let frames = plan.frames;
    if overlap_spec.frames() != frames {
        return Err(Error::Shape(format!(
            "overlap spectrogram has {} frames, plan has {frames}",
            overlap_spec.frames()
        )));
    }
    if track_a.sample_rate() != track_b_stretched.sample_rate()
        || track_a.sample_rate() != overlap_spec.sample_rate()
    {
        return Err(Error::Config(
            "tracks and spectrogram must share a sample rate".into(),
        ));
    }
    for (name, clip, start) in [
        ("track A", track_a, plan.a_start_frame),
        ("track B", track_b_stretched, plan.b_start_frame),
    ] {
        let available = clip.len().div_ceil(hop);
        if start + frames > available {
            return Err(Error::Range(format!(
                "{name}: frames {start}..{} outside 0..{available}",
                start + frames
            )));
        }
    }

    let lead = (n / hop).saturating_sub(1).min(plan.a_start_frame);
    let context = stft_frames(track_a, n, hop, plan.a_start_frame - lead, lead)?;
    let mut values = context.values().to_vec();
    values.extend_from_slice(overlap_spec.values());
    let extended = overlap_spec.with_values(lead + frames, values);
    let rendered = istft(&extended)?;
    let overlap = &rendered.samples()[lead * hop..(lead + frames) * hop];

    let a_cut = plan.a_start_frame * hop;
    let b_resume = ((plan.b_start_frame + frames) * hop).min(track_b_stretched.len());
    let a_head = &track_a.samples()[..a_cut.min(track_a.len())];
    let b_tail = &track_b_stretched.samples()[b_resume..];

    let mut out = Vec::with_capacity(a_head.len() + overlap.len() + b_tail.len());
    out.extend_from_slice(a_head);
    out.extend_from_slice(overlap);
    out.extend_from_slice(b_tail);
    for s in &mut out {
        *s = s.clamp(-1.0, 1.0);
    }

    Ok(TransitionResult {
        output: AudioClip::new(out, track_a.sample_rate())?,
        seam: extract_seam(labels),
        cut_cost: labels.cut_cost(),
        plan: plan.clone(),
    })
}

fn colormap(db: f64) -> [u8; 3] {
    let x = ((db - DB_FLOOR) / -DB_FLOOR).clamp(0.0, 1.0);
    colormap::MAGMA[(x * 255.0).round() as usize]
}

/// Pixels covered by the seam overlay as `(frame, bin)` pairs.
///
/// Every flip position is marked. Consecutive bins' first flips are also
/// joined by a horizontal run in the lower bin so the primary seam forms a
/// connected path from the lowest to the highest bin.
pub fn seam_pixels(seam: &Seam) -> Vec<(usize, usize)> {
    let mut pixels = Vec::new();
    for (b, flips) in seam.flips.iter().enumerate() {
        pixels.extend(flips.iter().map(|&t| (t, b)));
        if let (Some(here), Some(above)) =
            (flips.first(), seam.flips.get(b + 1).and_then(|f| f.first()))
        {
            let (lo, hi) = (*here.min(above), *here.max(above));
            pixels.extend((lo..=hi).map(|t| (t, b)));
        }
    }
    pixels.sort_unstable();
    pixels.dedup();
    pixels
}

/// Renders an 8-bit RGB PNG with one pixel per (frame, bin): time runs left
/// to right, frequency bottom to top. Values are mapped over [-100, 0] dB
/// and the seam is drawn on top in [`SEAM_COLOR`].
pub fn spectrogram_png(db: &DbSpectrogram, seam: &Seam) -> Result<Vec<u8>> {
    let (width, height) = (db.frames(), db.bins());
    if seam.bins() != height {
        return Err(Error::Shape(format!(
            "seam has {} bins, image has {height}",
            seam.bins()
        )));
    }
    if let Some(t) = seam.flips.iter().flatten().find(|&&t| t >= width) {
        return Err(Error::Range(format!("seam frame {t} outside 0..{width}")));
    }

    let mut rgb = vec![0u8; width * height * 3];
    let pixel = |t: usize, b: usize| ((height - 1 - b) * width + t) * 3;
    for t in 0..width {
        for b in 0..height {
            let i = pixel(t, b);
            rgb[i..i + 3].copy_from_slice(&colormap(db.get(t, b)));
        }
    }
    for (t, b) in seam_pixels(seam) {
        let i = pixel(t, b);
        rgb[i..i + 3].copy_from_slice(&SEAM_COLOR);
    }

    let mut bytes = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut bytes, width as u32, height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Image(e.to_string()))?;
        writer
            .write_image_data(&rgb)
            .map_err(|e| Error::Image(e.to_string()))?;
    }
    Ok(bytes)
}
