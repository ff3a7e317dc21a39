use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use spectraseam::beats::analyze_clip;
use spectraseam::pipeline::SeamReport;
use spectraseam::{
    decode_wav, encode_wav, render::spectrogram_png, resample, run_cut, run_transition, AudioClip,
    Config, DbSpectrogram, Error, FlowNetwork, Seam, CANONICAL_RATE,
};

#[derive(Parser)]
#[command(
    name = "spectraseam",
    version,
    about = "Per-frequency min-cut transitions between two tracks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tempo-match, beat-align and transition from track A into track B.
    Transition {
        track_a: PathBuf,
        track_b: PathBuf,
        #[command(flatten)]
        stft: StftArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Overlap length in beats.
        #[arg(long, default_value_t = 64)]
        overlap_beats: usize,
        /// Continue even if a tempo estimate is low-confidence.
        #[arg(long)]
        force_tempo: bool,
        /// Start A's overlap at this time (seconds, snapped to a beat).
        #[arg(long, value_name = "SECS")]
        a_start: Option<f64>,
        /// Start B's overlap at this time (seconds, snapped to a beat).
        #[arg(long, value_name = "SECS")]
        b_start: Option<f64>,
    },
    /// Estimate tempo and beats; prints JSON to stdout.
    Analyze {
        track: PathBuf,
        #[command(flatten)]
        stft: StftArgs,
    },
    /// Cut between two pre-extracted, aligned segments.
    Cut {
        segment_a: PathBuf,
        segment_b: PathBuf,
        #[command(flatten)]
        stft: StftArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct StftArgs {
    /// FFT window length in samples (power of two).
    #[arg(long, default_value_t = 2048)]
    fft_size: usize,
    /// Hop between frames in samples [default: fft-size / 4].
    #[arg(long)]
    hop: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output WAV path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Write the seam spectrogram as PNG.
    #[arg(long, value_name = "FILE")]
    png: Option<PathBuf>,
    /// Write seam metadata as JSON.
    #[arg(long, value_name = "FILE")]
    seam_json: Option<PathBuf>,
    /// Write the flow network as `u v cap` lines.
    #[arg(long, value_name = "FILE")]
    dump_graph: Option<PathBuf>,
}

impl StftArgs {
    fn apply(&self, cfg: &mut Config) {
        cfg.fft_size = self.fft_size;
        cfg.hop = self.hop.unwrap_or(self.fft_size / 4);
    }
}

fn load(path: &Path) -> Result<AudioClip, Error> {
    let bytes = fs::read(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    decode_wav(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        Error::Unsupported(m) => Error::Unsupported(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write_outputs(
    out: &OutputArgs,
    audio: &AudioClip,
    overlap_db: &DbSpectrogram,
    seam: &Seam,
    report: &SeamReport,
    network: Option<&FlowNetwork>,
) -> Result<(), Error> {
    fs::write(&out.out, encode_wav(audio)?)?;
    info!("wrote {}", out.out.display());
    if let Some(path) = &out.png {
        fs::write(path, spectrogram_png(&overlap_db.relative_to_peak(), seam)?)?;
        info!("wrote {}", path.display());
    }
    if let Some(path) = &out.seam_json {
        let json = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
        fs::write(path, json + "\n")?;
        info!("wrote {}", path.display());
    }
    if let (Some(path), Some(net)) = (&out.dump_graph, network) {
        let file = std::io::BufWriter::new(fs::File::create(path)?);
        net.write_dump(file)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Transition {
            track_a,
            track_b,
            stft,
            out,
            overlap_beats,
            force_tempo,
            a_start,
            b_start,
        } => {
            let mut cfg = Config {
                overlap_beats,
                force_tempo,
                a_start,
                b_start,
                keep_network: out.dump_graph.is_some(),
                ..Config::default()
            };
            stft.apply(&mut cfg);
            cfg.validate()?;
            let a = load(&track_a)?;
            let b = load(&track_b)?;
            let outcome = run_transition(&a, &b, &cfg)?;
            write_outputs(
                &out,
                &outcome.result.output,
                &outcome.overlap_db,
                &outcome.result.seam,
                &outcome.report(),
                outcome.network.as_ref(),
            )
        }
        Command::Analyze { track, stft } => {
            let mut cfg = Config::default();
            stft.apply(&mut cfg);
            cfg.validate()?;
            let clip = resample(&load(&track)?, CANONICAL_RATE)?;
            let analysis = analyze_clip(&clip, cfg.fft_size, cfg.hop, &cfg.tempo)?;
            let json = serde_json::to_string_pretty(&analysis).map_err(std::io::Error::other)?;
            println!("{json}");
            Ok(())
        }
        Command::Cut {
            segment_a,
            segment_b,
            stft,
            out,
        } => {
            let mut cfg = Config {
                keep_network: out.dump_graph.is_some(),
                ..Config::default()
            };
            stft.apply(&mut cfg);
            cfg.validate()?;
            let a = load(&segment_a)?;
            let b = load(&segment_b)?;
            let outcome = run_cut(&a, &b, &cfg)?;
            write_outputs(
                &out,
                &outcome.output,
                &outcome.overlap_db,
                &outcome.seam,
                &outcome.report(),
                outcome.network.as_ref(),
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
