use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hearmix::levels::CompressorParams;
use hearmix::metrics::evaluate_song;
use hearmix::pipeline::{run_batch, write_reports, BatchManifest, EnhanceReport};
use hearmix::spatial::{apply_crosstalk, load_kernel};
use hearmix::stems::provider::read_stem_dir;
use hearmix::stems::{salient_segments, StemProvider, Track};
use hearmix::wav::{read_wav, write_wav, BitDepth, WavFormat};
use hearmix::{build_reference, enhance, EnhanceOptions, GainSpec, Listener};

/// Exit status when a batch finished but some jobs failed.
const PARTIAL_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "hearmix", version, about = "Remix and enhance music for hearing-aid listeners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance one song from separated stems.
    Enhance(EnhanceCmd),
    /// Score an estimate against a reference with SDR.
    Evaluate(EvaluateCmd),
    /// Build the ground-truth enhanced signal from true stems.
    Reference(ReferenceCmd),
    /// Apply stereo crosstalk with a speaker-to-ear kernel.
    Simulate(SimulateCmd),
    /// List windows where one track dominates the energy.
    Segments(SegmentsCmd),
    /// Run every job in a manifest.
    Batch(BatchCmd),
}

#[derive(Args)]
struct PipelineFlags {
    /// Do not blend the mixture residual into the "other" track.
    #[arg(long)]
    no_residual: bool,
    /// Never apply the compressor.
    #[arg(long)]
    no_compressor: bool,
    /// Ensemble weights, one per --stems entry.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Weight of the residual in the "other" blend.
    #[arg(long, default_value_t = 0.5)]
    blend_weight: f64,
    /// NAL-R filter length (odd).
    #[arg(long, default_value_t = hearmix::hearing::DEFAULT_TAPS)]
    taps: usize,
    #[arg(long, default_value_t = CompressorParams::default().threshold_db, allow_hyphen_values = true)]
    comp_threshold: f64,
    #[arg(long, default_value_t = CompressorParams::default().ratio)]
    comp_ratio: f64,
    /// Attack time in ms.
    #[arg(long, default_value_t = CompressorParams::default().attack_ms)]
    comp_attack: f64,
    /// Release time in ms.
    #[arg(long, default_value_t = CompressorParams::default().release_ms)]
    comp_release: f64,
    #[arg(long, default_value_t = CompressorParams::default().makeup_db, allow_hyphen_values = true)]
    comp_makeup: f64,
    #[command(flatten)]
    format: FormatFlag,
}

#[derive(Args)]
struct FormatFlag {
    /// Output sample format: 16, 24 or 32f.
    #[arg(long = "format", default_value = "32f")]
    bit_depth: BitDepth,
}

impl FormatFlag {
    fn wav(&self) -> WavFormat {
        WavFormat {
            bit_depth: self.bit_depth,
        }
    }
}

impl PipelineFlags {
    fn options(&self) -> EnhanceOptions {
        EnhanceOptions {
            use_residual: !self.no_residual,
            use_compressor_heuristic: !self.no_compressor,
            ensemble_weights: self.weights.clone(),
            blend_weight: self.blend_weight,
            n_taps: self.taps,
            compressor: CompressorParams {
                threshold_db: self.comp_threshold,
                ratio: self.comp_ratio,
                attack_ms: self.comp_attack,
                release_ms: self.comp_release,
                makeup_db: self.comp_makeup,
            },
            output_format: self.format.wav(),
        }
    }
}

#[derive(Args)]
struct EnhanceCmd {
    #[arg(long)]
    mix: PathBuf,
    /// Stem directory of one ensemble member; repeat for more.
    #[arg(long, required = true)]
    stems: Vec<PathBuf>,
    #[arg(long)]
    gains: PathBuf,
    #[arg(long)]
    listener: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

#[derive(Args)]
struct EvaluateCmd {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long, requires = "est_stems")]
    ref_stems: Option<PathBuf>,
    #[arg(long, requires = "ref_stems")]
    est_stems: Option<PathBuf>,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct ReferenceCmd {
    #[arg(long)]
    stems: PathBuf,
    #[arg(long)]
    gains: PathBuf,
    #[arg(long)]
    listener: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = hearmix::hearing::DEFAULT_TAPS)]
    taps: usize,
    #[command(flatten)]
    format: FormatFlag,
}

#[derive(Args)]
struct SimulateCmd {
    #[arg(long = "in")]
    input: PathBuf,
    /// 4-channel WAV (LL, RL, LR, RR) or a directory of ll/rl/lr/rr.wav.
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    format: FormatFlag,
}

#[derive(Args)]
struct SegmentsCmd {
    #[arg(long)]
    stems: PathBuf,
    #[arg(long)]
    track: Track,
    #[arg(long, default_value_t = hearmix::stems::DEFAULT_SEGMENT_SECONDS)]
    seconds: f64,
    #[arg(long, default_value_t = hearmix::stems::DEFAULT_RATIO_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct BatchCmd {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

fn write_json(path: &PathBuf, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn file_stem(path: &std::path::Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run_enhance(cmd: EnhanceCmd) -> Result<()> {
    let options = cmd.pipeline.options();
    let mix = read_wav(&cmd.mix)?;
    let stem_sets = cmd
        .stems
        .iter()
        .map(|dir| StemProvider::directory(dir).stems_for(&mix))
        .collect::<hearmix::Result<Vec<_>>>()?;
    let gains = GainSpec::load(&cmd.gains)?;
    let listener = Listener::load(&cmd.listener)?;
    let enhanced = enhance(&mix, &stem_sets, &gains, &listener, &options)?;
    write_wav(&enhanced.output, &cmd.out, options.output_format)?;
    if let Some(path) = &cmd.report {
        let mut report = enhanced.report;
        report.song_id = file_stem(&cmd.mix);
        report.output_path = Some(cmd.out.display().to_string());
        write_reports(path, &[report])?;
    }
    Ok(())
}

fn run_evaluate(cmd: EvaluateCmd) -> Result<()> {
    let reference = read_wav(&cmd.reference)?;
    let estimate = read_wav(&cmd.estimate)?;
    let (ref_stems, est_stems) = match (&cmd.ref_stems, &cmd.est_stems) {
        (Some(r), Some(e)) => (Some(read_stem_dir(r)?), Some(read_stem_dir(e)?)),
        _ => (None, None),
    };
    let scores = evaluate_song(&reference, &estimate, ref_stems.as_ref(), est_stems.as_ref())?;
    let mut report = EnhanceReport::new(file_stem(&cmd.estimate));
    report.overall_sdr = scores.overall_sdr;
    report.per_track_sdr = scores.per_track_sdr;
    write_reports(&cmd.report, &[report])?;
    Ok(())
}

fn run_reference(cmd: ReferenceCmd) -> Result<()> {
    let stems = read_stem_dir(&cmd.stems)?;
    let gains = GainSpec::load(&cmd.gains)?;
    let listener = Listener::load(&cmd.listener)?;
    let options = EnhanceOptions {
        n_taps: cmd.taps,
        ..EnhanceOptions::default()
    };
    let reference = build_reference(&stems, &gains, &listener, &options)?;
    write_wav(&reference, &cmd.out, cmd.format.wav())?;
    Ok(())
}

fn run_simulate(cmd: SimulateCmd) -> Result<()> {
    let input = read_wav(&cmd.input)?;
    let kernel = load_kernel(&cmd.kernel)?;
    let out = apply_crosstalk(&input, &kernel)?;
    write_wav(&out, &cmd.out, cmd.format.wav())?;
    Ok(())
}

fn run_segments(cmd: SegmentsCmd) -> Result<()> {
    if !cmd.seconds.is_finite() || cmd.seconds <= 0.0 {
        bail!("--seconds must be positive");
    }
    let stems = read_stem_dir(&cmd.stems)?;
    let rate = stems.reference().sample_rate();
    let frames = (cmd.seconds * f64::from(rate)).round() as usize;
    let segments = salient_segments(&stems, cmd.track, frames, cmd.threshold)?;
    write_json(
        &cmd.report,
        &serde_json::json!({
            "schema_version": hearmix::pipeline::SCHEMA_VERSION,
            "track": cmd.track,
            "sample_rate": rate,
            "segment_frames": frames,
            "ratio_threshold": cmd.threshold,
            "segments": segments,
        }),
    )
}

fn run_batch_cmd(cmd: BatchCmd) -> Result<ExitCode> {
    let manifest = BatchManifest::load(&cmd.manifest)?;
    let reports = run_batch(&manifest, &cmd.pipeline.options(), cmd.workers)?;
    write_reports(&cmd.report, &reports)?;
    let failed: Vec<&EnhanceReport> = reports.iter().filter(|r| r.is_error()).collect();
    for r in &failed {
        eprintln!("job {} failed: {}", r.song_id, r.error.as_deref().unwrap_or(""));
    }
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} of {} jobs failed", failed.len(), reports.len());
        Ok(ExitCode::from(PARTIAL_FAILURE))
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Enhance(c) => run_enhance(c)?,
        Command::Evaluate(c) => run_evaluate(c)?,
        Command::Reference(c) => run_reference(c)?,
        Command::Simulate(c) => run_simulate(c)?,
        Command::Segments(c) => run_segments(c)?,
        Command::Batch(c) => return run_batch_cmd(c),
    }
    Ok(ExitCode::SUCCESS)
}
