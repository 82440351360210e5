use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::hearing::{nalr_process, Listener, DEFAULT_TAPS};
use crate::levels::{
    compress, count_clipped, integrated_loudness, loudness_gain, should_compress, CompressorParams,
};
use crate::stems::{blend_other_weighted, compute_residual, ensemble_average, StemSet, Track, DEFAULT_BLEND_WEIGHT};
use crate::wav::WavFormat;

use super::{EnhanceReport, GainSpec, OptionsEcho, Stage, TrackGain};

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceOptions {
    /// Average the residual into the "other" track.
    pub use_residual: bool,
    /// Compress when the amplified signal clips often enough.
    pub use_compressor_heuristic: bool,
    pub ensemble_weights: Option<Vec<f64>>,
    /// Weight of the residual in the "other" blend.
    pub blend_weight: f64,
    pub n_taps: usize,
    pub compressor: CompressorParams,
    pub output_format: WavFormat,
}

impl Default for EnhanceOptions {
    fn default() -> Self {
        EnhanceOptions {
            use_residual: true,
            use_compressor_heuristic: true,
            ensemble_weights: None,
            blend_weight: DEFAULT_BLEND_WEIGHT,
            n_taps: DEFAULT_TAPS,
            compressor: CompressorParams::default(),
            output_format: WavFormat::default(),
        }
    }
}

impl EnhanceOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.blend_weight) {
            return Err(Error::InvalidParameter(format!(
                "blend weight {} outside [0, 1]",
                self.blend_weight
            )));
        }
        self.compressor.validate()
    }
}

/// Output of [`enhance`].
#[derive(Debug, Clone)]
pub struct Enhanced {
    pub output: AudioBuffer,
    /// Stems after ensembling and residual repair, before remixing.
    pub stems: StemSet,
    /// Amplified signal before any compression.
    pub amplified: AudioBuffer,
    pub report: EnhanceReport,
}

/// Sum of the tracks, each scaled by its gain. Muted tracks contribute
/// nothing.
pub fn remix(stems: &StemSet, gains: &GainSpec) -> Result<AudioBuffer> {
    let reference = stems.reference();
    let mut channels = vec![vec![0.0; reference.num_frames()]; reference.num_channels()];
    for (track, buffer) in stems.iter() {
        let factor = match gains.get(track) {
            TrackGain::Mute => continue,
            g => g.factor(),
        };
        for (acc, src) in channels.iter_mut().zip(buffer.channels()) {
            for (a, &x) in acc.iter_mut().zip(src) {
                *a += factor * x;
            }
        }
    }
    AudioBuffer::new(reference.sample_rate(), channels)
}

fn defined(l: crate::levels::Loudness) -> Result<f64> {
    l.value().ok_or(Error::UndefinedLoudness)
}

/// Runs the full enhancement chain on one song.
///
/// Stage order is fixed: ensemble average, residual repair of "other"
/// (optional), remix, normalization to the input mixture's loudness, per-ear
/// NAL-R, clip count, and compression when the heuristic is on and fires.
pub fn enhance(
    mix: &AudioBuffer,
    stem_sets: &[StemSet],
    gains: &GainSpec,
    listener: &Listener,
    options: &EnhanceOptions,
) -> Result<Enhanced> {
    options.validate()?;
    let mut report = EnhanceReport::new("");
    report.options = Some(OptionsEcho::from(options));
    report.ensemble_size = stem_sets.len();

    let mut stems = ensemble_average(stem_sets, options.ensemble_weights.as_deref())?;
    stems.check_aligned_with(mix)?;
    report.stages.push(Stage::Ensemble);

    if options.use_residual {
        let residual = compute_residual(mix, &stems)?;
        let other = blend_other_weighted(stems.get(Track::Other), &residual, options.blend_weight)?;
        stems = stems.with_track(Track::Other, other)?;
        report.stages.push(Stage::Residual);
    }

    let remixed = remix(&stems, gains)?;
    report.stages.push(Stage::Remix);

    let target = defined(integrated_loudness(mix)?)?;
    report.input_loudness_lufs = Some(target);
    report.remix_loudness_lufs = integrated_loudness(&remixed)?.value();
    let gain = loudness_gain(&remixed, target)?;
    report.normalization_gain_db = Some(20.0 * gain.log10());
    let normalized = remixed.scaled(gain)?;
    report.stages.push(Stage::Normalize);

    let amplified = nalr_process(&normalized, listener, options.n_taps)?;
    report.stages.push(Stage::Nalr);

    let clips = count_clipped(&amplified);
    report.stages.push(Stage::ClipCheck);
    report.compressor_applied = options.use_compressor_heuristic && should_compress(&clips);
    report.clip_counts = clips.counts;
    report.clip_threshold = clips.threshold;

    let output = if report.compressor_applied {
        report.stages.push(Stage::Compress);
        compress(&amplified, &options.compressor)?
    } else {
        amplified.clone()
    };
    report.output_peak = Some(output.peak());

    Ok(Enhanced {
        output,
        stems,
        amplified,
        report,
    })
}

/// Ground-truth enhanced signal: remix the true stems, normalize to the
/// loudness of their unity-gain sum, then apply NAL-R. No compression.
pub fn build_reference(
    true_stems: &StemSet,
    gains: &GainSpec,
    listener: &Listener,
    options: &EnhanceOptions,
) -> Result<AudioBuffer> {
    let mixture = true_stems.sum()?;
    let target = defined(integrated_loudness(&mixture)?)?;
    let remixed = remix(true_stems, gains)?;
    let normalized = remixed.scaled(loudness_gain(&remixed, target)?)?;
    nalr_process(&normalized, listener, options.n_taps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hearing::Audiogram;
    use crate::metrics::sdr;
    use crate::stems::tests::{grid_noise, grid_stems};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal_listener() -> Listener {
        Listener {
            id: "nh".into(),
            left: Audiogram::flat(0.0),
            right: Audiogram::flat(0.0),
        }
    }

    fn quiet_options() -> EnhanceOptions {
        EnhanceOptions {
            use_compressor_heuristic: false,
            ..EnhanceOptions::default()
        }
    }

    #[test]
    fn remix_identities() {
        let s = grid_stems(1, 2000);
        let mix = s.sum().unwrap();
        assert_eq!(remix(&s, &GainSpec::unity()).unwrap(), mix);

        let muted = GainSpec::unity().with(Track::Vocals, TrackGain::Mute);
        assert_eq!(remix(&s, &muted).unwrap(), mix.sub(s.get(Track::Vocals)).unwrap());

        let boosted = GainSpec::unity().with(Track::Vocals, TrackGain::Db(6.0206));
        let expect = mix.add(s.get(Track::Vocals)).unwrap();
        let got = remix(&s, &boosted).unwrap();
        for (a, b) in got.channels().iter().flatten().zip(expect.channels().iter().flatten()) {
            assert!((a - b).abs() <= 1e-4 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn identity_chain_reproduces_mix() {
        let s = grid_stems(2, 44100);
        let mix = s.sum().unwrap();
        let out = enhance(&mix, std::slice::from_ref(&s), &GainSpec::unity(), &normal_listener(), &quiet_options()).unwrap();
        assert!(sdr(&mix, &out.output).unwrap().value() >= 60.0);
        assert_eq!(
            out.report.stages,
            vec![Stage::Ensemble, Stage::Residual, Stage::Remix, Stage::Normalize, Stage::Nalr, Stage::ClipCheck]
        );
    }

    #[test]
    fn matches_reference_chain_with_oracle_stems() {
        let s = grid_stems(3, 44100);
        let mix = s.sum().unwrap();
        let listener = Listener {
            id: "x".into(),
            left: Audiogram::flat(45.0),
            right: Audiogram::flat(20.0),
        };
        let gains = GainSpec::unity().with(Track::Drums, TrackGain::Db(-4.0)).with(Track::Bass, TrackGain::Db(3.0));
        let out = enhance(&mix, std::slice::from_ref(&s), &gains, &listener, &quiet_options()).unwrap();
        let reference = build_reference(&s, &gains, &listener, &quiet_options()).unwrap();
        let diff = out.output.sub(&reference).unwrap();
        let rms = (diff.energy() / (2.0 * 44100.0)).sqrt();
        assert!(rms < 1e-6, "rms {rms}");
    }

    #[test]
    fn reference_channels_follow_each_ear() {
        let s = grid_stems(4, 44100);
        let listener = Listener {
            id: "x".into(),
            left: Audiogram::flat(60.0),
            right: Audiogram::flat(0.0),
        };
        let r = build_reference(&s, &GainSpec::unity(), &listener, &quiet_options()).unwrap();
        let norm_mix = s.sum().unwrap();
        let ratio = |c: usize| 10.0 * (r.channel(c).iter().map(|x| x * x).sum::<f64>()
            / norm_mix.channel(c).iter().map(|x| x * x).sum::<f64>()).log10();
        assert!(ratio(0) > 10.0);
        assert!(ratio(1).abs() < 0.5);
    }

    #[test]
    fn all_muted_is_silent_program() {
        let s = grid_stems(5, 44100);
        let mute = GainSpec {
            vocals: TrackGain::Mute,
            drums: TrackGain::Mute,
            bass: TrackGain::Mute,
            other: TrackGain::Mute,
        };
        assert!(matches!(
            build_reference(&s, &mute, &normal_listener(), &quiet_options()),
            Err(Error::UndefinedLoudness)
        ));
        assert!(matches!(
            enhance(&s.sum().unwrap(), std::slice::from_ref(&s), &mute, &normal_listener(), &quiet_options()),
            Err(Error::UndefinedLoudness)
        ));
    }

    #[test]
    fn empty_ensemble_and_misalignment() {
        let s = grid_stems(6, 30000);
        let mix = s.sum().unwrap();
        assert!(enhance(&mix, &[], &GainSpec::unity(), &normal_listener(), &quiet_options()).is_err());
        let short = grid_stems(6, 29999);
        assert!(matches!(
            enhance(&mix, &[short], &GainSpec::unity(), &normal_listener(), &quiet_options()),
            Err(Error::Misaligned(_))
        ));
    }

    #[test]
    fn residual_switch_is_inert_for_perfect_stems() {
        let s = grid_stems(7, 30000);
        let mix = s.sum().unwrap();
        let listener = Listener { id: "x".into(), left: Audiogram::flat(40.0), right: Audiogram::flat(40.0) };
        let on = enhance(&mix, std::slice::from_ref(&s), &GainSpec::unity(), &listener, &quiet_options()).unwrap();
        let off_opts = EnhanceOptions { use_residual: false, ..quiet_options() };
        let off = enhance(&mix, std::slice::from_ref(&s), &GainSpec::unity(), &listener, &off_opts).unwrap();
        assert_eq!(on.output, off.output);
    }

    #[test]
    fn compressor_switch_is_inert_without_clipping() {
        let s = grid_stems(8, 30000);
        let mix = s.sum().unwrap();
        let a = enhance(&mix, std::slice::from_ref(&s), &GainSpec::unity(), &normal_listener(), &EnhanceOptions::default()).unwrap();
        let b = enhance(&mix, std::slice::from_ref(&s), &GainSpec::unity(), &normal_listener(), &quiet_options()).unwrap();
        assert_eq!(a.report.clip_counts, vec![0, 0]);
        assert_eq!(a.output, b.output);
    }

    #[test]
    fn one_hot_weights_match_single_member() {
        let truth = grid_stems(9, 30000);
        let mix = truth.sum().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let other = truth.with_track(Track::Other, grid_noise(&mut rng, 30000, 0.2)).unwrap();
        let weighted = EnhanceOptions { ensemble_weights: Some(vec![0.0, 1.0]), ..quiet_options() };
        let a = enhance(&mix, &[truth.clone(), other.clone()], &GainSpec::unity(), &normal_listener(), &weighted).unwrap();
        let b = enhance(&mix, &[other], &GainSpec::unity(), &normal_listener(), &quiet_options()).unwrap();
        assert_eq!(a.output, b.output);
    }

    #[test]
    fn deterministic() {
        let truth = grid_stems(11, 30000);
        let mix = truth.sum().unwrap();
        let listener = Listener { id: "x".into(), left: Audiogram::flat(30.0), right: Audiogram::flat(50.0) };
        let run = || enhance(&mix, std::slice::from_ref(&truth), &GainSpec::unity(), &listener, &EnhanceOptions::default()).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.output, b.output);
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn rejects_bad_blend_weight() {
        let s = grid_stems(12, 30000);
        let opts = EnhanceOptions { blend_weight: 1.2, ..EnhanceOptions::default() };
        assert!(enhance(&s.sum().unwrap(), std::slice::from_ref(&s), &GainSpec::unity(), &normal_listener(), &opts).is_err());
    }
}
