use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_reference, enhance, EnhanceOptions, EnhanceReport, GainSpec};
use crate::error::{Error, Result};
use crate::hearing::Listener;
use crate::metrics::evaluate_song;
use crate::stems::provider::read_stem_dir;
use crate::stems::StemProvider;
use crate::wav::{read_wav, write_wav};

/// Where one ensemble member's stems come from.
///
/// A bare string is a stem directory. The tagged forms also allow a noisy
/// oracle built from ground-truth stems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProviderSpec {
    Directory(PathBuf),
    Tagged(TaggedProvider),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaggedProvider {
    Directory { path: PathBuf },
    NoisyOracle { path: PathBuf, snr_db: f64, seed: u64 },
}

impl ProviderSpec {
    fn resolve(&self, base: &Path) -> Self {
        match self {
            ProviderSpec::Directory(p) => ProviderSpec::Directory(base.join(p)),
            ProviderSpec::Tagged(TaggedProvider::Directory { path }) => {
                ProviderSpec::Tagged(TaggedProvider::Directory { path: base.join(path) })
            }
            ProviderSpec::Tagged(TaggedProvider::NoisyOracle { path, snr_db, seed }) => {
                ProviderSpec::Tagged(TaggedProvider::NoisyOracle {
                    path: base.join(path),
                    snr_db: *snr_db,
                    seed: *seed,
                })
            }
        }
    }

    fn provider(&self) -> Result<StemProvider> {
        Ok(match self {
            ProviderSpec::Directory(p) | ProviderSpec::Tagged(TaggedProvider::Directory { path: p }) => {
                StemProvider::directory(p)
            }
            ProviderSpec::Tagged(TaggedProvider::NoisyOracle { path, snr_db, seed }) => {
                StemProvider::noisy_oracle(read_stem_dir(path)?, *snr_db, *seed)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchJob {
    pub id: String,
    pub mix: PathBuf,
    pub stems: Vec<ProviderSpec>,
    pub gains: PathBuf,
    pub listener: PathBuf,
    pub output: PathBuf,
    /// Ground-truth stems; when present the report carries SDR figures.
    #[serde(default)]
    pub reference_stems: Option<PathBuf>,
}

impl BatchJob {
    fn resolve(&self, base: &Path) -> Self {
        BatchJob {
            id: self.id.clone(),
            mix: base.join(&self.mix),
            stems: self.stems.iter().map(|s| s.resolve(base)).collect(),
            gains: base.join(&self.gains),
            listener: base.join(&self.listener),
            output: base.join(&self.output),
            reference_stems: self.reference_stems.as_ref().map(|p| base.join(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchManifest {
    pub jobs: Vec<BatchJob>,
}

impl BatchManifest {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Parses a manifest file. Relative paths are taken relative to the
    /// manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest = BatchManifest::from_json(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        manifest.validate()?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(BatchManifest {
            jobs: manifest.jobs.iter().map(|j| j.resolve(base)).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for job in &self.jobs {
            if !seen.insert(job.id.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate song id `{}` in manifest", job.id)));
            }
            if job.stems.is_empty() {
                return Err(Error::InvalidParameter(format!("job `{}` lists no stem providers", job.id)));
            }
        }
        Ok(())
    }
}

fn run_job(job: &BatchJob, options: &EnhanceOptions) -> Result<EnhanceReport> {
    let mix = read_wav(&job.mix)?;
    let stem_sets = job
        .stems
        .iter()
        .map(|spec| spec.provider()?.stems_for(&mix))
        .collect::<Result<Vec<_>>>()?;
    let gains = GainSpec::load(&job.gains)?;
    let listener = Listener::load(&job.listener)?;

    let enhanced = enhance(&mix, &stem_sets, &gains, &listener, options)?;
    let mut report = enhanced.report;
    report.song_id = job.id.clone();

    if let Some(dir) = &job.reference_stems {
        let truth = read_stem_dir(dir)?;
        let reference = build_reference(&truth, &gains, &listener, options)?;
        let scores = evaluate_song(&reference, &enhanced.output, Some(&truth), Some(&enhanced.stems))?;
        report.overall_sdr = scores.overall_sdr;
        report.per_track_sdr = scores.per_track_sdr;
    }

    if let Some(parent) = job.output.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_wav(&enhanced.output, &job.output, options.output_format)?;
    report.output_path = Some(job.output.display().to_string());
    Ok(report)
}

/// Runs every job on up to `workers` threads. A failing job yields a report
/// with its error set; the others are unaffected. Reports come back in
/// manifest order.
pub fn run_batch(manifest: &BatchManifest, options: &EnhanceOptions, workers: usize) -> Result<Vec<EnhanceReport>> {
    manifest.validate()?;
    options.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        manifest
            .jobs
            .par_iter()
            .map(|job| run_job(job, options).unwrap_or_else(|e| EnhanceReport::failed(&job.id, &e)))
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provider_spec_forms() {
        let text = r#"{"jobs": [{"id": "a", "mix": "m.wav", "stems": ["sep1", {"kind": "directory", "path": "sep2"},
            {"kind": "noisy_oracle", "path": "truth", "snr_db": 10.0, "seed": 3}],
            "gains": "g.json", "listener": "l.json", "output": "out/a.wav"}]}"#;
        let m = BatchManifest::from_json(text).unwrap();
        let job = &m.jobs[0];
        assert_eq!(job.stems[0], ProviderSpec::Directory("sep1".into()));
        assert!(matches!(job.stems[2], ProviderSpec::Tagged(TaggedProvider::NoisyOracle { seed: 3, .. })));
        let resolved = job.resolve(Path::new("/data"));
        assert_eq!(resolved.output, PathBuf::from("/data/out/a.wav"));
        assert_eq!(resolved.stems[1], ProviderSpec::Tagged(TaggedProvider::Directory { path: "/data/sep2".into() }));
    }

    #[test]
    fn duplicate_ids_are_fatal() {
        let text = r#"{"jobs": [
            {"id": "a", "mix": "m", "stems": ["s"], "gains": "g", "listener": "l", "output": "o"},
            {"id": "a", "mix": "m", "stems": ["s"], "gains": "g", "listener": "l", "output": "o2"}]}"#;
        let m = BatchManifest::from_json(text).unwrap();
        assert!(m.validate().is_err());
        assert!(run_batch(&m, &EnhanceOptions::default(), 1).is_err());
    }

    #[test]
    fn empty_manifest_gives_no_reports() {
        let m = BatchManifest::from_json(r#"{"jobs": []}"#).unwrap();
        assert!(run_batch(&m, &EnhanceOptions::default(), 2).unwrap().is_empty());
    }

    #[test]
    fn malformed_manifest_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"jobs": [{"id": 1}]}"#).unwrap();
        assert!(matches!(BatchManifest::load(&p), Err(Error::Json { .. })));
    }
}
