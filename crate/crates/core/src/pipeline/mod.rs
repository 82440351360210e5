//! End-to-end enhancement: ensemble, residual repair, remix, loudness
//! normalization, NAL-R amplification, and clip-triggered compression.

mod batch;
mod enhance;
mod gains;
mod report;

pub use batch::{run_batch, BatchJob, BatchManifest, ProviderSpec};
pub use enhance::{build_reference, enhance, remix, EnhanceOptions, Enhanced};
pub use gains::{GainSpec, TrackGain};
pub use report::{write_reports, EnhanceReport, OptionsEcho, Stage, SCHEMA_VERSION};
