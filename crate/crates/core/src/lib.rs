//! Music remixing and enhancement for hearing-aid listeners.
//!
//! Separated VDBO stems (vocals, drums, bass, other) from one or more
//! separators are averaged, the "other" track is repaired with the mixture
//! residual, the song is remixed to the listener's gains, normalized back to
//! the input loudness, amplified per ear with a NAL-R prescription, and
//! compressed when the amplified signal clips heavily.
//!
//! ```text
//! ensemble -> residual -> remix -> normalize -> NAL-R -> clip check -> (compress)
//! ```
//!
//! Around the pipeline sit the tools used to build and score test material:
//! stereo crosstalk simulation, salient-segment selection, and SDR.

pub mod audio;
pub mod convolve;
pub mod error;
pub mod hearing;
pub mod levels;
pub mod metrics;
pub mod pipeline;
pub mod spatial;
pub mod stems;
pub mod wav;

pub use audio::{db_to_linear, linear_to_db, AudioBuffer};
pub use error::{Error, Result};
pub use hearing::{Audiogram, Listener};
pub use pipeline::{build_reference, enhance, remix, EnhanceOptions, EnhanceReport, GainSpec, TrackGain};
pub use stems::{StemSet, Track};
