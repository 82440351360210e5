use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::audio::db_to_linear;
use crate::error::{Error, Result};
use crate::stems::Track;

/// Remix gain for one track: a finite dB value or a full mute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackGain {
    Db(f64),
    Mute,
}

impl TrackGain {
    pub fn factor(self) -> f64 {
        match self {
            TrackGain::Db(db) => db_to_linear(db),
            TrackGain::Mute => 0.0,
        }
    }
}

impl Default for TrackGain {
    fn default() -> Self {
        TrackGain::Db(0.0)
    }
}

impl Serialize for TrackGain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TrackGain::Db(db) => s.serialize_f64(*db),
            TrackGain::Mute => s.serialize_str("mute"),
        }
    }
}

impl<'de> Deserialize<'de> for TrackGain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Db(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Db(db) if db.is_finite() => Ok(TrackGain::Db(db)),
            Raw::Db(db) => Err(serde::de::Error::custom(format!("gain {db} dB is not finite"))),
            Raw::Word(w) if w == "mute" => Ok(TrackGain::Mute),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a dB number or \"mute\", got \"{w}\""
            ))),
        }
    }
}

/// Listener-requested gains for the four tracks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSpec {
    pub vocals: TrackGain,
    pub drums: TrackGain,
    pub bass: TrackGain,
    pub other: TrackGain,
}

impl GainSpec {
    pub fn unity() -> Self {
        GainSpec::default()
    }

    pub fn get(&self, track: Track) -> TrackGain {
        match track {
            Track::Vocals => self.vocals,
            Track::Drums => self.drums,
            Track::Bass => self.bass,
            Track::Other => self.other,
        }
    }

    pub fn with(mut self, track: Track, gain: TrackGain) -> Self {
        match track {
            Track::Vocals => self.vocals = gain,
            Track::Drums => self.drums = gain,
            Track::Bass => self.bass = gain,
            Track::Other => self.other = gain,
        }
        self
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numbers_and_mute() {
        let g: GainSpec = serde_json::from_str(r#"{"vocals": "mute", "drums": -3.5, "bass": 0, "other": 6}"#).unwrap();
        assert_eq!(g.vocals, TrackGain::Mute);
        assert_eq!(g.drums, TrackGain::Db(-3.5));
        assert_eq!(g.get(Track::Other).factor(), db_to_linear(6.0));
        assert_eq!(g.vocals.factor(), 0.0);
        let back: GainSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(serde_json::from_str::<GainSpec>(r#"{"vocals": "loud", "drums": 0, "bass": 0, "other": 0}"#).is_err());
        assert!(serde_json::from_str::<GainSpec>(r#"{"vocals": 0, "drums": 0, "bass": 0}"#).is_err());
        assert!(serde_json::from_str::<GainSpec>(r#"{"vocals": 0, "drums": 0, "bass": 0, "other": 0, "piano": 1}"#).is_err());
    }
}
