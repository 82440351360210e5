use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FREQUENCIES: [f64; 6] = [250.0, 500.0, 1000.0, 2000.0, 4000.0, 6000.0];

/// Hearing loss of one ear in dB HL at ascending audiometric frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Audiogram {
    frequencies: Vec<f64>,
    levels: Vec<f64>,
}

impl Audiogram {
    pub fn new(frequencies: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if frequencies.len() != levels.len() {
            return Err(Error::InvalidAudiogram(format!(
                "{} frequencies but {} levels",
                frequencies.len(),
                levels.len()
            )));
        }
        if frequencies.iter().any(|&f| !f.is_finite() || f <= 0.0) {
            return Err(Error::InvalidAudiogram("frequencies must be positive".into()));
        }
        if frequencies.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAudiogram("frequencies must be strictly ascending".into()));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidAudiogram("levels must be finite".into()));
        }
        for anchor in [500u32, 1000, 2000] {
            if !frequencies.contains(&f64::from(anchor)) {
                return Err(Error::MissingAnchor(anchor));
            }
        }
        Ok(Audiogram {
            frequencies,
            levels,
        })
    }

    /// Audiogram at the default frequencies with the same level everywhere.
    pub fn flat(level: f64) -> Self {
        Audiogram::new(DEFAULT_FREQUENCIES.to_vec(), vec![level; DEFAULT_FREQUENCIES.len()])
            .expect("default frequencies are valid")
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Level at exactly `freq`, if measured.
    pub fn level_at(&self, freq: f64) -> Option<f64> {
        self.frequencies
            .iter()
            .position(|&f| f == freq)
            .map(|i| self.levels[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Listener {
    pub id: String,
    pub left: Audiogram,
    pub right: Audiogram,
}

#[derive(Serialize, Deserialize)]
struct ListenerFile {
    id: String,
    frequencies: Vec<f64>,
    left_db_hl: Vec<f64>,
    right_db_hl: Vec<f64>,
}

impl Listener {
    pub fn from_json(text: &str) -> Result<Self> {
        Listener::parse(text, Path::new("<inline>"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Listener::parse(&text, path)
    }

    fn parse(text: &str, origin: &Path) -> Result<Self> {
        let raw: ListenerFile = serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_path_buf(),
            source,
        })?;
        Ok(Listener {
            left: Audiogram::new(raw.frequencies.clone(), raw.left_db_hl)?,
            right: Audiogram::new(raw.frequencies, raw.right_db_hl)?,
            id: raw.id,
        })
    }

    /// Serializes with both ears on the left ear's frequency grid. Fails if
    /// the ears use different grids.
    pub fn to_json(&self) -> Result<String> {
        if self.left.frequencies != self.right.frequencies {
            return Err(Error::InvalidAudiogram(
                "listener file format needs a shared frequency grid".into(),
            ));
        }
        let raw = ListenerFile {
            id: self.id.clone(),
            frequencies: self.left.frequencies.clone(),
            left_db_hl: self.left.levels.clone(),
            right_db_hl: self.right.levels.clone(),
        };
        Ok(serde_json::to_string_pretty(&raw).expect("listener serializes"))
    }
}
