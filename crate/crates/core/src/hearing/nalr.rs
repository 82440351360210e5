use serde::{Deserialize, Serialize};

use super::Audiogram;
use crate::error::{Error, Result};

/// NAL-R frequency corrections in dB, table of record.
///
/// Frequencies between entries are interpolated linearly in log-frequency;
/// frequencies outside the table take the nearest edge value.
pub const CORRECTION_TABLE: [(f64, f64); 6] = [
    (250.0, -17.0),
    (500.0, -8.0),
    (1000.0, 1.0),
    (2000.0, -1.0),
    (4000.0, -2.0),
    (6000.0, -2.0),
];

/// Weight on the 500/1000/2000 Hz loss sum.
const THREE_FREQUENCY_WEIGHT: f64 = 0.05;
/// Fraction of the loss at each frequency added as gain.
const LOSS_SLOPE: f64 = 0.31;

/// Insertion gains in dB at the audiogram's frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prescription {
    pub frequencies: Vec<f64>,
    pub gains_db: Vec<f64>,
}

impl Prescription {
    pub fn is_transparent(&self) -> bool {
        self.gains_db.iter().all(|&g| g == 0.0)
    }

    pub fn gain_at(&self, freq: f64) -> Option<f64> {
        self.frequencies
            .iter()
            .position(|&f| f == freq)
            .map(|i| self.gains_db[i])
    }
}

/// Linear interpolation of `(x, y)` points in `ln x`, clamped at the ends.
/// `points` must be ascending in `x`.
pub(crate) fn interp_log(points: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (points[0], points[points.len() - 1]);
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|&(f, _)| f <= x);
    let (f0, y0) = points[i - 1];
    let (f1, y1) = points[i];
    let t = (x.ln() - f0.ln()) / (f1.ln() - f0.ln());
    y0 + t * (y1 - y0)
}

/// Correction term at any frequency.
pub fn correction_db(freq: f64) -> f64 {
    interp_log(&CORRECTION_TABLE, freq)
}

/// NAL-R insertion gains for one ear.
///
/// `gain(f) = max(0, 0.05 * (HL500 + HL1000 + HL2000) + 0.31 * HL(f) + C(f))`.
/// An audiogram with no positive loss anywhere is normal hearing and gets
/// zero gain at every frequency, so its filter is an exact pass-through.
pub fn nalr_insertion_gains(audiogram: &Audiogram) -> Result<Prescription> {
    let anchor = |f: u32| audiogram.level_at(f64::from(f)).ok_or(Error::MissingAnchor(f));
    let three_freq = anchor(500)? + anchor(1000)? + anchor(2000)?;
    let frequencies = audiogram.frequencies().to_vec();

    if audiogram.levels().iter().all(|&l| l <= 0.0) {
        let gains_db = vec![0.0; frequencies.len()];
        return Ok(Prescription {
            frequencies,
            gains_db,
        });
    }

    let base = THREE_FREQUENCY_WEIGHT * three_freq;
    let gains_db = frequencies
        .iter()
        .zip(audiogram.levels())
        .map(|(&f, &hl)| (base + LOSS_SLOPE * hl + correction_db(f)).max(0.0))
        .collect();
    Ok(Prescription {
        frequencies,
        gains_db,
    })
}
