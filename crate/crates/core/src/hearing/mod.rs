//! Audiograms, the NAL-R linear prescription, and its FIR realization.

mod audiogram;
mod fir;
mod nalr;

pub use audiogram::{Audiogram, Listener, DEFAULT_FREQUENCIES};
pub use fir::{apply_fir, design_nalr_fir, FirFilter, DEFAULT_TAPS};
pub use nalr::{correction_db, nalr_insertion_gains, Prescription, CORRECTION_TABLE};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Filters the left channel with the left ear's prescription and the right
/// channel with the right ear's, delay-compensated.
pub fn nalr_process(buffer: &AudioBuffer, listener: &Listener, n_taps: usize) -> Result<AudioBuffer> {
    if buffer.num_channels() != 2 {
        return Err(Error::ChannelCount {
            expected: 2,
            actual: buffer.num_channels(),
        });
    }
    let rate = buffer.sample_rate();
    let left = design_nalr_fir(&nalr_insertion_gains(&listener.left)?, n_taps, rate)?;
    let right = design_nalr_fir(&nalr_insertion_gains(&listener.right)?, n_taps, rate)?;
    let channels = [(&left, 0), (&right, 1)]
        .map(|(filter, ch)| filter.filter_channel(buffer.channel(ch), true))
        .to_vec();
    AudioBuffer::new(rate, channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stems::tests::grid_noise;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat(level: f64) -> Audiogram {
        Audiogram::new(DEFAULT_FREQUENCIES.to_vec(), vec![level; 6]).unwrap()
    }

    fn listener(left: f64, right: f64) -> Listener {
        Listener {
            id: "L".into(),
            left: flat(left),
            right: flat(right),
        }
    }

    fn energy(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn normal_hearing_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = grid_noise(&mut rng, 4410, 0.5);
        assert_eq!(nalr_process(&x, &listener(0.0, 0.0), DEFAULT_TAPS).unwrap(), x);
    }

    #[test]
    fn asymmetric_loss_amplifies_only_the_impaired_ear() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = grid_noise(&mut rng, 44100, 0.1);
        let y = nalr_process(&x, &listener(60.0, 0.0), DEFAULT_TAPS).unwrap();
        let left_gain = 10.0 * (energy(y.channel(0)) / energy(x.channel(0))).log10();
        let right_gain = 10.0 * (energy(y.channel(1)) / energy(x.channel(1))).log10();
        assert!(left_gain >= 10.0, "left {left_gain}");
        assert!(right_gain.abs() <= 1.0, "right {right_gain}");
    }

    #[test]
    fn swapping_ears_swaps_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = grid_noise(&mut rng, 5000, 0.1);
        let swapped_in = AudioBuffer::new(44100, vec![x.channel(1).to_vec(), x.channel(0).to_vec()]).unwrap();
        let a = nalr_process(&x, &listener(50.0, 20.0), DEFAULT_TAPS).unwrap();
        let b = nalr_process(&swapped_in, &listener(20.0, 50.0), DEFAULT_TAPS).unwrap();
        assert_eq!(a.channel(0), b.channel(1));
        assert_eq!(a.channel(1), b.channel(0));
    }

    #[test]
    fn mono_is_rejected() {
        let x = AudioBuffer::silence(44100, 1, 100).unwrap();
        assert!(matches!(
            nalr_process(&x, &listener(0.0, 0.0), DEFAULT_TAPS),
            Err(Error::ChannelCount { .. })
        ));
    }
}
