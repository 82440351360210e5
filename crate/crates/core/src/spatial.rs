//! Stereo crosstalk from speaker-to-ear impulse responses.

use std::path::Path;

use crate::audio::AudioBuffer;
use crate::convolve::convolve_truncated;
use crate::error::{Error, Result};
use crate::wav::read_wav;

/// File names used when a kernel is stored as four mono WAVs in a directory.
pub const KERNEL_FILES: [&str; 4] = ["ll.wav", "rl.wav", "lr.wav", "rr.wav"];

/// Four impulse responses: `ll` (left speaker to left ear), `rl` (right
/// speaker to left ear), `lr` (left speaker to right ear), `rr`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkKernel {
    pub ll: Vec<f64>,
    pub rl: Vec<f64>,
    pub lr: Vec<f64>,
    pub rr: Vec<f64>,
    sample_rate: u32,
}

impl CrosstalkKernel {
    /// Zero-pads the responses to a common length.
    pub fn new(ll: Vec<f64>, rl: Vec<f64>, lr: Vec<f64>, rr: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("kernel sample rate must be positive".into()));
        }
        let mut paths = [ll, rl, lr, rr];
        if paths.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("kernel contains non-finite values".into()));
        }
        let len = paths.iter().map(Vec::len).max().unwrap_or(0).max(1);
        for p in paths.iter_mut() {
            p.resize(len, 0.0);
        }
        let [ll, rl, lr, rr] = paths;
        Ok(CrosstalkKernel {
            ll,
            rl,
            lr,
            rr,
            sample_rate,
        })
    }

    pub fn identity(sample_rate: u32) -> Self {
        CrosstalkKernel::new(vec![1.0], vec![0.0], vec![0.0], vec![1.0], sample_rate)
            .expect("identity kernel is valid")
    }

    pub fn len(&self) -> usize {
        self.ll.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ll.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
}

/// `L' = ll*L + rl*R`, `R' = lr*L + rr*R`, truncated to the input length.
pub fn apply_crosstalk(buffer: &AudioBuffer, kernel: &CrosstalkKernel) -> Result<AudioBuffer> {
    if buffer.num_channels() != 2 {
        return Err(Error::ChannelCount {
            expected: 2,
            actual: buffer.num_channels(),
        });
    }
    if buffer.sample_rate() != kernel.sample_rate {
        return Err(Error::Misaligned(format!(
            "kernel at {} Hz applied to {} Hz audio",
            kernel.sample_rate,
            buffer.sample_rate()
        )));
    }
    let (l, r) = (buffer.channel(0), buffer.channel(1));
    let paths = [(l, &kernel.ll), (r, &kernel.rl), (l, &kernel.lr), (r, &kernel.rr)];
    let mut convolved: Vec<Vec<f64>> = std::thread::scope(|s| {
        let handles: Vec<_> = paths
            .iter()
            .map(|&(x, h)| s.spawn(move || convolve_truncated(x, h, 0)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("convolution thread")).collect()
    });
    let rr = convolved.pop().expect("four paths");
    let lr = convolved.pop().expect("four paths");
    let rl = convolved.pop().expect("four paths");
    let ll = convolved.pop().expect("four paths");
    let left = ll.iter().zip(&rl).map(|(a, b)| a + b).collect();
    let right = lr.iter().zip(&rr).map(|(a, b)| a + b).collect();
    AudioBuffer::new(buffer.sample_rate(), vec![left, right])
}

/// Loads a kernel from a 4-channel WAV (channels LL, RL, LR, RR) or from a
/// directory holding `ll.wav`, `rl.wav`, `lr.wav` and `rr.wav` (mono).
pub fn load_kernel(path: impl AsRef<Path>) -> Result<CrosstalkKernel> {
    let path = path.as_ref();
    if path.is_dir() {
        let mut responses = Vec::with_capacity(4);
        let mut rate = None;
        for name in KERNEL_FILES {
            let buf = read_wav(path.join(name))?;
            if buf.num_channels() != 1 {
                return Err(Error::ChannelCount {
                    expected: 1,
                    actual: buf.num_channels(),
                });
            }
            match rate {
                None => rate = Some(buf.sample_rate()),
                Some(r) if r != buf.sample_rate() => {
                    return Err(Error::Misaligned(format!(
                        "kernel files at {r} Hz and {} Hz",
                        buf.sample_rate()
                    )))
                }
                Some(_) => {}
            }
            responses.push(buf.into_channels().remove(0));
        }
        let [ll, rl, lr, rr]: [Vec<f64>; 4] = responses.try_into().expect("four files");
        CrosstalkKernel::new(ll, rl, lr, rr, rate.expect("rate set"))
    } else {
        let buf = read_wav(path)?;
        if buf.num_channels() != 4 {
            return Err(Error::ChannelCount {
                expected: 4,
                actual: buf.num_channels(),
            });
        }
        let rate = buf.sample_rate();
        let [ll, rl, lr, rr]: [Vec<f64>; 4] = buf.into_channels().try_into().expect("four channels");
        CrosstalkKernel::new(ll, rl, lr, rr, rate)
    }
}
