//! RIFF/WAVE reading and writing for 16/24-bit PCM and 32-bit float.

use std::path::Path;

use hound::{SampleFormat, WavSpec};
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitDepth {
    Int16,
    Int24,
    Float32,
}

impl BitDepth {
    fn bits(self) -> u16 {
        match self {
            BitDepth::Int16 => 16,
            BitDepth::Int24 => 24,
            BitDepth::Float32 => 32,
        }
    }
}

impl std::str::FromStr for BitDepth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "16" | "int16" => Ok(BitDepth::Int16),
            "24" | "int24" => Ok(BitDepth::Int24),
            "32f" | "float32" | "f32" => Ok(BitDepth::Float32),
            _ => Err(Error::InvalidParameter(format!("unknown bit depth `{s}`"))),
        }
    }
}

/// On-disk layout of a WAV file. Channel count and rate come from the
/// buffer being written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WavFormat {
    pub bit_depth: BitDepth,
}

impl Default for WavFormat {
    fn default() -> Self {
        WavFormat {
            bit_depth: BitDepth::Float32,
        }
    }
}

fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        // hound reports a short data chunk as a custom error rather than
        // UnexpectedEof.
        hound::Error::IoError(e)
            if e.kind() == std::io::ErrorKind::UnexpectedEof
                || e.to_string() == "Failed to read enough bytes." =>
        {
            Error::Truncated(path.to_path_buf())
        }
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::Unsupported => Error::UnsupportedCodec(path.to_path_buf()),
        hound::Error::FormatError(msg) => Error::Malformed {
            path: path.to_path_buf(),
            detail: msg.to_string(),
        },
        other => Error::Malformed {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    }
}

fn deinterleave(
    path: &Path,
    interleaved: impl Iterator<Item = std::result::Result<f64, hound::Error>>,
    channels: usize,
    frames: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![Vec::with_capacity(frames); channels];
    for (i, sample) in interleaved.enumerate() {
        out[i % channels].push(sample.map_err(|e| map_hound(path, e))?);
    }
    if out.iter().any(|c| c.len() != frames) {
        return Err(Error::Truncated(path.to_path_buf()));
    }
    Ok(out)
}

/// Reads a WAV file into a float buffer. Integer samples are divided by
/// `2^(bits-1)`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let frames = reader.duration() as usize;
    if frames == 0 {
        return Err(Error::EmptyAudio(path.to_path_buf()));
    }

    let data = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            deinterleave(
                path,
                reader
                    .into_samples::<i32>()
                    .map(|s| s.map(|v| f64::from(v) * scale)),
                channels,
                frames,
            )?
        }
        (SampleFormat::Float, 32) => deinterleave(
            path,
            reader.into_samples::<f32>().map(|s| s.map(f64::from)),
            channels,
            frames,
        )?,
        (format, bits) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?}"),
            })
        }
    };

    if data.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            detail: "non-finite float sample".into(),
        });
    }
    AudioBuffer::new(spec.sample_rate, data)
}

fn quantize(x: f64, bits: u16) -> i32 {
    let full = f64::from(1u32 << (bits - 1));
    (x * full).round().clamp(-full, full - 1.0) as i32
}

/// Writes `buffer` to `path`. Integer formats saturate out-of-range samples;
/// float output keeps them.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>, format: WavFormat) -> Result<()> {
    let path = path.as_ref();
    let bits = format.bit_depth.bits();
    let spec = WavSpec {
        channels: buffer.num_channels() as u16,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: bits,
        sample_format: match format.bit_depth {
            BitDepth::Float32 => SampleFormat::Float,
            _ => SampleFormat::Int,
        },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for frame in 0..buffer.num_frames() {
        for ch in buffer.channels() {
            let x = ch[frame];
            let res = match format.bit_depth {
                BitDepth::Float32 => writer.write_sample(x as f32),
                _ => writer.write_sample(quantize(x, bits)),
            };
            res.map_err(|e| map_hound(path, e))?;
        }
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}
