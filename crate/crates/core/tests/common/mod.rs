#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use hearmix::stems::provider::write_stem_dir;
use hearmix::wav::{write_wav, WavFormat};
use hearmix::{AudioBuffer, Listener, StemSet, Track};
use hearmix::hearing::Audiogram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RATE: u32 = 44100;

/// Rounds to the 16-bit grid so that sums of a few stems are exact.
fn grid(x: f64) -> f64 {
    (x * 32768.0).round() / 32768.0
}

fn stereo(rate: u32, left: Vec<f64>, right: Vec<f64>) -> AudioBuffer {
    AudioBuffer::new(rate, vec![left, right]).unwrap()
}

/// A synthetic four-stem song: a vibrato melody, noise-burst drums, a sine
/// bass line and a sustained pad with some noise. `other_level` scales the
/// "other" stem.
pub fn song(seed: u64, seconds: f64, other_level: f64) -> StemSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (seconds * f64::from(RATE)) as usize;
    let fs = f64::from(RATE);
    let t = |i: usize| i as f64 / fs;

    let melody = [440.0, 494.0, 523.0, 587.0, 659.0, 587.0, 523.0, 494.0];
    let vocals: Vec<f64> = (0..n)
        .map(|i| {
            let note = melody[(t(i) * 2.0) as usize % melody.len()];
            let f = note * (1.0 + 0.01 * (2.0 * PI * 5.0 * t(i)).sin());
            let env = 0.6 + 0.4 * (2.0 * PI * 0.5 * t(i)).sin().abs();
            0.25 * env * ((2.0 * PI * f * t(i)).sin() + 0.3 * (4.0 * PI * f * t(i)).sin())
        })
        .collect();

    let beat = (fs * 0.25) as usize;
    let drums: Vec<f64> = (0..n)
        .map(|i| {
            let k = i % beat;
            let decay = (-(k as f64) / (0.03 * fs)).exp();
            0.35 * decay * rng.gen_range(-1.0..1.0)
        })
        .collect();

    let bass_notes = [55.0, 55.0, 73.4, 82.4];
    let bass: Vec<f64> = (0..n)
        .map(|i| {
            let f = bass_notes[(t(i)) as usize % bass_notes.len()];
            0.3 * (2.0 * PI * f * t(i)).sin()
        })
        .collect();

    let other: Vec<f64> = (0..n)
        .map(|i| {
            let chord = [261.6, 329.6, 392.0].iter().map(|f| (2.0 * PI * f * t(i)).sin()).sum::<f64>();
            other_level * (0.08 * chord + 0.03 * rng.gen_range(-1.0..1.0))
        })
        .collect();

    // Slightly different left/right balance per stem.
    let pan = |x: &[f64], l: f64, r: f64| {
        stereo(
            RATE,
            x.iter().map(|v| grid(v * l)).collect(),
            x.iter().map(|v| grid(v * r)).collect(),
        )
    };
    StemSet::new(
        pan(&vocals, 1.0, 0.9),
        pan(&drums, 0.8, 1.0),
        pan(&bass, 1.0, 1.0),
        pan(&other, 0.7, 1.0),
    )
    .unwrap()
}

pub fn listener(left: f64, right: f64) -> Listener {
    Listener {
        id: format!("flat-{left}-{right}"),
        left: Audiogram::flat(left),
        right: Audiogram::flat(right),
    }
}

pub fn white(rng: &mut ChaCha8Rng, like: &AudioBuffer, power: f64) -> AudioBuffer {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, power.sqrt()).unwrap();
    like.map(|_| normal.sample(rng)).unwrap()
}

pub fn mean_power(b: &AudioBuffer) -> f64 {
    b.energy() / (b.num_channels() * b.num_frames()) as f64
}

pub fn replace(stems: &StemSet, track: Track, buffer: AudioBuffer) -> StemSet {
    stems.with_track(track, buffer).unwrap()
}

/// Writes one line to the real stderr, bypassing the test harness's output
/// capture so criterion results always show up in the log.
pub fn announce(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

pub fn criterion(id: &str, name: &str, pass: bool, detail: String) {
    announce(&format!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
    assert!(pass, "{id} {name} failed: {detail}");
}

pub fn write_song_dir(dir: &Path, stems: &StemSet) {
    write_stem_dir(stems, dir, WavFormat::default()).unwrap();
}

pub fn write_mix(path: &Path, mix: &AudioBuffer) {
    write_wav(mix, path, WavFormat::default()).unwrap();
}

pub fn write_listener(path: &Path, l: &Listener) {
    std::fs::write(path, l.to_json().unwrap()).unwrap();
}

pub fn write_gains(path: &Path, json: &str) {
    std::fs::write(path, json).unwrap();
}
