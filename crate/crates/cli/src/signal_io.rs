//! Signal files: interleaved `re, im` little-endian float64 with an optional
//! `<file>.json` sidecar, or 16-bit PCM mono WAV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tfatom::{Complex64, Signal, TestSignal};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub length: usize,
    pub sample_rate: Option<f64>,
    pub generator: Option<Generator>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Generator {
    pub kind: String,
    pub components: Vec<Component>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Component {
    Sinusoid { freq: f64, amplitude: f64 },
    LinearChirp { f0: f64, rate: f64, amplitude: f64 },
    QuadraticChirp { f0: f64, curvature: f64, amplitude: f64 },
}

pub fn components(sig: &TestSignal) -> Vec<Component> {
    match sig {
        TestSignal::Sinusoid { freq, amplitude } => vec![Component::Sinusoid {
            freq: *freq,
            amplitude: *amplitude,
        }],
        TestSignal::LinearChirp { f0, rate, amplitude } => vec![Component::LinearChirp {
            f0: *f0,
            rate: *rate,
            amplitude: *amplitude,
        }],
        TestSignal::QuadraticChirp {
            f0,
            curvature,
            amplitude,
        } => vec![Component::QuadraticChirp {
            f0: *f0,
            curvature: *curvature,
            amplitude: *amplitude,
        }],
        TestSignal::Mixture(parts) => parts.iter().flat_map(components).collect(),
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_signal(path: &Path, signal: &Signal, sidecar: &Sidecar) -> CliResult<()> {
    let mut bytes = Vec::with_capacity(16 * signal.len());
    for s in signal.samples() {
        bytes.extend_from_slice(&s.re.to_le_bytes());
        bytes.extend_from_slice(&s.im.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    fs::write(&side, json + "\n").map_err(|e| CliError::io(&side, e))
}

fn read_binary(path: &Path) -> CliResult<Signal> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.is_empty() || bytes.len() % 16 != 0 {
        return Err(CliError::Input(format!(
            "{}: {} bytes is not a whole number of complex float64 samples",
            path.display(),
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let mut signal = Signal::new(samples).map_err(|e| CliError::io(path, e))?;

    let side = sidecar_path(path);
    if side.exists() {
        let text = fs::read_to_string(&side).map_err(|e| CliError::io(&side, e))?;
        let meta: Sidecar = serde_json::from_str(&text).map_err(|e| CliError::io(&side, e))?;
        if meta.length != signal.len() {
            return Err(CliError::Input(format!(
                "{}: sidecar length {} disagrees with {} samples",
                side.display(),
                meta.length,
                signal.len()
            )));
        }
        if let Some(rate) = meta.sample_rate {
            signal = signal.with_sample_rate(rate).map_err(|e| CliError::io(&side, e))?;
        }
    }
    Ok(signal)
}

/// 16-bit PCM mono only, scaled to `[-1, 1)`.
fn read_wav(path: &Path) -> CliResult<Signal> {
    let mut reader = hound::WavReader::open(path).map_err(|e| CliError::io(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(CliError::Input(format!(
            "{}: need 16-bit PCM mono, got {} channel(s) at {} bits",
            path.display(),
            spec.channels,
            spec.bits_per_sample
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| CliError::io(path, e))?;
    if samples.is_empty() {
        return Err(CliError::Input(format!("{}: no samples", path.display())));
    }
    Signal::from_real(&samples)
        .and_then(|s| s.with_sample_rate(spec.sample_rate as f64))
        .map_err(|e| CliError::io(path, e))
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// Reads a signal; WAV input is truncated to the largest multiple of `hop`.
pub fn read_signal(path: &Path, hop: usize) -> CliResult<Signal> {
    if !is_wav(path) {
        return read_binary(path);
    }
    let mut signal = read_wav(path)?;
    let keep = signal.len() / hop * hop;
    if keep == 0 {
        return Err(CliError::Input(format!(
            "{}: {} samples is shorter than one hop of {hop}",
            path.display(),
            signal.len()
        )));
    }
    if keep < signal.len() {
        log::info!("truncating {} samples to {keep}", signal.len());
        signal.truncate(keep)?;
    }
    Ok(signal)
}
