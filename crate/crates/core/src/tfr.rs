//! Sparse off-grid time-frequency representations and their metrics.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::gabor::{GaborFrame, TFGridCoefficients};
use crate::signal::{l2_norm, Signal};

/// One atom `c · e^{i2πωl}` restricted to the support of window `window`.
///
/// Coefficients use the global phase convention: the atom is evaluated at
/// the absolute sample index `an + j`, not at the local offset `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfAtom {
    pub window: usize,
    pub omega: f64,
    pub coefficient: Complex64,
}

impl TfAtom {
    pub fn energy(&self) -> f64 {
        self.coefficient.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseTF {
    atoms: Vec<TfAtom>,
    hop: usize,
    channels: usize,
    signal_length: usize,
}

impl SparseTF {
    pub fn new(atoms: Vec<TfAtom>, hop: usize, channels: usize, signal_length: usize) -> Result<Self> {
        if hop == 0 || signal_length % hop != 0 {
            return Err(Error::Parameter(format!(
                "hop {hop} must be positive and divide {signal_length}"
            )));
        }
        let shifts = signal_length / hop;
        for a in &atoms {
            if a.window >= shifts {
                return Err(Error::Parameter(format!(
                    "atom window {} out of range 0..{shifts}",
                    a.window
                )));
            }
            if !(a.omega.is_finite() && (0.0..1.0).contains(&a.omega)) {
                return Err(Error::Parameter(format!("atom frequency {} outside [0, 1)", a.omega)));
            }
            if !(a.coefficient.re.is_finite() && a.coefficient.im.is_finite()) {
                return Err(Error::Parameter("atom coefficient is not finite".into()));
            }
        }
        Ok(Self {
            atoms,
            hop,
            channels,
            signal_length,
        })
    }

    pub fn empty(frame: &GaborFrame) -> Self {
        Self {
            atoms: Vec::new(),
            hop: frame.hop(),
            channels: frame.channels(),
            signal_length: frame.signal_length(),
        }
    }

    pub fn atoms(&self) -> &[TfAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn signal_length(&self) -> usize {
        self.signal_length
    }

    pub fn shifts(&self) -> usize {
        self.signal_length / self.hop
    }
}

/// Image of atom energies in dB, `bins` rows by `N` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    bins: usize,
    columns: usize,
    /// Row-major by frequency bin.
    values: Vec<f64>,
}

impl Raster {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn get(&self, bin: usize, column: usize) -> f64 {
        self.values[bin * self.columns + column]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Deposits `|c|²` of each atom into the nearest of `bins` uniform frequency
/// bins at its window column, then converts to dB relative to the maximum,
/// clamped below at `db_floor`.
pub fn rasterize(tf: &SparseTF, bins: usize, db_floor: f64) -> Result<Raster> {
    if bins == 0 {
        return Err(Error::Parameter("need at least one frequency bin".into()));
    }
    if !(db_floor < 0.0) {
        return Err(Error::Parameter(format!("dB floor must be negative, got {db_floor}")));
    }
    let columns = tf.shifts();
    let mut deposits: Vec<(usize, usize, f64)> = tf
        .atoms
        .iter()
        .map(|a| {
            let bin = ((a.omega * bins as f64).round() as usize) % bins;
            (bin, a.window, a.energy())
        })
        .collect();
    // fixed accumulation order regardless of atom order
    deposits.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    let mut power = vec![0.0; bins * columns];
    for (bin, col, e) in deposits {
        power[bin * columns + col] += e;
    }
    let peak = power.iter().cloned().fold(0.0, f64::max);
    let values = power
        .into_iter()
        .map(|p| {
            if peak > 0.0 && p > 0.0 {
                (10.0 * (p / peak).log10()).max(db_floor)
            } else {
                db_floor
            }
        })
        .collect();
    Ok(Raster {
        bins,
        columns,
        values,
    })
}

/// Grid coefficients with `|c| > threshold · max|c|` as atoms at `ω = m/M`,
/// converted to the global phase convention.
pub fn grid_to_sparse(c: &TFGridCoefficients, frame: &GaborFrame, threshold: f64) -> Result<SparseTF> {
    if !(threshold >= 0.0) {
        return Err(Error::Parameter(format!("threshold must be >= 0, got {threshold}")));
    }
    let m_len = frame.channels();
    check_len("coefficient array", m_len * frame.shifts(), c.values().len())?;
    let peak = c.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cut = threshold * peak;
    let mut atoms = Vec::new();
    for n in 0..frame.shifts() {
        for m in 0..m_len {
            let v = c.get(m, n);
            if v.norm() > cut {
                let shift = ((m * frame.hop() * n) % m_len) as f64 / m_len as f64;
                atoms.push(TfAtom {
                    window: n,
                    omega: m as f64 / m_len as f64,
                    coefficient: v * Complex64::from_polar(1.0, -2.0 * PI * shift),
                });
            }
        }
    }
    SparseTF::new(atoms, frame.hop(), m_len, frame.signal_length())
}

/// `|c|²` of every atom, largest first.
pub fn energy_curve(tf: &SparseTF) -> Vec<f64> {
    let mut e: Vec<f64> = tf.atoms.iter().map(TfAtom::energy).collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// Windowed resynthesis `Σ_n W_n (Σ_k c_{n,k} a(ω_k))`.
pub fn synthesize(tf: &SparseTF, frame: &GaborFrame) -> Result<Signal> {
    check_len("signal length", frame.signal_length(), tf.signal_length)?;
    check_len("hop", frame.hop(), tf.hop)?;
    let l_len = frame.signal_length();
    let mut out = vec![Complex64::new(0.0, 0.0); l_len];
    for a in &tf.atoms {
        let start = a.window * frame.hop();
        for (j, &t) in frame.window().taps().iter().enumerate() {
            let l = start + j;
            let phase = 2.0 * PI * (a.omega * l as f64).rem_euclid(1.0);
            out[l % l_len] += a.coefficient * Complex64::from_polar(t, phase);
        }
    }
    Ok(Signal::from_vec_unchecked(out))
}

/// Relative ℓ2 error of the windowed resynthesis against `f` (`0/0 = 0`).
pub fn reconstruction_error(tf: &SparseTF, f: &Signal, frame: &GaborFrame) -> Result<f64> {
    check_len("signal", frame.signal_length(), f.len())?;
    let synth = synthesize(tf, frame)?;
    let diff: Vec<Complex64> = synth
        .samples()
        .iter()
        .zip(f.samples())
        .map(|(a, b)| a - b)
        .collect();
    let err = l2_norm(&diff);
    let norm = f.norm();
    Ok(if norm == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / norm
    })
}
