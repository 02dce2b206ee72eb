//! Gabor systems on the cyclic group `Z_L`.
//!
//! Atoms are `g_{m,n}[l] = e^{i2πm j/M} g[j]` with `j = (l - an) mod L`.
//! Analysis and synthesis carry no normalization factors. The windowed-sum
//! operator `A_g x = Σ_n W_n x_n` and its adjoint work on [`WindowedStack`]s
//! holding one length-`J` block per time shift, in local support coordinates.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::signal::{Signal, Window, WindowKind};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gabor system `G(g, a, M)` on signals of length `L`.
#[derive(Debug, Clone)]
pub struct GaborFrame {
    window: Window,
    hop: usize,
    channels: usize,
    signal_length: usize,
    shifts: usize,
    /// `s₂[l] = Σ_n g[(l - an) mod L]²`, the diagonal of `A_g A_g*`.
    coverage: Vec<f64>,
}

impl GaborFrame {
    /// Validates `a | L`, `J ≤ L` and strictly positive window coverage.
    pub fn new(window: Window, hop: usize, channels: usize, signal_length: usize) -> Result<Self> {
        if hop == 0 || channels == 0 || signal_length == 0 {
            return Err(Error::Parameter(format!(
                "hop ({hop}), channels ({channels}) and signal length ({signal_length}) must be >= 1"
            )));
        }
        if signal_length % hop != 0 {
            return Err(Error::Parameter(format!(
                "hop {hop} does not divide signal length {signal_length}"
            )));
        }
        if window.len() > signal_length {
            return Err(Error::Parameter(format!(
                "window length {} exceeds signal length {signal_length}",
                window.len()
            )));
        }
        let shifts = signal_length / hop;
        let mut coverage = vec![0.0; signal_length];
        for n in 0..shifts {
            for (j, &t) in window.taps().iter().enumerate() {
                coverage[(n * hop + j) % signal_length] += t * t;
            }
        }
        if let Some(index) = coverage.iter().position(|&s| s <= 0.0) {
            return Err(Error::SingularFrame { index });
        }
        Ok(Self {
            window,
            hop,
            channels,
            signal_length,
            shifts,
            coverage,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
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

    /// Number of time shifts `N = L / a`.
    pub fn shifts(&self) -> usize {
        self.shifts
    }

    /// Window support length `J`.
    pub fn support(&self) -> usize {
        self.window.len()
    }

    pub fn coverage(&self) -> &[f64] {
        &self.coverage
    }

    /// `J ≤ M`, where the frame operator is diagonal.
    pub fn is_painless(&self) -> bool {
        self.support() <= self.channels
    }

    /// Same lattice with a different window.
    pub fn with_window(&self, window: Window) -> Result<Self> {
        Self::new(window, self.hop, self.channels, self.signal_length)
    }

    /// Same lattice analyzed with the canonical dual window.
    pub fn dual(&self) -> Result<Self> {
        self.with_window(canonical_dual(self)?)
    }

    #[inline]
    pub(crate) fn global_index(&self, n: usize, j: usize) -> usize {
        (n * self.hop + j) % self.signal_length
    }

    fn check_signal(&self, f: &Signal) -> Result<()> {
        check_len("signal", self.signal_length, f.len())
    }

    fn plan(&self, inverse: bool) -> Arc<dyn Fft<f64>> {
        let mut planner = FftPlanner::new();
        if inverse {
            planner.plan_fft_inverse(self.channels)
        } else {
            planner.plan_fft_forward(self.channels)
        }
    }
}

/// On-grid coefficients addressed as `c[m + nM]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TFGridCoefficients {
    values: Vec<Complex64>,
    channels: usize,
}

impl TFGridCoefficients {
    pub fn new(values: Vec<Complex64>, frame: &GaborFrame) -> Result<Self> {
        check_len(
            "coefficient array",
            frame.channels * frame.shifts,
            values.len(),
        )?;
        if values.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Parameter("coefficients must be finite".into()));
        }
        Ok(Self {
            values,
            channels: frame.channels,
        })
    }

    pub fn zeros(frame: &GaborFrame) -> Self {
        Self {
            values: vec![ZERO; frame.channels * frame.shifts],
            channels: frame.channels,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.values[m + n * self.channels]
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).sum()
    }
}

/// `N` blocks of length `J`; entry `j` of block `n` sits at global sample
/// `(an + j) mod L`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedStack {
    data: Vec<Complex64>,
    block_len: usize,
}

impl WindowedStack {
    pub fn zeros(blocks: usize, block_len: usize) -> Self {
        Self {
            data: vec![ZERO; blocks * block_len],
            block_len,
        }
    }

    pub fn from_blocks(blocks: &[Vec<Complex64>]) -> Result<Self> {
        let block_len = blocks.first().map_or(0, Vec::len);
        if block_len == 0 {
            return Err(Error::Parameter("stack needs non-empty blocks".into()));
        }
        for b in blocks {
            check_len("stack block", block_len, b.len())?;
        }
        Ok(Self {
            data: blocks.concat(),
            block_len,
        })
    }

    pub fn for_frame(frame: &GaborFrame) -> Self {
        Self::zeros(frame.shifts(), frame.support())
    }

    pub fn blocks(&self) -> usize {
        self.data.len() / self.block_len
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn block(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.block_len..(n + 1) * self.block_len]
    }

    pub fn block_mut(&mut self, n: usize) -> &mut [Complex64] {
        &mut self.data[n * self.block_len..(n + 1) * self.block_len]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        crate::signal::l2_norm(&self.data)
    }

    fn check_frame(&self, frame: &GaborFrame) -> Result<()> {
        check_len("stack blocks", frame.shifts(), self.blocks())?;
        check_len("stack block length", frame.support(), self.block_len)
    }
}

/// Analysis `c[m+nM] = Σ_l f[l] g[(l-an) mod L] e^{-i2πm(l-an)/M}`.
pub fn dgt(f: &Signal, frame: &GaborFrame) -> Result<TFGridCoefficients> {
    frame.check_signal(f)?;
    let m = frame.channels;
    let fft = frame.plan(false);
    let samples = f.samples();
    let taps = frame.window.taps();
    let mut values = vec![ZERO; m * frame.shifts];
    values.par_chunks_mut(m).enumerate().for_each(|(n, buf)| {
        // fold the windowed segment onto M bins (zero-pads when J < M)
        for (j, &t) in taps.iter().enumerate() {
            buf[j % m] += samples[frame.global_index(n, j)] * t;
        }
        fft.process(buf);
    });
    Ok(TFGridCoefficients {
        values,
        channels: m,
    })
}

/// Synthesis `Σ_{m,n} c[m+nM] g_{m,n}`.
pub fn idgt(c: &TFGridCoefficients, frame: &GaborFrame) -> Result<Signal> {
    check_len(
        "coefficient array",
        frame.channels * frame.shifts,
        c.values.len(),
    )?;
    let m = frame.channels;
    let ifft = frame.plan(true);
    let mut spectra = c.values.clone();
    spectra
        .par_chunks_mut(m)
        .for_each(|buf| ifft.process(buf));
    let taps = frame.window.taps();
    let mut out = vec![ZERO; frame.signal_length];
    // sequential over n for a fixed accumulation order
    for n in 0..frame.shifts {
        let seg = &spectra[n * m..(n + 1) * m];
        for (j, &t) in taps.iter().enumerate() {
            out[frame.global_index(n, j)] += seg[j % m] * t;
        }
    }
    Ok(Signal::from_vec_unchecked(out))
}

/// Canonical dual window `h̃ = (G_g G_g*)^{-1} g` for painless frames.
///
/// With `J ≤ M` the frame operator is `M · diag(s₂)`, and since `s₂` is
/// `a`-periodic the dual is `h̃[j] = g[j] / (M s₂[j])`.
pub fn canonical_dual(frame: &GaborFrame) -> Result<Window> {
    if !frame.is_painless() {
        return Err(Error::UnsupportedConfiguration(format!(
            "canonical dual needs window length {} <= channels {}",
            frame.support(),
            frame.channels
        )));
    }
    let m = frame.channels as f64;
    let taps = frame
        .window
        .taps()
        .iter()
        .enumerate()
        .map(|(j, &t)| t / (m * frame.coverage[j % frame.signal_length]))
        .collect();
    Window::new(taps, WindowKind::Custom)
}

/// `A_g x = Σ_n W_n x_n`.
pub fn synthesis_windowed(x: &WindowedStack, frame: &GaborFrame) -> Result<Signal> {
    x.check_frame(frame)?;
    let mut out = vec![ZERO; frame.signal_length];
    let taps = frame.window.taps();
    for n in 0..frame.shifts {
        for (j, (&t, &v)) in taps.iter().zip(x.block(n)).enumerate() {
            out[frame.global_index(n, j)] += v * t;
        }
    }
    Ok(Signal::from_vec_unchecked(out))
}

/// Block `n` is `j ↦ w[j] f[(an+j) mod L]`; with `window = g` this is `A_g*`.
pub fn analysis_stack(f: &Signal, frame: &GaborFrame, window: &Window) -> Result<WindowedStack> {
    frame.check_signal(f)?;
    check_len("analysis window", frame.support(), window.len())?;
    Ok(analysis_stack_raw(f.samples(), frame, window.taps()))
}

fn analysis_stack_raw(samples: &[Complex64], frame: &GaborFrame, taps: &[f64]) -> WindowedStack {
    let mut out = WindowedStack::for_frame(frame);
    for n in 0..frame.shifts {
        for (j, (o, &t)) in out.block_mut(n).iter_mut().zip(taps).enumerate() {
            *o = samples[frame.global_index(n, j)] * t;
        }
    }
    out
}

/// Euclidean projection onto `{x : A_g x = f}`:
/// `v - A_g*( diag(1/s₂) (A_g v - f) )`.
pub fn project_reconstruction(
    v: &WindowedStack,
    f: &Signal,
    frame: &GaborFrame,
) -> Result<WindowedStack> {
    frame.check_signal(f)?;
    let mut out = v.clone();
    project_reconstruction_in_place(&mut out, f, frame)?;
    Ok(out)
}

pub(crate) fn project_reconstruction_in_place(
    v: &mut WindowedStack,
    f: &Signal,
    frame: &GaborFrame,
) -> Result<()> {
    let synth = synthesis_windowed(v, frame)?;
    let scaled: Vec<Complex64> = synth
        .samples()
        .iter()
        .zip(f.samples())
        .zip(&frame.coverage)
        .map(|((&s, &t), &c)| (s - t) / c)
        .collect();
    let taps = frame.window.taps();
    for n in 0..frame.shifts {
        for (j, (o, &t)) in v.block_mut(n).iter_mut().zip(taps).enumerate() {
            *o -= scaled[frame.global_index(n, j)] * t;
        }
    }
    Ok(())
}

/// Euclidean projection of coefficients onto `{c : G_g c = f}` for painless
/// frames, where `G_g G_g* = M diag(s₂)`.
pub(crate) fn project_grid_coefficients(
    c: &TFGridCoefficients,
    f: &Signal,
    frame: &GaborFrame,
) -> Result<TFGridCoefficients> {
    let synth = idgt(c, frame)?;
    let m = frame.channels as f64;
    let residual: Vec<Complex64> = synth
        .samples()
        .iter()
        .zip(f.samples())
        .zip(&frame.coverage)
        .map(|((&s, &t), &cov)| (s - t) / (m * cov))
        .collect();
    let correction = dgt(&Signal::from_vec_unchecked(residual), frame)?;
    let values = c
        .values
        .iter()
        .zip(&correction.values)
        .map(|(a, b)| a - b)
        .collect();
    Ok(TFGridCoefficients {
        values,
        channels: c.channels,
    })
}
