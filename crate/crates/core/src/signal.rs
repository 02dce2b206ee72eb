//! Signal container, synthetic test signals and analysis windows.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A finite complex-valued signal on the cyclic index set `0..L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<Complex64>,
    sample_rate: Option<f64>,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Parameter("signal must have at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::Parameter(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate: None,
        })
    }

    /// Promotes real samples to complex with zero imaginary part.
    pub fn from_real(samples: &[f64]) -> Result<Self> {
        Self::new(samples.iter().map(|&s| Complex64::new(s, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn with_sample_rate(mut self, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Parameter(format!("sample rate must be positive, got {rate}")));
        }
        self.sample_rate = Some(rate);
        Ok(self)
    }

    /// Constructor for samples produced internally by linear operators on
    /// valid inputs.
    pub(crate) fn from_vec_unchecked(samples: Vec<Complex64>) -> Self {
        debug_assert!(!samples.is_empty());
        Self {
            samples,
            sample_rate: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> Option<f64> {
        self.sample_rate
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.samples)
    }

    /// Keeps the first `len` samples.
    pub fn truncate(&mut self, len: usize) -> Result<()> {
        if len == 0 || len > self.samples.len() {
            return Err(Error::Parameter(format!(
                "cannot truncate signal of length {} to {len}",
                self.samples.len()
            )));
        }
        self.samples.truncate(len);
        Ok(())
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Window families understood by the CLI. `Custom` covers derived windows
/// such as canonical duals or zero-extended copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Slepian,
    Hann,
    Rectangular,
    Custom,
}

/// A real analysis window supported on `0..J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    taps: Vec<f64>,
    kind: WindowKind,
}

impl Window {
    pub fn new(taps: Vec<f64>, kind: WindowKind) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Parameter("window must have at least one tap".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("window taps must be finite".into()));
        }
        if taps.iter().all(|&t| t == 0.0) {
            return Err(Error::Parameter("window must have a nonzero tap".into()));
        }
        Ok(Self { taps, kind })
    }

    pub fn rectangular(len: usize) -> Result<Self> {
        Self::new(vec![1.0; len], WindowKind::Rectangular)
    }

    /// Periodic Hann window, `0.5 - 0.5 cos(2πj/J)`. A single tap is `[1]`.
    pub fn hann(len: usize) -> Result<Self> {
        if len == 1 {
            return Self::new(vec![1.0], WindowKind::Hann);
        }
        let taps = (0..len)
            .map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / len as f64).cos())
            .collect();
        Self::new(taps, WindowKind::Hann)
    }

    pub fn slepian(len: usize, bandwidth: f64) -> Result<Self> {
        slepian_window(len, bandwidth)
    }

    /// Copy of this window padded with zeros to `len` taps.
    pub fn zero_extended(&self, len: usize) -> Result<Self> {
        if len < self.taps.len() {
            return Err(Error::Parameter(format!(
                "cannot zero-extend a {}-tap window to {len}",
                self.taps.len()
            )));
        }
        let mut taps = self.taps.clone();
        taps.resize(len, 0.0);
        Self::new(taps, WindowKind::Custom)
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }
}

/// Order-0 discrete prolate spheroidal sequence of length `len` and
/// half-bandwidth `bandwidth` (cycles/sample), scaled to unit peak.
///
/// The sequence is the eigenvector for the largest eigenvalue of the
/// commuting symmetric tridiagonal matrix with diagonal
/// `((J-1-2j)/2)^2 cos(2πW)` and off-diagonal `j(J-j)/2`. The eigenvalue is
/// isolated by Sturm-sequence bisection and the eigenvector by inverse
/// iteration, so the cost is linear in `len` per step.
pub fn slepian_window(len: usize, bandwidth: f64) -> Result<Window> {
    if len == 0 {
        return Err(Error::Parameter("Slepian window length must be >= 1".into()));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0 && bandwidth < 0.5) {
        return Err(Error::Parameter(format!(
            "Slepian bandwidth must lie in (0, 0.5), got {bandwidth}"
        )));
    }
    if len == 1 {
        return Window::new(vec![1.0], WindowKind::Slepian);
    }

    let cos_w = (2.0 * PI * bandwidth).cos();
    let diag: Vec<f64> = (0..len)
        .map(|j| {
            let h = (len as f64 - 1.0 - 2.0 * j as f64) / 2.0;
            h * h * cos_w
        })
        .collect();
    // off[j] couples rows j and j+1
    let off: Vec<f64> = (1..len)
        .map(|j| (j as f64) * (len - j) as f64 / 2.0)
        .collect();

    let lambda = largest_tridiagonal_eigenvalue(&diag, &off);
    let mut v = tridiagonal_inverse_iteration(&diag, &off, lambda);

    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|t| *t = -*t);
    }
    let peak = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    v.iter_mut().for_each(|t| *t /= peak);
    Window::new(v, WindowKind::Slepian)
}

/// Number of eigenvalues strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for j in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * (off[j - 1].abs() + 1.0) } else { q };
        q = diag[j] - x - off[j - 1] * off[j - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn largest_tridiagonal_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let radius = |j: usize| {
        let left = if j > 0 { off[j - 1].abs() } else { 0.0 };
        let right = if j + 1 < n { off[j].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n).map(|j| diag[j] - radius(j)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|j| diag[j] + radius(j)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // all n eigenvalues below mid means the largest one is below it too
        if sturm_count(diag, off, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift I) y = rhs` by Gaussian elimination with partial
/// pivoting on the tridiagonal band (one extra superdiagonal of fill).
fn solve_shifted_tridiagonal(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON * diag.iter().chain(off).map(|v| v.abs()).fold(1.0, f64::max);
    // row i holds (a = sub, b = main, c = super, d = super2) after pivoting
    let mut b: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut c: Vec<f64> = off.to_vec();
    c.push(0.0);
    let mut d = vec![0.0; n];
    let mut sub: Vec<f64> = off.to_vec();
    let mut y = rhs.to_vec();

    for i in 0..n.saturating_sub(1) {
        let a = sub[i];
        if a.abs() > b[i].abs() {
            // swap rows i and i+1
            let (bi, ci, di, yi) = (b[i], c[i], d[i], y[i]);
            b[i] = a;
            c[i] = b[i + 1];
            d[i] = c[i + 1];
            y[i] = y[i + 1];
            let m = bi / a;
            b[i + 1] = ci - m * c[i];
            c[i + 1] = di - m * d[i];
            y[i + 1] = yi - m * y[i];
        } else {
            if b[i] == 0.0 {
                b[i] = tiny;
            }
            let m = a / b[i];
            b[i + 1] -= m * c[i];
            c[i + 1] -= m * d[i];
            y[i + 1] -= m * y[i];
        }
        sub[i] = 0.0;
    }
    if b[n - 1] == 0.0 {
        b[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        if i + 1 < n {
            acc -= c[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= d[i] * x[i + 2];
        }
        x[i] = acc / b[i];
    }
    x
}

fn tridiagonal_inverse_iteration(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..4 {
        let mut y = solve_shifted_tridiagonal(diag, off, lambda, &v);
        let norm = y.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        y.iter_mut().for_each(|t| *t /= norm);
        v = y;
    }
    v
}

/// One component of a synthetic test signal. Frequencies are in
/// cycles/sample.
#[derive(Debug, Clone, PartialEq)]
pub enum TestSignal {
    /// `amplitude · e^{i2π freq l}`
    Sinusoid { freq: f64, amplitude: f64 },
    /// `amplitude · e^{i2π(f0 l + rate l²/2)}`, instantaneous frequency `f0 + rate·l`
    LinearChirp { f0: f64, rate: f64, amplitude: f64 },
    /// `amplitude · e^{i2π(f0 l + curvature l³/3)}`, instantaneous frequency `f0 + curvature·l²`
    QuadraticChirp { f0: f64, curvature: f64, amplitude: f64 },
    Mixture(Vec<TestSignal>),
}

impl TestSignal {
    pub fn sinusoid(freq: f64) -> Self {
        Self::Sinusoid {
            freq,
            amplitude: 1.0,
        }
    }

    /// Linear chirp sweeping `start → end` over `length` samples.
    pub fn linear_sweep(start: f64, end: f64, length: usize) -> Self {
        let span = (length.max(2) - 1) as f64;
        Self::LinearChirp {
            f0: start,
            rate: (end - start) / span,
            amplitude: 1.0,
        }
    }

    /// Quadratic chirp sweeping `start → end` over `length` samples.
    pub fn quadratic_sweep(start: f64, end: f64, length: usize) -> Self {
        let span = (length.max(2) - 1) as f64;
        Self::QuadraticChirp {
            f0: start,
            curvature: (end - start) / (span * span),
            amplitude: 1.0,
        }
    }

    /// Sinusoid at 0.1, linear chirp 0.05 → 0.35 and quadratic chirp
    /// 0.4 → 0.1, unit amplitudes.
    pub fn default_mixture(length: usize) -> Self {
        Self::Mixture(vec![
            Self::sinusoid(0.1),
            Self::linear_sweep(0.05, 0.35, length),
            Self::quadratic_sweep(0.4, 0.1, length),
        ])
    }

    pub fn component_count(&self) -> usize {
        match self {
            Self::Mixture(parts) => parts.iter().map(Self::component_count).sum(),
            _ => 1,
        }
    }

    fn validate(&self, length: usize) -> Result<()> {
        let last = (length - 1) as f64;
        let check_freq = |name: &str, f: f64| {
            if f.is_finite() && (0.0..1.0).contains(&f) {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{name} instantaneous frequency {f} outside [0, 1)"
                )))
            }
        };
        let check_finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be finite")))
            }
        };
        match self {
            Self::Sinusoid { freq, amplitude } => {
                check_finite("amplitude", *amplitude)?;
                check_freq("sinusoid", *freq)
            }
            Self::LinearChirp { f0, rate, amplitude } => {
                check_finite("amplitude", *amplitude)?;
                check_finite("chirp rate", *rate)?;
                check_freq("linear chirp", *f0)?;
                check_freq("linear chirp", f0 + rate * last)
            }
            Self::QuadraticChirp {
                f0,
                curvature,
                amplitude,
            } => {
                check_finite("amplitude", *amplitude)?;
                check_finite("chirp curvature", *curvature)?;
                check_freq("quadratic chirp", *f0)?;
                check_freq("quadratic chirp", f0 + curvature * last * last)
            }
            Self::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::Parameter("mixture needs at least one component".into()));
                }
                parts.iter().try_for_each(|p| p.validate(length))
            }
        }
    }

    fn accumulate(&self, out: &mut [Complex64]) {
        // phase in cycles, wrapped before scaling by 2π
        let mut add = |amplitude: f64, cycles: &dyn Fn(f64) -> f64| {
            for (l, s) in out.iter_mut().enumerate() {
                let phase = 2.0 * PI * cycles(l as f64).rem_euclid(1.0);
                *s += Complex64::from_polar(amplitude, phase);
            }
        };
        match self {
            Self::Sinusoid { freq, amplitude } => add(*amplitude, &|l| freq * l),
            Self::LinearChirp { f0, rate, amplitude } => {
                add(*amplitude, &|l| f0 * l + 0.5 * rate * l * l)
            }
            Self::QuadraticChirp {
                f0,
                curvature,
                amplitude,
            } => add(*amplitude, &|l| f0 * l + curvature * l * l * l / 3.0),
            Self::Mixture(parts) => parts.iter().for_each(|p| p.accumulate(out)),
        }
    }
}

/// Samples `kind` on `0..length`.
pub fn gen_test_signal(kind: &TestSignal, length: usize) -> Result<Signal> {
    if length == 0 {
        return Err(Error::Parameter("signal length must be >= 1".into()));
    }
    kind.validate(length)?;
    let mut samples = vec![Complex64::new(0.0, 0.0); length];
    kind.accumulate(&mut samples);
    Signal::new(samples)
}
