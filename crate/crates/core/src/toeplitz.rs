//! Hermitian Toeplitz matrices and their Carathéodory–Fejér decomposition.
//!
//! `T(u)` has first column `u`: `T[r, c] = u[r - c]` for `r ≥ c` and
//! `conj(u[c - r])` above the diagonal. A PSD, singular `T(u)` of rank `K`
//! factors uniquely as `Σ_k p_k a(ω_k) a(ω_k)*` with `a(ω)[j] = e^{i2πωj}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Generator `u` of a Hermitian Toeplitz matrix (its first column).
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzGenerator(pub Vec<Complex64>);

impl ToeplitzGenerator {
    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for ToeplitzGenerator {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// One recovered line-spectral component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomEstimate {
    /// Frequency in cycles/sample, in `[0, 1)`.
    pub omega: f64,
    /// Weight in the Vandermonde decomposition.
    pub power: f64,
    /// Least-squares amplitude, filled by [`solve_coefficients`].
    pub coefficient: Complex64,
}

/// How frequencies are extracted from the signal subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyMethod {
    /// Shift invariance of the dominant eigenvectors of `T(u)`.
    #[default]
    MatrixPencil,
    /// Roots of the annihilating (linear prediction) polynomial.
    Prony,
}

/// Atom `a(ω)` of length `len`.
pub fn atom(omega: f64, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (omega * j as f64).rem_euclid(1.0)))
        .collect()
}

pub fn toeplitz_build(u: &[Complex64]) -> CMatrix {
    let d = u.len();
    CMatrix::from_fn(d, d, |r, c| if r >= c { u[r - c] } else { u[c - r].conj() })
}

/// Least-squares projection onto Hermitian Toeplitz generators: each `u[k]`
/// is the mean of the `k`-th subdiagonal and the conjugated `k`-th
/// superdiagonal.
pub fn toeplitz_pinv(x: &CMatrix) -> Vec<Complex64> {
    let d = x.nrows();
    assert_eq!(d, x.ncols(), "toeplitz_pinv needs a square matrix");
    (0..d)
        .map(|k| {
            let sum: Complex64 = (0..d - k).map(|i| x[(i + k, i)] + x[(i, i + k)].conj()).sum();
            sum / (2.0 * (d - k) as f64)
        })
        .collect()
}

/// Eigenvalues in descending order with matching eigenvector columns.
pub fn hermitian_eigen(x: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = x.nrows();
    let eig = SymmetricEigen::try_new(x.clone(), 1e-15, 10_000).ok_or_else(|| {
        Error::Numerical(format!(
            "Hermitian eigensolver did not converge on a {d}x{d} matrix (Frobenius norm {:.3e})",
            x.norm()
        ))
    })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Nearest PSD matrix in Frobenius norm: symmetrize, then clamp negative
/// eigenvalues to zero.
pub fn psd_project(x: &CMatrix) -> Result<CMatrix> {
    let sym = (x + x.adjoint()) * Complex64::new(0.5, 0.0);
    if sym.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Numerical(format!(
            "non-finite entry in {}x{} matrix passed to PSD projection",
            x.nrows(),
            x.ncols()
        )));
    }
    let (values, vectors) = hermitian_eigen(&sym)?;
    let positive = values.iter().take_while(|&&v| v > 0.0).count();
    if positive == values.len() {
        return Ok(sym);
    }
    let mut scaled = vectors.columns(0, positive).into_owned();
    for (c, &v) in values.iter().take(positive).enumerate() {
        scaled.column_mut(c).scale_mut(v.sqrt());
    }
    Ok(&scaled * scaled.adjoint())
}

fn vandermonde(omegas: &[f64], len: usize) -> CMatrix {
    let mut v = CMatrix::zeros(len, omegas.len());
    for (k, &w) in omegas.iter().enumerate() {
        for (j, a) in atom(w, len).into_iter().enumerate() {
            v[(j, k)] = a;
        }
    }
    v
}

fn least_squares(a: &CMatrix, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-13 * svd.singular_values.max())
        .map_err(|e| Error::Numerical(format!("least-squares solve failed: {e}")))
}

fn general_eigenvalues(m: CMatrix) -> Result<Vec<Complex64>> {
    let k = m.nrows();
    if k == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical(format!("Schur iteration failed on {k}x{k} pencil")))?;
    schur
        .eigenvalues()
        .map(|v| v.iter().cloned().collect())
        .ok_or_else(|| Error::Numerical("Schur form is not triangular".into()))
}

fn to_frequency(z: Complex64) -> f64 {
    let w = (z.arg() / (2.0 * PI)).rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Recovers `(ω_k, p_k)` with `T(u) ≈ Σ p_k a(ω_k) a(ω_k)*`.
///
/// The rank `K` counts eigenvalues above `rank_tol · λ_max`. A zero generator
/// yields no atoms; `K == D` is a rank error and eigenvalues below
/// `-rank_tol · λ_max` are a domain error.
pub fn vandermonde_decompose(
    u: &[Complex64],
    rank_tol: f64,
    method: FrequencyMethod,
) -> Result<Vec<AtomEstimate>> {
    let d = u.len();
    if d == 0 {
        return Err(Error::Parameter("empty Toeplitz generator".into()));
    }
    if !(rank_tol.is_finite() && rank_tol > 0.0) {
        return Err(Error::Parameter(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    if u.iter().all(|v| *v == ZERO) {
        return Ok(Vec::new());
    }
    let t = toeplitz_build(u);
    let (values, vectors) = hermitian_eigen(&t)?;
    let lambda_max = values[0];
    if lambda_max <= 0.0 {
        return Err(Error::Domain(format!(
            "Toeplitz matrix is not PSD: largest eigenvalue {lambda_max:.3e}"
        )));
    }
    let lambda_min = values[d - 1];
    if lambda_min < -rank_tol * lambda_max {
        return Err(Error::Domain(format!(
            "Toeplitz matrix is not PSD: eigenvalue {lambda_min:.3e} vs largest {lambda_max:.3e}"
        )));
    }
    let rank = values.iter().filter(|&&v| v > rank_tol * lambda_max).count();
    if rank == d {
        return Err(Error::Rank { rank, dim: d });
    }

    let roots = match method {
        FrequencyMethod::MatrixPencil => {
            let signal = vectors.columns(0, rank);
            let upper = signal.rows(0, d - 1).into_owned();
            let lower = signal.rows(1, d - 1).into_owned();
            let svd = upper.svd(true, true);
            let rotation = svd
                .solve(&lower, 1e-13 * svd.singular_values.max())
                .map_err(|e| Error::Numerical(format!("pencil solve failed: {e}")))?;
            general_eigenvalues(rotation)?
        }
        FrequencyMethod::Prony => {
            // null vector h of T[:, 0..=K] satisfies Σ_j e^{-i2πω_k j} h_j = 0
            let cols = t.columns(0, rank + 1).into_owned();
            let svd = cols.svd(true, true);
            let v_t = svd
                .v_t
                .ok_or_else(|| Error::Numerical("SVD without right vectors".into()))?;
            let smallest = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            // rows of v_t are conjugated right singular vectors, so these are
            // the coefficients of P(z) = Σ_j conj(h_j) z^j
            let poly: Vec<Complex64> = (0..=rank).map(|j| v_t[(smallest, j)]).collect();
            let lead = poly[rank];
            if lead.norm() < 1e-14 {
                return Err(Error::Numerical(
                    "degenerate linear-prediction polynomial".into(),
                ));
            }
            let companion = CMatrix::from_fn(rank, rank, |r, c| {
                if r == 0 {
                    -poly[rank - 1 - c] / lead
                } else if r == c + 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            });
            general_eigenvalues(companion)?
        }
    };

    let omegas: Vec<f64> = roots.into_iter().map(to_frequency).collect();
    let v = vandermonde(&omegas, d);
    let p = least_squares(&v, &DVector::from_column_slice(u))?;
    let mut atoms: Vec<AtomEstimate> = omegas
        .iter()
        .zip(p.iter())
        .map(|(&omega, &pk)| AtomEstimate {
            omega,
            power: pk.re.max(0.0),
            coefficient: ZERO,
        })
        .collect();
    atoms.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(atoms)
}

/// Result of fitting amplitudes to fixed atom frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFit {
    pub atoms: Vec<AtomEstimate>,
    /// `‖Σ_k c_k a(ω_k) - x‖₂`
    pub residual: f64,
    /// Set when some `|c_k|` disagreed with its power by more than 1e-6
    /// relative; the power was replaced by `|c_k|`.
    pub power_mismatch: bool,
}

/// Least-squares amplitudes for `[a(ω_0), …, a(ω_{K-1})] c = x`.
pub fn solve_coefficients(atoms: &[AtomEstimate], x: &[Complex64]) -> Result<CoefficientFit> {
    let d = x.len();
    let k = atoms.len();
    if k == 0 {
        return Ok(CoefficientFit {
            atoms: Vec::new(),
            residual: crate::signal::l2_norm(x),
            power_mismatch: false,
        });
    }
    if k > d {
        return Err(Error::Parameter(format!(
            "{k} atoms cannot be fit from {d} samples"
        )));
    }
    for i in 0..k {
        for j in i + 1..k {
            let gap = (atoms[i].omega - atoms[j].omega).rem_euclid(1.0);
            if gap.min(1.0 - gap) < 1e-9 {
                return Err(Error::IllConditioned(format!(
                    "frequencies {} and {} collide",
                    atoms[i].omega, atoms[j].omega
                )));
            }
        }
    }
    let omegas: Vec<f64> = atoms.iter().map(|a| a.omega).collect();
    let v = vandermonde(&omegas, d);
    let xv = DVector::from_column_slice(x);
    let c = least_squares(&v, &xv)?;
    let residual = (&v * &c - &xv).norm();

    let mut power_mismatch = false;
    let atoms = atoms
        .iter()
        .zip(c.iter())
        .map(|(a, &ck)| {
            let mag = ck.norm();
            let mut power = a.power;
            if (mag - power).abs() > 1e-6 * mag.max(power) {
                power_mismatch = true;
                power = mag;
            }
            AtomEstimate {
                omega: a.omega,
                power,
                coefficient: ck,
            }
        })
        .collect();
    Ok(CoefficientFit {
        atoms,
        residual,
        power_mismatch,
    })
}
