//! Off-grid atoms from an atomic-norm solution.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::AnmSolution;
use crate::error::{check_len, Error, Result};
use crate::gabor::GaborFrame;
use crate::signal::l2_norm;
use crate::tfr::{SparseTF, TfAtom};
use crate::toeplitz::{solve_coefficients, vandermonde_decompose, FrequencyMethod};

/// A window whose decomposition failed and was left empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionWarning {
    pub window: usize,
    pub error: Error,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub tf: SparseTF,
    pub warnings: Vec<ExtractionWarning>,
}

/// [`extract_sparse_tf_with`] using the matrix pencil.
pub fn extract_sparse_tf(sol: &AnmSolution, frame: &GaborFrame, rank_tol: f64) -> Result<Extraction> {
    extract_sparse_tf_with(sol, frame, rank_tol, FrequencyMethod::MatrixPencil)
}

/// Decomposes every `T(u_n)`, fits amplitudes against `x_n` and rotates them
/// to the global phase convention (`c · e^{-i2πω·an}`).
///
/// Windows with `‖x_n‖ ≤ 1e-9 · max_n ‖x_n‖` contribute no atoms. A failing
/// window is reported in `warnings` and skipped.
pub fn extract_sparse_tf_with(
    sol: &AnmSolution,
    frame: &GaborFrame,
    rank_tol: f64,
    method: FrequencyMethod,
) -> Result<Extraction> {
    if !(rank_tol.is_finite() && rank_tol > 0.0) {
        return Err(Error::Parameter(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    check_len("solution windows", frame.shifts(), sol.x.blocks())?;
    check_len("solution block length", frame.support(), sol.x.block_len())?;
    check_len("solution generators", frame.shifts(), sol.u.len())?;

    let norms: Vec<f64> = (0..frame.shifts()).map(|n| l2_norm(sol.x.block(n))).collect();
    let peak = norms.iter().cloned().fold(0.0, f64::max);
    let mut atoms = Vec::new();
    let mut warnings = Vec::new();

    for n in 0..frame.shifts() {
        if norms[n] <= 1e-9 * peak || peak == 0.0 {
            continue;
        }
        let fit = vandermonde_decompose(&sol.u[n], rank_tol, method)
            .and_then(|est| solve_coefficients(&est, sol.x.block(n)));
        match fit {
            Ok(fit) => {
                let start = (n * frame.hop()) as f64;
                for a in fit.atoms {
                    let rot = Complex64::from_polar(1.0, -2.0 * PI * (a.omega * start).rem_euclid(1.0));
                    atoms.push(TfAtom {
                        window: n,
                        omega: a.omega,
                        coefficient: a.coefficient * rot,
                    });
                }
            }
            Err(error) => {
                log::warn!("window {n}: atom extraction failed: {error}");
                warnings.push(ExtractionWarning { window: n, error });
            }
        }
    }
    Ok(Extraction {
        tf: SparseTF::new(atoms, frame.hop(), frame.channels(), frame.signal_length())?,
        warnings,
    })
}
