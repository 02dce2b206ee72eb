//! Sparse time-frequency estimators.
//!
//! * [`solve_l1_bp`]: ℓ1 basis pursuit over the on-grid Gabor dictionary.
//! * [`solve_windowwise_anm`]: atomic norm minimization per window, each
//!   window constrained to agree with the signal on its own support.
//! * [`solve_joint_anm`]: sum of per-window atomic norms under the global
//!   constraint `A_g x = f`, solved by ADMM on `(J+1)×(J+1)` PSD blocks.

mod anm;
mod extract;
mod l1;

pub use anm::{solve_joint_anm, solve_joint_anm_from, solve_windowwise_anm, solve_windowwise_anm_from};
pub use extract::{extract_sparse_tf, extract_sparse_tf_with, Extraction, ExtractionWarning};
pub use l1::{solve_l1_bp, L1Solution};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gabor::{GaborFrame, WindowedStack};
use crate::toeplitz::CMatrix;

/// ADMM / Douglas–Rachford settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmOptions {
    /// Augmented Lagrangian parameter. The ℓ1 solver uses step `1/rho`.
    pub rho: f64,
    pub max_iters: usize,
    /// `None` selects a problem-scaled default.
    pub primal_tol: Option<f64>,
    pub dual_tol: Option<f64>,
    /// Reserved; initialization is deterministic.
    pub seed: u64,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iters: 5000,
            primal_tol: None,
            dual_tol: None,
            seed: 0,
        }
    }
}

impl AdmmOptions {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.primal_tol = Some(tol);
        self.dual_tol = Some(tol);
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::Parameter(format!("rho must be positive, got {}", self.rho)));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be >= 1".into()));
        }
        for (name, tol) in [("primal_tol", self.primal_tol), ("dual_tol", self.dual_tol)] {
            if let Some(t) = tol {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::Parameter(format!("{name} must be positive, got {t}")));
                }
            }
        }
        Ok(())
    }

    /// Resolved `(primal, dual)` tolerances given the default.
    pub fn tolerances(&self, default: f64) -> (f64, f64) {
        (
            self.primal_tol.unwrap_or(default),
            self.dual_tol.unwrap_or(default),
        )
    }
}

/// Residual tolerance used by the atomic-norm solvers when none is given:
/// `1e-7 · N · (J+1)`.
pub fn default_anm_tolerance(frame: &GaborFrame) -> f64 {
    1e-7 * (frame.shifts() * (frame.support() + 1)) as f64
}

/// Residual tolerance used by basis pursuit when none is given:
/// `1e-7 · sqrt(M·N)`.
pub fn default_l1_tolerance(frame: &GaborFrame) -> f64 {
    1e-7 * ((frame.channels() * frame.shifts()) as f64).sqrt()
}

/// One row of a solver's convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub primal: f64,
    pub dual: f64,
    pub objective: f64,
    /// Relative constraint violation right after the constrained update.
    pub feasibility: f64,
}

/// Splitting variables `Z_n` and multipliers `Λ_n`, one `(J+1)×(J+1)`
/// Hermitian pair per window.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    z: Vec<CMatrix>,
    lambda: Vec<CMatrix>,
}

impl AdmmState {
    pub fn zeros(windows: usize, support: usize) -> Self {
        let block = CMatrix::zeros(support + 1, support + 1);
        Self {
            z: vec![block.clone(); windows],
            lambda: vec![block; windows],
        }
    }

    pub fn from_blocks(z: Vec<CMatrix>, lambda: Vec<CMatrix>) -> Result<Self> {
        if z.len() != lambda.len() || z.is_empty() {
            return Err(Error::Parameter(format!(
                "need matching non-empty block lists, got {} and {}",
                z.len(),
                lambda.len()
            )));
        }
        let dim = z[0].nrows();
        for m in z.iter().chain(&lambda) {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Dimension {
                    what: "ADMM block",
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(Self { z, lambda })
    }

    pub fn windows(&self) -> usize {
        self.z.len()
    }

    pub fn block_dim(&self) -> usize {
        self.z[0].nrows()
    }

    pub fn z(&self) -> &[CMatrix] {
        &self.z
    }

    pub fn lambda(&self) -> &[CMatrix] {
        &self.lambda
    }
}

/// Output of either atomic-norm solver.
#[derive(Debug, Clone)]
pub struct AnmSolution {
    pub x: WindowedStack,
    /// Toeplitz generators `u_n`, each of length `J`.
    pub u: Vec<Vec<Complex64>>,
    pub nu: Vec<f64>,
    /// `Σ_n Tr(T(u_n))/(2J) + ν_n/2`.
    pub objective: f64,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    pub state: AdmmState,
}

impl AnmSolution {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residuals(&self) -> (f64, f64) {
        self.trace.last().map_or((0.0, 0.0), |r| (r.primal, r.dual))
    }
}
