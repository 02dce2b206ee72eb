//! Sparse, off-grid time-frequency representations.
//!
//! The crate analyzes a discrete signal on a Gabor lattice and estimates, for
//! every analysis window, a handful of continuous-frequency complex sinusoids
//! whose windowed sum reconstructs the signal exactly. Four estimators are
//! provided:
//!
//! * plain DGT with the canonical dual window ([`gabor::dgt`]),
//! * ℓ1 basis pursuit over the Gabor dictionary ([`solvers::solve_l1_bp`]),
//! * window-wise atomic norm minimization ([`solvers::solve_windowwise_anm`]),
//! * joint atomic norm minimization over all windows under a perfect
//!   reconstruction constraint ([`solvers::solve_joint_anm`]).
//!
//! Frequencies are always expressed in cycles per sample and all index
//! arithmetic is cyclic modulo the signal length.

pub mod error;
pub mod gabor;
pub mod signal;
pub mod solvers;
pub mod tfr;
pub mod toeplitz;

pub use error::{Error, Result};
pub use gabor::{GaborFrame, TFGridCoefficients, WindowedStack};
pub use num_complex::Complex64;
pub use signal::{Signal, TestSignal, Window, WindowKind};
pub use solvers::{AdmmOptions, AdmmState, AnmSolution, L1Solution};
pub use tfr::{SparseTF, TfAtom};
pub use toeplitz::{AtomEstimate, FrequencyMethod};
