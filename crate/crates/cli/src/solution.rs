//! Solution JSON. Every method writes the same fields in the same order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tfatom::{Complex64, SparseTF, TfAtom};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMeta {
    pub kind: String,
    pub length: usize,
    /// Only meaningful for Slepian windows.
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub method: String,
    pub window: WindowMeta,
    pub hop: usize,
    pub channels: usize,
    pub signal_length: usize,
    pub shifts: usize,
    pub sample_rate: Option<f64>,
    pub rho: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub rank_tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub n: usize,
    pub omega: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub metadata: Metadata,
    pub atoms: Vec<AtomRecord>,
}

impl SolutionFile {
    pub fn new(metadata: Metadata, tf: &SparseTF) -> Self {
        let atoms = tf
            .atoms()
            .iter()
            .map(|a| AtomRecord {
                n: a.window,
                omega: a.omega,
                re: a.coefficient.re,
                im: a.coefficient.im,
            })
            .collect();
        Self { metadata, atoms }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let json = serde_json::to_string_pretty(self).expect("solution serializes");
        fs::write(path, json + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn to_sparse(&self, path: &Path) -> CliResult<SparseTF> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| TfAtom {
                window: a.n,
                omega: a.omega,
                coefficient: Complex64::new(a.re, a.im),
            })
            .collect();
        let m = &self.metadata;
        SparseTF::new(atoms, m.hop, m.channels, m.signal_length).map_err(|e| CliError::io(path, e))
    }
}
