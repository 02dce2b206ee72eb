//! `analyze` settings: flags override the TOML config file, which overrides
//! built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dgt,
    L1,
    #[serde(alias = "anm_window")]
    AnmWindow,
    #[serde(alias = "anm_joint")]
    AnmJoint,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dgt => "dgt",
            Method::L1 => "l1",
            Method::AnmWindow => "anm-window",
            Method::AnmJoint => "anm-joint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowChoice {
    Slepian,
    Hann,
    #[serde(alias = "rectangular")]
    Rect,
}

impl WindowChoice {
    pub fn name(self) -> &'static str {
        match self {
            WindowChoice::Slepian => "slepian",
            WindowChoice::Hann => "hann",
            WindowChoice::Rect => "rect",
        }
    }
}

/// Every field optional so flags and the config file can be layered.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub method: Option<Method>,
    pub window: Option<WindowChoice>,
    pub winlen: Option<usize>,
    pub bandwidth: Option<f64>,
    pub hop: Option<usize>,
    pub channels: Option<usize>,
    pub rho: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub primal_tol: Option<f64>,
    pub dual_tol: Option<f64>,
    pub rank_tol: Option<f64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::io(path, e))
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            method: self.method.or(base.method),
            window: self.window.or(base.window),
            winlen: self.winlen.or(base.winlen),
            bandwidth: self.bandwidth.or(base.bandwidth),
            hop: self.hop.or(base.hop),
            channels: self.channels.or(base.channels),
            rho: self.rho.or(base.rho),
            max_iters: self.max_iters.or(base.max_iters),
            tol: self.tol.or(base.tol),
            primal_tol: self.primal_tol.or(base.primal_tol),
            dual_tol: self.dual_tol.or(base.dual_tol),
            rank_tol: self.rank_tol.or(base.rank_tol),
            input: self.input.or(base.input),
            output: self.output.or(base.output),
        }
    }

    pub fn resolve(self) -> CliResult<Settings> {
        let missing = |what: &str| CliError::Input(format!("missing required setting `{what}`"));
        let settings = Settings {
            method: self.method.unwrap_or(Method::AnmJoint),
            window: self.window.unwrap_or(WindowChoice::Slepian),
            winlen: self.winlen.unwrap_or(128),
            bandwidth: self.bandwidth.unwrap_or(0.04),
            hop: self.hop.unwrap_or(16),
            channels: self.channels.unwrap_or(1024),
            rho: self.rho.unwrap_or(1.0),
            max_iters: self.max_iters.unwrap_or(5000),
            primal_tol: self.primal_tol.or(self.tol),
            dual_tol: self.dual_tol.or(self.tol),
            rank_tol: self.rank_tol.unwrap_or(1e-6),
            input: self.input.ok_or_else(|| missing("input"))?,
            output: self.output.ok_or_else(|| missing("output"))?,
        };
        if settings.hop == 0 || settings.channels == 0 || settings.winlen == 0 {
            return Err(CliError::Frame(
                "hop, channels and window length must be positive".into(),
            ));
        }
        if !(settings.rank_tol.is_finite() && settings.rank_tol > 0.0) {
            return Err(CliError::Input(format!(
                "rank tolerance must be positive, got {}",
                settings.rank_tol
            )));
        }
        Ok(settings)
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub method: Method,
    pub window: WindowChoice,
    pub winlen: usize,
    pub bandwidth: f64,
    pub hop: usize,
    pub channels: usize,
    pub rho: f64,
    pub max_iters: usize,
    pub primal_tol: Option<f64>,
    pub dual_tol: Option<f64>,
    pub rank_tol: f64,
    pub input: PathBuf,
    pub output: PathBuf,
}
