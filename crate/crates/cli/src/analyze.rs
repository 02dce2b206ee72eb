use std::time::Instant;

use tfatom::gabor::dgt;
use tfatom::signal::slepian_window;
use tfatom::solvers::{
    default_anm_tolerance, default_l1_tolerance, extract_sparse_tf, solve_joint_anm, solve_l1_bp,
    solve_windowwise_anm,
};
use tfatom::tfr::grid_to_sparse;
use tfatom::{AdmmOptions, GaborFrame, Window};

use crate::config::{Method, Settings, WindowChoice};
use crate::error::{CliError, CliResult};
use crate::signal_io::read_signal;
use crate::solution::{Metadata, SolutionFile, WindowMeta};

fn build_window(s: &Settings) -> CliResult<Window> {
    let window = match s.window {
        WindowChoice::Slepian => slepian_window(s.winlen, s.bandwidth),
        WindowChoice::Hann => Window::hann(s.winlen),
        WindowChoice::Rect => Window::rectangular(s.winlen),
    };
    window.map_err(|e| CliError::Frame(e.to_string()))
}

/// Runs the configured method and writes the solution. Returns whether the
/// solver met its tolerances.
pub fn run(s: &Settings) -> CliResult<bool> {
    let signal = read_signal(&s.input, s.hop)?;
    let window = build_window(s)?;
    let frame = GaborFrame::new(window, s.hop, s.channels, signal.len())
        .map_err(|e| CliError::Frame(e.to_string()))?;

    let opts = AdmmOptions {
        rho: s.rho,
        max_iters: s.max_iters,
        primal_tol: s.primal_tol,
        dual_tol: s.dual_tol,
        seed: 0,
    };
    opts.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let default_tol = match s.method {
        Method::Dgt | Method::L1 => default_l1_tolerance(&frame),
        Method::AnmWindow | Method::AnmJoint => default_anm_tolerance(&frame),
    };
    let (primal_tol, dual_tol) = opts.tolerances(default_tol);

    let start = Instant::now();
    let mut warnings = Vec::new();
    let (tf, iterations, converged, (primal, dual), objective) = match s.method {
        Method::Dgt => {
            let c = dgt(&signal, &frame.dual()?)?;
            let objective = c.l1_norm();
            (grid_to_sparse(&c, &frame, 0.0)?, 0, true, (0.0, 0.0), objective)
        }
        Method::L1 => {
            let sol = solve_l1_bp(&signal, &frame, &opts)?;
            let tf = grid_to_sparse(&sol.coefficients, &frame, 0.0)?;
            (tf, sol.iterations(), sol.converged, sol.final_residuals(), sol.objective)
        }
        Method::AnmWindow | Method::AnmJoint => {
            let sol = if s.method == Method::AnmJoint {
                solve_joint_anm(&signal, &frame, &opts)?
            } else {
                solve_windowwise_anm(&signal, &frame, &opts)?
            };
            let ex = extract_sparse_tf(&sol, &frame, s.rank_tol)?;
            warnings = ex
                .warnings
                .iter()
                .map(|w| format!("window {}: {}", w.window, w.error))
                .collect();
            (ex.tf, sol.iterations(), sol.converged, sol.final_residuals(), sol.objective)
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    let metadata = Metadata {
        method: s.method.name().into(),
        window: WindowMeta {
            kind: s.window.name().into(),
            length: s.winlen,
            bandwidth: (s.window == WindowChoice::Slepian).then_some(s.bandwidth),
        },
        hop: s.hop,
        channels: s.channels,
        signal_length: signal.len(),
        shifts: frame.shifts(),
        sample_rate: signal.sample_rate(),
        rho: s.rho,
        max_iters: s.max_iters,
        primal_tol,
        dual_tol,
        rank_tol: s.rank_tol,
        iterations,
        converged,
        primal_residual: primal,
        dual_residual: dual,
        objective,
        wall_time_s,
        warnings,
    };
    SolutionFile::new(metadata, &tf).write(&s.output)?;
    if !converged {
        log::warn!(
            "{} stopped at the iteration cap of {} before meeting tolerances",
            s.method.name(),
            s.max_iters
        );
    }
    Ok(converged)
}
