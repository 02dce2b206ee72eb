//! ADMM for atomic norm minimization over PSD Toeplitz blocks.
//!
//! Each window carries the block `B_n = [[T(u_n), x_n], [x_n*, ν_n]]` and a
//! PSD copy `Z_n`. One iteration is
//!
//! ```text
//! x   ← P(z_x - λ_x/ρ)
//! u_n ← T†(Z_T,n - (Λ_T,n + I/(2J))/ρ)
//! ν_n ← z_ν,n - (λ_ν,n + 1/2)/ρ
//! Z_n ← P_S+(B_n + Λ_n/ρ)
//! Λ_n ← Λ_n + ρ(B_n - Z_n)
//! ```
//!
//! where `P` is either the global reconstruction projection or per-window
//! substitution. The per-window updates run in parallel; reductions over
//! windows are sequential so traces do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{AdmmOptions, AdmmState, AnmSolution, IterationRecord};
use crate::error::{check_len, Error, Result};
use crate::gabor::{project_reconstruction_in_place, synthesis_windowed, GaborFrame, WindowedStack};
use crate::signal::{l2_norm, Signal};
use crate::toeplitz::{psd_project, toeplitz_pinv, CMatrix};

#[derive(Clone, Copy)]
enum Constraint {
    /// `A_g x = f`
    Joint,
    /// `W_n x_n = W_n f` for every `n`
    Windowwise,
}

impl Constraint {
    /// Projects `v` in place and returns the relative constraint violation.
    fn project(self, v: &mut WindowedStack, f: &Signal, frame: &GaborFrame) -> Result<f64> {
        let f_norm = f.norm();
        match self {
            Constraint::Joint => {
                project_reconstruction_in_place(v, f, frame)?;
                let synth = synthesis_windowed(v, frame)?;
                let resid: Vec<Complex64> = synth
                    .samples()
                    .iter()
                    .zip(f.samples())
                    .map(|(a, b)| a - b)
                    .collect();
                Ok(relative(l2_norm(&resid), f_norm))
            }
            Constraint::Windowwise => {
                let taps = frame.window().taps();
                let samples = f.samples();
                let mut violation = 0.0;
                let mut reference = 0.0;
                for n in 0..frame.shifts() {
                    for (j, (x, &g)) in v.block_mut(n).iter_mut().zip(taps).enumerate() {
                        if g != 0.0 {
                            let target = samples[frame.global_index(n, j)];
                            *x = target;
                            violation += ((*x - target) * g).norm_sqr();
                            reference += (target * g).norm_sqr();
                        }
                    }
                }
                Ok(relative(violation.sqrt(), reference.sqrt()))
            }
        }
    }
}

fn relative(err: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        err / norm
    } else {
        err
    }
}

struct WindowStep {
    u: Vec<Complex64>,
    nu: f64,
    primal: f64,
    dual: f64,
}

fn update_window(
    z: &mut CMatrix,
    lambda: &mut CMatrix,
    x: &[Complex64],
    rho: f64,
) -> Result<WindowStep> {
    let j = x.len();
    let inv_rho = 1.0 / rho;
    let trace_weight = 1.0 / (2.0 * j as f64);

    let mut target = z.view((0, 0), (j, j)) - lambda.view((0, 0), (j, j)) * Complex64::new(inv_rho, 0.0);
    for i in 0..j {
        target[(i, i)] -= trace_weight * inv_rho;
    }
    let u = toeplitz_pinv(&target);
    let nu = z[(j, j)].re - (lambda[(j, j)].re + 0.5) * inv_rho;

    let mut block = CMatrix::zeros(j + 1, j + 1);
    for r in 0..j {
        for c in 0..j {
            block[(r, c)] = if r >= c { u[r - c] } else { u[c - r].conj() };
        }
        block[(r, j)] = x[r];
        block[(j, r)] = x[r].conj();
    }
    block[(j, j)] = Complex64::new(nu, 0.0);

    let shifted = &block + &*lambda * Complex64::new(inv_rho, 0.0);
    let z_new = psd_project(&shifted)?;
    let gap = &block - &z_new;
    let primal = gap.norm();
    let dual = (&z_new - &*z).norm();
    *lambda += gap * Complex64::new(rho, 0.0);
    *z = z_new;
    Ok(WindowStep { u, nu, primal, dual })
}

fn run(
    f: &Signal,
    frame: &GaborFrame,
    opts: &AdmmOptions,
    constraint: Constraint,
    mut state: AdmmState,
) -> Result<AnmSolution> {
    opts.validate()?;
    check_len("signal", frame.signal_length(), f.len())?;
    let n_win = frame.shifts();
    let j = frame.support();
    check_len("ADMM state windows", n_win, state.windows())?;
    check_len("ADMM block order", j + 1, state.block_dim())?;

    let (primal_tol, dual_tol) = opts.tolerances(super::default_anm_tolerance(frame));
    let rho = opts.rho;
    let inv_rho = 1.0 / rho;

    let mut x = WindowedStack::for_frame(frame);
    let mut u = vec![vec![Complex64::new(0.0, 0.0); j]; n_win];
    let mut nu = vec![0.0; n_win];
    let mut trace = Vec::with_capacity(opts.max_iters.min(100_000));
    let mut converged = false;

    for iter in 0..opts.max_iters {
        for n in 0..n_win {
            let (zb, lb) = (&state.z[n], &state.lambda[n]);
            for (r, v) in x.block_mut(n).iter_mut().enumerate() {
                *v = zb[(r, j)] - lb[(r, j)] * inv_rho;
            }
        }
        let feasibility = constraint.project(&mut x, f, frame)?;

        let steps: Vec<Result<WindowStep>> = state
            .z
            .par_iter_mut()
            .zip(state.lambda.par_iter_mut())
            .enumerate()
            .map(|(n, (zb, lb))| update_window(zb, lb, x.block(n), rho))
            .collect();

        let mut primal = 0.0;
        let mut dual = 0.0;
        let mut objective = 0.0;
        for (n, step) in steps.into_iter().enumerate() {
            let step = step.map_err(|e| {
                Error::Numerical(format!("iteration {iter}, window {n}: {e}"))
            })?;
            primal += step.primal;
            dual += step.dual;
            objective += 0.5 * step.u[0].re + 0.5 * step.nu;
            u[n] = step.u;
            nu[n] = step.nu;
        }
        dual *= rho;

        if !(primal.is_finite() && dual.is_finite() && objective.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite iterate at iteration {iter}: primal {primal}, dual {dual}, objective {objective}"
            )));
        }
        trace.push(IterationRecord {
            primal,
            dual,
            objective,
            feasibility,
        });
        if primal <= primal_tol && dual <= dual_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "ADMM stopped after {} iterations without meeting tolerances",
            opts.max_iters
        );
    }

    let objective = trace.last().map_or(0.0, |r| r.objective);
    Ok(AnmSolution {
        x,
        u,
        nu,
        objective,
        trace,
        converged,
        state,
    })
}

/// Joint atomic norm minimization from zero-initialized `Z_n`, `Λ_n`.
pub fn solve_joint_anm(f: &Signal, frame: &GaborFrame, opts: &AdmmOptions) -> Result<AnmSolution> {
    let state = AdmmState::zeros(frame.shifts(), frame.support());
    run(f, frame, opts, Constraint::Joint, state)
}

/// Joint atomic norm minimization from a caller-supplied starting state.
pub fn solve_joint_anm_from(
    f: &Signal,
    frame: &GaborFrame,
    opts: &AdmmOptions,
    state: AdmmState,
) -> Result<AnmSolution> {
    run(f, frame, opts, Constraint::Joint, state)
}

/// Independent atomic norm minimization per window with `W_n x_n = W_n f`.
///
/// Coordinates where the window tap is exactly zero are left free.
pub fn solve_windowwise_anm(
    f: &Signal,
    frame: &GaborFrame,
    opts: &AdmmOptions,
) -> Result<AnmSolution> {
    let state = AdmmState::zeros(frame.shifts(), frame.support());
    run(f, frame, opts, Constraint::Windowwise, state)
}

pub fn solve_windowwise_anm_from(
    f: &Signal,
    frame: &GaborFrame,
    opts: &AdmmOptions,
    state: AdmmState,
) -> Result<AnmSolution> {
    run(f, frame, opts, Constraint::Windowwise, state)
}
