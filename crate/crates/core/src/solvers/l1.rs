//! ℓ1 basis pursuit `min ‖c‖₁ s.t. G_g c = f` by Douglas–Rachford splitting.

use num_complex::Complex64;

use super::{AdmmOptions, IterationRecord};
use crate::error::{check_len, Error, Result};
use crate::gabor::{idgt, project_grid_coefficients, GaborFrame, TFGridCoefficients};
use crate::signal::{l2_norm, Signal};

#[derive(Debug, Clone)]
pub struct L1Solution {
    /// Feasible coefficients with the smallest ℓ1 norm seen.
    pub coefficients: TFGridCoefficients,
    pub objective: f64,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
}

impl L1Solution {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residuals(&self) -> (f64, f64) {
        self.trace.last().map_or((0.0, 0.0), |r| (r.primal, r.dual))
    }
}

/// Complex soft thresholding: shrinks magnitudes by `tau`, keeps phases.
fn soft_threshold(v: Complex64, tau: f64) -> Complex64 {
    let mag = v.norm();
    if mag <= tau {
        Complex64::new(0.0, 0.0)
    } else {
        v * ((mag - tau) / mag)
    }
}

fn relative_feasibility(c: &TFGridCoefficients, f: &Signal, frame: &GaborFrame) -> Result<f64> {
    let synth = idgt(c, frame)?;
    let resid: Vec<Complex64> = synth
        .samples()
        .iter()
        .zip(f.samples())
        .map(|(a, b)| a - b)
        .collect();
    let norm = f.norm();
    let err = l2_norm(&resid);
    Ok(if norm > 0.0 { err / norm } else { err })
}

/// Douglas–Rachford with step `γ = 1/ρ` and unit relaxation, alternating
/// the projection onto `{c : G_g c = f}` with complex soft thresholding.
///
/// Requires a painless frame so that `G_g G_g*` is diagonal. Every returned
/// iterate is the projected one and hence feasible to machine precision.
pub fn solve_l1_bp(f: &Signal, frame: &GaborFrame, opts: &AdmmOptions) -> Result<L1Solution> {
    opts.validate()?;
    check_len("signal", frame.signal_length(), f.len())?;
    if !frame.is_painless() {
        return Err(Error::UnsupportedConfiguration(format!(
            "basis pursuit needs window length {} <= channels {}",
            frame.support(),
            frame.channels()
        )));
    }
    let (primal_tol, dual_tol) = opts.tolerances(super::default_l1_tolerance(frame));
    let gamma = 1.0 / opts.rho;

    let mut z = TFGridCoefficients::zeros(frame);
    let mut x_prev = TFGridCoefficients::zeros(frame);
    let mut best: Option<(f64, TFGridCoefficients)> = None;
    let mut trace = Vec::new();
    let mut converged = false;

    for iter in 0..opts.max_iters {
        let x = project_grid_coefficients(&z, f, frame)?;
        let objective = x.l1_norm();
        let feasibility = relative_feasibility(&x, f, frame)?;

        let mut primal = 0.0;
        let mut dual = 0.0;
        for ((zv, &xv), &pv) in z
            .values_mut()
            .iter_mut()
            .zip(x.values())
            .zip(x_prev.values())
        {
            let w = soft_threshold(2.0 * xv - *zv, gamma);
            primal += (w - xv).norm_sqr();
            dual += (xv - pv).norm_sqr();
            *zv += w - xv;
        }
        let primal = primal.sqrt();
        let dual = dual.sqrt() / gamma;
        if !(primal.is_finite() && dual.is_finite() && objective.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite Douglas-Rachford iterate at iteration {iter}"
            )));
        }
        trace.push(IterationRecord {
            primal,
            dual,
            objective,
            feasibility,
        });
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, x.clone()));
        }
        x_prev = x;
        if primal <= primal_tol && dual <= dual_tol {
            converged = true;
            break;
        }
    }

    let last = project_grid_coefficients(&z, f, frame)?;
    let last_obj = last.l1_norm();
    let (objective, coefficients) = match best {
        Some((b, c)) if b < last_obj => (b, c),
        _ => (last_obj, last),
    };
    if !converged {
        log::warn!(
            "Douglas-Rachford stopped after {} iterations without meeting tolerances",
            opts.max_iters
        );
    }
    Ok(L1Solution {
        coefficients,
        objective,
        trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::dgt;
    use crate::signal::{slepian_window, Window};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame() -> GaborFrame {
        GaborFrame::new(slepian_window(16, 0.1).unwrap(), 4, 16, 64).unwrap()
    }

    #[test]
    fn soft_threshold_keeps_phase() {
        let v = Complex64::from_polar(3.0, 1.1);
        let s = soft_threshold(v, 1.0);
        assert!((s.norm() - 2.0).abs() < 1e-15 && (s.arg() - 1.1).abs() < 1e-15);
        assert_eq!(soft_threshold(Complex64::new(0.5, 0.0), 1.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_signal() {
        let fr = frame();
        let sol = solve_l1_bp(&Signal::zeros(64).unwrap(), &fr, &AdmmOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.objective, 0.0);
        assert!(sol.coefficients.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_grid_atom_bound() {
        let fr = frame();
        let mut c0 = TFGridCoefficients::zeros(&fr);
        c0.values_mut()[3 + 5 * 16] = Complex64::new(0.8, -0.6);
        let f = idgt(&c0, &fr).unwrap();
        let sol = solve_l1_bp(&f, &fr, &AdmmOptions::default().with_max_iters(20_000)).unwrap();
        assert!(sol.objective <= c0.l1_norm() + 1e-4, "objective {}", sol.objective);
        assert!(relative_feasibility(&sol.coefficients, &f, &fr).unwrap() <= 1e-8);
    }

    #[test]
    fn beats_canonical_dual_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let fr = frame();
        let f = Signal::new(
            (0..64)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let dual = dgt(&f, &fr.dual().unwrap()).unwrap();
        let sol = solve_l1_bp(&f, &fr, &AdmmOptions::default()).unwrap();
        assert!(sol.objective <= dual.l1_norm() + 1e-6);
        assert!(relative_feasibility(&sol.coefficients, &f, &fr).unwrap() <= 1e-8);
    }

    #[test]
    fn non_painless_is_rejected() {
        let fr = GaborFrame::new(Window::hann(12).unwrap(), 3, 4, 24).unwrap();
        let err = solve_l1_bp(&Signal::zeros(24).unwrap(), &fr, &AdmmOptions::default());
        assert!(matches!(err, Err(Error::UnsupportedConfiguration(_))));
    }

    #[test]
    fn iteration_cap_sets_flag() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let fr = frame();
        let f = Signal::new(
            (0..64)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
                .collect(),
        )
        .unwrap();
        let sol = solve_l1_bp(&f, &fr, &AdmmOptions::default().with_max_iters(3)).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations(), 3);
        assert!(relative_feasibility(&sol.coefficients, &f, &fr).unwrap() <= 1e-8);
    }
}
