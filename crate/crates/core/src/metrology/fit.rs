use serde::{Deserialize, Serialize};

use super::sweep::SweepResult;
use crate::error::{Error, Result};
use crate::interferometer::theoretical_fwhm;

const MAX_ITER: usize = 500;
const REL_TOL: f64 = 1e-10;
/// Errors below this fraction of the largest one are floored to it, so that
/// points deep in the tails cannot overflow the weights.
const ERROR_FLOOR: f64 = 1e-9;

/// Parameters of the dark-port parity curve recovered from a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionFit {
    pub snr_hat: f64,
    pub n_th_hat: f64,
    pub n_c_hat: f64,
    pub fwhm: f64,
    /// Reduced χ² of the weighted fit.
    pub residual: f64,
    pub iterations: usize,
}

/// `m(φ) = exp(lp - exp(ls) sin²(φ/2))` with `lp = ln peak`, `ls = ln snr`.
fn model(lp: f64, ls: f64, s2: f64) -> f64 {
    (lp - ls.exp() * s2).exp()
}

fn chi2(params: (f64, f64), s2: &[f64], y: &[f64], w: &[f64]) -> f64 {
    s2.iter()
        .zip(y)
        .zip(w)
        .map(|((s, y), w)| w * (model(params.0, params.1, *s) - y).powi(2))
        .sum()
}

/// Weighted Levenberg-Marquardt fit of the leakage-free dark-port parity
/// curve, parameters `(n_c, n_th)`, weights `1/std_error²`.
pub fn fit_parity_model(sweep: &SweepResult) -> Result<ResolutionFit> {
    let fail = |reason: &str, residual: f64| Error::FitFailure {
        reason: reason.to_string(),
        residual,
    };
    let n = sweep.phase_grid.len();
    if n < 3 || sweep.estimates.len() != n {
        return Err(fail("need at least 3 sweep points", f64::NAN));
    }
    let y = sweep.values();
    let s2: Vec<f64> = sweep
        .phase_grid
        .iter()
        .map(|p| (0.5 * p).sin().powi(2))
        .collect();
    let max_err = sweep
        .estimates
        .iter()
        .map(|e| e.std_error)
        .fold(0.0, f64::max);
    if !(max_err > 0.0) {
        return Err(fail("sweep carries no error estimates", f64::NAN));
    }
    let w: Vec<f64> = sweep
        .estimates
        .iter()
        .map(|e| 1.0 / e.std_error.max(ERROR_FLOOR * max_err).powi(2))
        .collect();

    // start: peak from the data, width from the innermost sub-half-maximum point
    let (k_peak, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if !(peak > 0.0) {
        return Err(fail("no positive parity values", f64::NAN));
    }
    let half_s2 = s2
        .iter()
        .zip(&y)
        .filter(|(_, v)| **v <= 0.5 * peak)
        .map(|(s, _)| *s)
        .fold(f64::INFINITY, f64::min);
    if !half_s2.is_finite() || half_s2 <= s2[k_peak] {
        return Err(fail(
            "sweep never falls below half maximum; feature width is unidentifiable",
            f64::NAN,
        ));
    }
    let mut p = (peak.ln(), (std::f64::consts::LN_2 / (half_s2 - s2[k_peak]).max(1e-300)).ln());
    let mut cost = chi2(p, &s2, &y, &w);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let snr = p.1.exp();
        for i in 0..n {
            let m = model(p.0, p.1, s2[i]);
            let r = m - y[i];
            let j1 = m;
            let j2 = -m * snr * s2[i];
            a11 += w[i] * j1 * j1;
            a12 += w[i] * j1 * j2;
            a22 += w[i] * j2 * j2;
            g1 += w[i] * j1 * r;
            g2 += w[i] * j2 * r;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let (b11, b22) = (a11 * (1.0 + lambda), a22 * (1.0 + lambda));
            let det = b11 * b22 - a12 * a12;
            if !(det.abs() > 0.0) || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let d1 = -(b22 * g1 - a12 * g2) / det;
            let d2 = -(b11 * g2 - a12 * g1) / det;
            let trial = (p.0 + d1, p.1 + d2);
            let c = chi2(trial, &s2, &y, &w);
            if c.is_finite() && c <= cost {
                let rel = (d1.abs() / p.0.abs().max(1e-300)).max(d2.abs() / p.1.abs().max(1e-300));
                let step_small = d1.abs().max(d2.abs()) < REL_TOL || rel < REL_TOL;
                p = trial;
                cost = c;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if step_small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged || !accepted {
            // no improving step left means we sit at the minimum to machine precision
            converged = true;
            break;
        }
    }
    let dof = (n as f64 - 2.0).max(1.0);
    let residual = cost / dof;
    if !converged {
        return Err(fail("no convergence within iteration budget", residual));
    }
    let snr_hat = p.1.exp();
    let peak_hat = p.0.exp();
    let n_th_hat = 0.5 * (1.0 / peak_hat - 1.0);
    let fwhm = theoretical_fwhm(snr_hat).map_err(|_| fail("fitted snr below ln 2", residual))?;
    Ok(ResolutionFit {
        snr_hat,
        n_th_hat,
        n_c_hat: snr_hat * (n_th_hat + 0.5),
        fwhm,
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::MlErrorModel;
    use crate::interferometer::InterferometerConfig;
    use crate::metrology::{monte_carlo_sweep, theory_sweep, SweepMethod};

    fn grid(fwhm: f64, half_span: f64, points: usize) -> Vec<f64> {
        (0..points)
            .map(|i| -half_span * fwhm + 2.0 * half_span * fwhm * i as f64 / (points - 1) as f64)
            .collect()
    }

    #[test]
    fn noiseless_sweep_recovers_parameters() {
        let snr = 1e4;
        let c = InterferometerConfig::from_snr(snr, 67100.0, 1.0).unwrap();
        let w = theoretical_fwhm(snr).unwrap();
        let s = theory_sweep(&c, &grid(w, 1.5, 41), 1.0, MlErrorModel::default()).unwrap();
        let f = fit_parity_model(&s).unwrap();
        assert!((f.snr_hat / snr - 1.0).abs() < 1e-3);
        assert!((f.n_th_hat / 67100.0 - 1.0).abs() < 1e-3);
        assert!((f.fwhm / w - 1.0).abs() < 1e-3);
    }

    #[test]
    fn monte_carlo_sweep_recovers_snr() {
        let snr = 1e4;
        let c = InterferometerConfig::from_snr(snr, 67100.0, 1.0).unwrap();
        let w = theoretical_fwhm(snr).unwrap();
        let m = SweepMethod::Ml { error_model: MlErrorModel::default() };
        let s = monte_carlo_sweep(&c, &grid(w, 1.5, 31), 1.0, m, 200, 200, 17).unwrap();
        let f = fit_parity_model(&s).unwrap();
        assert!((f.snr_hat / snr - 1.0).abs() < 0.05, "{}", f.snr_hat);
    }

    #[test]
    fn narrow_sweep_fails() {
        let snr = 1e4;
        let c = InterferometerConfig::from_snr(snr, 67100.0, 1.0).unwrap();
        let w = theoretical_fwhm(snr).unwrap();
        let s = theory_sweep(&c, &grid(w, 0.2, 21), 1.0, MlErrorModel::default()).unwrap();
        assert!(matches!(fit_parity_model(&s), Err(Error::FitFailure { .. })));
    }
}
