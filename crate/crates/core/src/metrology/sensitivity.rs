use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::optimize::golden_section;
use super::sweep::SweepResult;
use crate::error::{domain, Error, Result};
use crate::estimators::{bernoulli_error, rician_cdf, MlErrorModel, ThresholdConfig};
use crate::interferometer::theoretical_fwhm;
use crate::states::PhotonBudget;

/// Phase uncertainty per single phase-space sample along a sweep. Points
/// where the slope vanishes carry `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub phase_grid: Vec<f64>,
    pub delta_phi: Vec<f64>,
}

impl SensitivityCurve {
    /// Smallest finite sensitivity and its phase.
    pub fn minimum(&self) -> Option<(f64, f64)> {
        self.phase_grid
            .iter()
            .zip(&self.delta_phi)
            .filter(|(_, d)| d.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(p, d)| (*p, *d))
    }
}

/// `std_error / |slope|`, with the slope taken by finite differences of the
/// estimated values (central inside, one-sided at the ends).
pub fn sensitivity_from_curve(sweep: &SweepResult) -> Result<SensitivityCurve> {
    let phi = &sweep.phase_grid;
    let n = phi.len();
    if n < 3 || sweep.estimates.len() != n {
        return Err(domain(format!(
            "sensitivity needs >= 3 matched phase points, got {n}"
        )));
    }
    let v = sweep.values();
    let delta_phi = (0..n)
        .map(|i| {
            let (lo, hi) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            let slope = (v[hi] - v[lo]) / (phi[hi] - phi[lo]);
            let d = sweep.estimates[i].std_error / slope.abs();
            if d.is_finite() {
                d
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(SensitivityCurve {
        phase_grid: phi.clone(),
        delta_phi,
    })
}

fn check_slope_phase(phi: f64) -> Result<f64> {
    let s = phi.sin().abs();
    if !phi.is_finite() || s < 1e-15 {
        return Err(Error::Divergent { phi });
    }
    Ok(s)
}

/// ML sensitivity from the parity error over the analytic slope of the
/// dark-port parity curve: `2 g(x) / (snr |sin φ|)` with `x = 2 snr sin²(φ/2)`.
pub fn ml_sensitivity_theory_with(budget: PhotonBudget, phi: f64, model: MlErrorModel) -> Result<f64> {
    let snr = PhotonBudget::new(budget.n_c, budget.n_th)?.snr();
    let s = check_slope_phase(phi)?;
    if snr == 0.0 {
        return Err(Error::Divergent { phi });
    }
    let x = 2.0 * snr * (0.5 * phi).sin().powi(2);
    Ok(2.0 * model.relative_error(x) / (snr * s))
}

pub fn ml_sensitivity_theory(budget: PhotonBudget, phi: f64) -> Result<f64> {
    ml_sensitivity_theory_with(budget, phi, MlErrorModel::default())
}

/// Numerical minimum of the ML sensitivity over `φ ∈ (0, π)`: `(φ, Δφ)`.
pub fn ml_min_sensitivity(budget: PhotonBudget, model: MlErrorModel) -> Result<(f64, f64)> {
    if budget.snr() <= 0.0 {
        return Err(domain("ML sensitivity needs snr > 0"));
    }
    let f = |u: f64| ml_sensitivity_theory_with(budget, u.exp(), model).unwrap_or(f64::INFINITY);
    let (u, d) = golden_section(f, (1e-12f64).ln(), (PI - 1e-9).ln(), 1e-10);
    Ok((u.exp(), d))
}

/// Closed-form minimum of the delta-method ML sensitivity:
/// `sqrt(2/snr² + 2 sqrt((1/snr²)(1/snr² + 1)))`.
pub fn ml_min_sensitivity_closed_form(snr: f64) -> f64 {
    let inv2 = 1.0 / (snr * snr);
    (2.0 * inv2 + 2.0 * (inv2 * (inv2 + 1.0)).sqrt()).sqrt()
}

struct ThresholdGeometry {
    mu0: f64,
    sigma: f64,
    a: f64,
    step: f64,
}

impl ThresholdGeometry {
    fn new(budget: PhotonBudget, cfg: &ThresholdConfig) -> Result<Self> {
        let budget = PhotonBudget::new(budget.n_c, budget.n_th)?;
        let cfg = ThresholdConfig::new(cfg.a_over_sigma, cfg.error_model)?;
        let sigma = (budget.n_th + 0.5).sqrt();
        let step = 1e-6 * theoretical_fwhm(budget.snr()).unwrap_or(1.0);
        Ok(Self {
            mu0: (2.0 * budget.n_c).sqrt(),
            sigma,
            a: cfg.a_over_sigma * sigma,
            step,
        })
    }

    fn p(&self, phi: f64) -> Result<f64> {
        rician_cdf(self.mu0 * (0.5 * phi).sin().abs(), self.sigma, self.a)
    }
}

/// Probability that a dark-port sample at phase `φ` lands within the
/// threshold radius.
pub fn threshold_probability(budget: PhotonBudget, phi: f64, cfg: &ThresholdConfig) -> Result<f64> {
    ThresholdGeometry::new(budget, cfg)?.p(phi)
}

fn threshold_sensitivity_geom(g: &ThresholdGeometry, phi: f64, cfg: &ThresholdConfig) -> Result<f64> {
    let h = g.step;
    let slope = (g.p(phi + h)? - g.p(phi - h)?) / (2.0 * h);
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::Divergent { phi });
    }
    Ok(bernoulli_error(g.p(phi)?, cfg.error_model) / slope.abs())
}

/// Threshold-method sensitivity `Δp / |dp/dφ|`, slope by central difference
/// with a step of `1e-6` FWHM.
pub fn threshold_sensitivity_theory(budget: PhotonBudget, phi: f64, cfg: &ThresholdConfig) -> Result<f64> {
    let g = ThresholdGeometry::new(budget, cfg)?;
    threshold_sensitivity_geom(&g, phi, cfg)
}

/// Minimum of the threshold sensitivity over phase: `(φ, Δφ)`. The search runs
/// over the dark-port displacement `ν ∈ (0, a + 10σ]`.
pub fn threshold_min_sensitivity(budget: PhotonBudget, cfg: &ThresholdConfig) -> Result<(f64, f64)> {
    let g = ThresholdGeometry::new(budget, cfg)?;
    if g.mu0 == 0.0 {
        return Err(domain("threshold sensitivity needs n_c > 0"));
    }
    let v_max = ((g.a / g.sigma) + 10.0).min(g.mu0 / g.sigma);
    let phi_of = |v: f64| 2.0 * (v * g.sigma / g.mu0).min(1.0).asin();
    let f = |v: f64| threshold_sensitivity_geom(&g, phi_of(v), cfg).unwrap_or(f64::INFINITY);
    let (v, d) = golden_section(f, 1e-6, v_max, 1e-7);
    if !d.is_finite() {
        return Err(Error::Divergent { phi: phi_of(v) });
    }
    Ok((phi_of(v), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::BernoulliErrorModel;
    use crate::interferometer::InterferometerConfig;
    use crate::metrology::{cr_bound, theory_sweep};
    use approx::assert_relative_eq;

    #[test]
    fn ml_theory_closed_form_and_cr_limit() {
        for snr in [1.0, 10.0, 1e3, 1e4, 1e6] {
            let b = PhotonBudget::from_snr(snr, 100.0).unwrap();
            let (_, d) = ml_min_sensitivity(b, MlErrorModel::DeltaMethod).unwrap();
            assert_relative_eq!(d, ml_min_sensitivity_closed_form(snr), max_relative = 1e-8);
        }
        let b = PhotonBudget::from_snr(1e6, 100.0).unwrap();
        let (_, d) = ml_min_sensitivity(b, MlErrorModel::default()).unwrap();
        assert!((d / cr_bound(1e6).unwrap() - 1.0).abs() < 5e-3);

        let b = PhotonBudget::from_snr(1e4, 100.0).unwrap();
        let (phi, d) = ml_min_sensitivity(b, MlErrorModel::default()).unwrap();
        assert!(d.is_finite() && d > cr_bound(1e4).unwrap());
        assert!(phi > 0.0 && phi < theoretical_fwhm(1e4).unwrap());
    }

    #[test]
    fn ml_theory_matches_assembled_form() {
        let b = PhotonBudget::from_snr(50.0, 3.0).unwrap();
        let phi = 0.21;
        let x = 2.0 * 50.0 * (phi / 2.0f64).sin().powi(2);
        let expect = (1.0 + x).sqrt() * 2.0 / (50.0 * phi.sin());
        let got = ml_sensitivity_theory_with(b, phi, MlErrorModel::PrefactorOnly).unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-14);
        assert!(matches!(ml_sensitivity_theory(b, 0.0), Err(Error::Divergent { .. })));
        assert!(matches!(ml_sensitivity_theory(b, PI), Err(Error::Divergent { .. })));
    }

    #[test]
    fn finite_difference_matches_theory() {
        let snr = 1e4;
        let c = InterferometerConfig::from_snr(snr, 67100.0, 1.0).unwrap();
        let grid: Vec<f64> = (-60..=60).map(|i| i as f64 * 1e-3).collect();
        let sweep = theory_sweep(&c, &grid, 1.0, MlErrorModel::default()).unwrap();
        let curve = sensitivity_from_curve(&sweep).unwrap();
        for (i, &phi) in grid.iter().enumerate().skip(1).take(grid.len() - 2) {
            // within the FWHM band, away from the stationary point
            if phi.abs() < 2e-3 || phi.abs() > theoretical_fwhm(snr).unwrap() {
                continue;
            }
            let th = ml_sensitivity_theory(c.budget(), phi).unwrap();
            assert!((curve.delta_phi[i] / th - 1.0).abs() < 0.01, "phi {phi}");
        }
        // evenness
        let n = grid.len();
        for i in 0..n {
            assert_relative_eq!(curve.delta_phi[i], curve.delta_phi[n - 1 - i], max_relative = 1e-9);
        }
        assert!(sensitivity_from_curve(&theory_sweep(&c, &grid[..2], 1.0, MlErrorModel::default()).unwrap()).is_err());
    }

    #[test]
    fn flat_curve_is_flagged() {
        let c = InterferometerConfig::from_snr(1e4, 10.0, 1.0).unwrap();
        let grid = [-1.0e-3, 0.0, 1.0e-3];
        let mut sweep = theory_sweep(&c, &grid, 1.0, MlErrorModel::default()).unwrap();
        for e in &mut sweep.estimates {
            e.value = 0.25;
        }
        let curve = sensitivity_from_curve(&sweep).unwrap();
        assert!(curve.delta_phi.iter().all(|d| d.is_infinite()));
        assert!(curve.minimum().is_none());
    }

    #[test]
    fn threshold_saturates_for_huge_radius() {
        let b = PhotonBudget::from_snr(1e4, 100.0).unwrap();
        let cfg = ThresholdConfig::new(1e4, BernoulliErrorModel::ExactBernoulli).unwrap();
        assert_eq!(threshold_probability(b, 0.01, &cfg).unwrap(), 1.0);
        assert!(matches!(threshold_sensitivity_theory(b, 0.01, &cfg), Err(Error::Divergent { .. })));
    }

    #[test]
    fn threshold_minimum_scales_with_snr() {
        let cfg = ThresholdConfig::new(1.5, BernoulliErrorModel::ExactBernoulli).unwrap();
        let (_, hi) = threshold_min_sensitivity(PhotonBudget::from_snr(1e6, 100.0).unwrap(), &cfg).unwrap();
        let (_, lo) = threshold_min_sensitivity(PhotonBudget::from_snr(5e5, 100.0).unwrap(), &cfg).unwrap();
        assert!((lo / hi / 2f64.sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn threshold_at_one_and_a_half_sigma() {
        let snr = 10f64.powf(5.61);
        let b = PhotonBudget::from_snr(snr, 67100.0).unwrap();
        let cr = cr_bound(snr).unwrap();
        let exact = ThresholdConfig::new(1.5, BernoulliErrorModel::ExactBernoulli).unwrap();
        let (phi, d) = threshold_min_sensitivity(b, &exact).unwrap();
        assert!(phi > 0.0);
        // frozen from an independent scipy noncentral-χ² evaluation
        assert!((d / cr - 1.50482).abs() < 2e-3, "{}", d / cr);
        let sqrt_p = ThresholdConfig::new(1.5, BernoulliErrorModel::SqrtP).unwrap();
        let (_, d) = threshold_min_sensitivity(b, &sqrt_p).unwrap();
        assert!((d / cr - 1.75470).abs() < 2e-3, "{}", d / cr);
    }
}
