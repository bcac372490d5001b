use serde::{Deserialize, Serialize};

use super::optimize::{bisect, golden_section};
use super::sensitivity::{threshold_min_sensitivity, threshold_probability};
use super::{cr_bound, fwhm_per_sigma};
use crate::error::{domain, Error, Result};
use crate::estimators::{BernoulliErrorModel, ThresholdConfig};
use crate::states::PhotonBudget;

/// SNR at which the threshold curves are evaluated as high-SNR asymptotes.
pub const ASYMPTOTIC_SNR: f64 = 1e6;
/// Upper end of the threshold-radius search in units of σ.
pub const FACTOR_A_MAX: f64 = 8.0;
/// Thermal occupation used for the universal curves; they do not depend on it.
const N_TH: f64 = 67.1e3;

/// Full width at half maximum of the inside-probability curve `p(φ)`.
pub fn threshold_fwhm(budget: PhotonBudget, cfg: &ThresholdConfig) -> Result<f64> {
    let peak = threshold_probability(budget, 0.0, cfg)?;
    let target = 0.5 * peak;
    let f = |phi: f64| threshold_probability(budget, phi, cfg).map_or(f64::NAN, |p| p - target);
    bisect(f, 0.0, std::f64::consts::PI, 1e-15)
        .map(|half| 2.0 * half)
        .ok_or(Error::NoFeature { snr: budget.snr() })
}

/// One threshold radius on the resolution/sensitivity trade-off, both in
/// Cramér-Rao units (resolution additionally divided by `2 sqrt(2 ln 2)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub a_over_sigma: f64,
    pub resolution: f64,
    pub sensitivity: f64,
}

fn tradeoff_point(budget: PhotonBudget, cr: f64, a: f64, model: BernoulliErrorModel) -> Result<TradeoffPoint> {
    let cfg = ThresholdConfig::new(a, model)?;
    let fwhm = threshold_fwhm(budget, &cfg)?;
    let (_, sens) = threshold_min_sensitivity(budget, &cfg)?;
    Ok(TradeoffPoint {
        a_over_sigma: a,
        resolution: fwhm / (fwhm_per_sigma() * cr),
        sensitivity: sens / cr,
    })
}

pub fn tradeoff_curve_at(snr: f64, a_grid: &[f64], model: BernoulliErrorModel) -> Result<Vec<TradeoffPoint>> {
    let budget = PhotonBudget::from_snr(snr, N_TH)?;
    let cr = cr_bound(snr)?;
    a_grid
        .iter()
        .map(|&a| tradeoff_point(budget, cr, a, model))
        .collect()
}

/// Trade-off curve in the high-SNR limit with exact Bernoulli errors.
pub fn tradeoff_curve(a_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    tradeoff_curve_at(ASYMPTOTIC_SNR, a_grid, BernoulliErrorModel::ExactBernoulli)
}

/// Threshold radius (in σ) where normalized resolution and sensitivity meet.
pub fn balance_point(snr: f64, model: BernoulliErrorModel) -> Result<f64> {
    let budget = PhotonBudget::from_snr(snr, N_TH)?;
    let cr = cr_bound(snr)?;
    let gap = |a: f64| {
        tradeoff_point(budget, cr, a, model).map_or(f64::NAN, |p| p.resolution - p.sensitivity)
    };
    bisect(gap, 0.3, 6.0, 1e-6).ok_or_else(|| domain("resolution and sensitivity curves do not cross"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    pub error_model: BernoulliErrorModel,
    pub snr: f64,
    /// Best threshold sensitivity over the Cramér-Rao bound.
    pub factor: f64,
    pub a_over_sigma: f64,
    pub phi: f64,
}

/// Minimum over `(a, φ)` of the threshold sensitivity in Cramér-Rao units at
/// a given SNR; `a/σ` is searched on `(0.1, a_max]`.
pub fn min_sensitivity_factor_at(snr: f64, model: BernoulliErrorModel, a_max: f64) -> Result<FactorReport> {
    let budget = PhotonBudget::from_snr(snr, N_TH)?;
    let cr = cr_bound(snr)?;
    let sens = |a: f64| {
        ThresholdConfig::new(a, model)
            .and_then(|cfg| threshold_min_sensitivity(budget, &cfg))
            .map_or(f64::INFINITY, |(_, d)| d)
    };
    let (a, _) = golden_section(sens, 0.1, a_max, 1e-4);
    let (phi, d) = threshold_min_sensitivity(budget, &ThresholdConfig::new(a, model)?)?;
    Ok(FactorReport {
        error_model: model,
        snr,
        factor: d / cr,
        a_over_sigma: a,
        phi,
    })
}

pub fn min_sensitivity_factor(model: BernoulliErrorModel) -> Result<FactorReport> {
    min_sensitivity_factor_at(ASYMPTOTIC_SNR, model, FACTOR_A_MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_threshold_resolution_matches_ml() {
        let pts = tradeoff_curve(&[0.05]).unwrap();
        assert!((pts[0].resolution - 1.0).abs() < 2e-3, "{:?}", pts[0]);
    }

    #[test]
    fn frozen_points_from_independent_evaluation() {
        // scipy ncx2 with bounded minimization over ν
        let pts = tradeoff_curve(&[1.0, 2.0]).unwrap();
        assert!((pts[0].resolution - 1.13413).abs() < 1e-3);
        assert!((pts[0].sensitivity - 1.91424).abs() < 1e-3);
        assert!((pts[1].resolution - 1.61416).abs() < 1e-3);
        assert!((pts[1].sensitivity - 1.36686).abs() < 1e-3);
    }

    #[test]
    fn resolution_monotone_in_radius() {
        let grid: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
        let pts = tradeoff_curve(&grid).unwrap();
        assert!(pts.windows(2).all(|w| w[1].resolution > w[0].resolution));
    }

    #[test]
    fn sensitivity_branch_decreases_to_asymptote() {
        // no interior minimum: the exact-Bernoulli branch falls towards sqrt(pi/2)
        let grid: Vec<f64> = (1..=16).map(|i| 0.5 * i as f64).collect();
        let pts = tradeoff_curve(&grid).unwrap();
        assert!(pts.windows(2).all(|w| w[1].sensitivity < w[0].sensitivity));
        let last = pts.last().unwrap().sensitivity;
        let limit = (std::f64::consts::PI / 2.0).sqrt();
        assert!(last > limit && last - limit < 1e-2, "{last}");
    }

    #[test]
    fn factor_never_beats_cramer_rao() {
        for m in [BernoulliErrorModel::ExactBernoulli, BernoulliErrorModel::SqrtP] {
            let r = min_sensitivity_factor_at(1e5, m, 4.0).unwrap();
            assert!(r.factor >= 1.0);
        }
    }
}
