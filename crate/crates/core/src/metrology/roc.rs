//! Lock detection with the threshold estimator.
//!
//! A phase within `acceptable_deviation` of the dark fringe counts as locked.
//! A single sample inside radius `a` is an alarm "locked". With the phase
//! drawn uniformly from `[0, Δφ_l]` (locked) or `(Δφ_l, phase_prior_max]`
//! (unlocked), the true- and false-positive rates are the average
//! inside-probabilities over those two ranges. Sweeping `a` traces the curve.

use serde::{Deserialize, Serialize};

use super::cr_bound;
use crate::error::{domain, Result};
use crate::estimators::rician_cdf;
use crate::interferometer::InterferometerConfig;

const NODES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ROCConfig {
    /// Lock window `Δφ_l`, radians.
    pub acceptable_deviation: f64,
    /// Upper end of the unlocked phase prior, radians.
    pub phase_prior_max: f64,
    /// Threshold radii in units of σ.
    pub a_grid: Vec<f64>,
}

impl ROCConfig {
    pub fn new(acceptable_deviation: f64, phase_prior_max: f64, a_grid: Vec<f64>) -> Result<Self> {
        if !(acceptable_deviation > 0.0 && acceptable_deviation < phase_prior_max && phase_prior_max.is_finite()) {
            return Err(domain(format!(
                "need 0 < acceptable_deviation ({acceptable_deviation}) < phase_prior_max ({phase_prior_max})"
            )));
        }
        if a_grid.iter().any(|a| a.is_nan() || *a < 0.0) {
            return Err(domain("threshold radii must be >= 0"));
        }
        Ok(Self {
            acceptable_deviation,
            phase_prior_max,
            a_grid,
        })
    }

    /// Lock window given in Cramér-Rao units at `snr`, prior extending to
    /// `prior_factor` lock windows.
    pub fn in_cr_units(ad_over_cr: f64, snr: f64, prior_factor: f64, a_grid: Vec<f64>) -> Result<Self> {
        let ad = ad_over_cr * cr_bound(snr)?;
        Self::new(ad, prior_factor * ad, a_grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub a_over_sigma: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Mean of `f` over `[lo, hi]` by composite Gauss-Legendre (4 nodes/panel).
fn average<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64) -> Result<f64> {
    const X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    let panels = NODES / 4;
    let h = (hi - lo) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(&W) {
            acc += w * (f(mid - 0.5 * h * x)? + f(mid + 0.5 * h * x)?);
        }
    }
    Ok(acc / (2.0 * panels as f64))
}

pub fn roc_curve(config: &InterferometerConfig, roc: &ROCConfig, t: f64) -> Result<Vec<RocPoint>> {
    let roc = ROCConfig::new(roc.acceptable_deviation, roc.phase_prior_max, roc.a_grid.clone())?;
    let sigma = config.sigma2().sqrt();
    roc.a_grid
        .iter()
        .map(|&a_over_sigma| {
            let a = a_over_sigma * sigma;
            let inside = |phi: f64| {
                let st = config.output_state(phi, t)?;
                rician_cdf(st.mu(), sigma, a)
            };
            Ok(RocPoint {
                a_over_sigma,
                tpr: average(inside, 0.0, roc.acceptable_deviation)?,
                fpr: average(inside, roc.acceptable_deviation, roc.phase_prior_max)?,
            })
        })
        .collect()
}

/// Area under a ROC curve (trapezoid over FPR, anchored at (0,0) and (1,1)).
pub fn roc_auc(points: &[RocPoint]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum()
}
