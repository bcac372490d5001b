//! Resolution and sensitivity analysis: phase sweeps, the Cramér-Rao bound,
//! theory curves for both estimators, curve fitting, the threshold trade-off
//! and lock-detector ROC curves.

mod fit;
mod optimize;
mod roc;
mod sensitivity;
mod sweep;
mod tradeoff;

pub use fit::{fit_parity_model, ResolutionFit};
pub use roc::{roc_auc, roc_curve, ROCConfig, RocPoint};
pub use sensitivity::{
    ml_min_sensitivity, ml_min_sensitivity_closed_form, ml_sensitivity_theory,
    ml_sensitivity_theory_with, sensitivity_from_curve, threshold_min_sensitivity,
    threshold_probability, threshold_sensitivity_theory, SensitivityCurve,
};
pub use sweep::{monte_carlo_sweep, theory_sweep, SweepMethod, SweepResult};
pub use tradeoff::{
    balance_point, min_sensitivity_factor, threshold_fwhm, tradeoff_curve, tradeoff_curve_at,
    FactorReport, TradeoffPoint, ASYMPTOTIC_SNR, FACTOR_A_MAX,
};

use crate::error::{domain, Result};

/// Per-sample Cramér-Rao bound on the interferometric phase, `sqrt(2/snr)`.
pub fn cr_bound(snr: f64) -> Result<f64> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(domain(format!("snr must be > 0, got {snr}")));
    }
    Ok((2.0 / snr).sqrt())
}

/// Resolution-to-deviation conversion for a Gaussian profile, `2 sqrt(2 ln 2)`.
pub fn fwhm_per_sigma() -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PhotonBudget;
    use approx::assert_relative_eq;

    #[test]
    fn cr_bound_examples() {
        assert_eq!(cr_bound(2.0).unwrap(), 1.0);
        let v = cr_bound(10f64.powf(5.61)).unwrap();
        assert!((v - 2.216e-3).abs() < 1e-6, "{v}");
        let b = PhotonBudget::new(250.0, 0.0).unwrap();
        assert_relative_eq!(cr_bound(b.snr()).unwrap(), (1.0f64 / 250.0).sqrt(), max_relative = 1e-14);
        assert!(cr_bound(0.0).is_err());
        assert!(cr_bound(-1.0).is_err());
    }
}
