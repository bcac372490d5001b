//! Dark-port output of a two-arm interferometer driven by a coherent tone on a
//! thermal background.
//!
//! The dark port carries `n_c(t) * (sin²(φ/2) + ε)` coherent photons at phase
//! `φ/2`, where `ε` is the power leaking through the imperfect null (added
//! incoherently). The thermal occupation per window does not change with the
//! integration time `t`; the coherent photon count grows linearly with it.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::states::{GaussianState, PhotonBudget, VACUUM_VARIANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    /// Input coherent photons per reference window, `mu_0^2 / 2`.
    pub n_c_total: f64,
    pub n_th: f64,
    /// Linear power leakage of the dark port.
    pub extinction: f64,
    /// Reference window duration in seconds.
    pub t_ref: f64,
}

/// Linear leakage for an extinction ratio in dB.
pub fn extinction_from_db(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

impl InterferometerConfig {
    pub fn new(n_c_total: f64, n_th: f64, extinction: f64, t_ref: f64) -> Result<Self> {
        PhotonBudget::new(n_c_total, n_th)?;
        if !(extinction.is_finite() && (0.0..1.0).contains(&extinction)) {
            return Err(domain(format!("extinction must lie in [0, 1), got {extinction}")));
        }
        if !(t_ref.is_finite() && t_ref > 0.0) {
            return Err(domain(format!("t_ref must be > 0, got {t_ref}")));
        }
        Ok(Self {
            n_c_total,
            n_th,
            extinction,
            t_ref,
        })
    }

    /// Config with a given reference-window SNR and perfect extinction.
    pub fn from_snr(snr: f64, n_th: f64, t_ref: f64) -> Result<Self> {
        let b = PhotonBudget::from_snr(snr, n_th)?;
        Self::new(b.n_c, b.n_th, 0.0, t_ref)
    }

    pub fn with_extinction_db(self, db: f64) -> Result<Self> {
        Self::new(self.n_c_total, self.n_th, extinction_from_db(db), self.t_ref)
    }

    pub fn budget(&self) -> PhotonBudget {
        PhotonBudget {
            n_c: self.n_c_total,
            n_th: self.n_th,
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.n_th + VACUUM_VARIANCE
    }

    fn check_time(t: f64) -> Result<()> {
        if t.is_finite() && t > 0.0 {
            Ok(())
        } else {
            Err(domain(format!("integration time must be > 0, got {t}")))
        }
    }

    /// Coherent photons accumulated over `t`.
    pub fn n_c_at(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.n_c_total * t / self.t_ref)
    }

    pub fn snr_at_time(&self, t: f64) -> Result<f64> {
        Ok(self.n_c_at(t)? / self.sigma2())
    }

    pub fn output_state(&self, phi: f64, t: f64) -> Result<GaussianState> {
        if !phi.is_finite() {
            return Err(domain("phase must be finite"));
        }
        let n_c = self.n_c_at(t)?;
        let s = (0.5 * phi).sin();
        let dark = n_c * (s * s + self.extinction);
        GaussianState::new((2.0 * dark).sqrt(), 0.5 * phi, self.sigma2())
    }

    pub fn parity_vs_phase(&self, phi: f64, t: f64) -> Result<f64> {
        Ok(self.output_state(phi, t)?.parity())
    }

    /// Full width of the dark-fringe parity feature at half of its peak,
    /// found by bisection on `[0, π]`.
    pub fn numeric_fwhm(&self, t: f64) -> Result<f64> {
        let peak = self.parity_vs_phase(0.0, t)?;
        let half = 0.5 * peak;
        let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
        if self.parity_vs_phase(hi, t)? > half {
            return Err(Error::NoFeature {
                snr: self.snr_at_time(t)?,
            });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.parity_vs_phase(mid, t)? > half {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(lo + hi)
    }
}

/// Closed-form FWHM of the leakage-free parity feature, `4 asin(sqrt(ln2/snr))`.
pub fn theoretical_fwhm(snr: f64) -> Result<f64> {
    if !(snr.is_finite() && snr > LN_2) {
        return Err(Error::NoFeature { snr });
    }
    Ok(4.0 * (LN_2 / snr).sqrt().asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    const T: f64 = 25e-9;

    fn cfg(n_c: f64, n_th: f64, eps: f64) -> InterferometerConfig {
        InterferometerConfig::new(n_c, n_th, eps, T).unwrap()
    }

    #[test]
    fn output_state_examples() {
        let c = cfg(1e6, 10.0, 0.0);
        assert_eq!(c.output_state(0.0, T).unwrap().mu(), 0.0);
        let s = c.output_state(PI, T).unwrap();
        assert_relative_eq!(s.n_c(), 1e6, max_relative = 1e-12);
        assert_relative_eq!(s.theta(), PI / 2.0);

        let c = cfg(1e12, 10.0, 1e-9);
        let s = c.output_state(0.0, T).unwrap();
        assert_relative_eq!(s.n_c(), 1e3, max_relative = 1e-12);
        assert!(c.output_state(0.1, 0.0).is_err());
        assert!(c.output_state(0.1, -T).is_err());
    }

    #[test]
    fn from_db() {
        assert_relative_eq!(extinction_from_db(90.0), 1e-9, max_relative = 1e-12);
        assert!(cfg(1.0, 1.0, 0.0).with_extinction_db(0.0).is_err());
    }

    #[test]
    fn parity_vs_phase_examples() {
        for n_c in [1.0, 1e3, 1e6] {
            let p = cfg(n_c, 67100.0, 0.0).parity_vs_phase(0.0, T).unwrap();
            assert_relative_eq!(p, 1.0 / 134201.0, max_relative = 1e-12);
        }
        let c = InterferometerConfig::from_snr(4.07e5, 67100.0, T).unwrap();
        assert!(c.parity_vs_phase(PI, T).unwrap() < 1e-300);

        let c = cfg(1e5, 100.0, 0.0);
        let e1 = (c.parity_vs_phase(0.3, T).unwrap() * 201.0).ln();
        let e2 = (c.parity_vs_phase(0.3, 2.0 * T).unwrap() * 201.0).ln();
        assert_relative_eq!(e2, 2.0 * e1, max_relative = 1e-12);
    }

    #[test]
    fn parity_matches_closed_form() {
        let c = cfg(3e4, 50.0, 0.0);
        for phi in [-2.0, -0.1, 0.0, 0.05, 1.0, 3.0] {
            let expect = (-3e4 * (phi / 2.0f64).sin().powi(2) / 50.5).exp() / 101.0;
            assert_relative_eq!(c.parity_vs_phase(phi, T).unwrap(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn fwhm_examples() {
        assert_relative_eq!(theoretical_fwhm(4.0 * LN_2).unwrap(), TAU / 3.0, max_relative = 1e-14);
        let w = theoretical_fwhm(10f64.powf(5.61)).unwrap();
        assert!((w - 5.218e-3).abs() < 1e-6, "{w}");
        assert!((TAU / w - 1204.0).abs() < 1.0);
        let snr = 1e12;
        let ratio = theoretical_fwhm(snr).unwrap() / (1.0 / snr).sqrt();
        assert_relative_eq!(ratio, 4.0 * LN_2.sqrt(), max_relative = 1e-9);
        assert!(matches!(theoretical_fwhm(LN_2), Err(Error::NoFeature { .. })));
        assert!(theoretical_fwhm(0.1).is_err());
    }

    #[test]
    fn snr_at_time_is_linear() {
        let c = cfg(1e4, 99.5, 0.0);
        assert_relative_eq!(c.snr_at_time(T).unwrap(), 100.0);
        assert_relative_eq!(c.snr_at_time(2.0 * T).unwrap(), 200.0);
        assert_relative_eq!(c.snr_at_time(T / 10.0).unwrap(), 10.0, max_relative = 1e-14);
        assert!(c.snr_at_time(0.0).is_err());
    }

    #[test]
    fn shape_properties() {
        let c = cfg(2e3, 3.0, 1e-3);
        for i in 0..50 {
            let phi = -3.0 + 0.13 * i as f64;
            let p = c.parity_vs_phase(phi, T).unwrap();
            assert_relative_eq!(p, c.parity_vs_phase(-phi, T).unwrap(), max_relative = 1e-13);
            assert_relative_eq!(p, c.parity_vs_phase(phi + TAU, T).unwrap(), max_relative = 1e-9);
            assert!(p <= c.parity_vs_phase(0.0, T).unwrap());
            assert!(p >= c.parity_vs_phase(PI, T).unwrap());
        }
    }

    #[test]
    fn peak_independent_of_n_c_and_t() {
        for n_c in [1.0, 1e2, 1e4, 1e6, 1e8] {
            for t in [T / 10.0, T, 7.0 * T] {
                let p = cfg(n_c, 42.0, 0.0).parity_vs_phase(0.0, t).unwrap();
                assert_relative_eq!(p, 1.0 / 85.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn numeric_fwhm_matches_closed_form() {
        for snr in [10.0, 1e2, 1e3, 1e4, 1e5, 1e6] {
            let c = InterferometerConfig::from_snr(snr, 67100.0, T).unwrap();
            let num = c.numeric_fwhm(T).unwrap();
            let th = theoretical_fwhm(snr).unwrap();
            assert!((num / th - 1.0).abs() < 1e-6, "snr {snr}: {num} vs {th}");
        }
    }

    #[test]
    fn leakage_lowers_peak() {
        let base = cfg(1e9, 67100.0, 0.0);
        let leaky = cfg(1e9, 67100.0, 1e-9);
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let t = T * 10f64.powi(k);
            let p = leaky.parity_vs_phase(0.0, t).unwrap();
            assert!(p <= last);
            last = p;
            let n_leak = leaky.n_c_at(t).unwrap() * 1e-9;
            if n_leak < 0.01 * 67100.0 {
                assert!(p / base.parity_vs_phase(0.0, t).unwrap() > 0.99);
            }
        }
    }
}
