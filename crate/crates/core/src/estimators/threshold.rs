use serde::{Deserialize, Serialize};

use super::{EstimatorMethod, ParityEstimate};
use crate::error::{domain, Result};
use crate::homodyne::IQEnsemble;

/// Per-sample deviation assigned to an inside-fraction `p`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BernoulliErrorModel {
    /// `sqrt(p (1 - p))`
    #[default]
    ExactBernoulli,
    /// `sqrt(p)`
    SqrtP,
}

pub fn bernoulli_error(p: f64, model: BernoulliErrorModel) -> f64 {
    let p = p.clamp(0.0, 1.0);
    match model {
        BernoulliErrorModel::ExactBernoulli => (p * (1.0 - p)).sqrt(),
        BernoulliErrorModel::SqrtP => p.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    /// Threshold radius in units of the noise deviation σ.
    pub a_over_sigma: f64,
    #[serde(default)]
    pub error_model: BernoulliErrorModel,
}

impl ThresholdConfig {
    pub fn new(a_over_sigma: f64, error_model: BernoulliErrorModel) -> Result<Self> {
        if !(a_over_sigma.is_finite() && a_over_sigma > 0.0) {
            return Err(domain(format!("a/sigma must be finite and > 0, got {a_over_sigma}")));
        }
        Ok(Self { a_over_sigma, error_model })
    }
}

/// Fraction of the ensemble within radius `a = a_over_sigma * sigma` of the
/// origin. `sigma` is the calibrated noise deviation, not re-estimated here.
pub fn threshold_estimate(
    ensemble: &IQEnsemble,
    cfg: &ThresholdConfig,
    sigma: f64,
) -> Result<ParityEstimate> {
    let cfg = ThresholdConfig::new(cfg.a_over_sigma, cfg.error_model)?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(domain(format!("sigma must be > 0, got {sigma}")));
    }
    let n = ensemble.samples.len();
    if n == 0 {
        return Err(domain("threshold estimate of an empty ensemble"));
    }
    let a = cfg.a_over_sigma * sigma;
    let a2 = a * a;
    let inside = ensemble
        .samples
        .iter()
        .filter(|z| z.i * z.i + z.q * z.q <= a2)
        .count();
    let p = inside as f64 / n as f64;
    Ok(ParityEstimate {
        value: p,
        std_error: bernoulli_error(p, cfg.error_model),
        method: EstimatorMethod::Threshold { a },
        n_samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::rician_cdf;
    use crate::homodyne::{sample_phase_space, IQSample, Provenance};
    use crate::states::GaussianState;

    #[test]
    fn all_inside_and_saturation() {
        let e = IQEnsemble {
            samples: vec![IQSample { i: 0.1, q: 0.0 }, IQSample { i: 0.0, q: -0.2 }],
            seed: 0,
            provenance: Provenance::SynthesizedDirect,
        };
        let cfg = ThresholdConfig::new(1.0, BernoulliErrorModel::ExactBernoulli).unwrap();
        let p = threshold_estimate(&e, &cfg, 1.0).unwrap();
        assert_eq!(p.value, 1.0);
        assert_eq!(p.std_error, 0.0);

        let st = GaussianState::new(3.0, 0.4, 2.0).unwrap();
        let e = sample_phase_space(&st, 1000, 1).unwrap();
        let big = ThresholdConfig::new(1e6, BernoulliErrorModel::SqrtP).unwrap();
        let p = threshold_estimate(&e, &big, st.sigma()).unwrap();
        assert_eq!(p.value, 1.0);
        assert_eq!(p.std_error, 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = IQEnsemble { samples: vec![], seed: 0, provenance: Provenance::SynthesizedDirect };
        let cfg = ThresholdConfig { a_over_sigma: 1.0, error_model: Default::default() };
        assert!(threshold_estimate(&e, &cfg, 1.0).is_err());
        assert!(ThresholdConfig::new(0.0, Default::default()).is_err());
        assert!(ThresholdConfig::new(f64::NAN, Default::default()).is_err());
    }

    #[test]
    fn vacuum_fraction_converges_to_rayleigh() {
        let st = GaussianState::vacuum();
        let e = sample_phase_space(&st, 200_000, 3).unwrap();
        let cfg = ThresholdConfig::new(1.0, Default::default()).unwrap();
        let p = threshold_estimate(&e, &cfg, st.sigma()).unwrap();
        let expect = 1.0 - (-0.5f64).exp();
        assert!((p.value - expect).abs() < 5.0 * (expect * (1.0 - expect) / 2e5).sqrt());
        assert!((expect - 0.3935).abs() < 1e-4);
        assert!((p.parity_equivalent() - p.value / 0.5).abs() < 1e-15);
    }

    #[test]
    fn fraction_tracks_rician_cdf() {
        let st = GaussianState::new(2.5, 1.0, 1.5).unwrap();
        let e = sample_phase_space(&st, 100_000, 4).unwrap();
        for a in [0.5, 1.0, 2.0, 3.0] {
            let cfg = ThresholdConfig::new(a, Default::default()).unwrap();
            let p = threshold_estimate(&e, &cfg, st.sigma()).unwrap();
            let c = rician_cdf(st.mu(), st.sigma(), a * st.sigma()).unwrap();
            assert!((p.value - c).abs() < 0.01);
        }
    }

    #[test]
    fn error_models() {
        assert_eq!(bernoulli_error(0.25, BernoulliErrorModel::SqrtP), 0.5);
        assert!((bernoulli_error(0.5, BernoulliErrorModel::ExactBernoulli) - 0.5).abs() < 1e-15);
    }
}
