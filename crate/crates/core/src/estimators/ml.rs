use serde::{Deserialize, Serialize};

use super::{EstimatorMethod, ParityEstimate};
use crate::error::{Error, Result};
use crate::homodyne::IQEnsemble;
use crate::states::{normalize_angle, parity_closed_form};

/// Maximum-likelihood parameters of a symmetric 2-D Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLFit {
    pub mu_hat: f64,
    pub theta_hat: f64,
    /// Pooled per-axis variance with the ML `1/(2n)` normalizer.
    pub sigma2_hat: f64,
    pub n_samples: usize,
}

/// How the Fisher information of `(μ, σ²)` is propagated to `<Π>`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlErrorModel {
    /// Full first-order propagation: `Π sqrt(1 + μ⁴/4σ⁴)`.
    #[default]
    DeltaMethod,
    /// Keeps only the `1/2σ²` prefactor's dependence on σ²:
    /// `Π sqrt(1 + μ²/σ²)`.
    PrefactorOnly,
}

impl MlErrorModel {
    /// Per-sample error of `<Π>` relative to its value, at `x = μ²/σ²`.
    pub fn relative_error(self, x: f64) -> f64 {
        match self {
            Self::DeltaMethod => (1.0 + 0.25 * x * x).sqrt(),
            Self::PrefactorOnly => (1.0 + x).sqrt(),
        }
    }
}

pub fn ml_fit(ensemble: &IQEnsemble) -> Result<MLFit> {
    let n = ensemble.samples.len();
    if n < 2 {
        return Err(Error::DegenerateEnsemble(format!(
            "ML fit needs at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let (si, sq) = ensemble
        .samples
        .iter()
        .fold((0.0, 0.0), |(a, b), z| (a + z.i, b + z.q));
    let (ci, cq) = (si / nf, sq / nf);
    let ss: f64 = ensemble
        .samples
        .iter()
        .map(|z| (z.i - ci).powi(2) + (z.q - cq).powi(2))
        .sum();
    let sigma2_hat = ss / (2.0 * nf);
    if !(sigma2_hat > 0.0) {
        return Err(Error::DegenerateEnsemble(
            "all points coincide; variance is zero".to_string(),
        ));
    }
    Ok(MLFit {
        mu_hat: ci.hypot(cq),
        theta_hat: normalize_angle(cq.atan2(ci)),
        sigma2_hat,
        n_samples: n,
    })
}

pub fn ml_parity_with(fit: &MLFit, model: MlErrorModel) -> ParityEstimate {
    let value = parity_closed_form(fit.mu_hat, fit.sigma2_hat);
    let x = fit.mu_hat * fit.mu_hat / fit.sigma2_hat;
    ParityEstimate {
        value,
        std_error: value * model.relative_error(x),
        method: EstimatorMethod::Ml,
        n_samples: fit.n_samples,
    }
}

pub fn ml_parity(fit: &MLFit) -> ParityEstimate {
    ml_parity_with(fit, MlErrorModel::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::{sample_phase_space, IQSample, Provenance};
    use crate::states::GaussianState;
    use approx::assert_relative_eq;

    fn ens(points: &[(f64, f64)]) -> IQEnsemble {
        IQEnsemble {
            samples: points.iter().map(|&(i, q)| IQSample { i, q }).collect(),
            seed: 0,
            provenance: Provenance::SynthesizedDirect,
        }
    }

    #[test]
    fn two_point_fit() {
        let f = ml_fit(&ens(&[(0.0, 0.0), (2.0, 0.0)])).unwrap();
        assert_relative_eq!(f.mu_hat, 1.0);
        assert_eq!(f.theta_hat, 0.0);
        assert_relative_eq!(f.sigma2_hat, 0.5);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(ml_fit(&ens(&[(1.0, 1.0)])), Err(Error::DegenerateEnsemble(_))));
        assert!(matches!(
            ml_fit(&ens(&[(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)])),
            Err(Error::DegenerateEnsemble(_))
        ));
    }

    #[test]
    fn vacuum_variance_recovered() {
        let e = sample_phase_space(&GaussianState::vacuum(), 100_000, 11).unwrap();
        let f = ml_fit(&e).unwrap();
        assert!((f.sigma2_hat - 0.5).abs() < 5.0 * 0.5 / 1e5f64.sqrt());
        let p = ml_parity(&f);
        assert!((p.value - 1.0).abs() < 0.02);
        assert_eq!(p.method, EstimatorMethod::Ml);
        assert_eq!(p.n_samples, 100_000);
    }

    #[test]
    fn error_formulas() {
        let at = |mu: f64, s2: f64, m| {
            ml_parity_with(&MLFit { mu_hat: mu, theta_hat: 0.0, sigma2_hat: s2, n_samples: 1 }, m)
        };
        for m in [MlErrorModel::DeltaMethod, MlErrorModel::PrefactorOnly] {
            let p = at(0.0, 2.0, m);
            assert_relative_eq!(p.std_error, p.value);
        }
        let p = at(3f64.sqrt(), 1.0, MlErrorModel::PrefactorOnly);
        assert_relative_eq!(p.std_error, 2.0 * p.value, max_relative = 1e-14);
        // the two models agree again at μ²/σ² = 4
        let a = at(2.0, 1.0, MlErrorModel::PrefactorOnly);
        let b = at(2.0, 1.0, MlErrorModel::DeltaMethod);
        assert_relative_eq!(a.std_error, b.std_error, max_relative = 1e-14);
        let p = at(2f64.sqrt(), 1.0, MlErrorModel::DeltaMethod);
        assert_relative_eq!(p.std_error, 2f64.sqrt() * p.value, max_relative = 1e-14);
    }

    fn mean_relative_bias(x: f64, n: usize, repeats: u64, seed: u64) -> f64 {
        let s2 = 67100.5;
        let st = GaussianState::new((x * s2).sqrt(), 1.0, s2).unwrap();
        let mean = (0..repeats)
            .map(|r| ml_parity(&ml_fit(&sample_phase_space(&st, n, seed + r).unwrap()).unwrap()).value)
            .sum::<f64>()
            / repeats as f64;
        mean / st.parity() - 1.0
    }

    // At n = 200 the log-variance of the estimate is about (x + x²/4)/n, so a
    // 2% bias bound only holds up to x ~ 2.
    #[test]
    fn bias_at_200_samples() {
        for x in [0.0, 1.0, 2.0] {
            let b = mean_relative_bias(x, 200, 2000, 1000 * (1 + x as u64));
            assert!(b.abs() < 0.02, "x={x} bias {b}");
        }
    }

    #[test]
    fn consistent_for_large_ensembles() {
        let b = mean_relative_bias(10.0, 100_000, 20, 77);
        assert!(b.abs() < 0.02, "{b}");
    }
}
