//! Estimators of the parity expectation from phase-space ensembles.

mod direct;
mod ml;
pub mod rician;
mod threshold;

pub use direct::direct_parity_sensitivity;
pub use ml::{ml_fit, ml_parity, ml_parity_with, MLFit, MlErrorModel};
pub use rician::{marcum_q1, rician_cdf};
pub use threshold::{bernoulli_error, threshold_estimate, BernoulliErrorModel, ThresholdConfig};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorMethod {
    Ml,
    /// Fraction of points inside radius `a` (quadrature units).
    Threshold { a: f64 },
}

/// An estimate with its standard error for a single phase-space sample; the
/// error of an `n`-sample estimate is `std_error / sqrt(n)`.
///
/// For the ML method `value` is `<Π>` itself. For the threshold method it is
/// the inside-fraction `p`; [`ParityEstimate::parity_equivalent`] converts it
/// to `π W̃(0,0) = p / a²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: EstimatorMethod,
    pub n_samples: usize,
}

impl ParityEstimate {
    pub fn ensemble_error(&self) -> f64 {
        self.std_error / (self.n_samples as f64).sqrt()
    }

    pub fn parity_equivalent(&self) -> f64 {
        match self.method {
            EstimatorMethod::Ml => self.value,
            EstimatorMethod::Threshold { a } => self.value / (a * a),
        }
    }
}
