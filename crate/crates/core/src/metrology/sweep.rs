use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimators::{
    ml_fit, ml_parity_with, threshold_estimate, EstimatorMethod, MlErrorModel, ParityEstimate,
    ThresholdConfig,
};
use crate::exec::map_indexed;
use crate::homodyne::sample_phase_space;
use crate::interferometer::InterferometerConfig;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum SweepMethod {
    Ml { error_model: MlErrorModel },
    Threshold(ThresholdConfig),
}

/// Estimates on a phase grid.
///
/// For Monte Carlo sweeps each estimate is the mean over `repeats`
/// independent ensembles, and its `std_error` is the spread of those repeats
/// scaled back to a single phase-space sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub phase_grid: Vec<f64>,
    pub estimates: Vec<ParityEstimate>,
    pub config: InterferometerConfig,
    pub integration_time: f64,
    pub snr_linear: f64,
    pub n_samples: usize,
    pub repeats: usize,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value).collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("phase grid is empty"));
    }
    if grid.iter().any(|p| !p.is_finite()) {
        return Err(domain("phase grid has non-finite entries"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("phase grid must be strictly increasing"));
    }
    Ok(())
}

/// Noise-free parity curve carrying the ML per-sample error of `model`.
pub fn theory_sweep(
    config: &InterferometerConfig,
    grid: &[f64],
    t: f64,
    model: MlErrorModel,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let estimates = grid
        .iter()
        .map(|&phi| {
            let st = config.output_state(phi, t)?;
            let value = st.parity();
            let x = st.mu() * st.mu() / st.sigma2();
            Ok(ParityEstimate {
                value,
                std_error: value * model.relative_error(x),
                method: EstimatorMethod::Ml,
                n_samples: 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        phase_grid: grid.to_vec(),
        estimates,
        config: *config,
        integration_time: t,
        snr_linear: config.snr_at_time(t)?,
        n_samples: 1,
        repeats: 1,
    })
}

/// Monte Carlo sweep: `repeats` ensembles of `n_samples` direct phase-space
/// draws at every grid phase. Work item `(k, r)` draws from
/// `derive_seed(seed, [k, r])`, so results are independent of thread count.
pub fn monte_carlo_sweep(
    config: &InterferometerConfig,
    grid: &[f64],
    t: f64,
    method: SweepMethod,
    n_samples: usize,
    repeats: usize,
    seed: u64,
) -> Result<SweepResult> {
    check_grid(grid)?;
    if n_samples == 0 || repeats == 0 {
        return Err(domain("n_samples and repeats must be >= 1"));
    }
    let states = grid
        .iter()
        .map(|&phi| config.output_state(phi, t))
        .collect::<Result<Vec<_>>>()?;

    let per_item = map_indexed(grid.len() * repeats, |item| {
        let (k, r) = (item / repeats, item % repeats);
        let st = &states[k];
        let ens = sample_phase_space(st, n_samples, derive_seed(seed, &[k as u64, r as u64]))?;
        match method {
            SweepMethod::Ml { error_model } => Ok(ml_parity_with(&ml_fit(&ens)?, error_model)),
            SweepMethod::Threshold(cfg) => threshold_estimate(&ens, &cfg, st.sigma()),
        }
    })
    .into_iter()
    .collect::<Result<Vec<ParityEstimate>>>()?;

    let estimates = per_item
        .chunks(repeats)
        .map(|chunk| {
            let n = chunk.len() as f64;
            let mean = chunk.iter().map(|e| e.value).sum::<f64>() / n;
            let std_error = if chunk.len() > 1 {
                let var = chunk.iter().map(|e| (e.value - mean).powi(2)).sum::<f64>() / (n - 1.0);
                var.sqrt() * (n_samples as f64).sqrt()
            } else {
                chunk[0].std_error
            };
            ParityEstimate {
                value: mean,
                std_error,
                method: chunk[0].method,
                n_samples,
            }
        })
        .collect();

    Ok(SweepResult {
        phase_grid: grid.to_vec(),
        estimates,
        config: *config,
        integration_time: t,
        snr_linear: config.snr_at_time(t)?,
        n_samples,
        repeats,
    })
}
