//! Homodyne measurement chain: a sampled carrier on white noise, reduced to
//! one (I, Q) point per window by the DFT coefficient at the carrier bin.
//!
//! Calibration: a cosine of amplitude `A` on the grid gives a carrier-bin
//! coefficient of magnitude `A` after the `2/N` normalization, and `A / v`
//! quadrature units after dividing by `volts_per_unit = v`. White noise of
//! per-sample deviation `s` puts variance `2 s² / N` on each axis of that
//! coefficient, so `s = v * sqrt(sigma2 * N / 2)` reproduces a state of
//! per-quadrature variance `sigma2`.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::map_indexed;
use crate::rng::stream;
use crate::states::GaussianState;

const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    pub window_s: f64,
    pub volts_per_unit: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 4.96e9,
            sample_rate_hz: 20e9,
            window_s: 25e-9,
            volts_per_unit: 1e-3,
        }
    }
}

impl AcquisitionConfig {
    pub fn n_samples(&self) -> usize {
        (self.sample_rate_hz * self.window_s).round() as usize
    }

    /// Every violated invariant, in human-readable form.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !finite_pos(self.carrier_hz) {
            v.push("carrier_hz must be > 0".to_string());
        }
        if !finite_pos(self.sample_rate_hz) {
            v.push("sample_rate_hz must be > 0".to_string());
        }
        if !finite_pos(self.window_s) {
            v.push("window_s must be > 0".to_string());
        }
        if !finite_pos(self.volts_per_unit) {
            v.push("volts_per_unit must be > 0".to_string());
        }
        if !v.is_empty() {
            return v;
        }
        if self.sample_rate_hz < 2.0 * self.carrier_hz {
            v.push(format!(
                "sample_rate_hz {} is below the Nyquist rate for carrier {}",
                self.sample_rate_hz, self.carrier_hz
            ));
        }
        let cycles = self.carrier_hz * self.window_s;
        if (cycles - cycles.round()).abs() > GRID_TOL * cycles.max(1.0) {
            v.push(format!(
                "carrier_hz {} is off the DFT grid ({cycles} cycles per window)",
                self.carrier_hz
            ));
        }
        let samples = self.sample_rate_hz * self.window_s;
        if (samples - samples.round()).abs() > GRID_TOL * samples.max(1.0) {
            v.push(format!("window holds a non-integer number of samples ({samples})"));
        } else if self.n_samples() < 2 {
            v.push("window must hold at least 2 samples".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            return Ok(());
        }
        let cycles = self.carrier_hz * self.window_s;
        if (cycles - cycles.round()).abs() > GRID_TOL * cycles.max(1.0) {
            return Err(Error::OffGrid {
                carrier_hz: self.carrier_hz,
                window_s: self.window_s,
            });
        }
        Err(domain(v.join("; ")))
    }

    /// Index of the carrier in the DFT of one window.
    pub fn carrier_bin(&self) -> Result<usize> {
        self.validate()?;
        Ok((self.carrier_hz * self.window_s).round() as usize)
    }

    /// Per-sample white-noise deviation that yields `sigma2` on each quadrature.
    pub fn noise_deviation(&self, sigma2: f64) -> f64 {
        self.volts_per_unit * (sigma2 * self.n_samples() as f64 / 2.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl TimeSeries {
    /// Writes `sample_rate_hz,<rate>` then one amplitude (volts) per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "sample_rate_hz,{:.11e}", self.sample_rate_hz)?;
        for x in &self.samples {
            writeln!(w, "{x:.11e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| domain("empty time-series file"))??;
        let rate = header
            .trim()
            .strip_prefix("sample_rate_hz,")
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| domain(format!("bad time-series header `{header}`")))?;
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let x = t
                .parse::<f64>()
                .map_err(|e| domain(format!("row {}: {e}", i + 2)))?;
            samples.push(x);
        }
        Ok(Self {
            samples,
            sample_rate_hz: rate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IQSample {
    pub i: f64,
    pub q: f64,
}

impl IQSample {
    pub fn radius(&self) -> f64 {
        self.i.hypot(self.q)
    }

    pub fn phase(&self) -> f64 {
        self.q.atan2(self.i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SynthesizedDirect,
    SynthesizedTimeseries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IQEnsemble {
    pub samples: Vec<IQSample>,
    pub seed: u64,
    pub provenance: Provenance,
}

impl IQEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn draw_point<R: Rng>(rng: &mut R, center: (f64, f64), sigma: f64) -> IQSample {
    let nx: f64 = rng.sample(StandardNormal);
    let np: f64 = rng.sample(StandardNormal);
    IQSample {
        i: center.0 + sigma * nx,
        q: center.1 + sigma * np,
    }
}

/// `n` independent draws from the state's Wigner distribution. Sample `k`
/// comes from stream `k` of `seed`.
pub fn sample_phase_space(state: &GaussianState, n: usize, seed: u64) -> Result<IQEnsemble> {
    if n == 0 {
        return Err(domain("ensemble size must be >= 1"));
    }
    let center = state.center();
    let sigma = state.sigma();
    let samples = (0..n)
        .map(|k| draw_point(&mut stream(seed, k as u64), center, sigma))
        .collect();
    Ok(IQEnsemble {
        samples,
        seed,
        provenance: Provenance::SynthesizedDirect,
    })
}

fn synthesize_with<R: Rng>(
    acq: &AcquisitionConfig,
    state: &GaussianState,
    rng: Option<&mut R>,
) -> Result<TimeSeries> {
    let bin = acq.carrier_bin()?;
    let n = acq.n_samples();
    let amp = acq.volts_per_unit * state.mu();
    let theta = state.theta();
    let mut samples: Vec<f64> = (0..n)
        .map(|j| amp * (TAU * ((bin * j) % n) as f64 / n as f64 + theta).cos())
        .collect();
    if let Some(rng) = rng {
        let s = acq.noise_deviation(state.sigma2());
        for x in &mut samples {
            let z: f64 = rng.sample(StandardNormal);
            *x += s * z;
        }
    }
    Ok(TimeSeries {
        samples,
        sample_rate_hz: acq.sample_rate_hz,
    })
}

/// One measurement window: the state's displacement as a carrier-frequency
/// cosine plus white noise sized to its variance.
pub fn synthesize_timeseries(
    acq: &AcquisitionConfig,
    state: &GaussianState,
    seed: u64,
) -> Result<TimeSeries> {
    synthesize_with(acq, state, Some(&mut stream(seed, 0)))
}

/// The carrier alone, without noise.
pub fn synthesize_noiseless(acq: &AcquisitionConfig, state: &GaussianState) -> Result<TimeSeries> {
    synthesize_with::<rand_chacha::ChaCha8Rng>(acq, state, None)
}

/// Complex DFT coefficient of `samples` at `bin`, scaled by `2/N`.
pub(crate) fn dft_bin(samples: &[f64], bin: usize) -> (f64, f64) {
    let n = samples.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (j, &x) in samples.iter().enumerate() {
        let a = TAU * ((bin * j) % n) as f64 / n as f64;
        re += x * a.cos();
        im -= x * a.sin();
    }
    let scale = 2.0 / n as f64;
    (re * scale, im * scale)
}

/// Carrier-bin quadratures of one window relative to `reference_phase`.
pub fn extract_iq(
    series: &TimeSeries,
    acq: &AcquisitionConfig,
    reference_phase: f64,
) -> Result<IQSample> {
    let bin = acq.carrier_bin()?;
    let expected = acq.n_samples();
    if series.samples.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: series.samples.len(),
        });
    }
    let (re, im) = dft_bin(&series.samples, bin);
    let (re, im) = (re / acq.volts_per_unit, im / acq.volts_per_unit);
    let (s, c) = reference_phase.sin_cos();
    Ok(IQSample {
        i: re * c + im * s,
        q: im * c - re * s,
    })
}

/// `n` synthesize-and-extract rounds; window `k` uses stream `k` of `seed`.
pub fn ensemble_from_timeseries(
    acq: &AcquisitionConfig,
    state: &GaussianState,
    n: usize,
    seed: u64,
) -> Result<IQEnsemble> {
    if n == 0 {
        return Err(domain("ensemble size must be >= 1"));
    }
    acq.validate()?;
    let samples = map_indexed(n, |k| {
        let series = synthesize_with(acq, state, Some(&mut stream(seed, k as u64)))?;
        extract_iq(&series, acq, 0.0)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(IQEnsemble {
        samples,
        seed,
        provenance: Provenance::SynthesizedTimeseries,
    })
}
