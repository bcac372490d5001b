use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::estimators::{BernoulliErrorModel, MlErrorModel};
use crate::homodyne::AcquisitionConfig;
use crate::interferometer::theoretical_fwhm;

/// The only place decibels are turned into linear ratios.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    ParitySweep,
    Sensitivity,
    Tradeoff,
    Roc,
    IntegrationTime,
    TimeseriesDemo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ParitySweep => "parity-sweep",
            Mode::Sensitivity => "sensitivity",
            Mode::Tradeoff => "tradeoff",
            Mode::Roc => "roc",
            Mode::IntegrationTime => "integration-time",
            Mode::TimeseriesDemo => "timeseries-demo",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseUnit {
    /// Multiples of the theoretical FWHM at each SNR.
    #[default]
    Fwhm,
    Rad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: -2.0,
            max: 2.0,
            points: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub unit: PhaseUnit,
}

impl PhaseGrid {
    pub fn range(&self) -> GridSpec {
        GridSpec {
            min: self.min,
            max: self.max,
            points: self.points,
        }
    }
}

impl Default for PhaseGrid {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            min: g.min,
            max: g.max,
            points: g.points,
            unit: PhaseUnit::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RocSettings {
    pub snr_db: f64,
    /// Lock windows in Cramér-Rao units.
    pub ad_over_cr: Vec<f64>,
    /// Unlocked prior extends to this many lock windows.
    pub prior_factor: f64,
    pub a_grid: GridSpec,
}

impl Default for RocSettings {
    fn default() -> Self {
        Self {
            snr_db: 56.1,
            ad_over_cr: vec![0.2, 0.5, 1.0, 2.0, 3.0],
            prior_factor: 10.0,
            a_grid: GridSpec {
                min: 0.0,
                max: 8.0,
                points: 81,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeseriesSettings {
    /// Phase of the demo window in FWHM units.
    pub phase_over_fwhm: f64,
    /// Windows reduced to (I, Q) points.
    pub windows: usize,
    /// Analyze this recorded window instead of synthesizing one.
    pub input: Option<PathBuf>,
}

impl Default for TimeseriesSettings {
    fn default() -> Self {
        Self {
            phase_over_fwhm: 1.0,
            windows: 2000,
            input: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub snr_db_list: Vec<f64>,
    pub n_th: f64,
    /// Reference window in seconds; the listed SNRs refer to it.
    pub t_ref: f64,
    pub phase_grid: PhaseGrid,
    pub n_samples: usize,
    pub repeats: usize,
    pub threshold_a: Vec<f64>,
    pub error_model: MlErrorModel,
    pub bernoulli_model: BernoulliErrorModel,
    pub extinction_db: f64,
    pub acquisition: AcquisitionConfig,
    pub seed: u64,
    pub tradeoff_a: GridSpec,
    pub roc: RocSettings,
    /// Integration times in multiples of `t_ref`, as a log10 grid.
    pub log10_time_factor: GridSpec,
    pub timeseries: TimeseriesSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::default(),
            snr_db_list: vec![14.8, 26.3, 38.8, 45.9, 56.1],
            n_th: 67.1e3,
            t_ref: 25e-9,
            phase_grid: PhaseGrid::default(),
            n_samples: 200,
            repeats: 200,
            threshold_a: vec![1.5],
            error_model: MlErrorModel::default(),
            bernoulli_model: BernoulliErrorModel::default(),
            extinction_db: 90.0,
            acquisition: AcquisitionConfig::default(),
            seed: 1,
            tradeoff_a: GridSpec {
                min: 0.1,
                max: 5.0,
                points: 50,
            },
            roc: RocSettings::default(),
            log10_time_factor: GridSpec {
                min: 0.0,
                max: 6.0,
                points: 25,
            },
            timeseries: TimeseriesSettings::default(),
        }
    }
}

/// One violated invariant, keyed by its dotted config path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn check(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.0.push(Violation {
                field: field.to_string(),
                message: message.into(),
            });
        }
    }

    fn grid(&mut self, g: &GridSpec, field: &str, min_points: usize) {
        self.check(
            g.points >= min_points,
            &format!("{field}.points"),
            format!("need at least {min_points} points, got {}", g.points),
        );
        self.check(
            g.min.is_finite() && g.max.is_finite() && (g.max > g.min || g.points == 1),
            field,
            format!("need finite min < max, got [{}, {}]", g.min, g.max),
        );
    }
}

/// Every violated invariant of `config`, without running anything.
pub fn validate(config: &ExperimentConfig) -> Vec<Violation> {
    let mut r = Report(Vec::new());
    let c = config;
    r.check(!c.snr_db_list.is_empty(), "snr_db_list", "must not be empty");
    for (i, db) in c.snr_db_list.iter().enumerate() {
        r.check(db.is_finite(), &format!("snr_db_list[{i}]"), format!("not finite: {db}"));
    }
    r.check(c.n_th.is_finite() && c.n_th >= 0.0, "n_th", "must be finite and >= 0");
    r.check(c.t_ref.is_finite() && c.t_ref > 0.0, "t_ref", "must be > 0");
    r.grid(&c.phase_grid.range(), "phase_grid", 3);
    if c.phase_grid.unit == PhaseUnit::Fwhm {
        for (i, db) in c.snr_db_list.iter().enumerate() {
            r.check(
                theoretical_fwhm(db_to_linear(*db)).is_ok(),
                &format!("snr_db_list[{i}]"),
                format!("{db} dB has no half-maximum feature to scale the phase grid by"),
            );
        }
    }
    r.check(c.n_samples >= 2, "n_samples", format!("must be >= 2, got {}", c.n_samples));
    r.check(c.repeats >= 1, "repeats", format!("must be >= 1, got {}", c.repeats));
    for (i, a) in c.threshold_a.iter().enumerate() {
        r.check(a.is_finite() && *a > 0.0, &format!("threshold_a[{i}]"), format!("must be > 0, got {a}"));
    }
    r.check(
        c.extinction_db.is_finite() && c.extinction_db > 0.0,
        "extinction_db",
        "must be finite and > 0",
    );
    for v in c.acquisition.violations() {
        r.check(false, "acquisition", v);
    }
    r.grid(&c.tradeoff_a, "tradeoff_a", 1);
    r.check(c.tradeoff_a.min > 0.0, "tradeoff_a.min", "must be > 0");
    r.check(c.roc.snr_db.is_finite(), "roc.snr_db", "must be finite");
    r.check(!c.roc.ad_over_cr.is_empty(), "roc.ad_over_cr", "must not be empty");
    for (i, ad) in c.roc.ad_over_cr.iter().enumerate() {
        r.check(ad.is_finite() && *ad > 0.0, &format!("roc.ad_over_cr[{i}]"), "must be > 0");
    }
    r.check(
        c.roc.prior_factor.is_finite() && c.roc.prior_factor > 1.0,
        "roc.prior_factor",
        "must be > 1",
    );
    r.grid(&c.roc.a_grid, "roc.a_grid", 2);
    r.check(c.roc.a_grid.min >= 0.0, "roc.a_grid.min", "must be >= 0");
    r.grid(&c.log10_time_factor, "log10_time_factor", 1);
    r.check(c.timeseries.windows >= 2, "timeseries.windows", "must be >= 2");
    r.check(
        c.timeseries.phase_over_fwhm.is_finite(),
        "timeseries.phase_over_fwhm",
        "must be finite",
    );
    r.0
}
