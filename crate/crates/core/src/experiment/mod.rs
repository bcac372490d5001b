//! Configured experiment runs: JSON config in, CSV tables and a manifest out.

mod config;
mod run;

pub use config::{
    db_to_linear, validate, ExperimentConfig, GridSpec, Mode, PhaseGrid, PhaseUnit, RocSettings,
    TimeseriesSettings, Violation,
};
pub use run::{execute, num, Artifact};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub mode: Mode,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Parses a config file body; unknown keys are errors.
pub fn parse_config(json: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(json).map_err(|e| Error::Config {
        field: "<config>".to_string(),
        message: e.to_string(),
    })
}

fn check(config: &ExperimentConfig) -> Result<()> {
    let v = validate(config);
    match v.first() {
        None => Ok(()),
        Some(first) => Err(Error::Config {
            field: first.field.clone(),
            message: v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
        }),
    }
}

fn fresh_dir(base: &Path) -> PathBuf {
    let mut dir = base.to_path_buf();
    let mut k = 1;
    while dir.exists() {
        dir = PathBuf::from(format!("{}-{k}", base.display()));
        k += 1;
    }
    dir
}

/// Validates, executes and writes `config`'s outputs plus `manifest.json`.
/// With `flat` the files go straight into `out_root`, otherwise into
/// `out_root/<mode>/<timestamp>/`.
pub fn run(config: &ExperimentConfig, out_root: &Path, flat: bool) -> Result<RunManifest> {
    check(config)?;
    let artifacts = execute(config)?;
    let now = chrono::Utc::now();
    let dir = if flat {
        out_root.to_path_buf()
    } else {
        fresh_dir(&out_root.join(config.mode.name()).join(now.format("%Y%m%dT%H%M%SZ").to_string()))
    };
    fs::create_dir_all(&dir)?;
    for a in &artifacts {
        fs::write(dir.join(&a.name), &a.body)?;
    }
    let manifest = RunManifest {
        mode: config.mode,
        config_hash: config_hash(config),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        output_dir: dir.clone(),
        files: artifacts.iter().map(|a| a.name.clone()).collect(),
        config: config.clone(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            mode,
            snr_db_list: vec![26.3, 38.8],
            n_samples: 50,
            repeats: 20,
            phase_grid: PhaseGrid { points: 11, ..PhaseGrid::default() },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn hash_tracks_semantic_fields() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.repeats = 199;
        assert_ne!(config_hash(&a), config_hash(&b));
        let mut c = a.clone();
        c.acquisition.volts_per_unit *= 2.0;
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn every_table_has_a_header_and_fixed_width_numbers() {
        for mode in [Mode::ParitySweep, Mode::IntegrationTime, Mode::TimeseriesDemo] {
            for a in execute(&small(mode)).unwrap() {
                let mut lines = a.body.lines();
                let header = lines.next().unwrap();
                assert!(header.chars().any(|c| c.is_ascii_alphabetic()), "{}", a.name);
                if a.name == "timeseries_window.csv" {
                    continue;
                }
                let cols = header.split(',').count();
                for l in lines {
                    assert_eq!(l.split(',').count(), cols, "{}", a.name);
                }
            }
        }
        assert_eq!(num(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn timeseries_window_is_first_ensemble_window() {
        let c = small(Mode::TimeseriesDemo);
        let out = execute(&c).unwrap();
        let win = out.iter().find(|a| a.name == "timeseries_window.csv").unwrap();
        let series = crate::homodyne::TimeSeries::read_csv(win.body.as_bytes()).unwrap();
        let z = crate::homodyne::extract_iq(&series, &c.acquisition, 0.0).unwrap();
        let iq = out.iter().find(|a| a.name == "iq_ensemble.csv").unwrap();
        let first: Vec<f64> = iq.body.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        // the CSV round-trip keeps 12 digits
        assert!((z.i - first[2]).abs() <= 1e-9 * first[2].abs().max(1.0));
        assert!((z.q - first[3]).abs() <= 1e-9 * first[3].abs().max(1.0));
    }

    #[test]
    fn run_rejects_invalid_config_with_field() {
        let mut c = small(Mode::Roc);
        c.repeats = 0;
        let dir = tempfile::tempdir().unwrap();
        match run(&c, dir.path(), true) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "repeats"),
            other => panic!("{other:?}"),
        }
    }
}
