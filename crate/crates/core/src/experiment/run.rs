use std::fmt::Write as _;
use std::io::BufReader;

use super::config::{db_to_linear, ExperimentConfig, Mode, PhaseUnit};
use crate::error::{Error, Result};
use crate::estimators::{
    ml_fit, ml_parity_with, rician_cdf, BernoulliErrorModel, ThresholdConfig,
};
use crate::homodyne::{ensemble_from_timeseries, extract_iq, synthesize_timeseries, TimeSeries};
use crate::interferometer::{theoretical_fwhm, InterferometerConfig};
use crate::metrology::{
    balance_point, cr_bound, fit_parity_model, min_sensitivity_factor, ml_min_sensitivity,
    ml_sensitivity_theory_with, monte_carlo_sweep, roc_auc, roc_curve, sensitivity_from_curve,
    threshold_min_sensitivity, tradeoff_curve_at, ROCConfig, SweepMethod, SweepResult,
    ASYMPTOTIC_SNR,
};
use crate::rng::derive_seed;

/// One output file: name and full text body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

/// Twelve significant digits, independent of locale.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

struct Table {
    name: &'static str,
    header: &'static [&'static str],
    body: String,
}

impl Table {
    fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        let mut body = header.join(",");
        body.push('\n');
        Self { name, header, body }
    }

    fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.header.len());
        let _ = writeln!(self.body, "{}", cells.join(","));
    }

    fn finish(self) -> Artifact {
        Artifact {
            name: self.name.to_string(),
            body: self.body,
        }
    }
}

fn interferometer(c: &ExperimentConfig, snr_db: f64) -> Result<InterferometerConfig> {
    InterferometerConfig::from_snr(db_to_linear(snr_db), c.n_th, c.t_ref)?.with_extinction_db(c.extinction_db)
}

/// Phase grid in radians and the FWHM it was scaled by.
fn phase_grid(c: &ExperimentConfig, snr: f64) -> Result<(Vec<f64>, f64)> {
    let fwhm = theoretical_fwhm(snr)?;
    let raw = c.phase_grid.range().values();
    Ok(match c.phase_grid.unit {
        PhaseUnit::Fwhm => (raw.iter().map(|x| x * fwhm).collect(), fwhm),
        PhaseUnit::Rad => (raw, fwhm),
    })
}

fn ml_sweep(c: &ExperimentConfig, k: usize, snr_db: f64) -> Result<SweepResult> {
    let ic = interferometer(c, snr_db)?;
    let (grid, _) = phase_grid(c, db_to_linear(snr_db))?;
    let method = SweepMethod::Ml { error_model: c.error_model };
    monte_carlo_sweep(&ic, &grid, c.t_ref, method, c.n_samples, c.repeats, derive_seed(c.seed, &[k as u64, 0]))
}

fn or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

fn parity_sweep(c: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let mut sweep = Table::new(
        "parity_sweep.csv",
        &["snr_db", "snr_linear", "phi_rad", "phi_over_fwhm", "parity_theory", "parity_ml", "parity_ml_std_error_per_sample"],
    );
    let mut thr = Table::new(
        "threshold_sweep.csv",
        &["snr_db", "a_over_sigma", "phi_rad", "p_theory", "p_estimate", "p_std_error_per_sample", "parity_equivalent"],
    );
    let mut fit = Table::new(
        "resolution_fit.csv",
        &["snr_db", "snr_linear", "snr_hat", "n_th_hat", "fwhm_fit_rad", "fwhm_theory_rad", "reduced_chi2"],
    );
    for (k, &db) in c.snr_db_list.iter().enumerate() {
        let snr = db_to_linear(db);
        let ic = interferometer(c, db)?;
        let (grid, fwhm) = phase_grid(c, snr)?;
        let ml = ml_sweep(c, k, db)?;
        for (phi, e) in grid.iter().zip(&ml.estimates) {
            sweep.row(&[
                num(db),
                num(snr),
                num(*phi),
                num(phi / fwhm),
                num(ic.parity_vs_phase(*phi, c.t_ref)?),
                num(e.value),
                num(e.std_error),
            ]);
        }
        let f = fit_parity_model(&ml)?;
        fit.row(&[num(db), num(snr), num(f.snr_hat), num(f.n_th_hat), num(f.fwhm), num(fwhm), num(f.residual)]);

        let sigma = ic.sigma2().sqrt();
        for (j, &a) in c.threshold_a.iter().enumerate() {
            let cfg = ThresholdConfig::new(a, c.bernoulli_model)?;
            let seed = derive_seed(c.seed, &[k as u64, 1 + j as u64]);
            let s = monte_carlo_sweep(&ic, &grid, c.t_ref, SweepMethod::Threshold(cfg), c.n_samples, c.repeats, seed)?;
            for (phi, e) in grid.iter().zip(&s.estimates) {
                let p = rician_cdf(ic.output_state(*phi, c.t_ref)?.mu(), sigma, a * sigma)?;
                thr.row(&[
                    num(db),
                    num(a),
                    num(*phi),
                    num(p),
                    num(e.value),
                    num(e.std_error),
                    num(e.value / (a * a)),
                ]);
            }
        }
    }
    Ok(vec![sweep.finish(), thr.finish(), fit.finish()])
}

fn sensitivity(c: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let mut curve = Table::new(
        "sensitivity.csv",
        &["snr_db", "phi_rad", "phi_over_fwhm", "delta_phi_mc_rad", "delta_phi_ml_theory_rad", "cr_bound_rad"],
    );
    let mut summary = Table::new(
        "sensitivity_summary.csv",
        &["snr_db", "snr_linear", "cr_bound_rad", "ml_min_theory_rad", "ml_phi_at_min_rad", "ml_min_mc_raw_rad"],
    );
    let mut thr = Table::new(
        "sensitivity_threshold.csv",
        &["snr_db", "a_over_sigma", "min_delta_phi_rad", "phi_at_min_rad", "min_over_cr"],
    );
    for (k, &db) in c.snr_db_list.iter().enumerate() {
        let snr = db_to_linear(db);
        let ic = interferometer(c, db)?;
        let cr = cr_bound(snr)?;
        let (grid, fwhm) = phase_grid(c, snr)?;
        let ml = ml_sweep(c, k, db)?;
        let sens = sensitivity_from_curve(&ml)?;
        for (phi, d) in grid.iter().zip(&sens.delta_phi) {
            let theory = or_inf(ml_sensitivity_theory_with(ic.budget(), *phi, c.error_model));
            curve.row(&[num(db), num(*phi), num(phi / fwhm), num(*d), num(theory), num(cr)]);
        }
        let (phi_min, d_min) = ml_min_sensitivity(ic.budget(), c.error_model)?;
        let mc_min = sens.minimum().map_or(f64::INFINITY, |(_, d)| d);
        summary.row(&[num(db), num(snr), num(cr), num(d_min), num(phi_min), num(mc_min)]);
        for &a in &c.threshold_a {
            let cfg = ThresholdConfig::new(a, c.bernoulli_model)?;
            let (phi, d) = threshold_min_sensitivity(ic.budget(), &cfg)?;
            thr.row(&[num(db), num(a), num(d), num(phi), num(d / cr)]);
        }
    }
    Ok(vec![curve.finish(), summary.finish(), thr.finish()])
}

fn model_name(m: BernoulliErrorModel) -> &'static str {
    match m {
        BernoulliErrorModel::ExactBernoulli => "exact-bernoulli",
        BernoulliErrorModel::SqrtP => "sqrt-p",
    }
}

fn tradeoff(c: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let grid = c.tradeoff_a.values();
    let exact = tradeoff_curve_at(ASYMPTOTIC_SNR, &grid, BernoulliErrorModel::ExactBernoulli)?;
    let sqrt_p = tradeoff_curve_at(ASYMPTOTIC_SNR, &grid, BernoulliErrorModel::SqrtP)?;
    let mut curve = Table::new(
        "tradeoff.csv",
        &["a_over_sigma", "resolution_over_cr", "sensitivity_over_cr_exact_bernoulli", "sensitivity_over_cr_sqrt_p"],
    );
    for (e, s) in exact.iter().zip(&sqrt_p) {
        curve.row(&[num(e.a_over_sigma), num(e.resolution), num(e.sensitivity), num(s.sensitivity)]);
    }
    let mut summary = Table::new(
        "tradeoff_summary.csv",
        &["error_model", "balance_a_over_sigma", "min_factor", "a_over_sigma_at_min", "phi_at_min_rad"],
    );
    for m in [BernoulliErrorModel::ExactBernoulli, BernoulliErrorModel::SqrtP] {
        let b = balance_point(ASYMPTOTIC_SNR, m)?;
        let f = min_sensitivity_factor(m)?;
        summary.row(&[model_name(m).to_string(), num(b), num(f.factor), num(f.a_over_sigma), num(f.phi)]);
    }
    Ok(vec![curve.finish(), summary.finish()])
}

fn roc(c: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let r = &c.roc;
    let snr = db_to_linear(r.snr_db);
    let ic = interferometer(c, r.snr_db)?;
    let a_grid = r.a_grid.values();
    let mut curve = Table::new("roc.csv", &["ad_over_cr", "a_over_sigma", "fpr", "tpr"]);
    let mut auc = Table::new("roc_auc.csv", &["ad_over_cr", "acceptable_deviation_rad", "phase_prior_max_rad", "auc"]);
    for &ad in &r.ad_over_cr {
        let rc = ROCConfig::in_cr_units(ad, snr, r.prior_factor, a_grid.clone())?;
        let pts = roc_curve(&ic, &rc, c.t_ref)?;
        for p in &pts {
            curve.row(&[num(ad), num(p.a_over_sigma), num(p.fpr), num(p.tpr)]);
        }
        auc.row(&[num(ad), num(rc.acceptable_deviation), num(rc.phase_prior_max), num(roc_auc(&pts))]);
    }
    Ok(vec![curve.finish(), auc.finish()])
}

fn integration_time(c: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let mut t = Table::new(
        "integration_time.csv",
        &["snr_db", "time_factor", "t_s", "n_c", "leak_photons", "leak_over_n_th", "snr_at_time", "peak_parity", "fwhm_numeric_rad", "fwhm_leak_free_rad"],
    );
    for &db in &c.snr_db_list {
        let ic = interferometer(c, db)?;
        for lf in c.log10_time_factor.values() {
            let f = 10f64.powf(lf);
            let time = f * c.t_ref;
            let n_c = ic.n_c_at(time)?;
            let leak = n_c * ic.extinction;
            let snr_t = ic.snr_at_time(time)?;
            t.row(&[
                num(db),
                num(f),
                num(time),
                num(n_c),
                num(leak),
                num(leak / c.n_th),
                num(snr_t),
                num(ic.parity_vs_phase(0.0, time)?),
                num(ic.numeric_fwhm(time).unwrap_or(f64::NAN)),
                num(theoretical_fwhm(snr_t).unwrap_or(f64::NAN)),
            ]);
        }
    }
    Ok(vec![t.finish()])
}

fn timeseries_demo(c: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let acq = c.acquisition;
    let mut out = Vec::new();
    let mut iq = Table::new("iq_ensemble.csv", &["snr_db", "window", "i_quadrature", "q_quadrature"]);
    let mut summary = Table::new(
        "timeseries_summary.csv",
        &["snr_db", "phi_rad", "mu_true", "mu_hat", "sigma2_true", "sigma2_hat", "parity_true", "parity_ml", "parity_std_error_per_sample"],
    );
    for (k, &db) in c.snr_db_list.iter().enumerate() {
        let snr = db_to_linear(db);
        let ic = interferometer(c, db)?;
        let phi = c.timeseries.phase_over_fwhm * theoretical_fwhm(snr)?;
        let st = ic.output_state(phi, c.t_ref)?;
        let seed = derive_seed(c.seed, &[k as u64, 0]);
        if k == 0 {
            // window 0 of the ensemble below
            let mut body = Vec::new();
            synthesize_timeseries(&acq, &st, seed)?.write_csv(&mut body)?;
            out.push(Artifact {
                name: "timeseries_window.csv".to_string(),
                body: String::from_utf8(body).expect("ascii"),
            });
        }
        let ens = ensemble_from_timeseries(&acq, &st, c.timeseries.windows, seed)?;
        for (w, z) in ens.samples.iter().enumerate() {
            iq.row(&[num(db), w.to_string(), num(z.i), num(z.q)]);
        }
        let fit = ml_fit(&ens)?;
        let est = ml_parity_with(&fit, c.error_model);
        summary.row(&[
            num(db),
            num(phi),
            num(st.mu()),
            num(fit.mu_hat),
            num(st.sigma2()),
            num(fit.sigma2_hat),
            num(st.parity()),
            num(est.value),
            num(est.std_error),
        ]);
    }
    out.push(iq.finish());
    out.push(summary.finish());

    if let Some(path) = &c.timeseries.input {
        let series = TimeSeries::read_csv(BufReader::new(std::fs::File::open(path)?))?;
        if (series.sample_rate_hz - acq.sample_rate_hz).abs() > 1e-9 * acq.sample_rate_hz {
            return Err(Error::Config {
                field: "timeseries.input".to_string(),
                message: format!(
                    "sample rate {} Hz does not match acquisition.sample_rate_hz {}",
                    series.sample_rate_hz, acq.sample_rate_hz
                ),
            });
        }
        let z = extract_iq(&series, &acq, 0.0)?;
        let mut t = Table::new("input_iq.csv", &["i_quadrature", "q_quadrature", "radius", "phase_rad"]);
        t.row(&[num(z.i), num(z.q), num(z.radius()), num(z.phase())]);
        out.push(t.finish());
    }
    Ok(out)
}

/// Runs the configured mode and returns the output files in a fixed order.
/// Pure apart from reading `timeseries.input`.
pub fn execute(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    match config.mode {
        Mode::ParitySweep => parity_sweep(config),
        Mode::Sensitivity => sensitivity(config),
        Mode::Tradeoff => tradeoff(config),
        Mode::Roc => roc(config),
        Mode::IntegrationTime => integration_time(config),
        Mode::TimeseriesDemo => timeseries_demo(config),
    }
}
