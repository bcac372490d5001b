//! Symmetric Gaussian phase-space states.
//!
//! Quadratures are dimensionless with the vacuum variance fixed at 1/2, so a
//! coherent state with `n_c` photons sits at radius `mu = sqrt(2 n_c)` and a
//! thermal state with `n_th` photons has per-quadrature variance `n_th + 1/2`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Per-quadrature variance of the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Symmetric 2-D Gaussian Wigner function: displacement `mu` at phase
/// `theta`, variance `sigma2` on each quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    mu: f64,
    theta: f64,
    sigma2: f64,
}

impl GaussianState {
    /// A negative `mu` is folded into `theta` (shifted by π).
    pub fn new(mu: f64, theta: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() || !theta.is_finite() || !sigma2.is_finite() {
            return Err(domain("state parameters must be finite"));
        }
        if sigma2 < VACUUM_VARIANCE {
            return Err(domain(format!(
                "variance {sigma2} is below the vacuum floor {VACUUM_VARIANCE}"
            )));
        }
        let (mu, theta) = if mu < 0.0 { (-mu, theta + PI) } else { (mu, theta) };
        Ok(Self {
            mu,
            theta: normalize_angle(theta),
            sigma2,
        })
    }

    pub fn vacuum() -> Self {
        Self {
            mu: 0.0,
            theta: 0.0,
            sigma2: VACUUM_VARIANCE,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Mean coherent photon number, `mu^2 / 2`.
    pub fn n_c(&self) -> f64 {
        0.5 * self.mu * self.mu
    }

    /// Mean thermal photon number, `sigma2 - 1/2`.
    pub fn n_th(&self) -> f64 {
        self.sigma2 - VACUUM_VARIANCE
    }

    /// Conventional coherent amplitude as (re, im); `|alpha|^2 = n_c`.
    pub fn alpha(&self) -> (f64, f64) {
        let r = self.mu / std::f64::consts::SQRT_2;
        (r * self.theta.cos(), r * self.theta.sin())
    }

    /// Center of the distribution in the (x, p) plane.
    pub fn center(&self) -> (f64, f64) {
        (self.mu * self.theta.cos(), self.mu * self.theta.sin())
    }

    pub fn budget(&self) -> PhotonBudget {
        PhotonBudget {
            n_c: self.n_c(),
            n_th: self.n_th(),
        }
    }

    pub fn wigner_density(&self, x: f64, p: f64) -> f64 {
        let (cx, cp) = self.center();
        let d2 = (x - cx).powi(2) + (p - cp).powi(2);
        (-d2 / (2.0 * self.sigma2)).exp() / (2.0 * PI * self.sigma2)
    }

    /// `<Π> = π W(0,0)`.
    pub fn parity(&self) -> f64 {
        parity_closed_form(self.mu, self.sigma2)
    }
}

/// `(1 / 2σ²) exp(-μ² / 2σ²)`, without the vacuum-floor check so that fitted
/// parameters can be fed through it.
pub fn parity_closed_form(mu: f64, sigma2: f64) -> f64 {
    (-mu * mu / (2.0 * sigma2)).exp() / (2.0 * sigma2)
}

/// Mean coherent and thermal photon numbers per measurement window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    pub n_c: f64,
    pub n_th: f64,
}

impl PhotonBudget {
    pub fn new(n_c: f64, n_th: f64) -> Result<Self> {
        if !(n_c.is_finite() && n_c >= 0.0) {
            return Err(domain(format!("n_c must be finite and >= 0, got {n_c}")));
        }
        if !(n_th.is_finite() && n_th >= 0.0) {
            return Err(domain(format!("n_th must be finite and >= 0, got {n_th}")));
        }
        Ok(Self { n_c, n_th })
    }

    /// Budget with a given phase-space SNR on top of `n_th` thermal photons.
    pub fn from_snr(snr: f64, n_th: f64) -> Result<Self> {
        if !(snr.is_finite() && snr >= 0.0) {
            return Err(domain(format!("snr must be finite and >= 0, got {snr}")));
        }
        Self::new(snr * (n_th + VACUUM_VARIANCE), n_th)
    }

    /// Phase-space signal-to-noise ratio `n_c / (n_th + 1/2)`.
    pub fn snr(&self) -> f64 {
        self.n_c / (self.n_th + VACUUM_VARIANCE)
    }
}

/// Coherent displacement convolved with thermal noise in the same mode.
pub fn compose_coherent_thermal(budget: PhotonBudget, theta: f64) -> Result<GaussianState> {
    let budget = PhotonBudget::new(budget.n_c, budget.n_th)?;
    GaussianState::new(
        (2.0 * budget.n_c).sqrt(),
        theta,
        budget.n_th + VACUUM_VARIANCE,
    )
}
