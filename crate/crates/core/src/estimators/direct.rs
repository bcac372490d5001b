use crate::error::{Error, Result};
use crate::states::PhotonBudget;

/// Phase sensitivity of a photon-number-resolving parity readout: the
/// standard deviation of the ±1 outcome, `sqrt(1 - <Π>²)`, over the slope of
/// the dark-port parity curve.
pub fn direct_parity_sensitivity(budget: PhotonBudget, phi: f64) -> Result<f64> {
    let budget = PhotonBudget::new(budget.n_c, budget.n_th)?;
    let s = phi.sin().abs();
    let prefactor = 1.0 / (2.0 * budget.n_th + 1.0);
    let slope_scale = prefactor * budget.n_c * s;
    if !(slope_scale > 1e-300) || s < 1e-15 {
        return Err(Error::Divergent { phi });
    }
    let half = (0.5 * phi).sin();
    // -ln <Π>
    let neg_log_parity = -prefactor.ln() + 2.0 * prefactor * budget.n_c * half * half;
    let two_l = 2.0 * neg_log_parity;
    let dphi = if two_l < 700.0 {
        two_l.exp_m1().sqrt() / slope_scale
    } else {
        (neg_log_parity + 0.5 * (-(-two_l).exp()).ln_1p() - slope_scale.ln()).exp()
    };
    Ok(dphi)
}
