//! Rician radial CDF and the Marcum Q function of order one.
//!
//! With `λ = ν²/2σ²` and `x = a²/2σ²`, the squared radius over `σ²` is a
//! noncentral χ² with two degrees of freedom, which is a Poisson(λ) mixture of
//! central χ² laws:
//!
//! ```text
//! P(R <= a) = Σ_j Pois(j; λ) · P(Pois(x) >= j + 1)
//! Q₁        = Σ_j Pois(j; λ) · P(Pois(x) <= j)
//! ```
//!
//! The sum runs outward from the mode of Pois(λ) and stops once the mixture
//! weight falls below `WEIGHT_CUTOFF`. Whichever of CDF and Q₁ is smaller is
//! summed directly; the other is its complement.

use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};

const WEIGHT_CUTOFF: f64 = 1e-17;
/// Beyond this many σ between ν and a, the smaller tail underflows f64.
const SEPARATION_LIMIT: f64 = 40.0;

fn ln_poisson_pmf(k: u64, rate: f64) -> f64 {
    -rate + k as f64 * rate.ln() - ln_gamma(k as f64 + 1.0)
}

/// `(P(N <= m), P(N > m))` for `N ~ Pois(rate)`, with the smaller of the two
/// summed directly.
fn poisson_split(m: u64, rate: f64) -> (f64, f64) {
    if rate == 0.0 {
        return (1.0, 0.0);
    }
    let mode = rate.floor() as u64;
    if m < mode {
        // lower tail, terms shrink going down
        let mut p = ln_poisson_pmf(m, rate).exp();
        let mut sum = p;
        let mut i = m;
        while i > 0 && p > 1e-18 * sum {
            p *= i as f64 / rate;
            sum += p;
            i -= 1;
        }
        (sum, 1.0 - sum)
    } else {
        let mut i = m + 1;
        let mut p = ln_poisson_pmf(i, rate).exp();
        let mut sum = p;
        while p > 1e-18 * sum && p > 0.0 {
            i += 1;
            p *= rate / i as f64;
            sum += p;
        }
        (1.0 - sum, sum)
    }
}

/// `(P(R <= beta), Q₁(alpha, beta))` in units where σ = 1.
fn cdf_and_q(alpha: f64, beta: f64) -> (f64, f64) {
    if beta == 0.0 {
        return (0.0, 1.0);
    }
    let x = 0.5 * beta * beta;
    if alpha == 0.0 {
        let q = (-x).exp();
        return (-(-x).exp_m1(), q);
    }
    if alpha - beta > SEPARATION_LIMIT {
        return (0.0, 1.0);
    }
    if beta - alpha > SEPARATION_LIMIT {
        return (1.0, 0.0);
    }
    let lam = 0.5 * alpha * alpha;
    // CDF is the small side when the radius threshold sits inside the mean
    let want_cdf = x < lam;
    let pick = |l: f64, u: f64| if want_cdf { u } else { l };

    let m = lam.floor() as u64;
    let w_m = ln_poisson_pmf(m, lam).exp();
    let p_m = ln_poisson_pmf(m, x).exp();
    let (l_m, u_m) = poisson_split(m, x);

    let mut total = w_m * pick(l_m, u_m);

    // upward
    let (mut w, mut p, mut l, mut u) = (w_m, p_m, l_m, u_m);
    let mut j = m;
    loop {
        w *= lam / (j + 1) as f64;
        p *= x / (j + 1) as f64;
        l += p;
        u = (u - p).max(0.0);
        j += 1;
        total += w * pick(l.min(1.0), u);
        if w < WEIGHT_CUTOFF && j as f64 > lam {
            break;
        }
    }

    // downward
    let (mut w, mut p, mut l, mut u) = (w_m, p_m, l_m, u_m);
    let mut j = m;
    while j > 0 {
        w *= j as f64 / lam;
        l = (l - p).max(0.0);
        u += p;
        p *= j as f64 / x;
        j -= 1;
        total += w * pick(l, u.min(1.0));
        if w < WEIGHT_CUTOFF {
            break;
        }
    }

    let small = total.clamp(0.0, 1.0);
    if want_cdf {
        (small, 1.0 - small)
    } else {
        (1.0 - small, small)
    }
}

/// `P(R <= a)` for a Rician radius with displacement `nu` and per-axis
/// deviation `sigma`.
pub fn rician_cdf(nu: f64, sigma: f64, a: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(domain(format!("sigma must be > 0, got {sigma}")));
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(domain(format!("nu must be >= 0, got {nu}")));
    }
    if a.is_nan() || a < 0.0 {
        return Err(domain(format!("radius must be >= 0, got {a}")));
    }
    if a == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(cdf_and_q(nu / sigma, a / sigma).0)
}

/// Marcum Q function of order one.
pub fn marcum_q1(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0 && beta.is_finite() && beta >= 0.0) {
        return Err(domain(format!(
            "marcum Q arguments must be finite and >= 0, got ({alpha}, {beta})"
        )));
    }
    Ok(cdf_and_q(alpha, beta).1)
}
