//! Shared helpers for the integration suites: a brute-force posterior
//! oracle computed directly from the scale-family prior, and small numeric
//! utilities.

use exceedance::quad;
use exceedance::Result;

/// Density of the inverse-square scale-family prior at scale `sigma`:
/// `p_σ(x) = σ(1 − e^{−x²/(2σ²)})/(√(2π) x²)`, a proper probability
/// density whose sparse limit is the unit inverse-square (d = 1)
/// exceedance measure with rate `ρ = σ`.
pub fn inverse_square_prior(sigma: f64, x: f64) -> f64 {
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    if x == 0.0 {
        return 1.0 / (2.0 * sigma * root_2pi);
    }
    let u = x / sigma;
    // 1 − e^{−u²/2} = −expm1(−u²/2), accurate for tiny u
    sigma * (-(-(u * u) / 2.0).exp_m1()) / (root_2pi * x * x)
}

/// Exact posterior mean `E[μ | Y = y]` for the prior above under unit
/// Gaussian noise, by adaptive quadrature of the numerator and denominator.
pub fn posterior_mean_oracle(sigma: f64, y: f64) -> Result<f64> {
    let phi = |t: f64| (-(t * t) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let numerator_f = |x: f64| x * phi(y - x) * inverse_square_prior(sigma, x);
    let denominator_f = |x: f64| phi(y - x) * inverse_square_prior(sigma, x);
    // the prior has a scale-sigma core at 0 and the likelihood a unit core
    // at y; split so the adaptive rule resolves both
    let cuts = [-30.0, -1.0, 0.0, 1.0, y - 1.0, y + 1.0, 30.0];
    let mut sorted: Vec<f64> = cuts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    let mut num = 0.0;
    let mut den = 0.0;
    for w in sorted.windows(2) {
        if w[1] > w[0] {
            num += quad::adaptive(&numerator_f, w[0], w[1], 1e-11)?;
            den += quad::adaptive(&denominator_f, w[0], w[1], 1e-11)?;
        }
    }
    Ok(num / den)
}

/// Standard normal CDF (via the library's scalar kernel).
#[allow(dead_code)] // not every test binary that includes this module uses it
pub fn std_normal_cdf(x: f64) -> f64 {
    exceedance::scalar::std_normal_cdf(x)
}
