//! Conditional inference given `Y = y`: the conditional moment generating
//! function, Tweedie-style moments, activity probabilities, local
//! false-positive bounds, tail-average (Benjamini-Hochberg style)
//! thresholds, and the symmetrized conditional decomposition.
//!
//! Everything here is first-order in the sparsity rate: the conditional law
//! of the signal is the two-component mixture of a central spike with weight
//! `(1−ρ)/(1−ρ+ρζ(y))` and the normalized zeta measure with the
//! complementary weight.

use crate::densities::{psi_density, CmModel, HyperModel};
use crate::measures::DensityFn;
use crate::scalar::{
    exp_decay, ln_cosh_m1, ln_cosh_m1_mq, log_add_exp, phi, std_normal_cdf, Real,
};
use crate::zeta::ZetaEvaluator;
use crate::{Error, Result};

/// `log(1 − ρ + ρζ(x))`, stable for any `|x|`.
fn log_denominator<F: Real>(rho: F, z: &ZetaEvaluator<F>, x: F) -> Result<F> {
    let base = (F::one() - rho).ln();
    if rho == F::zero() || x == F::zero() {
        return Ok(base);
    }
    Ok(log_add_exp(base, rho.ln() + z.log_zeta(x)?))
}

/// Conditional MGF `E(e^{tμ} | Y=y) = (1−ρ+ρζ(y+t))/(1−ρ+ρζ(y))`.
pub fn cond_mgf<F: Real>(rho: F, z: &ZetaEvaluator<F>, y: F, t: F) -> Result<F> {
    check_rate(rho)?;
    Ok((log_denominator(rho, z, y + t)? - log_denominator(rho, z, y)?).exp())
}

/// Asymptotic Tweedie moment `E(μ^r | Y=y) = ρζ^{(r)}(y)/(1−ρ+ρζ(y))`,
/// `r ∈ {1, 2}`; odd in `y` for `r = 1`.
pub fn tweedie_moment<F: Real>(rho: F, z: &ZetaEvaluator<F>, y: F, r: u32) -> Result<F> {
    check_rate(rho)?;
    if r == 0 || r > 2 {
        return Err(Error::BadArgument(format!(
            "conditional moments are available for r in {{1, 2}}, got {r}"
        )));
    }
    if rho == F::zero() {
        return Ok(F::zero());
    }
    if y == F::zero() {
        return Ok(match r {
            1 => F::zero(),
            _ => rho * z.zeta2()? / (F::one() - rho),
        });
    }
    let sign = if r == 1 && y < F::zero() { -F::one() } else { F::one() };
    let ln_num = rho.ln() + z.log_zeta_deriv(y.abs(), r)?;
    Ok(sign * (ln_num - log_denominator(rho, z, y)?).exp())
}

/// First-order conditional activity probability
/// `P(μ active | Y=y) = ρζ(y)/(1−ρ+ρζ(y))`, evaluated in the log domain.
pub fn activity_prob<F: Real>(rho: F, z: &ZetaEvaluator<F>, y: F) -> Result<F> {
    check_rate(rho)?;
    if rho == F::zero() || y == F::zero() {
        return Ok(F::zero());
    }
    let ln_num = rho.ln() + z.log_zeta(y)?;
    Ok((ln_num - log_add_exp((F::one() - rho).ln(), ln_num)).exp())
}

/// First-order upper bound on the local false-positive rate,
/// `(1−ρ)/(1−ρ+ρζ(y))`; complements [`activity_prob`] to 1 exactly.
pub fn local_fpr_bound<F: Real>(rho: F, z: &ZetaEvaluator<F>, y: F) -> Result<F> {
    Ok(F::one() - activity_prob(rho, z, y)?)
}

fn check_rate<F: Real>(rho: F) -> Result<()> {
    if !(rho >= F::zero() && rho < F::one()) {
        return Err(Error::ParamOutOfDomain(format!(
            "sparsity rate rho must lie in [0, 1), got {rho}"
        )));
    }
    Ok(())
}

/// Tail-average inactivity ratio `(1 − Φ(t)) / P(Y > t)` under the model.
pub fn bh_ratio<F: Real>(model: &CmModel<F>, t: F) -> Result<F> {
    let tail = F::one() - model.marginal_cdf(t)?;
    Ok((F::one() - std_normal_cdf(t)) / tail)
}

/// Threshold `t` at which the tail-average inactivity probability
/// `(1−Φ(t))/P(Y>t)` equals `q`; monotone bisection on `[0, 10]`.
///
/// The ratio equals 1 at `t = 0` and is monotone decreasing on `t ≥ 0`
/// (for negative `t` it rises slightly above 1 because the heavy left
/// tail dominates the Gaussian hazard there, so the search stays on the
/// nonnegative axis where thresholds live). The ratio is checked for
/// monotonicity on a grid first — a violation signals a numerics bug,
/// not a property of the model.
pub fn bh_threshold<F: Real>(model: &CmModel<F>, q: F) -> Result<F> {
    if !(q > F::zero() && q < F::one()) {
        return Err(Error::BadArgument("q must lie in (0, 1)".into()));
    }
    if model.rho() == F::zero() {
        // ratio ≡ 1 when the marginal is the null
        return Err(Error::QNotAchievable);
    }
    let mut prev = F::infinity();
    let mut t = F::zero();
    while t <= F::of(8.0) {
        let r = bh_ratio(model, t)?;
        if r > prev + F::of(1e-9) {
            return Err(Error::NonMonotoneRatio);
        }
        prev = r;
        t += F::of(0.5);
    }
    let (mut lo, mut hi) = (F::zero(), F::of(10.0));
    let f_lo = bh_ratio(model, lo)? - q;
    let f_hi = bh_ratio(model, hi)? - q;
    if f_lo < F::zero() || f_hi > F::zero() {
        return Err(Error::QNotAchievable);
    }
    for _ in 0..200 {
        let mid = (lo + hi) / F::of(2.0);
        if (hi - lo).abs() <= F::of(1e-8) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if bh_ratio(model, mid)? - q > F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / F::of(2.0))
}

/// Hyperactive Tweedie mean
/// `(2γy + ρζ′_H(y))/(1−γ−ρ + γy² + ρζ_H(y))`.
pub fn hyper_tweedie_mean<F: Real>(model: &HyperModel<F>, y: F) -> Result<F> {
    if y == F::zero() {
        return Ok(F::zero());
    }
    let (g, r) = (model.gamma(), model.rho());
    let z = model.zeta();
    let (zh, dzh) = if r == F::zero() {
        (F::zero(), F::zero())
    } else {
        (z.hyper_zeta(y)?, z.hyper_zeta_deriv(y)?)
    };
    Ok((F::of(2.0) * g * y + r * dzh) / (F::one() - g - r + g * y * y + r * zh))
}

/// Diagnostic location parameter of the approximate Gaussian conditional:
/// fixed point of `m = y − (d+1)/m`, two iterations from `m₀ = y`.
pub fn gaussian_approx_mean<F: Real>(d: F, y: F) -> F {
    let mut m = y;
    for _ in 0..2 {
        m = y - (d + F::one()) / m;
    }
    m
}

/// Symmetrized conditional decomposition of the signal given `Y = y`:
/// central spike, intermediate spike `u²e^{−u²/2}H(du)/ζ₂`, and the
/// zeta remainder. Weights are exact at first order; the asymmetry of the
/// true conditional is carried entirely by the bias factor
/// `e^{yu}/cosh(yu)`.
#[derive(Clone)]
pub struct ConditionalDecomposition<F> {
    y: F,
    rho: F,
    w_central: F,
    w_intermediate: F,
    w_zeta_remainder: F,
    /// False when the three-part split was refused (`ζ(y) ≤ ζ₂y²/2`) and
    /// the zeta component is reported whole.
    split: bool,
    zeta: ZetaEvaluator<F>,
    zeta_y: F,
    zeta2: F,
    spike: Option<DensityFn<F>>,
    sigma0: F,
    alpha0: F,
    central_norm: F,
}

impl<F: Real> ConditionalDecomposition<F> {
    pub fn y(&self) -> F {
        self.y
    }

    pub fn rho(&self) -> F {
        self.rho
    }

    /// Weight of the central spike, `(1−ρ)/(1−ρ+ρζ(y))`.
    pub fn w_central(&self) -> F {
        self.w_central
    }

    /// Weight of the intermediate spike, `ρζ₂y²/2` normalized.
    pub fn w_intermediate(&self) -> F {
        self.w_intermediate
    }

    pub fn w_zeta_remainder(&self) -> F {
        self.w_zeta_remainder
    }

    /// Whether the zeta component was split into spike and remainder.
    pub fn is_split(&self) -> bool {
        self.split
    }

    /// Total weight of the zeta component, split or not.
    pub fn w_zeta_total(&self) -> F {
        self.w_intermediate + self.w_zeta_remainder
    }

    /// Central-spike density `e^{−u²/2}P(du)` for the model's own signal
    /// family, normalized by its exact mass `∫e^{−u²/2}P(du)` (which is
    /// `1−ρ` only to first order), or the user-supplied spike.
    pub fn central_density(&self, u: F) -> Result<F> {
        if let Some(spike) = &self.spike {
            return Ok(spike(u));
        }
        if self.sigma0 == F::zero() {
            return Err(Error::BadArgument(
                "central component is an atom at zero; supply a spike density to evaluate it"
                    .into(),
            ));
        }
        let s0 = self.sigma0;
        let p = (F::one() - self.alpha0) * phi(u / s0) / s0
            + self.alpha0 * psi_density(&self.zeta, u / s0)? / s0;
        Ok((-(u * u) / F::of(2.0)).exp() * p / self.central_norm)
    }

    /// Intermediate-spike density `u²e^{−u²/2}h(u)/ζ₂`.
    pub fn intermediate_density(&self, u: F) -> F {
        u * u * (-(u * u) / F::of(2.0)).exp() * self.zeta.measure().unit_density(u) / self.zeta2
    }

    /// Normalized symmetrized zeta-component density
    /// `(cosh(yu)−1)e^{−u²/2}h(u)/ζ(y)`.
    pub fn zeta_density(&self, u: F) -> F {
        exp_decay(ln_cosh_m1(self.y * u) - u * u / F::of(2.0))
            * self.zeta.measure().unit_density(u)
            / self.zeta_y
    }

    /// Zeta-remainder density
    /// `(cosh(yu)−1−y²u²/2)e^{−u²/2}h(u)/(ζ(y)−ζ₂y²/2)`; nonnegative, with
    /// an integrable `|u|^{1−d}` singularity at the origin.
    pub fn remainder_density(&self, u: F) -> Result<F> {
        if !self.split {
            return Err(Error::BadArgument(
                "three-part split unavailable: zeta(y) <= zeta2 y^2/2".into(),
            ));
        }
        let num = exp_decay(ln_cosh_m1_mq(self.y * u) - u * u / F::of(2.0))
            * self.zeta.measure().unit_density(u);
        let den = self.zeta_y - self.zeta2 * self.y * self.y / F::of(2.0);
        Ok(num / den)
    }

    /// Asymmetry factor `e^{yu}/cosh(yu)` turning any symmetrized component
    /// into its tilted counterpart without changing its total mass.
    pub fn bias_factor(&self, u: F) -> F {
        let a = self.y * u;
        // e^a / cosh a = 2 / (1 + e^{−2a}), stable for every sign of a
        F::of(2.0) / (F::one() + (-(F::of(2.0) * a)).exp())
    }
}

/// Builds the conditional decomposition at `y` under a CM model. The
/// optional `spike` overrides the central-component density (the model's
/// own Gaussian-ψ signal mixture is used by default).
pub fn conditional_decomposition<F: Real>(
    model: &CmModel<F>,
    y: F,
    spike: Option<DensityFn<F>>,
) -> Result<ConditionalDecomposition<F>> {
    let rho = model.rho();
    check_rate(rho)?;
    let zeta = model.zeta().clone();
    let zeta2 = zeta.zeta2()?;
    let sigma0 = model.sigma0();
    let alpha0 = if sigma0 > F::zero() {
        rho * (model.sigma() / sigma0).powf(model.d())
    } else {
        F::zero()
    };
    let central_norm = if spike.is_some() || sigma0 == F::zero() {
        F::one() - rho
    } else {
        let z = &zeta;
        let f = |u: F| {
            let p = (F::one() - alpha0) * phi(u / sigma0) / sigma0
                + alpha0 * psi_density(z, u / sigma0).unwrap_or(F::zero()) / sigma0;
            (-(u * u) / F::of(2.0)).exp() * p
        };
        crate::quad::symmetric_integral(&f, F::of(1e-10))?
    };
    if y == F::zero() {
        return Ok(ConditionalDecomposition {
            y,
            rho,
            w_central: F::one(),
            w_intermediate: F::zero(),
            w_zeta_remainder: F::zero(),
            split: true,
            zeta,
            zeta_y: F::zero(),
            zeta2,
            spike,
            sigma0,
            alpha0,
            central_norm,
        });
    }
    let zeta_y = zeta.zeta(y)?;
    let den = F::one() - rho + rho * zeta_y;
    let w_central = (F::one() - rho) / den;
    let spike_mass = zeta2 * y * y / F::of(2.0);
    let (w_intermediate, w_zeta_remainder, split) = if zeta_y > spike_mass {
        (
            rho * spike_mass / den,
            rho * (zeta_y - spike_mass) / den,
            true,
        )
    } else {
        // tiny |y|: the remainder would be negative mass, refuse the split
        (F::zero(), rho * zeta_y / den, false)
    };
    Ok(ConditionalDecomposition {
        y,
        rho,
        w_central,
        w_intermediate,
        w_zeta_remainder,
        split,
        zeta,
        zeta_y,
        zeta2,
        spike,
        sigma0,
        alpha0,
        central_norm,
    })
}
