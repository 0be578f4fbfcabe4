//! Exceedance measures: the catalogue of families, unit normalization,
//! activity indices and sparsity rates.
//!
//! An exceedance measure is a symmetric nonnegative measure `H` on
//! `R \ {0}` with `∫ min(x², 1) H(dx) < ∞`. Each proportionality ray
//! contains a unit representative with `∫ (1 - e^{-x²/2}) H(dx) = 1`;
//! hyperactive measures use the weaker standardization
//! `∫ (1 - e^{-x²/2}(1 + x²/2)) H(dx) = 1` instead.

use crate::quad;
use crate::scalar::{self, gamma, Real};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Tolerance to which unit normalization must hold after construction.
pub const UNIT_NORM_TOL: f64 = 1e-8;

/// A probability distribution usable as the slab of an atom-and-slab family.
#[derive(Clone, Debug, PartialEq)]
pub enum SlabDistribution<F> {
    Laplace { scale: F },
    Cauchy { scale: F },
    Gaussian { scale: F },
}

impl<F: Real> SlabDistribution<F> {
    pub fn density(&self, x: F) -> F {
        match *self {
            SlabDistribution::Laplace { scale } => (-(x.abs() / scale)).exp() / (F::of(2.0) * scale),
            SlabDistribution::Cauchy { scale } => {
                scale / (F::PI() * (scale * scale + x * x))
            }
            SlabDistribution::Gaussian { scale } => scalar::phi(x / scale) / scale,
        }
    }

    pub fn cdf(&self, x: F) -> F {
        match *self {
            SlabDistribution::Laplace { scale } => {
                let z = x / scale;
                if z < F::zero() {
                    F::of(0.5) * z.exp()
                } else {
                    F::one() - F::of(0.5) * (-z).exp()
                }
            }
            SlabDistribution::Cauchy { scale } => {
                F::of(0.5) + (x / scale).atan() / F::PI()
            }
            SlabDistribution::Gaussian { scale } => scalar::std_normal_cdf(x / scale),
        }
    }

    fn validate(&self) -> Result<()> {
        let s = match *self {
            SlabDistribution::Laplace { scale }
            | SlabDistribution::Cauchy { scale }
            | SlabDistribution::Gaussian { scale } => scale,
        };
        if !(s > F::zero()) {
            return Err(Error::ParamOutOfDomain("slab scale must be positive".into()));
        }
        Ok(())
    }
}

/// Density callable for custom measures.
pub type DensityFn<F> = Arc<dyn Fn(F) -> F + Send + Sync>;

/// Parametric (or custom) family of an exceedance measure. Densities are
/// specified up to proportionality; the unit constant is computed at
/// construction.
#[derive(Clone)]
pub enum Family<F> {
    /// `H(dx) ∝ dx / |x|^{d+1}`, `0 < d < 2`.
    InversePower { d: F },
    /// `H(dx) ∝ (e^{-τ|x|} - e^{-τ e^{λ/2} |x|}) dx / |x|`; `λ = 0` uses the
    /// limit density `∝ e^{-τ|x|}`.
    LaplaceLasso { lambda: F, tau: F },
    /// `H(dx) ∝ e^{-α|x|} dx / |x|`.
    ExponentialTail { alpha: F },
    /// Finite measure proportional to a slab probability distribution.
    SlabDerived { slab: SlabDistribution<F> },
    /// `H(dx) ∝ dx / x^4` — first-order hyperactive.
    InverseQuartic,
    /// Symmetric user-supplied density (no atoms); `f` is evaluated at `|x|`.
    Custom { density: DensityFn<F>, hyperactive: bool },
}

impl<F: fmt::Debug> fmt::Debug for Family<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::InversePower { d } => write!(f, "InversePower {{ d: {d:?} }}"),
            Family::LaplaceLasso { lambda, tau } => {
                write!(f, "LaplaceLasso {{ lambda: {lambda:?}, tau: {tau:?} }}")
            }
            Family::ExponentialTail { alpha } => write!(f, "ExponentialTail {{ alpha: {alpha:?} }}"),
            Family::SlabDerived { slab } => write!(f, "SlabDerived {{ slab: {slab:?} }}"),
            Family::InverseQuartic => write!(f, "InverseQuartic"),
            Family::Custom { hyperactive, .. } => write!(f, "Custom {{ hyperactive: {hyperactive} }}"),
        }
    }
}

/// A unit-normalized exceedance measure. Immutable after construction; the
/// unit constant is cached so all later evaluation is pure.
#[derive(Clone)]
pub struct ExceedanceMeasure<F> {
    family: Family<F>,
    unit_constant: F,
    hyperactive: bool,
}

impl<F: fmt::Debug> fmt::Debug for ExceedanceMeasure<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExceedanceMeasure")
            .field("family", &self.family)
            .field("unit_constant", &self.unit_constant)
            .field("hyperactive", &self.hyperactive)
            .finish()
    }
}

impl<F: Real> ExceedanceMeasure<F> {
    pub fn new(family: Family<F>) -> Result<Self> {
        let hyperactive = match &family {
            Family::InverseQuartic => true,
            Family::Custom { hyperactive, .. } => *hyperactive,
            _ => false,
        };
        validate_family(&family)?;
        let unit_constant = unit_constant(&family)?;
        Ok(Self {
            family,
            unit_constant,
            hyperactive,
        })
    }

    /// Builds a measure with a caller-supplied unit constant (e.g. from an
    /// interpolated cache); the caller vouches for its accuracy.
    pub fn with_unit_constant(family: Family<F>, unit_constant: F) -> Result<Self> {
        validate_family(&family)?;
        if !(unit_constant > F::zero()) || !unit_constant.is_finite() {
            return Err(Error::ParamOutOfDomain(
                "unit constant must be positive finite".into(),
            ));
        }
        let hyperactive = match &family {
            Family::InverseQuartic => true,
            Family::Custom { hyperactive, .. } => *hyperactive,
            _ => false,
        };
        Ok(Self {
            family,
            unit_constant,
            hyperactive,
        })
    }

    pub fn inverse_power(d: F) -> Result<Self> {
        Self::new(Family::InversePower { d })
    }

    pub fn inverse_quartic() -> Result<Self> {
        Self::new(Family::InverseQuartic)
    }

    pub fn family(&self) -> &Family<F> {
        &self.family
    }

    /// Multiplier making the raw family density a unit exceedance density.
    pub fn unit_constant(&self) -> F {
        self.unit_constant
    }

    pub fn hyperactive(&self) -> bool {
        self.hyperactive
    }

    /// Unit-normalized density at `x != 0`; symmetric by construction.
    pub fn unit_density(&self, x: F) -> F {
        self.unit_constant * raw_density(&self.family, x.abs())
    }

    /// Activity index `AI(H)`: the infimum of `α` with
    /// `∫_{-1}^{1} |x|^α H(dx) < ∞`. Analytic for the parametric families;
    /// bracketed numerically for custom densities.
    pub fn activity_index(&self) -> Result<F> {
        if self.hyperactive {
            return Err(Error::Hyperactive);
        }
        match &self.family {
            Family::InversePower { d } => Ok(*d),
            Family::LaplaceLasso { .. } | Family::ExponentialTail { .. } | Family::SlabDerived { .. } => {
                Ok(F::zero())
            }
            Family::InverseQuartic => unreachable!("hyperactive handled above"),
            Family::Custom { density, .. } => bracket_activity_index(density.as_ref()),
        }
    }

    /// `H({|x| > ε})` for the unit measure.
    pub fn exceedance_mass(&self, epsilon: F) -> Result<F> {
        if !(epsilon > F::zero()) {
            return Err(Error::ParamOutOfDomain("epsilon must be positive".into()));
        }
        match &self.family {
            Family::InversePower { d } => {
                Ok(F::of(2.0) * self.unit_constant * epsilon.powf(-*d) / *d)
            }
            Family::InverseQuartic => {
                Ok(F::of(2.0) * self.unit_constant * epsilon.powi(-3) / F::of(3.0))
            }
            _ => {
                let f = |x: F| self.unit_density(x);
                Ok(F::of(2.0)
                    * quad::integral_positive(&f, epsilon, F::infinity(), F::of(quad::DEFAULT_REL_TOL))?)
            }
        }
    }

    /// `∫ u² e^{-u²/2} H(du)`, the leading Taylor coefficient of zeta.
    pub fn zeta2(&self) -> Result<F> {
        if self.hyperactive {
            return Err(Error::Hyperactive);
        }
        if let Family::InversePower { d } = self.family {
            // exact: the x² coefficient of the series is d/2
            return Ok(d);
        }
        let f = |u: F| u * u * (-(u * u) / F::of(2.0)).exp() * self.unit_density(u);
        quad::symmetric_integral(&f, F::of(quad::DEFAULT_REL_TOL))
    }
}

fn validate_family<F: Real>(family: &Family<F>) -> Result<()> {
    match family {
        Family::InversePower { d } => {
            if !(*d > F::zero() && *d < F::of(2.0)) {
                return Err(Error::ParamOutOfDomain(format!(
                    "inverse-power index d must lie in (0, 2), got {d}"
                )));
            }
        }
        Family::LaplaceLasso { lambda, tau } => {
            if !(*lambda >= F::zero()) {
                return Err(Error::ParamOutOfDomain("lambda must be nonnegative".into()));
            }
            if !(*tau > F::zero()) {
                return Err(Error::ParamOutOfDomain("tau must be positive".into()));
            }
        }
        Family::ExponentialTail { alpha } => {
            if !(*alpha > F::zero()) {
                return Err(Error::ParamOutOfDomain("alpha must be positive".into()));
            }
        }
        Family::SlabDerived { slab } => slab.validate()?,
        Family::InverseQuartic | Family::Custom { .. } => {}
    }
    Ok(())
}

/// Raw (unnormalized) family density at `x > 0`.
fn raw_density<F: Real>(family: &Family<F>, x: F) -> F {
    match family {
        Family::InversePower { d } => x.powf(-(*d + F::one())),
        Family::LaplaceLasso { lambda, tau } => {
            if *lambda == F::zero() {
                (-*tau * x).exp()
            } else {
                ((-*tau * x).exp() - (-*tau * (*lambda / F::of(2.0)).exp() * x).exp()) / x
            }
        }
        Family::ExponentialTail { alpha } => (-*alpha * x).exp() / x,
        Family::SlabDerived { slab } => slab.density(x),
        Family::InverseQuartic => x.powi(-4),
        Family::Custom { density, .. } => density(x),
    }
}

/// The constant `c` such that `c * h0` satisfies the unit normalization.
///
/// Closed form for the inverse-power family (`c = d 2^{d/2-1} / Γ(1-d/2)`)
/// and the inverse quartic (`3 √(2/π)`); adaptive quadrature otherwise.
pub fn unit_constant<F: Real>(family: &Family<F>) -> Result<F> {
    validate_family(family)?;
    match family {
        Family::InversePower { d } => {
            Ok(*d * F::of(2.0).powf(*d / F::of(2.0) - F::one()) / gamma(F::one() - *d / F::of(2.0)))
        }
        Family::InverseQuartic => Ok(F::of(3.0) * (F::of(2.0) / F::PI()).sqrt()),
        _ => {
            let hyper = matches!(family, Family::Custom { hyperactive: true, .. });
            let w = move |x: F| {
                if hyper {
                    scalar::weight_hyper(x)
                } else {
                    scalar::weight_std(x)
                }
            };
            let f = |x: F| w(x) * raw_density(family, x);
            let total = quad::symmetric_integral(&f, F::of(quad::DEFAULT_REL_TOL))?;
            if !(total > F::zero()) || !total.is_finite() {
                return Err(Error::QuadratureNoConvergence(
                    "unit-normalization integral is not positive finite".into(),
                ));
            }
            Ok(total.recip())
        }
    }
}

/// Activity-reduction factor `ρ/ν = ∫ (1 - e^{-x²/2}) F(dx)` of a slab.
pub fn slab_activity_factor<F: Real>(slab: &SlabDistribution<F>) -> Result<F> {
    slab.validate()?;
    let f = |x: F| scalar::weight_std(x) * slab.density(x);
    quad::symmetric_integral(&f, F::of(quad::DEFAULT_REL_TOL))
}

/// Scale families with a closed-form sparsity rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScaleFamily<F> {
    Cauchy,
    StudentT { d: F },
}

/// Sparsity rate `ρ(σ)` of a sparse scale family, normalized so the limit
/// exceedance measure is the unit inverse-power measure.
pub fn scale_family_rate<F: Real>(family: ScaleFamily<F>, sigma: F) -> Result<F> {
    if !(sigma > F::zero()) {
        return Err(Error::ParamOutOfDomain("sigma must be positive".into()));
    }
    match family {
        ScaleFamily::Cauchy => Ok(sigma * (F::of(2.0) / F::PI()).sqrt()),
        ScaleFamily::StudentT { d } => {
            if !(d > F::zero() && d < F::of(2.0)) {
                return Err(Error::ParamOutOfDomain(
                    "Student-t degrees of freedom must lie in (0, 2)".into(),
                ));
            }
            // tail coefficient of the t_d density: T_d = Γ((d+1)/2) d^{d/2} / (√π Γ(d/2))
            let two = F::of(2.0);
            let t_d = gamma((d + F::one()) / two) * d.powf(d / two) / (F::PI().sqrt() * gamma(d / two));
            let c_d = d * two.powf(d / two - F::one()) / gamma(F::one() - d / two);
            Ok(t_d / c_d * sigma.powf(d))
        }
    }
}

/// Numerically bracket the activity index of a custom density on an α-grid
/// of step 0.01, declaring divergence when the refined integral
/// `∫_{ε}^{1} x^α h(x) dx` exceeds 1e6.
fn bracket_activity_index<F: Real>(density: &(dyn Fn(F) -> F + Send + Sync)) -> Result<F> {
    let step = 0.01f64;
    let converges = |alpha: f64| -> Result<bool> {
        let mut total = F::zero();
        // deepen the lower cutoff ε = 2^{-k}; a convergent integral has
        // geometrically shrinking dyadic increments, a divergent one has
        // flat or growing increments (the 1e6 cap catches fast divergence,
        // the increment trend catches slow divergence near the index)
        let mut prev_inc = F::infinity();
        let mut inc = F::infinity();
        for k in 0..200 {
            let hi = F::of(2f64.powi(-k));
            let lo = F::of(2f64.powi(-(k + 1)));
            let f = |x: F| x.powf(F::of(alpha)) * density(x);
            prev_inc = inc;
            inc = quad::integral_below_one(&f, lo, hi, F::of(1e-9))?;
            total += inc;
            if total > F::of(1e6) {
                return Ok(false);
            }
            if k > 8 && inc < F::of(1e-12) * total.max(F::one()) {
                return Ok(true);
            }
            if k > 12 && inc > prev_inc {
                return Ok(false);
            }
        }
        Ok(inc < prev_inc * F::of(0.9999))
    };
    let mut lower = 0.0f64; // largest alpha known (or assumed) divergent
    let mut found = None;
    let mut alpha = step;
    while alpha < 2.0 + step / 2.0 {
        if converges(alpha)? {
            found = Some(alpha);
            break;
        }
        lower = alpha;
        alpha += step;
    }
    match found {
        Some(upper) => Ok(F::of((lower + upper) / 2.0)),
        None => Err(Error::BracketFailure(
            "integral diverges for every alpha < 2".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Serializable measure specifications (JSON wire format)
// ---------------------------------------------------------------------------

/// Serializable slab description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlabSpec {
    Laplace { scale: f64 },
    Cauchy { scale: f64 },
    Gaussian { scale: f64 },
}

/// Serializable family description (custom densities excluded).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilySpec {
    InversePower { d: f64 },
    LaplaceLasso { lambda: f64, tau: f64 },
    ExponentialTail { alpha: f64 },
    SlabDerived { slab: SlabSpec },
    InverseQuartic,
}

/// JSON wire format for a measure: `{family, params, unit_constant, hyperactive}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default)]
    pub unit_constant: Option<f64>,
    #[serde(default)]
    pub hyperactive: bool,
}

impl SlabSpec {
    pub fn to_slab<F: Real>(&self) -> SlabDistribution<F> {
        match *self {
            SlabSpec::Laplace { scale } => SlabDistribution::Laplace { scale: F::of(scale) },
            SlabSpec::Cauchy { scale } => SlabDistribution::Cauchy { scale: F::of(scale) },
            SlabSpec::Gaussian { scale } => SlabDistribution::Gaussian { scale: F::of(scale) },
        }
    }
}

impl MeasureSpec {
    pub fn to_measure<F: Real>(&self) -> Result<ExceedanceMeasure<F>> {
        let family = match &self.family {
            FamilySpec::InversePower { d } => Family::InversePower { d: F::of(*d) },
            FamilySpec::LaplaceLasso { lambda, tau } => Family::LaplaceLasso {
                lambda: F::of(*lambda),
                tau: F::of(*tau),
            },
            FamilySpec::ExponentialTail { alpha } => Family::ExponentialTail { alpha: F::of(*alpha) },
            FamilySpec::SlabDerived { slab } => Family::SlabDerived { slab: slab.to_slab() },
            FamilySpec::InverseQuartic => Family::InverseQuartic,
        };
        let m = ExceedanceMeasure::new(family)?;
        if let Some(c) = self.unit_constant {
            let got = m.unit_constant().to_f64_lossy();
            if (got - c).abs() > 1e-6 * c.abs().max(1.0) {
                return Err(Error::BadArgument(format!(
                    "stored unit_constant {c} disagrees with recomputed {got}"
                )));
            }
        }
        Ok(m)
    }

    pub fn from_measure<F: Real>(m: &ExceedanceMeasure<F>) -> Result<Self> {
        let family = match m.family() {
            Family::InversePower { d } => FamilySpec::InversePower { d: d.to_f64_lossy() },
            Family::LaplaceLasso { lambda, tau } => FamilySpec::LaplaceLasso {
                lambda: lambda.to_f64_lossy(),
                tau: tau.to_f64_lossy(),
            },
            Family::ExponentialTail { alpha } => {
                FamilySpec::ExponentialTail { alpha: alpha.to_f64_lossy() }
            }
            Family::SlabDerived { slab } => FamilySpec::SlabDerived {
                slab: match slab {
                    SlabDistribution::Laplace { scale } => SlabSpec::Laplace { scale: scale.to_f64_lossy() },
                    SlabDistribution::Cauchy { scale } => SlabSpec::Cauchy { scale: scale.to_f64_lossy() },
                    SlabDistribution::Gaussian { scale } => SlabSpec::Gaussian { scale: scale.to_f64_lossy() },
                },
            },
            Family::InverseQuartic => FamilySpec::InverseQuartic,
            Family::Custom { .. } => return Err(Error::NotSerializable),
        };
        Ok(MeasureSpec {
            family,
            unit_constant: Some(m.unit_constant().to_f64_lossy()),
            hyperactive: m.hyperactive(),
        })
    }
}
