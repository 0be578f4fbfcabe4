//! Sparse-limit inference for the signal-plus-Gaussian-noise model.
//!
//! The observation model is `Y = mu + eps` with `eps ~ N(0,1)` and a sparse
//! signal `mu`. In the sparse limit the signal family enters only through a
//! rate parameter `rho` and a unit exceedance measure `H`; everything
//! observable to first order in `rho` is a functional of the zeta transform
//! `zeta(t) = ∫ (cosh(tu) - 1) exp(-u^2/2) H(du)`.
//!
//! The crate provides:
//!
//! - [`measures`]: the catalogue of exceedance measures, unit normalization,
//!   activity indices and sparsity rates;
//! - [`zeta`]: evaluation of `zeta`, `log zeta`, derivatives, zeta-measure
//!   masses and the hyperactive variant;
//! - [`densities`]: the tail-inflation density `psi = phi * zeta`, its
//!   characteristic function, the `CM_d` convolution-mixture family,
//!   marginal mixtures, quantiles and samplers;
//! - [`conditional`]: Tweedie moments, activity probabilities, local
//!   false-positive bounds, tail-average (Benjamini-Hochberg style)
//!   thresholds and the symmetrized conditional decomposition;
//! - [`fit`]: asymptotic maximum-likelihood estimation;
//! - [`simulate`]: reproducible data generators;
//! - [`cli`]: machinery behind the `exceedance` command-line binary.
//!
//! Core numerics are generic over the scalar type via [`scalar::Real`]
//! (implemented for `f32` and `f64`); samplers and fitting work in `f64`.

pub mod cli;
pub mod conditional;
pub mod densities;
pub mod fit;
pub mod ks;
pub mod measures;
pub mod quad;
pub mod scalar;
pub mod simulate;
pub mod zeta;

pub use scalar::Real;

/// Concrete `f64` aliases for the main domain types.
pub type Measure64 = measures::ExceedanceMeasure<f64>;
pub type Slab64 = measures::SlabDistribution<f64>;
pub type Zeta64 = zeta::ZetaEvaluator<f64>;
pub type CmModel64 = densities::CmModel<f64>;
pub type HyperModel64 = densities::HyperModel<f64>;
pub type Decomposition64 = conditional::ConditionalDecomposition<f64>;

/// `f32` aliases; the density/transform layer is fully generic.
pub type Measure32 = measures::ExceedanceMeasure<f32>;
pub type Zeta32 = zeta::ZetaEvaluator<f32>;
pub type CmModel32 = densities::CmModel<f32>;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParamOutOfDomain(String),
    #[error("quadrature did not converge after maximum refinement ({0})")]
    QuadratureNoConvergence(String),
    #[error("value overflows the floating range; use the log-domain evaluator")]
    Overflow,
    #[error("operation requires a hyperactive measure")]
    NotHyperactive,
    #[error("operation is not defined for hyperactive measures")]
    Hyperactive,
    #[error("activity-index bracketing failed: {0}")]
    BracketFailure(String),
    #[error("root bracketing failed: {0}")]
    RootBracketFailure(String),
    #[error("q not achievable for this model")]
    QNotAchievable,
    #[error("tail ratio is not monotone on the search interval; numerics bug")]
    NonMonotoneRatio,
    #[error("rejection-sampler envelope violated at x = {x}: psi/envelope = {ratio} > bound {bound}")]
    EnvelopeViolation { x: f64, ratio: f64, bound: f64 },
    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),
    #[error("non-finite observation at index {0}")]
    NonFiniteObservation(usize),
    #[error("all optimizer starts failed to converge")]
    FitFailed,
    #[error("density estimate at the origin is nonpositive")]
    NonpositiveDensity,
    #[error("custom measures cannot be serialized")]
    NotSerializable,
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit status: 2 for argument/config problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadArgument(_) | Error::ParamOutOfDomain(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
