//! The zeta transform `ζ(t) = ∫ (cosh(tu) − 1) e^{−u²/2} H(du)`, its
//! derivatives, the associated finite measure, and the hyperactive variant
//! `ζ_H(t) = ∫ (cosh(tu) − 1 − t²u²/2) e^{−u²/2} H(du)`.
//!
//! Inverse-power measures get an exact positive-term power series with a
//! term-ratio recurrence; every other family is integrated by adaptive
//! quadrature with explicit panels around the integrand peak at `u ≈ |t|`.
//! Both paths have log-domain twins so likelihoods stay finite for
//! observations up to `|y| ≈ 40`.

use crate::measures::{ExceedanceMeasure, Family};
use crate::quad;
use crate::scalar::{
    self, exp_decay, ln_cosh, ln_cosh_m1, ln_sinh, ln_sinh_m_id, log_add_exp, Real,
};
use crate::{Error, Result};

/// Evaluation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exact power series; inverse-power measures only.
    Series,
    /// Adaptive quadrature; any family.
    Quadrature,
}

/// Immutable evaluator for the zeta transform of one measure.
#[derive(Clone, Debug)]
pub struct ZetaEvaluator<F> {
    measure: ExceedanceMeasure<F>,
    mode: Mode,
    zeta2: Option<F>,
    series_tolerance: F,
}

/// `|t|` above which direct evaluation would overflow: `t²/2 > ln(max)/2`.
fn overflow_threshold<F: Real>() -> F {
    F::max_value().ln().sqrt()
}

impl<F: Real> ZetaEvaluator<F> {
    /// Builds an evaluator, choosing the series for inverse-power measures
    /// and quadrature otherwise.
    pub fn new(measure: ExceedanceMeasure<F>) -> Result<Self> {
        let mode = match measure.family() {
            Family::InversePower { .. } => Mode::Series,
            _ => Mode::Quadrature,
        };
        Self::with_mode(measure, mode)
    }

    /// Builds an evaluator with an explicit mode. The series mode is only
    /// valid for inverse-power measures.
    pub fn with_mode(measure: ExceedanceMeasure<F>, mode: Mode) -> Result<Self> {
        if mode == Mode::Series && !matches!(measure.family(), Family::InversePower { .. }) {
            return Err(Error::BadArgument(
                "series mode requires an inverse-power measure".into(),
            ));
        }
        let zeta2 = if measure.hyperactive() {
            None
        } else {
            Some(measure.zeta2()?)
        };
        Ok(Self {
            measure,
            mode,
            zeta2,
            series_tolerance: F::of(1e-12),
        })
    }

    pub fn set_series_tolerance(&mut self, tol: F) {
        self.series_tolerance = tol;
    }

    pub fn measure(&self) -> &ExceedanceMeasure<F> {
        &self.measure
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Cached `∫ u² e^{−u²/2} H(du)`, the leading Taylor coefficient.
    pub fn zeta2(&self) -> Result<F> {
        self.zeta2.ok_or(Error::Hyperactive)
    }

    fn d(&self) -> F {
        match self.measure.family() {
            Family::InversePower { d } => *d,
            _ => unreachable!("series path requires inverse-power"),
        }
    }

    /// `ζ(t)`. Errors with [`Error::Overflow`] when `t²/2 > ln(max)/2`;
    /// use [`Self::log_zeta`] there.
    pub fn zeta(&self, t: F) -> Result<F> {
        if self.measure.hyperactive() {
            return Err(Error::Hyperactive);
        }
        let t = t.abs();
        if t == F::zero() {
            return Ok(F::zero());
        }
        if t >= overflow_threshold::<F>() {
            return Err(Error::Overflow);
        }
        match self.mode {
            Mode::Series => Ok(series_sum(self.d(), t, self.series_tolerance)),
            Mode::Quadrature => {
                let m = &self.measure;
                let f = move |u: F| {
                    exp_decay(ln_cosh_m1(t * u) - u * u / F::of(2.0)) * m.unit_density(u)
                };
                let v = F::of(2.0) * integrate_peaked(&f, F::zero(), F::infinity(), t, self.quad_tol())?;
                Ok(v)
            }
        }
    }

    /// `log ζ(t)` for `t ≠ 0`, never overflowing.
    pub fn log_zeta(&self, t: F) -> Result<F> {
        if self.measure.hyperactive() {
            return Err(Error::Hyperactive);
        }
        let t = t.abs();
        if t == F::zero() {
            return Err(Error::BadArgument("log_zeta requires t != 0".into()));
        }
        match self.mode {
            Mode::Series => Ok(series_log_sum(self.d(), t, self.series_tolerance)),
            Mode::Quadrature => {
                if t < overflow_threshold::<F>() {
                    return Ok(self.zeta(t)?.ln());
                }
                let m = &self.measure;
                let log_f = move |u: F| {
                    let h = m.unit_density(u);
                    if h <= F::zero() {
                        return F::neg_infinity();
                    }
                    ln_cosh_m1(t * u) - u * u / F::of(2.0) + h.ln()
                };
                log_integral_peaked(&log_f, t, self.quad_tol())
            }
        }
    }

    /// `ζ^(r)(t)` for `r ∈ {1, 2, 3, 4}`. Errors with [`Error::Overflow`]
    /// beyond the direct range; use [`Self::log_zeta_deriv`] there.
    pub fn zeta_deriv(&self, t: F, r: u32) -> Result<F> {
        if self.measure.hyperactive() {
            return Err(Error::Hyperactive);
        }
        if r == 0 || r > 4 {
            return Err(Error::BadArgument(format!(
                "derivative order must lie in 1..=4, got {r}"
            )));
        }
        let sign = if t < F::zero() && r % 2 == 1 { -F::one() } else { F::one() };
        let t = t.abs();
        if t == F::zero() {
            // ζ even: odd derivatives vanish; ζ''(0) = ζ₂, ζ''''(0) = 24·a₂
            return Ok(match r {
                1 | 3 => F::zero(),
                2 => self.zeta2()?,
                _ => match self.mode {
                    Mode::Series => {
                        let d = self.d();
                        d * (F::of(2.0) - d)
                    }
                    Mode::Quadrature => {
                        let m = &self.measure;
                        let f = move |u: F| {
                            u.powi(4) * (-(u * u) / F::of(2.0)).exp() * m.unit_density(u)
                        };
                        F::of(2.0)
                            * quad::integral_positive(&f, F::zero(), F::infinity(), self.quad_tol())?
                    }
                },
            });
        }
        if t >= overflow_threshold::<F>() {
            return Err(Error::Overflow);
        }
        let v = match self.mode {
            Mode::Series => series_deriv_sum(self.d(), t, r, self.series_tolerance),
            Mode::Quadrature => {
                let m = &self.measure;
                let f = move |u: F| {
                    let ln_osc = if r % 2 == 1 { ln_sinh(t * u) } else { ln_cosh(t * u) };
                    let w = F::of(f64::from(r)) * u.ln() + ln_osc - u * u / F::of(2.0);
                    exp_decay(w) * m.unit_density(u)
                };
                F::of(2.0) * integrate_peaked(&f, F::zero(), F::infinity(), t, self.quad_tol())?
            }
        };
        Ok(sign * v)
    }

    /// `log ζ^(r)(t)` for `t ≠ 0`, `r ∈ {1, 2, 3, 4}`; derivative magnitude
    /// in the log domain (odd derivatives at negative `t` are negative).
    pub fn log_zeta_deriv(&self, t: F, r: u32) -> Result<F> {
        if self.measure.hyperactive() {
            return Err(Error::Hyperactive);
        }
        if r == 0 || r > 4 {
            return Err(Error::BadArgument(format!(
                "derivative order must lie in 1..=4, got {r}"
            )));
        }
        let t = t.abs();
        if t == F::zero() {
            return Err(Error::BadArgument("log_zeta_deriv requires t != 0".into()));
        }
        match self.mode {
            Mode::Series => Ok(series_log_deriv_sum(self.d(), t, r, self.series_tolerance)),
            Mode::Quadrature => {
                if t < overflow_threshold::<F>() {
                    return Ok(self.zeta_deriv(t, r)?.ln());
                }
                let m = &self.measure;
                let log_f = move |u: F| {
                    let h = m.unit_density(u);
                    if h <= F::zero() || u <= F::zero() {
                        return F::neg_infinity();
                    }
                    let a = t * u;
                    // ln sinh(a) resp. ln cosh(a) for large a
                    let osc = a - F::LN_2()
                        + if r % 2 == 1 {
                            (-(F::of(2.0) * a)).exp().neg().ln_1p()
                        } else {
                            (-(F::of(2.0) * a)).exp().ln_1p()
                        };
                    F::of(f64::from(r)) * u.ln() + osc - u * u / F::of(2.0) + h.ln()
                };
                log_integral_peaked(&log_f, t, self.quad_tol())
            }
        }
    }

    /// Mass of the zeta measure `(cosh(θu)−1)e^{−u²/2}H(du)` on
    /// `{a < u < b}`, doubled when `symmetric` (mass on `{a < |u| < b}`).
    pub fn zeta_measure_mass(&self, theta: F, a: F, b: F, symmetric: bool) -> Result<F> {
        if self.measure.hyperactive() {
            return Err(Error::Hyperactive);
        }
        if !(a >= F::zero()) || !(b > a) {
            return Err(Error::BadArgument(
                "interval must satisfy 0 <= a < b".into(),
            ));
        }
        let theta = theta.abs();
        if theta == F::zero() {
            return Ok(F::zero());
        }
        let m = &self.measure;
        let f = move |u: F| {
            exp_decay(ln_cosh_m1(theta * u) - u * u / F::of(2.0)) * m.unit_density(u)
        };
        let one_side = integrate_peaked(&f, a, b, theta, self.quad_tol())?;
        Ok(if symmetric { F::of(2.0) * one_side } else { one_side })
    }

    /// Hyperactive transform `∫ (cosh(tx) − 1 − t²x²/2) e^{−x²/2} H(dx)`.
    pub fn hyper_zeta(&self, t: F) -> Result<F> {
        if !self.measure.hyperactive() {
            return Err(Error::NotHyperactive);
        }
        let t = t.abs();
        if t == F::zero() {
            return Ok(F::zero());
        }
        if t >= overflow_threshold::<F>() {
            return Err(Error::Overflow);
        }
        let m = &self.measure;
        let f = move |u: F| {
            exp_decay(scalar::ln_cosh_m1_mq(t * u) - u * u / F::of(2.0)) * m.unit_density(u)
        };
        Ok(F::of(2.0) * integrate_peaked(&f, F::zero(), F::infinity(), t, self.quad_tol())?)
    }

    /// `log ζ_H(t)` for `t ≠ 0`, never overflowing.
    pub fn log_hyper_zeta(&self, t: F) -> Result<F> {
        if !self.measure.hyperactive() {
            return Err(Error::NotHyperactive);
        }
        let t = t.abs();
        if t == F::zero() {
            return Err(Error::BadArgument("log_hyper_zeta requires t != 0".into()));
        }
        if t < overflow_threshold::<F>() {
            return Ok(self.hyper_zeta(t)?.ln());
        }
        let m = &self.measure;
        let log_f = move |u: F| {
            let h = m.unit_density(u);
            if h <= F::zero() {
                return F::neg_infinity();
            }
            scalar::ln_cosh_m1_mq(t * u) - u * u / F::of(2.0) + h.ln()
        };
        log_integral_peaked(&log_f, t, self.quad_tol())
    }

    /// Derivative of the hyperactive transform,
    /// `∫ x (sinh(tx) − tx) e^{−x²/2} H(dx)`.
    pub fn hyper_zeta_deriv(&self, t: F) -> Result<F> {
        if !self.measure.hyperactive() {
            return Err(Error::NotHyperactive);
        }
        let sign = if t < F::zero() { -F::one() } else { F::one() };
        let t = t.abs();
        if t == F::zero() {
            return Ok(F::zero());
        }
        if t >= overflow_threshold::<F>() {
            return Err(Error::Overflow);
        }
        let m = &self.measure;
        let f = move |u: F| {
            exp_decay(u.ln() + ln_sinh_m_id(t * u) - u * u / F::of(2.0)) * m.unit_density(u)
        };
        Ok(sign * F::of(2.0) * integrate_peaked(&f, F::zero(), F::infinity(), t, self.quad_tol())?)
    }

    fn quad_tol(&self) -> F {
        F::of(quad::DEFAULT_REL_TOL)
    }
}


// ---------------------------------------------------------------------------
// Inverse-power series
// ---------------------------------------------------------------------------

/// Positive-term series `ζ(x) = Σ_{r≥1} b_r` with `b_1 = d x²/2` and
/// `b_{r+1}/b_r = 2(r − d/2) x² / ((2r+1)(2r+2))`; truncated when the term
/// drops below `tol × sum` past the mode at `r ≈ x²/4`.
fn series_sum<F: Real>(d: F, x: F, tol: F) -> F {
    let x2 = x * x;
    let mode = (x2 / F::of(4.0)).to_f64_lossy();
    let mut term = d * x2 / F::of(2.0);
    let mut sum = term;
    let mut r = 1u32;
    loop {
        let rf = F::of(f64::from(r));
        let ratio = F::of(2.0) * (rf - d / F::of(2.0)) * x2
            / ((F::of(2.0) * rf + F::one()) * (F::of(2.0) * rf + F::of(2.0)));
        term *= ratio;
        sum += term;
        r += 1;
        if f64::from(r) > mode && term < tol * sum {
            return sum;
        }
        if r > 100_000 {
            return sum;
        }
    }
}

/// `log ζ(x)` via the same recurrence in the log domain with a running
/// log-sum-exp accumulator.
fn series_log_sum<F: Real>(d: F, x: F, tol: F) -> F {
    let x2 = x * x;
    let ln_x2 = F::of(2.0) * x.ln();
    let mode = (x2 / F::of(4.0)).to_f64_lossy();
    let mut ln_term = (d / F::of(2.0)).ln() + ln_x2;
    let mut ln_sum = ln_term;
    let mut r = 1u32;
    loop {
        let rf = F::of(f64::from(r));
        let ln_ratio = (F::of(2.0) * (rf - d / F::of(2.0))).ln() + ln_x2
            - ((F::of(2.0) * rf + F::one()) * (F::of(2.0) * rf + F::of(2.0))).ln();
        ln_term += ln_ratio;
        ln_sum = log_add_exp(ln_sum, ln_term);
        r += 1;
        if f64::from(r) > mode && ln_term - ln_sum < tol.ln() {
            return ln_sum;
        }
        if r > 1_000_000 {
            return ln_sum;
        }
    }
}

/// Term-wise differentiated series: the `k`-th derivative term is
/// `b_r · (2r)(2r−1)···(2r−k+1) / x^k`, still positive.
fn series_deriv_sum<F: Real>(d: F, x: F, k: u32, tol: F) -> F {
    let x2 = x * x;
    let xk = x.powi(k as i32);
    let mode = (x2 / F::of(4.0)).to_f64_lossy();
    let mut term = d * x2 / F::of(2.0);
    let mut sum = falling::<F>(2, k) * term / xk;
    let mut r = 1u32;
    loop {
        let rf = F::of(f64::from(r));
        let ratio = F::of(2.0) * (rf - d / F::of(2.0)) * x2
            / ((F::of(2.0) * rf + F::one()) * (F::of(2.0) * rf + F::of(2.0)));
        term *= ratio;
        r += 1;
        let dterm = falling::<F>(2 * r, k) * term / xk;
        sum += dterm;
        if f64::from(r) > mode && dterm < tol * sum {
            return sum;
        }
        if r > 100_000 {
            return sum;
        }
    }
}

fn series_log_deriv_sum<F: Real>(d: F, x: F, k: u32, tol: F) -> F {
    let x2 = x * x;
    let ln_x2 = F::of(2.0) * x.ln();
    let ln_xk = F::of(f64::from(k)) * x.ln();
    let mode = (x2 / F::of(4.0)).to_f64_lossy();
    let mut ln_term = (d / F::of(2.0)).ln() + ln_x2;
    let mut ln_sum = falling::<F>(2, k).ln() + ln_term - ln_xk;
    let mut r = 1u32;
    loop {
        let rf = F::of(f64::from(r));
        let ln_ratio = (F::of(2.0) * (rf - d / F::of(2.0))).ln() + ln_x2
            - ((F::of(2.0) * rf + F::one()) * (F::of(2.0) * rf + F::of(2.0))).ln();
        ln_term += ln_ratio;
        r += 1;
        let ln_dterm = falling::<F>(2 * r, k).ln() + ln_term - ln_xk;
        ln_sum = log_add_exp(ln_sum, ln_dterm);
        if f64::from(r) > mode && ln_dterm - ln_sum < tol.ln() {
            return ln_sum;
        }
        if r > 1_000_000 {
            return ln_sum;
        }
    }
}

/// Falling factorial `n (n−1) ··· (n−k+1)` (zero when `k > n`).
fn falling<F: Real>(n: u32, k: u32) -> F {
    let mut p = F::one();
    for i in 0..k {
        if i >= n {
            return F::zero();
        }
        p *= F::of(f64::from(n - i));
    }
    p
}

// ---------------------------------------------------------------------------
// Peak-aware quadrature
// ---------------------------------------------------------------------------

/// `∫_a^b f(u) du` for an integrand whose mass concentrates near `u ≈ t`
/// when `t` is large; explicit panels around the peak keep the global
/// refinement from missing it.
fn integrate_peaked<F: Real>(f: &impl Fn(F) -> F, a: F, b: F, t: F, rel_tol: F) -> Result<F> {
    if t <= F::of(4.0) {
        return quad::integral_positive(f, a, b, rel_tol);
    }
    let mut cuts = vec![a];
    for c in [t - F::of(10.0), t - F::of(3.0), t + F::of(3.0), t + F::of(10.0), t + F::of(30.0)] {
        if c > a && c < b {
            cuts.push(c);
        }
    }
    cuts.push(b);
    let mut total = F::zero();
    for w in cuts.windows(2) {
        total += quad::integral_positive(f, w[0], w[1], rel_tol)?;
    }
    Ok(total)
}

/// `log ∫_0^∞ e^{L(u)} du` (doubled for the symmetric measure) for a
/// log-integrand peaking near `u ≈ t`, by factoring out the scanned maximum.
fn log_integral_peaked<F: Real>(log_f: &impl Fn(F) -> F, t: F, rel_tol: F) -> Result<F> {
    // scan for the maximum around the analytic peak location u ≈ t
    let mut m = F::neg_infinity();
    let lo = (t - F::of(8.0)).max(F::of(1e-3));
    let steps = 500;
    for i in 0..=steps {
        let u = lo + (t + F::of(2.0) - lo) * F::of(f64::from(i) / f64::from(steps));
        m = m.max(log_f(u));
    }
    if !m.is_finite() {
        return Err(Error::QuadratureNoConvergence(
            "log-integrand maximum is not finite".into(),
        ));
    }
    let g = move |u: F| (log_f(u) - m).exp();
    let total = integrate_peaked(&g, F::zero(), F::infinity(), t, rel_tol)?;
    if !(total > F::zero()) {
        return Err(Error::QuadratureNoConvergence(
            "scaled peak integral vanished".into(),
        ));
    }
    Ok(m + F::of(2.0).ln() + total.ln())
}
