//! Generic scalar abstraction for the numeric core.
//!
//! Everything in [`crate::measures`], [`crate::zeta`], [`crate::densities`]
//! and [`crate::conditional`] is written against [`Real`], so the transform
//! layer runs in `f32` or `f64`. Samplers and fitting are `f64`-only.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar with the special functions the crate needs.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for lossy conversion from an `f64` literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal converts to scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    fn ln_gamma(self) -> Self;
    fn erf(self) -> Self;
    fn erfc(self) -> Self;
}

impl Real for f64 {
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self)
    }
    fn erf(self) -> Self {
        statrs::function::erf::erf(self)
    }
    fn erfc(self) -> Self {
        statrs::function::erf::erfc(self)
    }
}

impl Real for f32 {
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self as f64) as f32
    }
    fn erf(self) -> Self {
        statrs::function::erf::erf(self as f64) as f32
    }
    fn erfc(self) -> Self {
        statrs::function::erf::erfc(self as f64) as f32
    }
}

/// Gamma function through `exp(ln_gamma)`; arguments here are always positive.
pub fn gamma<F: Real>(x: F) -> F {
    x.ln_gamma().exp()
}

/// Standard normal density.
pub fn phi<F: Real>(x: F) -> F {
    (-(x * x) / F::of(2.0)).exp() / (F::of(2.0) * F::PI()).sqrt()
}

/// Log of the standard normal density.
pub fn ln_phi<F: Real>(x: F) -> F {
    -(x * x) / F::of(2.0) - (F::of(2.0) * F::PI()).sqrt().ln()
}

/// Standard normal CDF via the complementary error function.
pub fn std_normal_cdf<F: Real>(x: F) -> F {
    F::of(0.5) * (-x / F::SQRT_2()).erfc()
}

/// `1 - exp(-x^2/2)`, the unit-normalization weight, without cancellation.
pub fn weight_std<F: Real>(x: F) -> F {
    -(-(x * x) / F::of(2.0)).exp_m1()
}

/// `1 - exp(-x^2/2) (1 + x^2/2)`, the hyperactive standardization weight.
///
/// Direct evaluation loses all precision for small `x` (the value is
/// `x^4/8 + O(x^6)` while both terms are near 1), so a series in
/// `y = x^2/2` is used below the switch point.
pub fn weight_hyper<F: Real>(x: F) -> F {
    let y = x * x / F::of(2.0);
    if y < F::of(0.35) {
        // 1 - e^{-y}(1+y) = sum_{k>=2} (-1)^k y^k (k-1)/k!
        let mut sum = F::zero();
        let mut pow = y * y; // y^k starting at k=2
        let mut fact = F::of(2.0); // k!
        let mut k = 2u32;
        loop {
            let sign = if k % 2 == 0 { F::one() } else { -F::one() };
            let term = sign * pow * F::of(f64::from(k - 1)) / fact;
            sum += term;
            k += 1;
            pow *= y;
            fact *= F::of(f64::from(k));
            if term.abs() < F::of(1e-20) * sum.abs() || k > 30 {
                return sum;
            }
        }
    } else {
        F::one() - (-y).exp() * (F::one() + y)
    }
}

/// `cosh(a) - 1` as `2 sinh^2(a/2)`, stable near zero.
pub fn cosh_m1<F: Real>(a: F) -> F {
    let s = (a / F::of(2.0)).sinh();
    F::of(2.0) * s * s
}

/// `ln(cosh(a) - 1)`, stable for large `|a|`.
pub fn ln_cosh_m1<F: Real>(a: F) -> F {
    let h = a.abs() / F::of(2.0);
    // ln(2 sinh^2 h) = ln 2 + 2 ln sinh h; ln sinh h = h + ln(1 - e^{-2h}) - ln 2
    if h > F::of(0.5) {
        F::LN_2() + F::of(2.0) * (h + (-(F::of(2.0) * h)).exp().neg().ln_1p() - F::LN_2())
    } else {
        cosh_m1(a).ln()
    }
}

/// `cosh(a) - 1 - a^2/2`, the hyperactive zeta integrand kernel, stable near zero.
pub fn cosh_m1_mq<F: Real>(a: F) -> F {
    let a = a.abs();
    if a < F::one() {
        // sum_{k>=2} a^{2k} / (2k)!
        let a2 = a * a;
        let mut term = a2 * a2 / F::of(24.0);
        let mut sum = term;
        let mut k = 2u32;
        loop {
            k += 1;
            term *= a2 / F::of(f64::from((2 * k - 1) * 2 * k));
            sum += term;
            if term < F::of(1e-20) * sum || k > 40 {
                return sum;
            }
        }
    } else {
        a.cosh() - F::one() - a * a / F::of(2.0)
    }
}

/// `ln cosh(a)`, stable for all `a`.
pub fn ln_cosh<F: Real>(a: F) -> F {
    let a = a.abs();
    a - F::LN_2() + (-(F::of(2.0) * a)).exp().ln_1p()
}

/// `ln sinh(a)` for `a >= 0` (`-inf` at zero), stable for large `a`.
pub fn ln_sinh<F: Real>(a: F) -> F {
    if a <= F::of(0.5) {
        a.sinh().ln()
    } else {
        a - F::LN_2() + (-(F::of(2.0) * a)).exp().neg().ln_1p()
    }
}

/// `ln(sinh(a) - a)` for `a >= 0`, stable for large `a`.
pub fn ln_sinh_m_id<F: Real>(a: F) -> F {
    if a < F::of(30.0) {
        sinh_m_id(a).ln()
    } else {
        a - F::LN_2()
    }
}

/// `sinh(a) - a`, positive and stable near zero.
pub fn sinh_m_id<F: Real>(a: F) -> F {
    if a.abs() < F::one() {
        // sum_{k>=1} a^{2k+1} / (2k+1)!
        let a2 = a * a;
        let mut term = a * a2 / F::of(6.0);
        let mut sum = term;
        let mut k = 1u32;
        loop {
            k += 1;
            term *= a2 / F::of(f64::from((2 * k) * (2 * k + 1)));
            sum += term;
            if term.abs() < F::of(1e-20) * sum.abs() || k > 40 {
                return sum;
            }
        }
    } else {
        a.sinh() - a
    }
}

/// `ln(cosh(a) - 1 - a^2/2)`, stable for large `|a|`.
pub fn ln_cosh_m1_mq<F: Real>(a: F) -> F {
    let a = a.abs();
    if a > F::of(30.0) {
        // relative error of dropping (1 + a^2/2)/cosh(a) is < 1e-9 here
        a - F::LN_2()
    } else {
        cosh_m1_mq(a).ln()
    }
}

/// `e^{w}` for a kernel exponent; maps the `−∞` and NaN that extreme
/// interval endpoints produce (`∞ − ∞` far in the tail) to zero, where the
/// true kernel value underflows anyway.
pub fn exp_decay<F: Real>(w: F) -> F {
    if w > F::of(-745.0) {
        w.exp()
    } else {
        F::zero()
    }
}

/// Numerically stable `ln(exp(a) + exp(b))`.
pub fn log_add_exp<F: Real>(a: F, b: F) -> F {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == F::neg_infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
