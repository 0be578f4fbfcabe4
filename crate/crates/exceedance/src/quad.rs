//! Adaptive quadrature in log coordinates.
//!
//! All measure integrals in this crate run over `R \ {0}` with integrable
//! singularities at the origin and slowly decaying tails. The scheme splits
//! at `|x| = 1`, substitutes `x = e^{-s}` on `(0, 1]` and `x = e^{s}` on
//! `[1, inf)`, and applies globally adaptive Gauss-Kronrod 15(7) refinement;
//! the integrands are smooth in log coordinates for every family in scope.

use crate::scalar::Real;
use crate::{Error, Result};

/// Default relative tolerance for measure integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

// Gauss-Kronrod 15-point nodes and weights on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod 15(7) panel; returns (integral, error estimate).
fn gk15<F: Real>(f: &impl Fn(F) -> F, a: F, b: F) -> (F, F) {
    let half = (b - a) / F::of(2.0);
    let center = (a + b) / F::of(2.0);
    let fc = f(center);
    let mut kronrod = fc * F::of(WGK[7]);
    let mut gauss = fc * F::of(WG[3]);
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate().take(7) {
        let dx = half * F::of(x);
        let fsum = f(center - dx) + f(center + dx);
        kronrod += fsum * F::of(w);
        if i % 2 == 1 {
            gauss += fsum * F::of(WG[i / 2]);
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (integral, err)
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn adaptive<F: Real>(f: &impl Fn(F) -> F, a: F, b: F, rel_tol: F) -> Result<F> {
    if a == b {
        return Ok(F::zero());
    }
    let mut segs: Vec<(F, F, F, F)> = Vec::with_capacity(64); // (a, b, val, err)
    let (v, e) = gk15(f, a, b);
    segs.push((a, b, v, e));
    for _ in 0..4000 {
        let total: F = segs.iter().map(|s| s.2).sum();
        let err: F = segs.iter().map(|s| s.3).sum();
        let floor = F::of(1e-300);
        if err <= rel_tol * total.abs().max(floor) {
            return Ok(total);
        }
        // refine the worst panel
        let (mut worst, mut wi) = (F::neg_infinity(), 0usize);
        for (i, s) in segs.iter().enumerate() {
            if s.3 > worst {
                worst = s.3;
                wi = i;
            }
        }
        let seg = segs.swap_remove(wi);
        let (sa, sb) = (seg.0, seg.1);
        let mid = (sa + sb) / F::of(2.0);
        if mid <= sa || mid >= sb {
            // interval exhausted at machine precision; accept current estimate
            let total: F = segs.iter().map(|s| s.2).sum();
            return Ok(total + seg.2);
        }
        let (v1, e1) = gk15(f, sa, mid);
        let (v2, e2) = gk15(f, mid, sb);
        segs.push((sa, mid, v1, e1));
        segs.push((mid, sb, v2, e2));
    }
    Err(Error::QuadratureNoConvergence(format!(
        "adaptive refinement exhausted on [{}, {}]",
        a.to_f64_lossy(),
        b.to_f64_lossy()
    )))
}

/// `∫_lo^∞ g(s) ds` for a decaying integrand, by adaptive blocks of width 10.
fn half_line_in_s<F: Real>(g: &impl Fn(F) -> F, lo: F, rel_tol: F) -> Result<F> {
    let block = F::of(10.0);
    let mut acc = F::zero();
    let mut s = lo;
    let mut scale = F::zero();
    for _ in 0..60 {
        let v = adaptive(g, s, s + block, rel_tol)?;
        acc += v;
        scale = scale.max(acc.abs());
        s += block;
        if v.abs() <= rel_tol * scale.max(F::of(1e-300)) {
            return Ok(acc);
        }
    }
    Err(Error::QuadratureNoConvergence(
        "tail blocks did not decay".into(),
    ))
}

/// `∫_a^b f(x) dx` for `0 <= a < b <= 1`, via `x = e^{-s}`.
pub fn integral_below_one<F: Real>(f: &impl Fn(F) -> F, a: F, b: F, rel_tol: F) -> Result<F> {
    debug_assert!(a >= F::zero() && b <= F::one() && a < b);
    let g = move |s: F| {
        let x = (-s).exp();
        f(x) * x
    };
    let s_lo = -b.ln();
    if a == F::zero() {
        half_line_in_s(&g, s_lo, rel_tol)
    } else {
        adaptive(&g, s_lo, -a.ln(), rel_tol)
    }
}

/// `∫_a^b f(x) dx` for `1 <= a < b <= ∞`, via `x = e^{s}`.
pub fn integral_above_one<F: Real>(f: &impl Fn(F) -> F, a: F, b: F, rel_tol: F) -> Result<F> {
    debug_assert!(a >= F::one() && a < b);
    let g = move |s: F| {
        let x = s.exp();
        f(x) * x
    };
    let s_lo = a.ln();
    if b == F::infinity() {
        half_line_in_s(&g, s_lo, rel_tol)
    } else {
        adaptive(&g, s_lo, b.ln(), rel_tol)
    }
}

/// `∫_a^b f(x) dx` over `0 <= a < b <= ∞`, splitting at 1.
pub fn integral_positive<F: Real>(f: &impl Fn(F) -> F, a: F, b: F, rel_tol: F) -> Result<F> {
    if a >= b {
        return Ok(F::zero());
    }
    if b <= F::one() {
        integral_below_one(f, a, b, rel_tol)
    } else if a >= F::one() {
        integral_above_one(f, a, b, rel_tol)
    } else {
        Ok(integral_below_one(f, a, F::one(), rel_tol)? + integral_above_one(f, F::one(), b, rel_tol)?)
    }
}

/// `2 ∫_0^∞ f(x) dx`: the symmetric-measure integral for an even integrand.
pub fn symmetric_integral<F: Real>(f: &impl Fn(F) -> F, rel_tol: F) -> Result<F> {
    Ok(F::of(2.0) * integral_positive(f, F::zero(), F::infinity(), rel_tol)?)
}

/// Cosine transform `2 ∫_0^∞ cos(t x) f(x) dx` of an even, eventually
/// monotone density with a possibly heavy (inverse-power) tail.
///
/// The head `[0, a0]` is integrated adaptively; past `a0` the integral is a
/// series of alternating half-period contributions, which is summed with
/// repeated averaging (Euler transformation). `a0` is aligned with a zero of
/// `cos(t x)` at or beyond `head_len`.
pub fn cosine_transform<F: Real>(
    f: &impl Fn(F) -> F,
    t: F,
    head_len: F,
    rel_tol: F,
) -> Result<F> {
    let t = t.abs();
    if t == F::zero() {
        return symmetric_integral(f, rel_tol);
    }
    let h = F::PI() / t;
    let mut a0 = (F::PI() / F::of(2.0)) / t;
    while a0 < head_len {
        a0 += h;
    }
    let g = move |x: F| (t * x).cos() * f(x);
    let head = if a0 <= F::one() {
        adaptive(&g, F::zero(), a0, rel_tol)?
    } else {
        integral_below_one(&g, F::zero(), F::one(), rel_tol)? + adaptive(&g, F::one(), a0, rel_tol)?
    };
    // alternating half-period segments
    const NSEG: usize = 48;
    let mut partial = Vec::with_capacity(NSEG);
    let mut acc = F::zero();
    let mut a = a0;
    for _ in 0..NSEG {
        let (v, _) = gk15(&g, a, a + h);
        acc += v;
        partial.push(acc);
        a += h;
    }
    // Euler transformation: repeated averaging of partial sums
    let mut row = partial;
    while row.len() > 2 {
        for i in 0..row.len() - 1 {
            row[i] = (row[i] + row[i + 1]) / F::of(2.0);
        }
        row.pop();
    }
    let tail = *row.last().expect("nonempty");
    Ok(F::of(2.0) * (head + tail))
}

/// Bisection root find for a continuous scalar function with a sign change
/// on `[lo, hi]`.
pub fn bisect<F: Real>(f: &impl Fn(F) -> F, mut lo: F, mut hi: F, x_tol: F, max_iter: u32) -> Result<F> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == F::zero() {
        return Ok(lo);
    }
    if fhi == F::zero() {
        return Ok(hi);
    }
    if (flo > F::zero()) == (fhi > F::zero()) {
        return Err(Error::RootBracketFailure(format!(
            "no sign change on [{}, {}]",
            lo.to_f64_lossy(),
            hi.to_f64_lossy()
        )));
    }
    for _ in 0..max_iter {
        let mid = (lo + hi) / F::of(2.0);
        if (hi - lo).abs() <= x_tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == F::zero() {
            return Ok(mid);
        }
        if (fm > F::zero()) == (flo > F::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / F::of(2.0))
}
