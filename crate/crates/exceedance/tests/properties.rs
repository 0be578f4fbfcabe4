//! Property-based invariants over randomized parameters, plus an f32 smoke
//! check of the generic numeric core.

use exceedance::conditional::activity_prob;
use exceedance::densities::quantile_from_cdf;
use exceedance::fit::loglik_rho_d;
use exceedance::measures::ExceedanceMeasure;
use exceedance::simulate::efron_signals;
use exceedance::zeta::ZetaEvaluator;
use exceedance::{Measure32, Zeta32};
use proptest::prelude::*;

fn zeta(d: f64) -> ZetaEvaluator<f64> {
    ZetaEvaluator::new(ExceedanceMeasure::inverse_power(d).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeta_is_even_positive_and_log_consistent(
        d in 0.1f64..1.9,
        t in 0.01f64..10.0,
    ) {
        let z = zeta(d);
        let v = z.zeta(t).unwrap();
        prop_assert!(v > 0.0);
        prop_assert!((z.zeta(-t).unwrap() - v).abs() <= 1e-12 * v);
        let lv = z.log_zeta(t).unwrap();
        prop_assert!((lv - v.ln()).abs() < 1e-9);
    }

    #[test]
    fn zeta_dominates_its_quadratic_part(
        d in 0.1f64..1.9,
        t in 0.05f64..8.0,
    ) {
        // every series term is positive, so the quadratic part is a strict
        // lower bound away from the origin
        let z = zeta(d);
        let lower = z.zeta2().unwrap() * t * t / 2.0;
        prop_assert!(z.zeta(t).unwrap() > lower);
    }

    #[test]
    fn activity_probability_is_a_probability_monotone_in_rho(
        y in 0.0f64..8.0,
        rho in 1e-4f64..0.4,
    ) {
        let z = zeta(1.0);
        let p = activity_prob(rho, &z, y).unwrap();
        prop_assert!((0.0..1.0).contains(&p));
        let p_larger = activity_prob((rho * 1.5).min(0.45), &z, y).unwrap();
        prop_assert!(p_larger >= p);
    }

    #[test]
    fn loglik_is_permutation_invariant_bitwise(
        mut y in proptest::collection::vec(-6.0f64..6.0, 5..40),
        rho in 0.01f64..0.4,
        d in 0.2f64..1.8,
    ) {
        let base = loglik_rho_d(&y, rho, d).unwrap();
        y.reverse();
        prop_assert_eq!(loglik_rho_d(&y, rho, d).unwrap().to_bits(), base.to_bits());
    }

    #[test]
    fn signal_sequence_shape(n in 1usize..400, extra in 0usize..100) {
        let total = n + extra;
        let mu = efron_signals(total, n).unwrap();
        prop_assert_eq!(mu.len(), total);
        // magnitudes strictly decreasing on the signal block, zeros after
        prop_assert!(mu[..n].windows(2).all(|w| w[0].abs() > w[1].abs()));
        prop_assert!(mu[n..].iter().all(|&m| m == 0.0));
    }

    #[test]
    fn quantile_inverts_cdf(p in 0.05f64..0.95) {
        // standard normal through the generic quantile bracketing
        let cdf = |x: f64| Ok(exceedance::scalar::std_normal_cdf(x));
        let q = quantile_from_cdf(&cdf, p, false).unwrap();
        prop_assert!((exceedance::scalar::std_normal_cdf(q) - p).abs() < 1e-9);
    }
}

#[test]
fn f32_core_smoke() {
    let m32 = Measure32::inverse_power(1.0f32).unwrap();
    let z32 = Zeta32::new(m32).unwrap();
    let z64 = zeta(1.0);
    for t in [0.5f32, 2.0, 3.0] {
        let v32 = z32.zeta(t).unwrap();
        let v64 = z64.zeta(f64::from(t)).unwrap();
        let rel = (f64::from(v32) - v64).abs() / v64;
        assert!(rel < 1e-4, "t {t}: f32 {v32} vs f64 {v64}");
    }
}
