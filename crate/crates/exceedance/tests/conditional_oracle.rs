//! Validates the first-order conditional (Tweedie-style) moments against a
//! brute-force numeric posterior computed directly from a sparse
//! scale-family prior, with no asymptotic shortcuts.

mod common;

use common::posterior_mean_oracle;
use exceedance::conditional::{activity_prob, tweedie_moment};
use exceedance::measures::ExceedanceMeasure;
use exceedance::zeta::ZetaEvaluator;

fn zeta_d1() -> ZetaEvaluator<f64> {
    ZetaEvaluator::new(ExceedanceMeasure::inverse_power(1.0).unwrap()).unwrap()
}

#[test]
fn tweedie_mean_tracks_exact_posterior() {
    let z = zeta_d1();
    // the prior's sparsity rate equals its scale parameter
    for rho in [0.1, 0.05] {
        for y in [1.0, 2.0, 3.0] {
            let exact = posterior_mean_oracle(rho, y).unwrap();
            let approx = tweedie_moment(rho, &z, y, 1).unwrap();
            // first-order accuracy: error well below the value itself
            // and shrinking with rho (checked as a trend below)
            assert!(
                (exact - approx).abs() < 0.15 + rho,
                "rho {rho} y {y}: exact {exact} approx {approx}"
            );
        }
    }
}

#[test]
fn tweedie_error_shrinks_with_sparsity() {
    let z = zeta_d1();
    for y in [1.0, 2.0, 3.0] {
        let mut previous = f64::INFINITY;
        for rho in [0.1, 0.05, 0.025] {
            let exact = posterior_mean_oracle(rho, y).unwrap();
            let approx = tweedie_moment(rho, &z, y, 1).unwrap();
            let err = (exact - approx).abs();
            assert!(
                err < previous,
                "y {y}: error {err} did not shrink (previous {previous}) at rho {rho}"
            );
            previous = err;
        }
    }
}

#[test]
fn activity_probability_tracks_exact_posterior() {
    let z = zeta_d1();
    // P(|mu| > delta | Y = y) from the exact posterior; the threshold must
    // sit well between the prior's core scale (= rho) and the noise scale
    let delta = 0.5;
    let rho = 0.05;
    for y in [2.0, 3.0] {
        let phi = |t: f64| (-(t * t) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let f_all = |x: f64| phi(y - x) * common::inverse_square_prior(rho, x);
        let den: f64 = [-30.0, -1.0, 0.0, 1.0, y - 1.0, y + 1.0, 30.0]
            .windows(2)
            .map(|w| exceedance::quad::adaptive(&f_all, w[0], w[1], 1e-11).unwrap())
            .sum();
        let inner = exceedance::quad::adaptive(&f_all, -delta, delta, 1e-11).unwrap();
        let exact = 1.0 - inner / den;
        let approx = activity_prob(rho, &z, y).unwrap();
        assert!(
            (exact - approx).abs() < 0.06,
            "y {y}: exact {exact} approx {approx}"
        );
    }
}

#[test]
fn second_moment_consistency() {
    // E[mu^2|y] >= (E[mu|y])^2 and both finite on a grid
    let z = zeta_d1();
    for y in [0.5, 1.5, 3.0, 5.0] {
        let m1 = tweedie_moment(0.05, &z, y, 1).unwrap();
        let m2 = tweedie_moment(0.05, &z, y, 2).unwrap();
        assert!(m2 >= m1 * m1 - 1e-9, "y {y}: m1 {m1} m2 {m2}");
    }
}
