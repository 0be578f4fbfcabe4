//! Distributional checks of the samplers, centered on the closure property:
//! a Gaussian convolved with an independent scaled tail-inflation draw is
//! again a two-component Gaussian/tail-inflation mixture at a larger scale.

use exceedance::densities::{
    convolution_mixture_params, psi_cf, sample_cm, sample_psi, CmModel,
};
use exceedance::ks::{ks_critical_two, ks_two_sample};
use exceedance::measures::ExceedanceMeasure;
use exceedance::zeta::ZetaEvaluator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const N: usize = 100_000;

fn convolution_draws(seed: u64, a: f64, b: f64, d: f64, n: usize) -> Vec<f64> {
    let (psi, _) = sample_psi(seed, d, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    psi.iter()
        .map(|&p| {
            let e: f64 = StandardNormal.sample(&mut rng);
            a * e + b * p
        })
        .collect()
}

#[test]
fn convolution_equals_mixture_in_distribution() {
    let mut seed = 1000u64;
    for (a, b) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        for d in [0.5, 1.0, 1.5] {
            seed += 1;
            let (alpha, scale2) = convolution_mixture_params(a, b, d).unwrap();
            let conv = convolution_draws(seed, a, b, d, N);
            let model = CmModel::new(alpha, d, scale2).unwrap();
            let mix = sample_cm(seed + 500, &model, N).unwrap();
            let stat = ks_two_sample(&conv, &mix).unwrap();
            let crit = ks_critical_two(0.01, N, N);
            assert!(
                stat < crit,
                "(a,b,d)=({a},{b},{d}): KS {stat} >= critical {crit}"
            );
        }
    }
}

#[test]
fn convolution_and_mixture_cfs_are_identical() {
    for (a, b) in [(1.0f64, 1.0f64), (2.0, 1.0), (1.0, 3.0)] {
        for d in [0.5, 1.0, 1.5] {
            let z = ZetaEvaluator::new(ExceedanceMeasure::inverse_power(d).unwrap()).unwrap();
            let (alpha, scale2) = convolution_mixture_params(a, b, d).unwrap();
            let s = scale2.sqrt();
            let mut t = -3.0;
            while t <= 3.0 {
                let conv = (-(a * a * t * t) / 2.0).exp() * psi_cf(&z, b * t).unwrap();
                let mix = (1.0 - alpha) * (-(scale2 * t * t) / 2.0).exp()
                    + alpha * psi_cf(&z, s * t).unwrap();
                assert!(
                    (conv - mix).abs() < 1e-12,
                    "(a,b,d,t)=({a},{b},{d},{t}): {conv} vs {mix}"
                );
                t += 0.25;
            }
        }
    }
}

#[test]
fn mixture_sampler_component_fractions() {
    // the mixture draws the tail-inflation component with probability rho
    let model = CmModel::new(0.2, 1.0, 2.0).unwrap();
    let y = sample_cm(77, &model, 200_000).unwrap();
    // beyond 6 sigma the Gaussian component is negligible, so the observed
    // tail mass reflects the psi component alone
    let s = 2.0f64.sqrt();
    let tail = y.iter().filter(|v| v.abs() > 6.0 * s).count() as f64 / 200_000.0;
    assert!(tail > 0.005 && tail < 0.05, "tail fraction {tail}");
    // symmetric
    let pos = y.iter().filter(|v| **v > 0.0).count() as f64 / 200_000.0;
    assert!((pos - 0.5).abs() < 0.01, "positive fraction {pos}");
}

#[test]
fn noise_seed_streams_are_independent_of_count() {
    // a prefix of a longer run equals the shorter run draw for draw
    let (short, _) = sample_psi(3, 0.8, 1000).unwrap();
    let (long, _) = sample_psi(3, 0.8, 2000).unwrap();
    assert!(short
        .iter()
        .zip(&long)
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}
