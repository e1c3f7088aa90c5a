use std::f64::consts::PI;

use annulus_gas::quadrature::gauss_legendre;
use annulus_gas::sampler::{mcmc_configurations, radial_moduli_sample, RadialSampler};
use annulus_gas::{
    AnnulusGeometry, ChargeConfiguration, Complex64, EnsembleSpec, FamilySelector,
    KernelEvaluator, RadialProfile,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// 0.99 quantile of the chi-square law with 9 degrees of freedom.
const CHI2_9_Q99: f64 = 21.666;

fn spec(n: usize, r_in: f64, r_out: f64, gamma: f64, m: u32, profile: RadialProfile, family: FamilySelector) -> EnsembleSpec {
    EnsembleSpec::build(
        n,
        2.0,
        AnnulusGeometry::new(r_in, r_out).unwrap(),
        profile,
        ChargeConfiguration::new(gamma, m),
        family,
    )
    .unwrap()
}

/// Expected particle count per bin from a density `rho(z)` over the polar
/// cell `[r_lo, r_hi] × [θ_lo, θ_hi]` (Gauss–Legendre product rule).
fn cell_mass(rho: &dyn Fn(Complex64) -> f64, r: (f64, f64), th: (f64, f64)) -> f64 {
    let (x, w) = gauss_legendre(32);
    let (hr, ht) = (0.5 * (r.1 - r.0), 0.5 * (th.1 - th.0));
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let rr = r.0 + hr * (xi + 1.0);
        for (xj, wj) in x.iter().zip(&w) {
            let t = th.0 + ht * (xj + 1.0);
            acc += wi * wj * rr * rho(Complex64::from_polar(rr, t));
        }
    }
    acc * hr * ht
}

/// Largest |mean − expected| / batch-means standard error over bins.
fn worst_z(expected: &[f64], per_config: &[Vec<f64>], batches: usize) -> f64 {
    let per = per_config.len() / batches;
    expected
        .iter()
        .enumerate()
        .map(|(b, &e)| {
            let means: Vec<f64> = (0..batches)
                .map(|k| per_config[k * per..(k + 1) * per].iter().map(|h| h[b]).sum::<f64>() / per as f64)
                .collect();
            let mean = means.iter().sum::<f64>() / batches as f64;
            let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
            (mean - e).abs() / (var / batches as f64).sqrt()
        })
        .fold(0.0, f64::max)
}

fn radial_counts(radii: impl Iterator<Item = f64>, a: f64, b: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    for r in radii {
        h[(((r - a) / (b - a) * bins as f64) as usize).min(bins - 1)] += 1.0;
    }
    h
}

#[test]
fn single_particle_chain_matches_weight() {
    let s = spec(1, 1.0, 2.0, 0.5, 0, RadialProfile::Power { alpha: 1.0 }, FamilySelector::ClassI);
    let total = cell_mass(&|z| s.weight(z), (1.0, 2.0), (0.0, 2.0 * PI));
    let bins = 8;
    let expected: Vec<f64> = (0..bins)
        .map(|i| {
            let lo = 1.0 + i as f64 / bins as f64;
            cell_mass(&|z| s.weight(z) / total, (lo, lo + 1.0 / bins as f64), (0.0, 2.0 * PI))
        })
        .collect();
    let chain: Vec<Vec<f64>> = mcmc_configurations(&s, 40_000, Some(2), 3)
        .unwrap()
        .iter()
        .map(|c| radial_counts(c.points().iter().map(|z| z.norm()), 1.0, 2.0, bins))
        .collect();
    let z = worst_z(&expected, &chain, 40);
    assert!(z < 3.0, "worst z {z}");
}

#[test]
fn class_ii_angular_histogram_matches_density() {
    let s = spec(5, 1.1, 1.6, 0.0, 3, RadialProfile::Flat, FamilySelector::ClassIIExteriorTypeA);
    let k = KernelEvaluator::build(&s).unwrap();
    let rho = |z: Complex64| k.density(z).unwrap();
    let bins = 12;
    let width = 2.0 * PI / bins as f64;
    let expected: Vec<f64> = (0..bins)
        .map(|i| cell_mass(&rho, (1.1, 1.6), (i as f64 * width, (i + 1) as f64 * width)))
        .collect();
    // Three-fold symmetry; the charges at the cube roots of unity pull the
    // density toward the directions 2πj/3.
    assert!((expected[0] - expected[4]).abs() < 1e-8 * expected[0]);
    assert!(expected[0] > 2.0 * expected[1]);
    let chain: Vec<Vec<f64>> = mcmc_configurations(&s, 20_000, None, 9)
        .unwrap()
        .iter()
        .map(|c| {
            let mut h = vec![0.0; bins];
            for z in c.points() {
                let th = z.im.atan2(z.re).rem_euclid(2.0 * PI);
                h[((th / width) as usize).min(bins - 1)] += 1.0;
            }
            h
        })
        .collect();
    let z = worst_z(&expected, &chain, 40);
    assert!(z < 3.0, "worst z {z}");
}

#[test]
fn independent_and_chain_histograms_agree() {
    let s = spec(6, 0.5, 1.5, 0.5, 0, RadialProfile::Flat, FamilySelector::ClassI);
    let bins = 10;
    let sampler = RadialSampler::build(&s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ind: Vec<Vec<f64>> = (0..40_000)
        .map(|_| radial_counts(sampler.sample(&mut rng).into_iter(), 0.5, 1.5, bins))
        .collect();
    let chain: Vec<Vec<f64>> = mcmc_configurations(&s, 20_000, None, 6)
        .unwrap()
        .iter()
        .map(|c| radial_counts(c.points().iter().map(|z| z.norm()), 0.5, 1.5, bins))
        .collect();
    let mean = |h: &[Vec<f64>], b: usize| h.iter().map(|x| x[b]).sum::<f64>() / h.len() as f64;
    let stderr = |h: &[Vec<f64>], b: usize, batches: usize| {
        let per = h.len() / batches;
        let ms: Vec<f64> = (0..batches).map(|k| mean(&h[k * per..(k + 1) * per], b)).collect();
        let m = ms.iter().sum::<f64>() / batches as f64;
        (ms.iter().map(|x| (x - m).powi(2)).sum::<f64>() / ((batches - 1) * batches) as f64).sqrt()
    };
    for b in 0..bins {
        let d = (mean(&ind, b) - mean(&chain, b)).abs();
        let sigma = (stderr(&ind, b, 40).powi(2) + stderr(&chain, b, 40).powi(2)).sqrt();
        assert!(d < 3.0 * sigma, "bin {b}: {d} vs {sigma}");
    }
}

#[test]
fn two_seeds_are_statistically_compatible() {
    let s = spec(4, 0.5, 1.0, 0.0, 0, RadialProfile::Flat, FamilySelector::ClassI);
    let bins = 10;
    let hist = |seed: u64| {
        let mut total = vec![0.0; bins];
        // Thinning of 4N sweeps keeps successive states nearly independent.
        for c in mcmc_configurations(&s, 20_000, Some(16), seed).unwrap() {
            for (t, h) in total.iter_mut().zip(radial_counts(c.points().iter().map(|z| z.norm()), 0.5, 1.0, bins)) {
                *t += h;
            }
        }
        total
    };
    let (a, b) = (hist(100), hist(200));
    let chi2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2) / (x + y)).sum();
    assert!(chi2 < CHI2_9_Q99, "chi-square {chi2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn samples_stay_in_the_annulus(seed in 0u64..10_000, gamma in 0.0f64..2.0) {
        let s = spec(4, 0.7, 1.3, gamma, 0, RadialProfile::Flat, FamilySelector::ClassI);
        let radii = radial_moduli_sample(&s, seed).unwrap();
        prop_assert_eq!(radii.len(), 4);
        prop_assert!(radii.iter().all(|r| (0.7..=1.3).contains(r)));
        let cfgs = mcmc_configurations(&s, 5, Some(3), seed).unwrap();
        prop_assert!(cfgs.iter().flat_map(|c| c.points()).all(|z| s.contains(*z)));
    }
}
