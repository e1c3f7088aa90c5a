//! Configuration samplers for histogram validation.
//!
//! For rotation-invariant ensembles at β = 2 the moduli `{|z_j|}` have the
//! law of `N` independent radii, the `n`-th with density proportional to
//! `g(r) r^{2n+1+2Γ}`. [`RadialSampler`] draws them by inverse CDF.
//! [`mcmc_configurations`] covers every other case with a Metropolis chain.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gas::{Configuration, EnsembleSpec, FamilySelector};
use crate::interp::MonotoneCubic;
use crate::metropolis::Chain;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

const INITIAL_CELLS: usize = 4096;
const MAX_CELLS: usize = 1 << 18;
const CDF_TOL: f64 = 1e-10;
const CELL_NODES: usize = 8;

/// Inverse-CDF tables of the independent radial laws.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    inverse: Vec<MonotoneCubic>,
}

impl RadialSampler {
    /// Build one table per level `n = 0..N`. Needs a class I ensemble at
    /// β = 2 on a bounded annulus.
    pub fn build(spec: &EnsembleSpec) -> Result<Self> {
        if spec.beta() != 2.0 {
            return Err(Error::BetaMismatch { beta: spec.beta() });
        }
        if spec.family() != FamilySelector::ClassI {
            return Err(Error::InvalidParameter(
                "independent radii exist only for rotation-invariant (class I) ensembles".into(),
            ));
        }
        let g = spec.geometry();
        if g.outer_radius().is_infinite() {
            return Err(Error::InvalidParameter(
                "radial tables need a bounded annulus".into(),
            ));
        }
        let inverse = (0..spec.n())
            .map(|n| inverse_cdf(spec, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(RadialSampler { inverse })
    }

    pub fn n(&self) -> usize {
        self.inverse.len()
    }

    /// One draw of the `N` radii (level order, not sorted).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.inverse
            .iter()
            .map(|t| {
                let (lo, hi) = t.domain();
                let u: f64 = rng.random();
                t.eval(lo + (hi - lo) * u).expect("u maps into the table domain")
            })
            .collect()
    }
}

/// Unnormalized log density of level `n`.
fn ln_radial_density(spec: &EnsembleSpec, n: usize, r: f64) -> f64 {
    let lg = match spec.profile().ln_eval(r) {
        Ok(v) => v,
        Err(_) => return f64::NEG_INFINITY,
    };
    let ex = 2.0 * n as f64 + 1.0 + 2.0 * spec.gamma();
    if r == 0.0 {
        return if ex == 0.0 { lg } else if ex > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    lg + ex * r.ln()
}

/// Cumulative cell masses on `cells` equal cells, normalized to end at 1.
fn cdf_on_cells(spec: &EnsembleSpec, n: usize, cells: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = spec.geometry();
    let (a, b) = (g.inner_radius(), g.outer_radius());
    let (gx, gw) = gauss_legendre(CELL_NODES);
    let h = (b - a) / cells as f64;
    let mut ln_mass = Vec::with_capacity(cells);
    for c in 0..cells {
        let left = a + h * c as f64;
        let vals: Vec<f64> = gx
            .iter()
            .zip(&gw)
            .map(|(x, w)| ln_radial_density(spec, n, left + 0.5 * h * (x + 1.0)) + (0.5 * h * w).ln())
            .collect();
        ln_mass.push(crate::logspace::log_sum_exp(&vals));
    }
    let top = ln_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::CdfBuildFailure(format!(
            "radial density of level {n} is not normalizable"
        )));
    }
    let mut cdf = Vec::with_capacity(cells + 1);
    let mut radii = Vec::with_capacity(cells + 1);
    let mut acc = 0.0;
    cdf.push(0.0);
    radii.push(a);
    for (c, lm) in ln_mass.iter().enumerate() {
        acc += (lm - top).exp();
        cdf.push(acc);
        radii.push(if c + 1 == cells { b } else { a + h * (c + 1) as f64 });
    }
    for v in cdf.iter_mut() {
        *v /= acc;
    }
    Ok((radii, cdf))
}

fn inverse_cdf(spec: &EnsembleSpec, n: usize) -> Result<MonotoneCubic> {
    let mut cells = INITIAL_CELLS;
    let (_, mut cdf) = cdf_on_cells(spec, n, cells)?;
    let radii = loop {
        if cells * 2 > MAX_CELLS {
            return Err(Error::CdfBuildFailure(format!(
                "CDF of level {n} did not settle with {cells} cells"
            )));
        }
        cells *= 2;
        let (r2, c2) = cdf_on_cells(spec, n, cells)?;
        let sup = cdf
            .iter()
            .enumerate()
            .map(|(i, v)| (v - c2[2 * i]).abs())
            .fold(0.0, f64::max);
        cdf = c2;
        if sup < CDF_TOL {
            break r2;
        }
    };
    // Keep strictly increasing CDF values; flat stretches carry no mass.
    let mut xs = Vec::with_capacity(cdf.len());
    let mut ys = Vec::with_capacity(cdf.len());
    for (c, r) in cdf.into_iter().zip(radii) {
        if xs.last().is_none_or(|&l| c > l) {
            xs.push(c);
            ys.push(r);
        }
    }
    MonotoneCubic::new(xs, ys).map_err(|e| Error::CdfBuildFailure(format!("{e}")))
}

/// One draw of the `N` moduli of a class I ensemble at β = 2.
pub fn radial_moduli_sample(spec: &EnsembleSpec, seed: u64) -> Result<Vec<f64>> {
    let s = RadialSampler::build(spec)?;
    Ok(s.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// `n_configs` states of a Metropolis chain at the spec's `β`, stored every
/// `thinning` sweeps (default `N`), after a burn-in of 10% of the run.
pub fn mcmc_configurations(
    spec: &EnsembleSpec,
    n_configs: usize,
    thinning: Option<usize>,
    seed: u64,
) -> Result<Vec<Configuration>> {
    if n_configs == 0 {
        return Err(Error::InvalidParameter("need at least one configuration".into()));
    }
    let thin = thinning.unwrap_or(spec.n()).max(1);
    let mut chain = Chain::new(spec, seed)?;
    chain.burn_in((n_configs * thin / 10).max(100));
    let mut out = Vec::with_capacity(n_configs);
    for _ in 0..n_configs {
        for _ in 0..thin {
            chain.sweep();
        }
        out.push(Configuration::new(spec, chain.points().to_vec())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{AnnulusGeometry, ChargeConfiguration, RadialProfile};

    fn class_i(n: usize, r_in: f64, r_out: f64) -> EnsembleSpec {
        EnsembleSpec::build(
            n,
            2.0,
            AnnulusGeometry::new(r_in, r_out).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 0),
            FamilySelector::ClassI,
        )
        .unwrap()
    }

    #[test]
    fn disc_mean_radius() {
        let s = RadialSampler::build(&class_i(1, 0.0, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = 100_000;
        let xs: Vec<f64> = (0..k).map(|_| s.sample(&mut rng)[0]).collect();
        let mean = xs.iter().sum::<f64>() / k as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * (var / k as f64).sqrt());
    }

    #[test]
    fn annulus_inverse_cdf() {
        let s = RadialSampler::build(&class_i(1, 1.0, 2.0)).unwrap();
        let t = &s.inverse[0];
        // P(r <= 1.5) = 5/12
        assert!((t.eval(5.0 / 12.0).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_beta_and_class() {
        let spec = class_i(2, 1.0, 2.0).with_beta(4.0).unwrap();
        assert!(matches!(RadialSampler::build(&spec), Err(Error::BetaMismatch { .. })));
    }

    #[test]
    fn mcmc_reproducible_and_in_support() {
        let spec = class_i(3, 0.5, 1.5);
        let a = mcmc_configurations(&spec, 50, None, 4).unwrap();
        let b = mcmc_configurations(&spec, 50, None, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().flat_map(|c| c.points()).all(|z| spec.contains(*z)));
    }
}
