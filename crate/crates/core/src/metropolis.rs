//! Single-particle Metropolis random walk targeting `e^{-βH}` on the
//! annulus.

use core::f64::consts::PI;

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gas::EnsembleSpec;
use crate::{Error, Result};

const TARGET_ACCEPTANCE: f64 = 0.35;
const TUNE_WINDOW: u64 = 200;

pub(crate) struct Chain<'a> {
    spec: &'a EnsembleSpec,
    pts: Vec<Complex64>,
    ln_w: Vec<f64>,
    rng: ChaCha8Rng,
    step_r: f64,
    step_theta: f64,
    length: f64,
    accepted: u64,
    proposed: u64,
}

impl<'a> Chain<'a> {
    pub(crate) fn new(spec: &'a EnsembleSpec, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = spec.geometry();
        let (r_in, r_out) = (g.inner_radius(), g.outer_radius());
        let length = if r_out.is_finite() { r_out - r_in } else { r_in };
        let n = spec.n();
        let mut pts = Vec::with_capacity(n);
        let mut ln_w = Vec::with_capacity(n);
        for _ in 0..n {
            let mut placed = false;
            for _ in 0..10_000 {
                let u: f64 = rng.random();
                let r = if r_out.is_finite() {
                    r_in + (r_out - r_in) * u
                } else {
                    r_in * (1.0 + u)
                };
                let z = Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>());
                let lw = spec.ln_weight(z);
                if lw.is_finite() && pts.iter().all(|p: &Complex64| *p != z) {
                    pts.push(z);
                    ln_w.push(lw);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::InvalidParameter(
                    "could not find a starting configuration with positive weight".into(),
                ));
            }
        }
        Ok(Chain {
            spec,
            pts,
            ln_w,
            rng,
            step_r: 0.2 * length,
            step_theta: 0.5,
            length,
            accepted: 0,
            proposed: 0,
        })
    }

    pub(crate) fn points(&self) -> &[Complex64] {
        &self.pts
    }

    pub(crate) fn acceptance(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn propose(&mut self, j: usize) {
        self.proposed += 1;
        let z = self.pts[j];
        let r = z.norm();
        let theta = z.im.atan2(z.re);
        let dr: f64 = self.rng.sample(StandardNormal);
        let dt: f64 = self.rng.sample(StandardNormal);
        let r_new = r + self.step_r * dr;
        let g = self.spec.geometry();
        if !(r_new > 0.0) || !g.contains_radius(r_new) {
            return;
        }
        let z_new = Complex64::from_polar(r_new, theta + self.step_theta * dt);
        let lw_new = self.spec.ln_weight(z_new);
        if !lw_new.is_finite() {
            return;
        }
        let beta = self.spec.beta();
        let mut delta = lw_new - self.ln_w[j] + (r_new / r).ln();
        for (l, p) in self.pts.iter().enumerate() {
            if l != j {
                delta += beta * ((z_new - p).norm().ln() - (z - p).norm().ln());
            }
        }
        if delta >= 0.0 || self.rng.random::<f64>().ln() < delta {
            self.pts[j] = z_new;
            self.ln_w[j] = lw_new;
            self.accepted += 1;
        }
    }

    /// One proposal per particle, in a random order.
    pub(crate) fn sweep(&mut self) {
        let n = self.pts.len();
        for _ in 0..n {
            let j = self.rng.random_range(0..n);
            self.propose(j);
        }
    }

    /// Run `sweeps` sweeps while tuning both step sizes toward the target
    /// acceptance rate; counters are reset afterwards.
    pub(crate) fn burn_in(&mut self, sweeps: usize) {
        let (mut acc0, mut prop0) = (self.accepted, self.proposed);
        for _ in 0..sweeps {
            self.sweep();
            if self.proposed - prop0 >= TUNE_WINDOW {
                let rate = (self.accepted - acc0) as f64 / (self.proposed - prop0) as f64;
                let factor = (2.0 * (rate - TARGET_ACCEPTANCE)).exp().clamp(0.5, 2.0);
                self.step_r = (self.step_r * factor).min(self.length);
                self.step_theta = (self.step_theta * factor).min(PI);
                acc0 = self.accepted;
                prop0 = self.proposed;
            }
        }
        self.accepted = 0;
        self.proposed = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{AnnulusGeometry, ChargeConfiguration, FamilySelector, RadialProfile};

    #[test]
    fn tuned_acceptance_near_target() {
        let spec = EnsembleSpec::build(
            3,
            2.0,
            AnnulusGeometry::new(1.0, 2.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 0),
            FamilySelector::ClassI,
        )
        .unwrap();
        let mut c = Chain::new(&spec, 7).unwrap();
        c.burn_in(20_000);
        for _ in 0..20_000 {
            c.sweep();
        }
        assert!((c.acceptance() - 0.35).abs() < 0.1, "{}", c.acceptance());
        assert!(c.points().iter().all(|z| spec.contains(*z)));
    }
}
