//! The β = 2 correlation kernel
//! `K(z₁, z₂) = √(w(z₁) w(z₂)) Σ_n p_n(z₁) conj(p_n(z₂)) / h_n`,
//! its class II split, k-point correlations, the closed-form disc and
//! exterior-disc kernels, and integral self-checks.
//!
//! Every summand is assembled as `(ln|·|, arg)` and accumulated relative to a
//! running maximum, so kernels with N in the thousands do not overflow. The
//! modulus part of a summand is symmetric in the two points and the phase is
//! antisymmetric, which makes `K(z₂, z₁) = conj(K(z₁, z₂))` hold bit for bit.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use crate::gas::EnsembleSpec;
use crate::linalg::hermitian_det;
use crate::logspace::{LogPolar, LogSumAccumulator};
use crate::orthopoly::{NormTable, PolynomialFamily};
use crate::quadrature::{integrate_annulus, Tolerance};
use crate::{Error, Result};

/// Tolerance used for norms computed by quadrature when building a kernel.
pub const DEFAULT_NORM_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub value: f64,
    /// Largest over smallest pivot of the kernel-matrix factorization.
    pub condition: f64,
}

/// Orthonormal functions `√w(z) p_n(z)/√h_n` at one point, in log form.
#[derive(Debug, Clone)]
pub struct PointBasis {
    terms: Vec<LogPolar>,
}

#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    spec: EnsembleSpec,
    family: PolynomialFamily,
    norms: NormTable,
}

impl KernelEvaluator {
    pub fn build(spec: &EnsembleSpec) -> Result<Self> {
        if spec.beta() != 2.0 {
            return Err(Error::BetaMismatch { beta: spec.beta() });
        }
        let norms = NormTable::build(spec, DEFAULT_NORM_TOL)?;
        Self::with_norms(spec, norms)
    }

    /// Use a precomputed norm table (must have `N` entries).
    pub fn with_norms(spec: &EnsembleSpec, norms: NormTable) -> Result<Self> {
        if spec.beta() != 2.0 {
            return Err(Error::BetaMismatch { beta: spec.beta() });
        }
        if norms.len() != spec.n() {
            return Err(Error::InvalidParameter(format!(
                "norm table has {} entries for N = {}",
                norms.len(),
                spec.n()
            )));
        }
        Ok(KernelEvaluator {
            spec: spec.clone(),
            family: PolynomialFamily::for_spec(spec),
            norms,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn norms(&self) -> &NormTable {
        &self.norms
    }

    pub fn family(&self) -> PolynomialFamily {
        self.family
    }

    /// Evaluate the normalized basis at `z`.
    pub fn basis(&self, z: Complex64) -> Result<PointBasis> {
        if !self.spec.contains(z) {
            return Err(Error::OutOfSupport { modulus: z.norm() });
        }
        let r = z.norm();
        let ln_r = r.ln();
        let theta = z.im.atan2(z.re);
        let half_lw = 0.5 * self.spec.ln_weight_polar(ln_r, theta);
        let n = self.spec.n();
        let mut terms = Vec::with_capacity(n);
        for k in 0..n {
            let p = self.family.ln_eval(k, ln_r, theta)?;
            let lm = p.ln_mod + half_lw - 0.5 * self.norms.ln_h(k);
            terms.push(if lm.is_nan() || lm == f64::NEG_INFINITY {
                LogPolar::ZERO
            } else {
                LogPolar::new(lm, p.arg)
            });
        }
        Ok(PointBasis { terms })
    }

    fn sum_range(a: &PointBasis, b: &PointBasis, lo: usize, hi: usize) -> Complex64 {
        let mut acc = LogSumAccumulator::new();
        for k in lo..hi {
            let (x, y) = (a.terms[k], b.terms[k]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            acc.add(LogPolar::new(x.ln_mod + y.ln_mod, x.arg - y.arg));
        }
        acc.value()
    }

    pub fn eval_basis(&self, a: &PointBasis, b: &PointBasis) -> Complex64 {
        Self::sum_range(a, b, 0, self.spec.n())
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Result<Complex64> {
        let a = self.basis(z1)?;
        let b = self.basis(z2)?;
        Ok(self.eval_basis(&a, &b))
    }

    /// `(K⁽¹⁾, K⁽²⁾)`: the sums below and from the branch threshold of the
    /// class II family (`M` for Type A, `N − M` for Type B).
    pub fn eval_split(&self, z1: Complex64, z2: Complex64) -> Result<(Complex64, Complex64)> {
        let n = self.spec.n();
        let cut = self.family.split_index(n).ok_or_else(|| {
            Error::SplitUndefined(match self.family {
                PolynomialFamily::Monomial => "class I kernels have a single branch".into(),
                _ => format!("M = {} >= N = {n}: only one branch is present", self.spec.m()),
            })
        })?;
        let a = self.basis(z1)?;
        let b = self.basis(z2)?;
        Ok((Self::sum_range(&a, &b, 0, cut), Self::sum_range(&a, &b, cut, n)))
    }

    pub fn density(&self, z: Complex64) -> Result<f64> {
        let a = self.basis(z)?;
        Ok(self.eval_basis(&a, &a).re)
    }

    /// Kernel matrix `[K(z_j, z_l)]` in row-major order.
    pub fn matrix(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        let bases: Vec<PointBasis> = points
            .iter()
            .map(|z| self.basis(*z))
            .collect::<Result<_>>()?;
        let k = points.len();
        let mut m = alloc::vec![Complex64::new(0.0, 0.0); k * k];
        for i in 0..k {
            for j in i..k {
                let v = self.eval_basis(&bases[i], &bases[j]);
                m[i * k + j] = v;
                m[j * k + i] = v.conj();
            }
            m[i * k + i] = Complex64::new(m[i * k + i].re, 0.0);
        }
        Ok(m)
    }

    /// `ρ(z₁, …, z_k) = det[K(z_j, z_l)]`.
    pub fn correlation(&self, points: &[Complex64]) -> Result<CorrelationResult> {
        let k = points.len();
        if k == 0 || k > self.spec.n() {
            return Err(Error::InvalidParameter(format!(
                "correlation order must be in 1..={}, got {k}",
                self.spec.n()
            )));
        }
        let m = self.matrix(points)?;
        let d = hermitian_det(&m, k)?;
        Ok(CorrelationResult {
            value: d.det,
            condition: d.condition,
        })
    }

    fn angular_nodes(&self) -> usize {
        4 * (self.spec.n() + self.spec.m() as usize) + 32
    }

    /// Integral of the density over the annulus; equals N.
    pub fn total_mass(&self, rel_tol: f64) -> Result<f64> {
        let g = self.spec.geometry();
        let mut failure = None;
        let v = integrate_annulus(
            |r, th| match self.density(Complex64::from_polar(r, th)) {
                Ok(d) => Complex64::new(d, 0.0),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            g.inner_radius(),
            g.outer_radius(),
            self.angular_nodes(),
            Tolerance::rel(rel_tol),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(v.re)
    }

    /// `|∫ K(z₁, w) K(w, z₂) dA(w) − K(z₁, z₂)| / max(|K(z₁, z₂)|, √(ρ(z₁)ρ(z₂)))`.
    pub fn reproducing_defect(&self, z1: Complex64, z2: Complex64, rel_tol: f64) -> Result<f64> {
        let a = self.basis(z1)?;
        let b = self.basis(z2)?;
        let k12 = self.eval_basis(&a, &b);
        let scale = (self.eval_basis(&a, &a).re * self.eval_basis(&b, &b).re).sqrt();
        let g = self.spec.geometry();
        let mut failure = None;
        let integral = integrate_annulus(
            |r, th| match self.basis(Complex64::from_polar(r, th)) {
                Ok(w) => self.eval_basis(&a, &w) * self.eval_basis(&w, &b),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            g.inner_radius(),
            g.outer_radius(),
            self.angular_nodes(),
            Tolerance::rel(rel_tol).with_abs(rel_tol * 1e-2 * scale),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok((integral - k12).norm() / k12.norm().max(scale))
    }
}

/// Half-width of the region around `ζ = 1` (resp. `η = 1`) where the closed
/// forms are replaced by direct summation.
const REMOVABLE_RADIUS: f64 = 1e-6;

/// Kernel of N particles in the disc `|z| ≤ v` with flat profile and charge
/// `Γ > −1` at the origin, in the variable `ζ = z₁ conj(z₂)/v²`.
pub fn closed_form_disc_kernel(
    n: usize,
    gamma: f64,
    v: f64,
    z1: Complex64,
    z2: Complex64,
) -> Result<Complex64> {
    if !(gamma > -1.0) {
        return Err(Error::ParameterViolation(format!("disc kernel needs Gamma > -1, got {gamma}")));
    }
    if n == 0 || !(v > 0.0) {
        return Err(Error::ParameterViolation("need N >= 1 and v > 0".into()));
    }
    let lim = v * (1.0 + crate::gas::BOUNDARY_SLACK);
    if z1.norm() > lim || z2.norm() > lim {
        return Err(Error::ParameterViolation("points must lie in the disc".into()));
    }
    let zeta = z1 * z2.conj() / (v * v);
    let az = zeta.norm();
    let pre = if gamma == 0.0 { 1.0 } else { az.powf(gamma) };
    let nf = n as f64;
    let one = Complex64::new(1.0, 0.0);
    if (one - zeta).norm() < REMOVABLE_RADIUS {
        let mut s = Complex64::new(0.0, 0.0);
        let mut zp = one;
        for k in 0..n {
            s += zp * (2.0 * k as f64 + 2.0 * gamma + 2.0);
            zp *= zeta;
        }
        return Ok(s * pre / (2.0 * PI * v * v));
    }
    if az == 0.0 {
        return Ok(Complex64::new(pre * (1.0 + gamma) / (PI * v * v), 0.0));
    }
    // 1 − ζ^N through expm1 keeps its relative accuracy near ζ = 1.
    let ln_zeta = Complex64::new(az.ln(), zeta.im.atan2(zeta.re));
    let one_minus_pow = -crate::logspace::expm1_complex(ln_zeta * nf);
    let zeta_n = one - one_minus_pow;
    let d = one - zeta;
    let bracket = one_minus_pow / d - zeta_n * nf + one_minus_pow * gamma;
    Ok(bracket * pre / (d * PI * v * v))
}

/// Kernel of N particles outside `|z| = R` with flat profile and `Γ < −N`,
/// in the variable `η = z₁ conj(z₂)/R²`. The phase `e^{iN arg η}` is kept,
/// so the result equals the orthogonal-polynomial sum exactly.
pub fn closed_form_exterior_kernel(
    n: usize,
    gamma: f64,
    r_in: f64,
    z1: Complex64,
    z2: Complex64,
) -> Result<Complex64> {
    let nf = n as f64;
    if n == 0 || !(gamma < -nf) {
        return Err(Error::ParameterViolation(format!(
            "exterior kernel needs Gamma < -N, got Gamma = {gamma}, N = {n}"
        )));
    }
    if !(r_in > 0.0) {
        return Err(Error::ParameterViolation("need R > 0".into()));
    }
    let lim = r_in * (1.0 - crate::gas::BOUNDARY_SLACK);
    if z1.norm() < lim || z2.norm() < lim {
        return Err(Error::ParameterViolation("points must lie outside the disc".into()));
    }
    let eta = z1 * z2.conj() / (r_in * r_in);
    let ln_abs = eta.norm().ln();
    let arg = eta.im.atan2(eta.re);
    let one = Complex64::new(1.0, 0.0);
    let r2 = r_in * r_in;
    if (eta - one).norm() < REMOVABLE_RADIUS {
        // −|η|^Γ/(2πR²) Σ (2n + 2Γ + 2) η^n, assembled in log form.
        let mut acc = LogSumAccumulator::new();
        for k in 0..n {
            let c = -(2.0 * k as f64 + 2.0 * gamma + 2.0);
            acc.add(LogPolar::new(
                c.ln() + gamma * ln_abs + k as f64 * ln_abs,
                k as f64 * arg,
            ));
        }
        return Ok(acc.value() / (2.0 * PI * r2));
    }
    let ln_eta = Complex64::new(ln_abs, arg);
    // 1 − η^{−N} = −expm1(−N ln η)
    let one_minus_inv = -crate::logspace::expm1_complex(-ln_eta * nf);
    let em1 = eta - one;
    let bracket = one_minus_inv / em1 - nf - one_minus_inv * gamma;
    let lead = LogPolar::new((gamma + nf) * ln_abs, nf * arg);
    let rest = LogPolar::from_complex(bracket / (em1 * PI * r2));
    Ok(lead.mul(rest).to_complex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{AnnulusGeometry, ChargeConfiguration, FamilySelector, RadialProfile};
    use alloc::vec;

    fn disc(n: usize, v: f64, gamma: f64) -> KernelEvaluator {
        let s = EnsembleSpec::build(
            n,
            2.0,
            AnnulusGeometry::disc(v).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(gamma, 0),
            FamilySelector::ClassI,
        )
        .unwrap();
        KernelEvaluator::build(&s).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_particle_disc() {
        let k = disc(1, 1.0, 0.0);
        assert!((k.norms().h(0) - PI).abs() < 1e-14);
        let v = k.eval(c(0.3, 0.1), c(-0.5, 0.2)).unwrap();
        assert!((v - c(1.0 / PI, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_particle_disc_values() {
        let k = disc(2, 1.0, 0.0);
        assert!((k.density(c(0.0, 0.0)).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((k.density(c(0.5, 0.0)).unwrap() - 1.5 / PI).abs() < 1e-15);
        let rho2 = k.correlation(&[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((rho2.value - 0.5 / (PI * PI)).abs() < 1e-15);
        assert!((rho2.value - 0.050_660).abs() < 1e-6);
        let rep = k.correlation(&[c(0.2, 0.1), c(0.2, 0.1)]).unwrap();
        assert!(rep.value.abs() < 1e-15);
    }

    #[test]
    fn beta_mismatch_and_support() {
        let s = EnsembleSpec::build(
            2,
            1.0,
            AnnulusGeometry::disc(1.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 0),
            FamilySelector::ClassI,
        )
        .unwrap();
        assert!(matches!(KernelEvaluator::build(&s), Err(Error::BetaMismatch { .. })));
        let k = disc(2, 1.0, 0.0);
        assert!(matches!(k.density(c(1.5, 0.0)), Err(Error::OutOfSupport { .. })));
    }

    #[test]
    fn split_rules() {
        let s = EnsembleSpec::build(
            2,
            2.0,
            AnnulusGeometry::new(1.5, 2.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 3),
            FamilySelector::ClassIIExteriorTypeA,
        )
        .unwrap();
        let k = KernelEvaluator::build(&s).unwrap();
        assert!(matches!(
            k.eval_split(c(1.6, 0.0), c(1.7, 0.2)),
            Err(Error::SplitUndefined(_))
        ));
        let s = EnsembleSpec::build(
            2,
            2.0,
            AnnulusGeometry::new(1.5, 2.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 1),
            FamilySelector::ClassIIExteriorTypeA,
        )
        .unwrap();
        let k = KernelEvaluator::build(&s).unwrap();
        let (z1, z2) = (c(1.6, 0.1), c(-1.2, 1.1));
        let (k1, _) = k.eval_split(z1, z2).unwrap();
        // K⁽¹⁾ holds the p_0 = 1 term only.
        let w = (s.weight(z1) * s.weight(z2)).sqrt();
        assert!((k1 - c(w / k.norms().h(0), 0.0)).norm() < 1e-14 * k1.norm());
    }

    #[test]
    fn closed_form_disc_examples() {
        let v = closed_form_disc_kernel(1, 0.0, 2.0, c(0.3, 1.0), c(-1.0, 0.2)).unwrap();
        assert!((v - c(1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
        let z = closed_form_disc_kernel(2, 0.0, 1.0, c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        assert!((z.re - 2.0 / PI).abs() < 1e-14);
        assert!(closed_form_disc_kernel(2, -1.0, 1.0, c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn closed_form_exterior_example() {
        let v = closed_form_exterior_kernel(1, -2.0, 1.0, c(2.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!((v.re - 1.0 / (16.0 * PI)).abs() < 1e-15);
        assert!(v.im.abs() < 1e-16);
        assert!(closed_form_exterior_kernel(3, -2.0, 1.0, c(2.0, 0.0), c(2.0, 0.0)).is_err());
    }

    #[test]
    fn mass_of_single_particle() {
        let k = disc(1, 1.0, 0.0);
        assert!((k.total_mass(1e-10).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reproducing_single_particle() {
        let k = disc(1, 1.0, 0.0);
        let d = k.reproducing_defect(c(0.1, 0.2), c(-0.3, 0.5), 1e-10).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn large_n_does_not_overflow() {
        let s = EnsembleSpec::build(
            2000,
            2.0,
            AnnulusGeometry::new(0.999, 1.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 0),
            FamilySelector::ClassI,
        )
        .unwrap();
        let k = KernelEvaluator::build(&s).unwrap();
        let d = k.density(c(0.9995, 0.0)).unwrap();
        assert!(d.is_finite() && d > 0.0);
        let m = k.matrix(&[c(0.9995, 0.0), c(0.0, 0.9992)]).unwrap();
        assert!(m.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }
}
