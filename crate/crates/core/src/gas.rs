//! Ensemble description: annulus geometry, radial profile, point charges and
//! the polynomial family, plus the one-body weight and the Hamiltonian.
//!
//! For inverse temperature β the weight is
//! `w(z) = g(r) · r^{βΓ} · |z^M − 1|^{−β}` inside the closed annulus and 0
//! outside. At β = 2 this is `g r^{2Γ}` for class I and
//! `g r^{2(Γ−M)} |D(z)|²` with `D(z) = 1/(1 − z^{−M})` for class II.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::interp::MonotoneCubic;
use crate::logspace::{power_minus_one, scaled_ln};
use crate::{Error, Result};

/// Relative slack used when deciding whether a radius lies on the boundary.
pub(crate) const BOUNDARY_SLACK: f64 = 1e-12;

/// Closed annulus `R ≤ |z| ≤ v`. `R = 0` gives a disc and `v = ∞` the
/// exterior of a disc; the two cannot be combined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGeometry {
    inner: f64,
    outer: f64,
}

impl AnnulusGeometry {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0) || inner.is_infinite() || !(outer > inner) || outer.is_nan() {
            return Err(Error::GeometryViolation(format!(
                "need 0 <= R < v with R finite, got R = {inner}, v = {outer}"
            )));
        }
        if inner == 0.0 && outer.is_infinite() {
            return Err(Error::GeometryViolation(
                "the whole plane is not an admissible support".into(),
            ));
        }
        Ok(AnnulusGeometry { inner, outer })
    }

    pub fn disc(v: f64) -> Result<Self> {
        Self::new(0.0, v)
    }

    pub fn exterior_disc(r: f64) -> Result<Self> {
        Self::new(r, f64::INFINITY)
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer
    }

    pub fn is_disc(&self) -> bool {
        self.inner == 0.0
    }

    pub fn is_exterior_disc(&self) -> bool {
        self.outer.is_infinite()
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r >= self.inner * (1.0 - BOUNDARY_SLACK) && r <= self.outer * (1.0 + BOUNDARY_SLACK)
    }
}

/// Sampled profile interpolated by a monotone cubic. With `reciprocal` set,
/// the profile is evaluated at `1/r`; this is how the inversion dual of a
/// tabulated profile is represented.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    table: MonotoneCubic,
    reciprocal: bool,
}

impl TabulatedProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidParameter(
                "tabulated profile values must be nonnegative".into(),
            ));
        }
        if radii.first().is_some_and(|r| *r < 0.0) {
            return Err(Error::InvalidParameter(
                "tabulated profile radii must be nonnegative".into(),
            ));
        }
        Ok(TabulatedProfile {
            table: MonotoneCubic::new(radii, values)?,
            reciprocal: false,
        })
    }

    pub fn radii(&self) -> &[f64] {
        self.table.xs()
    }

    pub fn values(&self) -> &[f64] {
        self.table.ys()
    }

    pub fn is_reciprocal(&self) -> bool {
        self.reciprocal
    }

    pub fn with_reciprocal(mut self, reciprocal: bool) -> Self {
        self.reciprocal = reciprocal;
        self
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let x = if self.reciprocal { 1.0 / r } else { r };
        let (lo, hi) = self.table.domain();
        // Tolerate round-off at the table edges.
        let x = if x < lo && x >= lo * (1.0 - BOUNDARY_SLACK) {
            lo
        } else if x > hi && x <= hi * (1.0 + BOUNDARY_SLACK) {
            hi
        } else {
            x
        };
        let v = self.table.eval(x).ok_or(Error::ProfileOutOfRange {
            radius: r,
            lo: if self.reciprocal { 1.0 / hi } else { lo },
            hi: if self.reciprocal { 1.0 / lo } else { hi },
        })?;
        Ok(v.max(0.0))
    }

    /// Radius interval covered by the table (after the reciprocal map).
    pub fn coverage(&self) -> (f64, f64) {
        let (lo, hi) = self.table.domain();
        if self.reciprocal {
            (1.0 / hi, if lo == 0.0 { f64::INFINITY } else { 1.0 / lo })
        } else {
            (lo, hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    Flat,
    Power { alpha: f64 },
    Tabulated(TabulatedProfile),
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Flat => Ok(1.0),
            RadialProfile::Power { alpha } => Ok(if *alpha == 0.0 { 1.0 } else { r.powf(*alpha) }),
            RadialProfile::Tabulated(t) => t.eval(r),
        }
    }

    /// `ln g(r)`, `-inf` where the profile vanishes.
    pub fn ln_eval(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Flat => Ok(0.0),
            RadialProfile::Power { alpha } => Ok(scaled_ln(*alpha, r.ln())),
            RadialProfile::Tabulated(t) => Ok(t.eval(r)?.ln()),
        }
    }

    /// Exponent `α` for closed-form norms, if the profile is a power law.
    pub fn power_exponent(&self) -> Option<f64> {
        match self {
            RadialProfile::Flat => Some(0.0),
            RadialProfile::Power { alpha } => Some(*alpha),
            RadialProfile::Tabulated(_) => None,
        }
    }

    /// Profile of the inversion-dual ensemble, `g̃(r) = g(1/r)`.
    pub fn inverted(&self) -> RadialProfile {
        match self {
            RadialProfile::Flat => RadialProfile::Flat,
            RadialProfile::Power { alpha } => RadialProfile::Power { alpha: -alpha },
            RadialProfile::Tabulated(t) => {
                RadialProfile::Tabulated(t.clone().with_reciprocal(!t.reciprocal))
            }
        }
    }
}

/// Charge `Γ` at the origin and `M` unit negative charges at the `M`-th
/// roots of unity (`M = 0`: none).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeConfiguration {
    pub gamma: f64,
    pub m: u32,
}

impl ChargeConfiguration {
    pub fn new(gamma: f64, m: u32) -> Self {
        ChargeConfiguration { gamma, m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilySelector {
    ClassI,
    ClassIIExteriorTypeA,
    ClassIIInteriorTypeB,
}

impl FamilySelector {
    pub fn name(self) -> &'static str {
        match self {
            FamilySelector::ClassI => "class_i",
            FamilySelector::ClassIIExteriorTypeA => "class_ii_exterior_type_a",
            FamilySelector::ClassIIInteriorTypeB => "class_ii_interior_type_b",
        }
    }
}

/// A validated finite-N ensemble. Construct with [`EnsembleSpec::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    n: usize,
    beta: f64,
    geometry: AnnulusGeometry,
    profile: RadialProfile,
    charges: ChargeConfiguration,
    family: FamilySelector,
}

impl EnsembleSpec {
    pub fn build(
        n: usize,
        beta: f64,
        geometry: AnnulusGeometry,
        profile: RadialProfile,
        charges: ChargeConfiguration,
        family: FamilySelector,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(beta > 0.0) || beta.is_infinite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !charges.gamma.is_finite() {
            return Err(Error::InvalidParameter("Gamma must be finite".into()));
        }
        let (r_in, r_out) = (geometry.inner, geometry.outer);
        match family {
            FamilySelector::ClassI => {
                if charges.m != 0 {
                    return Err(Error::InvalidParameter(
                        "class I ensembles carry no negative charges (M = 0)".into(),
                    ));
                }
            }
            FamilySelector::ClassIIExteriorTypeA => {
                if !(r_in > 1.0) {
                    return Err(Error::GeometryViolation(format!(
                        "exterior class II ensembles need R > 1, got R = {r_in}"
                    )));
                }
            }
            FamilySelector::ClassIIInteriorTypeB => {
                if !(r_out < 1.0) || r_in == 0.0 {
                    return Err(Error::GeometryViolation(format!(
                        "interior class II ensembles need 0 < R < v < 1, got R = {r_in}, v = {r_out}"
                    )));
                }
            }
        }
        if family != FamilySelector::ClassI {
            if charges.m == 0 {
                return Err(Error::InvalidParameter(
                    "class II ensembles need at least one negative charge".into(),
                ));
            }
            if r_out.is_infinite() {
                return Err(Error::GeometryViolation(
                    "class II ensembles need a bounded annulus".into(),
                ));
            }
        }
        if let RadialProfile::Tabulated(t) = &profile {
            let (lo, hi) = t.coverage();
            if lo > r_in * (1.0 + BOUNDARY_SLACK) || hi < r_out * (1.0 - BOUNDARY_SLACK) {
                return Err(Error::ProfileOutOfRange {
                    radius: if lo > r_in { r_in } else { r_out },
                    lo,
                    hi,
                });
            }
        }
        let boundary = if r_out.is_finite() { r_out } else { r_in };
        let g_b = profile.eval(boundary)?;
        if !(g_b > 0.0) || !g_b.is_finite() {
            return Err(Error::NonpositiveProfile { radius: boundary });
        }
        // Integrability of the radial weights at an unbounded or punctured end.
        if let Some(alpha) = profile.power_exponent() {
            let ex = beta * charges.gamma + alpha;
            if r_in == 0.0 && !(ex + 2.0 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "weight r^{ex} is not integrable at the origin"
                )));
            }
            if r_out.is_infinite() && !(ex + beta * (n as f64 - 1.0) + 2.0 < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "weight decays too slowly at infinity for N = {n} (need beta*Gamma + alpha < -beta*(N-1) - 2)"
                )));
            }
        } else if r_out.is_infinite() {
            return Err(Error::GeometryViolation(
                "tabulated profiles need a bounded annulus".into(),
            ));
        }
        Ok(EnsembleSpec {
            n,
            beta,
            geometry,
            profile,
            charges,
            family,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn geometry(&self) -> &AnnulusGeometry {
        &self.geometry
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn charges(&self) -> ChargeConfiguration {
        self.charges
    }

    pub fn family(&self) -> FamilySelector {
        self.family
    }

    pub fn gamma(&self) -> f64 {
        self.charges.gamma
    }

    pub fn m(&self) -> u32 {
        self.charges.m
    }

    /// Copy of the spec with a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::build(
            self.n,
            beta,
            self.geometry,
            self.profile.clone(),
            self.charges,
            self.family,
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.geometry.contains_radius(z.norm())
    }

    /// `ln w(z)` at this spec's β; `-inf` outside the annulus or where the
    /// profile vanishes.
    pub fn ln_weight(&self, z: Complex64) -> f64 {
        let r = z.norm();
        if !self.contains(z) {
            return f64::NEG_INFINITY;
        }
        self.ln_weight_polar(r.ln(), z.im.atan2(z.re))
    }

    /// `ln w` from `ln r` and the angle, skipping the support test.
    pub(crate) fn ln_weight_polar(&self, ln_r: f64, theta: f64) -> f64 {
        let r = ln_r.exp();
        let lg = match self.profile.ln_eval(r) {
            Ok(v) => v,
            Err(_) => return f64::NEG_INFINITY,
        };
        let mut lw = lg + scaled_ln(self.beta * self.charges.gamma, ln_r);
        if self.charges.m > 0 {
            lw -= self.beta * power_minus_one(ln_r, theta, self.charges.m).ln_mod;
        }
        if lw.is_nan() {
            f64::NEG_INFINITY
        } else {
            lw
        }
    }

    /// One-body weight; zero outside the closed annulus.
    pub fn weight(&self, z: Complex64) -> f64 {
        let lw = self.ln_weight(z);
        if lw == f64::NEG_INFINITY {
            0.0
        } else {
            lw.exp()
        }
    }

    /// One-body potential `V(z)` with `w = e^{−βV}`.
    pub fn potential(&self, z: Complex64) -> f64 {
        -self.ln_weight(z) / self.beta
    }

    /// `Σ V(z_j) − Σ_{j<l} ln|z_j − z_l|`.
    pub fn hamiltonian(&self, config: &Configuration) -> Result<f64> {
        let pts = config.points();
        let mut h = 0.0;
        for (j, &z) in pts.iter().enumerate() {
            h += self.potential(z);
            for &y in &pts[j + 1..] {
                let d = (z - y).norm();
                if d == 0.0 {
                    return Err(Error::CoincidentPoints);
                }
                h -= d.ln();
            }
        }
        Ok(h)
    }
}

/// Point configuration lying in the closed annulus of a spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<Complex64>,
}

impl Configuration {
    pub fn new(spec: &EnsembleSpec, points: Vec<Complex64>) -> Result<Self> {
        if let Some(z) = points.iter().find(|z| !spec.contains(**z)) {
            return Err(Error::OutOfSupport { modulus: z.norm() });
        }
        Ok(Configuration { points })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn class_i(n: usize, r: f64, v: f64, gamma: f64) -> EnsembleSpec {
        EnsembleSpec::build(
            n,
            2.0,
            AnnulusGeometry::new(r, v).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(gamma, 0),
            FamilySelector::ClassI,
        )
        .unwrap()
    }

    #[test]
    fn build_examples() {
        class_i(2, 1.0, 2.0, 0.0);
        let bad = EnsembleSpec::build(
            2,
            2.0,
            AnnulusGeometry::new(0.5, 2.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 3),
            FamilySelector::ClassIIExteriorTypeA,
        );
        assert!(matches!(bad, Err(Error::GeometryViolation(_))));
        EnsembleSpec::build(
            5,
            2.0,
            AnnulusGeometry::new(0.2, 0.8).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(1.0, 2),
            FamilySelector::ClassIIInteriorTypeB,
        )
        .unwrap();
        assert!(AnnulusGeometry::new(2.0, 1.0).is_err());
    }

    #[test]
    fn nonpositive_boundary_profile() {
        let t = TabulatedProfile::new(vec![0.5, 1.0, 2.0], vec![1.0, 1.0, 0.0]).unwrap();
        let r = EnsembleSpec::build(
            1,
            2.0,
            AnnulusGeometry::new(1.0, 2.0).unwrap(),
            RadialProfile::Tabulated(t),
            ChargeConfiguration::new(0.0, 0),
            FamilySelector::ClassI,
        );
        assert!(matches!(r, Err(Error::NonpositiveProfile { .. })));
    }

    #[test]
    fn weight_examples() {
        let s = class_i(2, 1.0, 2.0, 0.0);
        assert!((s.weight(Complex64::new(1.5, 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(s.weight(Complex64::new(2.5, 0.0)), 0.0);
        let s = class_i(2, 1.0, 2.0, 1.0);
        assert!((s.weight(Complex64::new(1.5, 0.0)) - 2.25).abs() < 1e-14);
        let s = EnsembleSpec::build(
            2,
            2.0,
            AnnulusGeometry::new(1.5, 3.0).unwrap(),
            RadialProfile::Flat,
            ChargeConfiguration::new(0.0, 2),
            FamilySelector::ClassIIExteriorTypeA,
        )
        .unwrap();
        let z = Complex64::new(2.0, 0.0);
        // r^{2(Γ−M)} |1/(1 − z^{−M})|² evaluated directly.
        let d = 1.0 / (Complex64::new(1.0, 0.0) - z.powi(-2));
        let direct = 2f64.powi(-4) * d.norm_sqr();
        assert!((s.weight(z) - 1.0 / 9.0).abs() < 1e-15);
        assert!((s.weight(z) - direct).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_examples() {
        let s = class_i(2, 0.1, 1.0, 0.0);
        let c = Configuration::new(&s, vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)])
            .unwrap();
        assert!(s.hamiltonian(&c).unwrap().abs() < 1e-15);
        let s = class_i(2, 1.0, 4.0, 1.0);
        let c = Configuration::new(&s, vec![Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.0)])
            .unwrap();
        assert!((s.hamiltonian(&c).unwrap() + 2.772_588_722_239_781).abs() < 1e-12);
        let c = Configuration::new(&s, vec![Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0)])
            .unwrap();
        assert_eq!(s.hamiltonian(&c), Err(Error::CoincidentPoints));
    }

    #[test]
    fn boundary_points_are_inside() {
        let s = class_i(1, 1.0, 2.0, 0.0);
        assert!(s.contains(Complex64::new(0.0, 2.0)));
        assert!(s.contains(Complex64::new(-1.0, 0.0)));
    }

    fn class_ii_ext() -> EnsembleSpec {
        EnsembleSpec::build(
            3,
            2.0,
            AnnulusGeometry::new(1.2, 2.5).unwrap(),
            RadialProfile::Power { alpha: 0.7 },
            ChargeConfiguration::new(0.4, 3),
            FamilySelector::ClassIIExteriorTypeA,
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn class_i_rotation_invariance(r in 1.0f64..2.0, th in 0.0f64..6.3, phi in 0.0f64..6.3) {
            let s = class_i(3, 1.0, 2.0, 0.7);
            let z = Complex64::from_polar(r, th);
            let w0 = s.weight(z);
            let w1 = s.weight(z * Complex64::from_polar(1.0, phi));
            prop_assert!((w0 - w1).abs() <= 1e-13 * w0);
        }

        #[test]
        fn class_ii_discrete_rotation_and_conjugation(r in 1.2f64..2.5, th in 0.0f64..6.3, j in 0u32..3) {
            let s = class_ii_ext();
            let z = Complex64::from_polar(r, th);
            let w0 = s.weight(z);
            let w1 = s.weight(z * Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 3.0));
            prop_assert!((w0 - w1).abs() <= 1e-12 * w0);
            prop_assert!((w0 - s.weight(z.conj())).abs() <= 1e-13 * w0);
            prop_assert!(w0 >= 0.0);
        }

        #[test]
        fn boltzmann_factor_matches_weights(
            pts in proptest::collection::vec((1.2f64..2.5, 0.0f64..6.3), 2..5),
            beta in 0.5f64..4.0,
        ) {
            let s = class_ii_ext().with_beta(beta).unwrap();
            let zs: Vec<Complex64> = pts.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
            let c = Configuration::new(&s, zs.clone()).unwrap();
            let h = match s.hamiltonian(&c) { Ok(h) => h, Err(_) => return Ok(()) };
            let mut prod = 1.0;
            for (j, &z) in zs.iter().enumerate() {
                prod *= s.weight(z);
                for &y in &zs[j + 1..] {
                    prod *= (z - y).norm().powf(beta);
                }
            }
            let lhs = (-beta * h).exp();
            prop_assert!((lhs - prod).abs() <= 1e-12 * prod);
        }
    }
}
