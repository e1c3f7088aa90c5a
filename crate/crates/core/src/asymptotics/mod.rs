//! Limit kernels of the N → ∞ scaling regimes.
//!
//! Every formula is evaluated in scaled coordinates `(t₁, φ₁)`, `(t₂, φ₂)`
//! relative to a [`ScalingFrame`], with the `N²/(πv²)`-type prefactors
//! included, so values are directly comparable with finite-N kernels at the
//! images of the scaled points.
//!
//! Coordinate conventions per formula:
//!
//! * edge and thin-annulus formulas: `t` is the scaled distance from the
//!   outer edge `v`, `r = v(1 − t/N)`;
//! * inner-edge formulas (`Kappa2Tilde`, `Kappa3`, `ExteriorEdgeKappaTilde`):
//!   `t` is the scaled distance from the inner edge, `r = R(1 + t/N)`;
//! * near-unit-circle formulas: `r = 1 + (u − t)/N`, `s_j = u − t_j + iφ_j`;
//! * bulk formulas (`DiscBulk`, `ExteriorBulk`): `t` and `φ` are the
//!   unscaled modulus and angle of each point, and `Γ = γN`.

mod cint;
mod formulas;
mod mass;

pub use cint::{c_integral, inner_t_integral, CIntegralKind, CParams, InnerIntegralKind};
pub use formulas::{eval_limit_kernel, one_dim_limit};
pub use mass::limit_mass;

use alloc::format;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    DiscEdge,
    ExteriorEdge,
    ThinAnnulus,
    NearUnitCircleOuter,
    NearUnitCircleInner,
}

impl FrameKind {
    pub fn name(self) -> &'static str {
        match self {
            FrameKind::DiscEdge => "disc_edge",
            FrameKind::ExteriorEdge => "exterior_edge",
            FrameKind::ThinAnnulus => "thin_annulus",
            FrameKind::NearUnitCircleOuter => "near_unit_circle_outer",
            FrameKind::NearUnitCircleInner => "near_unit_circle_inner",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            FrameKind::DiscEdge,
            FrameKind::ExteriorEdge,
            FrameKind::ThinAnnulus,
            FrameKind::NearUnitCircleOuter,
            FrameKind::NearUnitCircleInner,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// Limit-regime parameters.
///
/// `v` is the edge radius of edge and thin-annulus frames (for
/// `ExteriorEdge` it is the inner radius `R` of the exterior disc). The
/// near-circle frames fix `v = 1 + u/N` and ignore the field. `m` is the
/// number of negative charges for fixed-M regimes; large-M regimes use `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFrame {
    pub kind: FrameKind,
    pub n: usize,
    pub v: f64,
    pub gamma: f64,
    pub mu: f64,
    pub t_width: f64,
    pub u: f64,
    pub psi: f64,
    pub m: u32,
}

impl ScalingFrame {
    fn base(kind: FrameKind, n: usize) -> Self {
        ScalingFrame {
            kind,
            n,
            v: 1.0,
            gamma: 0.0,
            mu: 0.0,
            t_width: f64::INFINITY,
            u: 0.0,
            psi: 0.0,
            m: 0,
        }
    }

    pub fn disc_edge(n: usize, v: f64, gamma: f64) -> Result<Self> {
        Self { v, gamma, ..Self::base(FrameKind::DiscEdge, n) }.validated()
    }

    pub fn exterior_edge(n: usize, r_in: f64, gamma: f64) -> Result<Self> {
        Self { v: r_in, gamma, ..Self::base(FrameKind::ExteriorEdge, n) }.validated()
    }

    pub fn thin_annulus(n: usize, v: f64, gamma: f64, t_width: f64) -> Result<Self> {
        Self { v, gamma, t_width, ..Self::base(FrameKind::ThinAnnulus, n) }.validated()
    }

    pub fn near_circle_outer(n: usize, gamma: f64, u: f64, t_width: f64) -> Result<Self> {
        Self { gamma, u, t_width, ..Self::base(FrameKind::NearUnitCircleOuter, n) }.validated()
    }

    pub fn near_circle_inner(n: usize, gamma: f64, u: f64, t_width: f64) -> Result<Self> {
        Self { gamma, u, t_width, ..Self::base(FrameKind::NearUnitCircleInner, n) }.validated()
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self { mu, ..self }.validated()
    }

    pub fn with_m(self, m: u32) -> Self {
        Self { m, ..self }
    }

    pub fn with_psi(self, psi: f64) -> Self {
        Self { psi, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self { gamma, ..self }.validated()
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        Self { n, ..self }.validated()
    }

    /// Check the frame invariants.
    pub fn validated(self) -> Result<Self> {
        let bad = |msg: alloc::string::String| Err(Error::ParameterOutOfRange(msg));
        if self.n == 0 {
            return bad("frame needs N >= 1".into());
        }
        if !(self.v > 0.0) || !self.v.is_finite() {
            return bad(format!("edge radius must be positive, got {}", self.v));
        }
        if !self.gamma.is_finite() || !(self.mu >= 0.0) || !self.psi.is_finite() {
            return bad("gamma, mu and psi must be finite with mu >= 0".into());
        }
        match self.kind {
            FrameKind::DiscEdge if self.gamma < 0.0 => {
                bad(format!("disc edge frame needs gamma >= 0, got {}", self.gamma))
            }
            FrameKind::ExteriorEdge if self.gamma > -1.0 => {
                bad(format!("exterior edge frame needs gamma <= -1, got {}", self.gamma))
            }
            FrameKind::ThinAnnulus if !(self.t_width > 0.0) => {
                bad(format!("thin annulus frame needs T > 0, got {}", self.t_width))
            }
            FrameKind::NearUnitCircleOuter
                if !(self.t_width > 0.0 && self.t_width < self.u && self.u.is_finite()) =>
            {
                bad(format!(
                    "outer near-circle frame needs 0 < T < u, got T = {}, u = {}",
                    self.t_width, self.u
                ))
            }
            FrameKind::NearUnitCircleInner
                if !(self.u < 0.0 && self.t_width > 0.0 && self.t_width.is_finite()) =>
            {
                bad(format!(
                    "inner near-circle frame needs u < 0 < T, got T = {}, u = {}",
                    self.t_width, self.u
                ))
            }
            _ => Ok(self),
        }
    }

    /// Outer radius of the physical annulus for a finite `N`.
    pub fn outer_radius(&self) -> f64 {
        match self.kind {
            FrameKind::NearUnitCircleOuter | FrameKind::NearUnitCircleInner => {
                1.0 + self.u / self.n as f64
            }
            FrameKind::ExteriorEdge => f64::INFINITY,
            _ => self.v,
        }
    }

    /// Inner radius of the physical annulus for a finite `N`.
    pub fn inner_radius(&self) -> f64 {
        let nf = self.n as f64;
        match self.kind {
            FrameKind::DiscEdge => 0.0,
            FrameKind::ExteriorEdge => self.v,
            FrameKind::ThinAnnulus => self.v * (1.0 - self.t_width / nf),
            FrameKind::NearUnitCircleOuter | FrameKind::NearUnitCircleInner => {
                1.0 + (self.u - self.t_width) / nf
            }
        }
    }
}

macro_rules! formula_ids {
    ($( $variant:ident => $name:literal, $label:literal, $domain:literal, [$($frame:ident),*]; )*) => {
        /// Every limit kernel in the catalog.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum FormulaId { $($variant),* }

        impl FormulaId {
            pub const ALL: &'static [FormulaId] = &[$(FormulaId::$variant),*];

            /// Stable snake-case identifier (used by the CLI).
            pub fn name(self) -> &'static str {
                match self { $(FormulaId::$variant => $name),* }
            }

            /// Short human-readable description.
            pub fn label(self) -> &'static str {
                match self { $(FormulaId::$variant => $label),* }
            }

            /// Parameter domain in words.
            pub fn domain(self) -> &'static str {
                match self { $(FormulaId::$variant => $domain),* }
            }

            pub fn frames(self) -> &'static [FrameKind] {
                match self { $(FormulaId::$variant => &[$(FrameKind::$frame),*]),* }
            }

            pub fn from_name(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|id| id.name() == s)
            }
        }
    };
}

formula_ids! {
    DiscEdgeKappa => "disc_edge_kappa", "disc edge kernel",
        "gamma >= 0; t >= 0 (distance below the edge)", [DiscEdge, ThinAnnulus];
    ExteriorEdgeKappaTilde => "exterior_edge_kappa_tilde", "exterior disc edge kernel",
        "gamma <= -1; t >= 0 (distance outside the edge)", [ExteriorEdge];
    DiscBulk => "disc_bulk", "disc bulk kernel at fixed zeta",
        "t = |z| < v, phi = arg z; Gamma = gamma N > -1", [DiscEdge];
    ExteriorBulk => "exterior_bulk", "exterior disc bulk kernel at fixed eta",
        "t = |z| > R, phi = arg z; Gamma = gamma N, -N - Gamma fixed", [ExteriorEdge];
    ThinAnnulusUniversal => "thin_annulus_universal", "universal thin-annulus kernel",
        "0 <= t <= T", [ThinAnnulus];
    SineKernel => "sine", "sine kernel on the circle |z| = v",
        "T -> 0 with t -> 0", [ThinAnnulus];
    Kappa1 => "kappa1", "outer-edge kernel for T -> infinity, gamma >= 0",
        "gamma >= 0; t >= 0 from the outer edge", [ThinAnnulus, DiscEdge];
    Kappa2 => "kappa2", "outer-edge kernel for T -> infinity, -1 < gamma < 0",
        "-1 < gamma < 0; t >= 0 from the outer edge", [ThinAnnulus];
    Kappa2Tilde => "kappa2_tilde", "inner-edge kernel for T -> infinity, -1 < gamma < 0",
        "-1 < gamma < 0; t >= 0 from the inner edge", [ThinAnnulus];
    Kappa3 => "kappa3", "inner-edge kernel for T -> infinity, gamma <= -1",
        "gamma <= -1; t >= 0 from the inner edge", [ThinAnnulus];
    UniversalMFixed => "universal_m_fixed", "fixed-M kernel near the unit circle, e^{iM psi} != 1",
        "0 <= t <= T < u", [NearUnitCircleOuter];
    NonUniversalMFixed => "non_universal_m_fixed", "fixed-M kernel near the unit circle, e^{iM psi} = 1",
        "0 <= t <= T < u; e^{iM psi} = 1", [NearUnitCircleOuter];
    NonUniversalMFixedK1 => "non_universal_m_fixed_k1", "fixed-M first split part near the unit circle",
        "0 <= t <= T < u; M >= 1; both psi branches", [NearUnitCircleOuter];
    NonUniversalMFixedK2 => "non_universal_m_fixed_k2", "fixed-M second split part near the unit circle",
        "0 <= t <= T < u; both psi branches", [NearUnitCircleOuter];
    OneDimMFixed => "one_dim_m_fixed", "one-dimensional limit of the fixed-M non-universal kernel",
        "T -> 0, u > 0", [NearUnitCircleOuter];
    MLargeUniversal => "m_large_universal", "large-M universal kernel (gamma shifted by mu)",
        "0 < mu <= 1; 0 <= t <= T", [ThinAnnulus, NearUnitCircleOuter];
    MLargeK1 => "m_large_k1", "large-M first split part",
        "0 < mu <= 1; 0 <= t <= T; |phi| <= 2pi/mu near the circle", [ThinAnnulus, NearUnitCircleOuter];
    MLargeK2 => "m_large_k2", "large-M second split part",
        "0 < mu <= 1; 0 <= t <= T; |phi| <= 2pi/mu near the circle", [ThinAnnulus, NearUnitCircleOuter];
    MLargeK1MuSmall => "m_large_k1_mu_small", "mu -> 0 limit of the large-M first part",
        "0 <= t <= T < u", [NearUnitCircleOuter];
    MLargeK2MuSmall => "m_large_k2_mu_small", "mu -> 0 limit of the large-M second part",
        "0 <= t <= T < u", [NearUnitCircleOuter];
    MLargeK1ULarge => "m_large_k1_u_large", "u -> infinity limit of the large-M first part",
        "0 < mu <= 1; 0 <= t <= T", [NearUnitCircleOuter];
    MLargeK2ULarge => "m_large_k2_u_large", "u -> infinity limit of the large-M second part",
        "0 < mu <= 1; 0 <= t <= T", [NearUnitCircleOuter];
    MLargeK1TSmall => "m_large_k1_t_small", "T -> 0 limit of the large-M first part",
        "0 < mu <= 1; |phi| <= 2pi/mu", [NearUnitCircleOuter];
    MLargeK2TSmall => "m_large_k2_t_small", "T -> 0 limit of the large-M second part",
        "0 < mu <= 1; |phi| <= 2pi/mu", [NearUnitCircleOuter];
    VeryLargeM => "very_large_m", "kernel near the unit circle for M >= N",
        "mu >= 1; 0 <= t <= T < u; |phi| <= 2pi/mu", [NearUnitCircleOuter];
    VeryLargeMTSmall => "very_large_m_t_small", "T -> 0 limit of the M >= N kernel",
        "mu >= 1; |phi| <= 2pi/mu", [NearUnitCircleOuter];
    InteriorUniversal => "interior_universal", "fixed-M kernel inside the unit circle, e^{iM psi} != 1",
        "u < 0 < T; 0 <= t <= T", [NearUnitCircleInner];
    InteriorNonUniversalMFixed => "interior_non_universal_m_fixed", "fixed-M kernel inside the unit circle, e^{iM psi} = 1",
        "u < 0 < T; 0 <= t <= T; e^{iM psi} = 1", [NearUnitCircleInner];
    InteriorMLargeK1 => "interior_m_large_k1", "large-M first split part inside the unit circle",
        "0 < mu <= 1; u < 0 < T; |phi| <= 2pi/mu", [NearUnitCircleInner];
    InteriorMLargeK2 => "interior_m_large_k2", "large-M second split part inside the unit circle",
        "0 < mu <= 1; u < 0 < T; |phi| <= 2pi/mu", [NearUnitCircleInner];
    InteriorVeryLargeM => "interior_very_large_m", "kernel inside the unit circle for M >= N",
        "mu >= 1; u < 0 < T; |phi| <= 2pi/mu", [NearUnitCircleInner];
}

impl FormulaId {
    pub fn accepts(self, kind: FrameKind) -> bool {
        self.frames().contains(&kind)
    }

    /// True when `t` is measured from the inner edge of the frame.
    pub fn uses_inner_distance(self) -> bool {
        matches!(
            self,
            FormulaId::Kappa2Tilde | FormulaId::Kappa3 | FormulaId::ExteriorEdgeKappaTilde
        )
    }
}
