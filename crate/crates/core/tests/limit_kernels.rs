use std::f64::consts::PI;

use annulus_gas::asymptotics::{
    c_integral, eval_limit_kernel, one_dim_limit, CIntegralKind, CParams, FormulaId, FrameKind,
    ScalingFrame,
};
use annulus_gas::quadrature::{integrate_complex, Tolerance};
use annulus_gas::Complex64;

type F = FormulaId;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
}

fn grid(t_width: f64, phi_max: f64) -> Vec<(f64, f64, f64, f64)> {
    let ts = [0.0, 0.13, 0.5, 0.87, 1.0].map(|x| x * t_width);
    let ps = [-1.0, -0.3, 0.0, 0.45, 1.0].map(|x| x * phi_max);
    let mut out = Vec::new();
    for (i, &t1) in ts.iter().enumerate() {
        for (j, &t2) in ts.iter().enumerate() {
            out.push((t1, ps[(i + j) % 5], t2, ps[(2 * i + j + 1) % 5]));
        }
    }
    out
}

fn eval(id: F, f: &ScalingFrame, p: (f64, f64, f64, f64)) -> Complex64 {
    eval_limit_kernel(id, f, p.0, p.1, p.2, p.3).unwrap()
}

/// The closed edge forms against direct quadrature of their defining
/// c-integrals.
#[test]
fn edge_kernels_match_c_quadrature() {
    let quad = |gamma: f64, s: f64, phi: f64, lo: f64, hi: f64, sign: f64| -> Complex64 {
        integrate_complex(
            |c| {
                let x = c + gamma;
                Complex64::from_polar(x * (-sign * x * s).exp(), c * phi)
            },
            lo,
            hi,
            Tolerance::rel(1e-14),
        )
        .unwrap()
        .value
    };
    let n = 4usize;
    let pre = (n * n) as f64 / PI;
    let thin = |g: f64| ScalingFrame::thin_annulus(n, 1.0, g, 1.0).unwrap();
    for &(t1, p1, t2, p2) in &[(0.2, 0.4, 0.7, -0.2), (0.01, 0.0, 0.02, 0.01), (2.0, 3.0, 1.0, 0.0)] {
        let (s, phi) = (t1 + t2, p1 - p2);
        let k = eval_limit_kernel(F::Kappa2, &thin(-0.4), t1, p1, t2, p2).unwrap();
        assert!(close(k, pre * quad(-0.4, s, phi, 0.4, 1.0, 1.0), 1e-12));
        let k = eval_limit_kernel(F::Kappa2Tilde, &thin(-0.4), t1, p1, t2, p2).unwrap();
        assert!(close(k, -pre * quad(-0.4, s, phi, 0.0, 0.4, -1.0), 1e-12));
        let k = eval_limit_kernel(F::Kappa3, &thin(-1.7), t1, p1, t2, p2).unwrap();
        assert!(close(k, -pre * quad(-1.7, s, phi, 0.0, 1.0, -1.0), 1e-12));
        let k = eval_limit_kernel(F::Kappa1, &thin(0.6), t1, p1, t2, p2).unwrap();
        assert!(close(k, pre * quad(0.6, s, phi, 0.0, 1.0, 1.0), 1e-12));
    }
}

#[test]
fn exterior_edge_matches_printed_form() {
    let (n, r, g) = (5usize, 0.9, -1.3);
    let f = ScalingFrame::exterior_edge(n, r, g).unwrap();
    let (s1, s2, p1, p2) = (0.3, 0.8, 0.5, -0.4);
    let phi = p1 - p2;
    let sigma = Complex64::new(s1 + s2, phi);
    let e = sigma.exp();
    let want = (n * n) as f64 / (PI * r * r) * ((sigma - Complex64::new(0.0, phi)) * g).exp() / sigma
        * (g - (1.0 + g) * e + (e - 1.0) / sigma);
    let got = eval_limit_kernel(F::ExteriorEdgeKappaTilde, &f, s1, p1, s2, p2).unwrap();
    assert!(close(got, want, 1e-13));
}

#[test]
fn hermiticity() {
    let cases: Vec<(F, ScalingFrame)> = vec![
        (F::ThinAnnulusUniversal, ScalingFrame::thin_annulus(3, 1.1, 0.2, 1.0).unwrap()),
        (F::Kappa2Tilde, ScalingFrame::thin_annulus(3, 1.0, -0.5, 1.0).unwrap()),
        (
            F::NonUniversalMFixed,
            ScalingFrame::near_circle_outer(3, 0.1, 2.0, 1.0).unwrap().with_m(2),
        ),
        (
            F::MLargeK1,
            ScalingFrame::near_circle_outer(3, 0.1, 2.0, 1.0).unwrap().with_mu(0.5).unwrap(),
        ),
        (
            F::MLargeK2,
            ScalingFrame::near_circle_outer(3, 0.1, 2.0, 1.0).unwrap().with_mu(0.5).unwrap(),
        ),
        (
            F::InteriorMLargeK2,
            ScalingFrame::near_circle_inner(3, 0.1, -1.0, 1.0).unwrap().with_mu(0.5).unwrap(),
        ),
        (
            F::InteriorVeryLargeM,
            ScalingFrame::near_circle_inner(3, 0.1, -1.0, 1.0).unwrap().with_mu(1.5).unwrap(),
        ),
    ];
    for (id, f) in cases {
        let phi_max = if f.mu > 0.0 { 2.0 * PI / f.mu } else { 4.0 };
        let tw = if f.kind == FrameKind::ThinAnnulus && id == F::Kappa2Tilde { 3.0 } else { f.t_width };
        for p in grid(tw, phi_max) {
            let a = eval(id, &f, p);
            let b = eval(id, &f, (p.2, p.3, p.0, p.1)).conj();
            assert!(close(a, b, 1e-11), "{}: {a} vs {b}", id.name());
        }
    }
}

#[test]
fn c_integral_additivity_and_midpoint() {
    let p = CParams { gamma: -0.5, mu: 0.0, t_width: 1.0, u: 0.0 };
    let whole = c_integral(CIntegralKind::Universal, &p, 0.7, 1.3, 0.0, 1.0).unwrap();
    let a = c_integral(CIntegralKind::Universal, &p, 0.7, 1.3, 0.0, 0.35).unwrap();
    let b = c_integral(CIntegralKind::Universal, &p, 0.7, 1.3, 0.35, 1.0).unwrap();
    assert!(close(whole, a + b, 1e-12));
    // Excise a small window around c = 0.5 and add the window by its
    // midpoint value 1/(2T) · e^{i c φ}.
    let eps = 1e-6;
    let direct = |lo: f64, hi: f64| {
        integrate_complex(
            |c| {
                let x = c - 0.5;
                Complex64::from_polar(x * (-x * 0.7).exp() / (1.0 - (-2.0 * x).exp()), c * 1.3)
            },
            lo,
            hi,
            Tolerance::rel(1e-14),
        )
        .unwrap()
        .value
    };
    let excised = direct(0.0, 0.5 - eps)
        + direct(0.5 + eps, 1.0)
        + Complex64::from_polar(0.5 * 2.0 * eps, 0.5 * 1.3);
    assert!(close(whole, excised, 1e-10));
    let p = CParams { gamma: 0.0, mu: 0.0, t_width: f64::INFINITY, u: 0.0 };
    let half = c_integral(CIntegralKind::Universal, &p, 0.0, 0.0, 0.0, 1.0).unwrap();
    assert!((half - 0.5).norm() < 1e-15);
}

#[test]
fn large_m_split_sums() {
    let thin = ScalingFrame::thin_annulus(6, 1.2, 0.3, 1.5).unwrap().with_mu(0.4).unwrap();
    for p in grid(1.5, 5.0) {
        let k = eval(F::MLargeK1, &thin, p) + eval(F::MLargeK2, &thin, p);
        assert!(close(k, eval(F::MLargeUniversal, &thin, p), 1e-10));
    }
    let near = ScalingFrame::near_circle_outer(6, 0.3, 2.0, 1.0).unwrap().with_mu(1.0).unwrap();
    for p in grid(1.0, 2.0 * PI) {
        let k = eval(F::MLargeK1, &near, p) + eval(F::MLargeK2, &near, p);
        assert!(close(k, eval(F::VeryLargeM, &near, p), 1e-10));
    }
}

#[test]
fn large_m_sub_limits() {
    let base = ScalingFrame::near_circle_outer(4, 0.2, 2.0, 1.0).unwrap();
    let small = base.with_mu(1e-7).unwrap();
    for p in grid(1.0, 3.0) {
        assert!(close(eval(F::MLargeK1, &small, p), eval(F::MLargeK1MuSmall, &small, p), 1e-5));
        assert!(close(eval(F::MLargeK2, &small, p), eval(F::MLargeK2MuSmall, &small, p), 1e-5));
    }
    let far = ScalingFrame::near_circle_outer(4, 0.2, 60.0, 1.0).unwrap().with_mu(0.6).unwrap();
    for p in grid(1.0, 2.0 * PI / 0.6) {
        assert!(close(eval(F::MLargeK1, &far, p), eval(F::MLargeK1ULarge, &far, p), 1e-12));
        assert!(close(eval(F::MLargeK2, &far, p), eval(F::MLargeK2ULarge, &far, p), 1e-12));
    }
    let thin = ScalingFrame::near_circle_outer(4, 0.2, 2.0, 1e-6).unwrap().with_mu(0.6).unwrap();
    for (p1, p2) in [(0.0, 0.0), (1.0, -2.0), (5.0, 0.5)] {
        for (id, one) in [(F::MLargeK1, F::MLargeK1TSmall), (F::MLargeK2, F::MLargeK2TSmall)] {
            let k = eval_limit_kernel(id, &thin, 0.0, p1, 0.0, p2).unwrap();
            assert!(close(k, one_dim_limit(one, &thin, p1, p2).unwrap(), 1e-5));
        }
    }
    let thin = thin.with_mu(2.0).unwrap();
    let k = eval_limit_kernel(F::VeryLargeM, &thin, 0.0, 0.7, 0.0, -1.1).unwrap();
    assert!(close(k, one_dim_limit(F::VeryLargeM, &thin, 0.7, -1.1).unwrap(), 1e-5));
}

#[test]
fn fixed_m_sub_limits() {
    // u → ∞ takes the non-universal kernel to the universal one (up to the
    // unimodular phase s₁ s̄₂/|s₁ s₂| → 1).
    let far = ScalingFrame::near_circle_outer(5, 0.3, 1e7, 1.0).unwrap().with_m(2);
    for p in grid(1.0, 2.0) {
        let a = eval(F::NonUniversalMFixed, &far, p);
        let b = eval(F::UniversalMFixed, &far, p);
        assert!(close(a, b, 1e-6), "{a} vs {b}");
    }
    let thin = ScalingFrame::near_circle_outer(5, 0.3, 2.0, 1e-7).unwrap().with_m(2);
    for (p1, p2) in [(0.0, 0.0), (0.4, -1.0)] {
        let k = eval_limit_kernel(F::NonUniversalMFixed, &thin, 0.0, p1, 0.0, p2).unwrap();
        assert!(close(k, one_dim_limit(F::OneDimMFixed, &thin, p1, p2).unwrap(), 1e-6));
    }
    // Off resonance the first part is O(1) while the second is O(N²).
    let off = ScalingFrame::near_circle_outer(50, 0.3, 2.0, 1.0).unwrap().with_m(2).with_psi(PI / 2.0);
    let k1 = eval(F::NonUniversalMFixedK1, &off, (0.3, 0.0, 0.3, 0.0));
    let k2 = eval(F::NonUniversalMFixedK2, &off, (0.3, 0.0, 0.3, 0.0));
    assert!(k1.norm() < 1e-2 * k2.norm());
    assert!(eval_limit_kernel(F::NonUniversalMFixed, &off, 0.3, 0.0, 0.3, 0.0).is_err());
}

fn phase(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -phi)
}

#[test]
fn thin_annulus_self_duality() {
    let (g, tw) = (0.35, 1.3);
    let f = ScalingFrame::thin_annulus(3, 1.0, g, tw).unwrap();
    let d = ScalingFrame::thin_annulus(3, 1.0, -g - 1.0, tw).unwrap();
    for p in grid(tw, 4.0) {
        let a = eval(F::ThinAnnulusUniversal, &f, p) * phase(p.1 - p.3);
        let b = eval(F::ThinAnnulusUniversal, &d, (tw - p.0, -p.1, tw - p.2, -p.3));
        assert!(close(a, b, 1e-10));
    }
}

#[test]
fn inner_outer_edge_dualities() {
    let n = 3;
    let g = -0.35;
    let f = ScalingFrame::thin_annulus(n, 1.25, g, 1.0).unwrap();
    let d = ScalingFrame::thin_annulus(n, 1.0 / 1.25, -g - 1.0, 1.0).unwrap();
    let v4 = 1.25f64.powi(-4);
    for p in grid(3.0, 4.0) {
        let a = eval(F::Kappa2, &f, p) * phase(p.1 - p.3);
        let b = eval(F::Kappa2Tilde, &d, (p.0, -p.1, p.2, -p.3)) * v4;
        assert!(close(a, b, 1e-10), "{a} vs {b}");
    }
    let f = ScalingFrame::disc_edge(n, 1.25, 0.4).unwrap();
    let d = ScalingFrame::exterior_edge(n, 1.0 / 1.25, -1.4).unwrap();
    for p in grid(3.0, 4.0) {
        let a = eval(F::DiscEdgeKappa, &f, p) * phase(p.1 - p.3);
        let b = eval(F::ExteriorEdgeKappaTilde, &d, (p.0, -p.1, p.2, -p.3)) * v4;
        assert!(close(a, b, 1e-10));
    }
}

#[test]
fn interior_exterior_dualities() {
    let (g, mu, u, tw) = (0.25, 0.4, -0.7, 1.2);
    let inner = ScalingFrame::near_circle_inner(4, g, u, tw).unwrap();
    let outer = |gamma: f64, mu: f64| {
        ScalingFrame::near_circle_outer(4, gamma, tw - u, tw).unwrap().with_mu(mu).unwrap()
    };
    let map = |p: (f64, f64, f64, f64)| (tw - p.0, -p.1, tw - p.2, -p.3);
    let cases = [
        (F::InteriorMLargeK1, F::MLargeK2, mu, -g + mu - 1.0),
        (F::InteriorMLargeK2, F::MLargeK1, mu, -g + mu - 1.0),
        (F::InteriorVeryLargeM, F::VeryLargeM, 1.6, -g + 1.6 - 1.0),
        (F::InteriorNonUniversalMFixed, F::NonUniversalMFixed, 0.0, -g - 1.0),
        (F::InteriorUniversal, F::UniversalMFixed, 0.0, -g - 1.0),
    ];
    for (int_id, ext_id, m, dual_gamma) in cases {
        let fi = inner.with_mu(m).unwrap();
        let fo = outer(dual_gamma, m);
        let phi_max = if m > 0.0 { 2.0 * PI / m } else { 3.0 };
        for p in grid(tw, phi_max) {
            let a = eval(int_id, &fi, p) * phase(p.1 - p.3);
            let b = eval(ext_id, &fo, map(p));
            assert!(close(a, b, 1e-10), "{}: {a} vs {b}", int_id.name());
        }
    }
}
