use std::f64::consts::PI;

use annulus_gas::asymptotics::{FormulaId, ScalingFrame};
use annulus_gas::scaling::{
    compare, compare_with, convergence_ladder, matched_spec, scaled_point, universality_probe,
    ScaledGrid, ScaledPair,
};
use annulus_gas::{Complex64, KernelEvaluator, RadialProfile};
use proptest::prelude::*;

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn line_grid(t: f64, k: usize) -> ScaledGrid {
    let pairs = (0..k)
        .map(|j| ScaledPair {
            t1: t,
            phi1: -PI + 2.0 * PI * j as f64 / (k - 1) as f64,
            t2: t,
            phi2: 0.0,
        })
        .collect();
    ScaledGrid { pairs, description: format!("t = {t}, {k} angles in [-pi, pi]") }
}

#[test]
fn sine_kernel_close_to_finite_n() {
    let f = ScalingFrame::thin_annulus(400, 1.0, 0.0, 0.05).unwrap();
    let kev = KernelEvaluator::build(&matched_spec(&f, &RadialProfile::Flat).unwrap()).unwrap();
    let r = compare(&kev, FormulaId::SineKernel, &f, &line_grid(0.02, 17)).unwrap();
    assert!(r.sup < 0.1, "{}", r.sup);
}

#[test]
fn thin_annulus_ladder_decreases() {
    let f = ScalingFrame::thin_annulus(50, 1.0, 0.0, 1.0).unwrap();
    let sups: Vec<f64> = convergence_ladder(FormulaId::ThinAnnulusUniversal, &f, &RadialProfile::Flat, &[50, 100, 200])
        .unwrap()
        .iter()
        .map(|r| r.sup)
        .collect();
    assert!(decreasing(&sups), "{sups:?}");
}

#[test]
fn off_resonance_profile_independence() {
    // e^{iMψ} ≠ 1: the universal fixed-M branch, Flat vs Power(2).
    let f = ScalingFrame::near_circle_outer(100, 0.0, 2.0, 1.0).unwrap().with_m(2).with_psi(PI / 2.0);
    let grid = ScaledGrid::default_for(FormulaId::UniversalMFixed, &f);
    let pair = (&RadialProfile::Flat, &RadialProfile::Power { alpha: 2.0 });
    let devs: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| universality_probe(&f, pair, n, &grid).unwrap().sup)
        .collect();
    assert!(decreasing(&devs), "{devs:?}");
}

#[test]
fn gamma_independence_of_two_point_ratios() {
    // ρ₂/(ρ₁ρ₁) at γ = 0 and γ = 0.3 in a T = 0.05 frame.
    let grid = line_grid(0.02, 9);
    let ratio = |n: usize, gamma: f64| -> Vec<f64> {
        let f = ScalingFrame::thin_annulus(n, 1.0, gamma, 0.05).unwrap();
        let kev = KernelEvaluator::build(&matched_spec(&f, &RadialProfile::Flat).unwrap()).unwrap();
        grid.pairs
            .iter()
            .map(|p| {
                let z1 = scaled_point(&f, p.t1, p.phi1).unwrap();
                let z2 = scaled_point(&f, p.t2, p.phi2).unwrap();
                let d = kev.density(z1).unwrap() * kev.density(z2).unwrap();
                kev.correlation(&[z1, z2]).unwrap().value / d
            })
            .collect()
    };
    let gaps: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| {
            ratio(n, 0.0)
                .iter()
                .zip(ratio(n, 0.3))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(decreasing(&gaps), "{gaps:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Deviations only see |K| and 2×2 determinants, so a local gauge
    /// K ↦ c(z₁) K conj(c(z₂)) must not change the report.
    #[test]
    fn reports_ignore_rephasing(a in -3.0f64..3.0, b in -3.0f64..3.0, k in -5i32..5) {
        let f = ScalingFrame::thin_annulus(60, 1.0, 0.0, 1.0).unwrap();
        let kev = KernelEvaluator::build(&matched_spec(&f, &RadialProfile::Flat).unwrap()).unwrap();
        let id = FormulaId::ThinAnnulusUniversal;
        let grid = ScaledGrid::default_for(id, &f);
        let phase = |z: Complex64| Complex64::from_polar(1.0, a * z.norm() + b * z.norm_sqr() + k as f64 * z.arg());
        let plain = compare_with(|z1, z2| kev.eval(z1, z2), id, &f, &grid).unwrap();
        let gauged = compare_with(|z1, z2| Ok(phase(z1) * kev.eval(z1, z2)? * phase(z2).conj()), id, &f, &grid).unwrap();
        prop_assert!((plain.sup - gauged.sup).abs() <= 1e-12 * plain.sup.max(1e-300));
        prop_assert!((plain.mean - gauged.mean).abs() <= 1e-12 * plain.mean.max(1e-300));
        // And compare_with agrees with compare on the evaluator itself.
        let direct = compare(&kev, id, &f, &grid).unwrap();
        prop_assert!((plain.sup - direct.sup).abs() <= 1e-12 * direct.sup);
    }

    #[test]
    fn scaled_points_are_injective(
        t1 in 0.0f64..1.0, p1 in -3.1f64..3.1,
        dt in -0.5f64..0.5, dp in -3.0f64..3.0,
    ) {
        prop_assume!(dt.abs() > 1e-6 || dp.abs() > 1e-6);
        let f = ScalingFrame::thin_annulus(100, 1.0, 0.0, 1.0).unwrap();
        let t2 = (t1 + dt).clamp(0.0, 1.0);
        let p2 = (p1 + dp).clamp(-3.1, 3.1);
        prop_assume!((t2 - t1).abs() > 1e-6 || (p2 - p1).abs() > 1e-6);
        let z1 = scaled_point(&f, t1, p1).unwrap();
        let z2 = scaled_point(&f, t2, p2).unwrap();
        prop_assert!(z1 != z2);
    }
}
