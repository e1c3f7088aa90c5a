//! Adaptive Gauss–Kronrod integration on finite intervals, the periodic
//! trapezoid rule, and the annulus tensor product built from the two.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use crate::{Error, Result};

// 15-point Kronrod nodes on [0, 1] (positive half) and weights; the odd
// entries are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance {
            rel,
            abs: 0.0,
            max_intervals: 4000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub l1: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    l1: f64,
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    let mut vals = [Complex64::new(0.0, 0.0); 15];
    vals[7] = fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        vals[j] = f1;
        vals[14 - j] = f2;
        k += (f1 + f2) * WGK[j];
        l1 += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    // QUADPACK-style rescaling of the raw Kronrod/Gauss difference.
    let mean = k * 0.5;
    let mut asc = (fc - mean).norm() * WGK[7];
    for j in 0..7 {
        asc += ((vals[j] - mean).norm() + (vals[14 - j] - mean).norm()) * WGK[j];
    }
    let asc = asc * h.abs();
    let mut err = ((k - g) * h).norm();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if !err.is_finite() {
        err = f64::INFINITY;
    }
    Segment {
        a,
        b,
        value: k * h,
        error: err,
        l1: l1 * h.abs(),
    }
}

/// Integrate a complex-valued function over `[a, b]` with global adaptive
/// bisection of the worst segment.
pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<QuadResult<Complex64>> {
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            l1: 0.0,
            intervals: 0,
        });
    }
    let mut segs: Vec<Segment> = Vec::with_capacity(64);
    segs.push(kronrod(&mut f, a, b));
    loop {
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        let mut l1 = 0.0;
        let mut worst = 0;
        for (i, s) in segs.iter().enumerate() {
            value += s.value;
            error += s.error;
            l1 += s.l1;
            if s.error > segs[worst].error {
                worst = i;
            }
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::QuadratureNonConvergence(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let target = (tol.rel * value.norm())
            .max(tol.abs)
            .max(tol.rel * 1e-3 * l1)
            .max(50.0 * f64::EPSILON * l1);
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                l1,
                intervals: segs.len(),
            });
        }
        if segs.len() >= tol.max_intervals {
            return Err(Error::QuadratureNonConvergence(format!(
                "error estimate {error:.3e} above target {target:.3e} after {} intervals",
                segs.len()
            )));
        }
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a.min(s.b) || mid >= s.a.max(s.b) {
            return Err(Error::QuadratureNonConvergence(format!(
                "interval collapsed near {mid}"
            )));
        }
        segs.push(kronrod(&mut f, s.a, mid));
        segs.push(kronrod(&mut f, mid, s.b));
    }
}

/// Real-valued counterpart of [`integrate_complex`].
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<QuadResult<f64>> {
    let r = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, tol)?;
    Ok(QuadResult {
        value: r.value.re,
        error: r.error,
        l1: r.l1,
        intervals: r.intervals,
    })
}

/// Integrate over `[a, inf)` through the substitution `x = a + s/(1-s)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    tol: Tolerance,
) -> Result<QuadResult<f64>> {
    integrate(
        |s| {
            let d = 1.0 - s;
            let v = f(a + s / d);
            if v == 0.0 {
                0.0
            } else {
                v / (d * d)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Trapezoid rule for a `2π`-periodic function, doubling the node count
/// from `min_nodes` until two successive estimates agree to `rel` (measured
/// against the L1 size of the integrand).
pub fn periodic_trapezoid<F: FnMut(f64) -> Complex64>(
    mut f: F,
    min_nodes: usize,
    rel: f64,
    max_nodes: usize,
) -> Result<Complex64> {
    let mut n = min_nodes.max(4);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for j in 0..n {
        let v = f(2.0 * PI * j as f64 / n as f64);
        sum += v;
        l1 += v.norm();
    }
    let mut prev = sum * (2.0 * PI / n as f64);
    while n < max_nodes {
        // Only the midpoints are new.
        for j in 0..n {
            let v = f(2.0 * PI * (j as f64 + 0.5) / n as f64);
            sum += v;
            l1 += v.norm();
        }
        n *= 2;
        let h = 2.0 * PI / n as f64;
        let cur = sum * h;
        let tol = rel * (l1 * h).max(f64::MIN_POSITIVE);
        if (cur - prev).norm() <= tol {
            // Nested rules share all aliased modes of the coarser one, so a
            // one-sided Fourier tail can fool the doubling test. Confirm with
            // n + 1 nodes, whose aliases coincide only at multiples of n(n+1).
            let m = n + 1;
            let check: Complex64 =
                (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).sum::<Complex64>() * (2.0 * PI / m as f64);
            if (check - cur).norm() <= tol {
                return Ok(cur);
            }
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "periodic trapezoid did not settle with {n} nodes"
    )))
}

/// Two-dimensional integral of `f(r, θ)·r` over the annulus `[r_in, r_out]`
/// (outer radius may be infinite), with adaptive radial and trapezoidal
/// angular quadrature.
pub fn integrate_annulus<F: FnMut(f64, f64) -> Complex64>(
    mut f: F,
    r_in: f64,
    r_out: f64,
    min_angular: usize,
    tol: Tolerance,
) -> Result<Complex64> {
    let mut failure: Option<Error> = None;
    let mut ring = |r: f64| -> Complex64 {
        if failure.is_some() {
            return Complex64::new(0.0, 0.0);
        }
        match periodic_trapezoid(|th| f(r, th), min_angular, tol.rel * 1e-2, 1 << 16) {
            Ok(v) => v * r,
            Err(e) => {
                failure = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let res = if r_out.is_infinite() {
        integrate_complex(
            |s| {
                if s <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let r = r_in / s;
                ring(r) * (r_in / (s * s))
            },
            0.0,
            1.0,
            tol,
        )
    } else {
        integrate_complex(&mut ring, r_in, r_out, tol)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(res?.value)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = alloc::vec![0.0; n];
    let mut ws = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}
