//! Log-modulus/phase arithmetic.
//!
//! Kernel summands span hundreds of orders of magnitude at large N, so they
//! are carried as `(ln|x|, arg x)` pairs and only exponentiated relative to a
//! running maximum.

use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

/// A complex number stored as `exp(ln_mod) * exp(i arg)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPolar {
    pub ln_mod: f64,
    pub arg: f64,
}

impl LogPolar {
    pub const ZERO: LogPolar = LogPolar {
        ln_mod: f64::NEG_INFINITY,
        arg: 0.0,
    };
    pub const ONE: LogPolar = LogPolar {
        ln_mod: 0.0,
        arg: 0.0,
    };

    pub fn new(ln_mod: f64, arg: f64) -> Self {
        LogPolar { ln_mod, arg }
    }

    pub fn from_complex(c: Complex64) -> Self {
        let m = c.re.hypot(c.im);
        if m == 0.0 {
            return LogPolar::ZERO;
        }
        LogPolar {
            ln_mod: m.ln(),
            arg: c.im.atan2(c.re),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.ln_mod == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.ln_mod.exp();
        let (s, c) = self.arg.sin_cos();
        Complex64::new(m * c, m * s)
    }

    pub fn is_zero(self) -> bool {
        self.ln_mod == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogPolar) -> Self {
        if self.is_zero() || other.is_zero() {
            return LogPolar::ZERO;
        }
        LogPolar {
            ln_mod: self.ln_mod + other.ln_mod,
            arg: self.arg + other.arg,
        }
    }

    pub fn conj(self) -> Self {
        LogPolar {
            ln_mod: self.ln_mod,
            arg: -self.arg,
        }
    }

    pub fn neg(self) -> Self {
        LogPolar {
            ln_mod: self.ln_mod,
            arg: self.arg + PI,
        }
    }
}

/// Streaming sum of log-polar terms with a running maximum, so that no term
/// is exponentiated at its raw magnitude.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAccumulator {
    max: f64,
    acc: Complex64,
}

impl Default for LogSumAccumulator {
    fn default() -> Self {
        LogSumAccumulator {
            max: f64::NEG_INFINITY,
            acc: Complex64::new(0.0, 0.0),
        }
    }
}

impl LogSumAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: LogPolar) {
        if term.is_zero() {
            return;
        }
        if term.ln_mod > self.max {
            if self.max != f64::NEG_INFINITY {
                self.acc *= (self.max - term.ln_mod).exp();
            }
            self.max = term.ln_mod;
        }
        let m = (term.ln_mod - self.max).exp();
        let (s, c) = term.arg.sin_cos();
        self.acc += Complex64::new(m * c, m * s);
    }

    pub fn value(&self) -> Complex64 {
        if self.max == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        self.acc * self.max.exp()
    }
}

/// `ln(sum exp(x_i))`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln(e^x - 1)` for `x > 0`.
pub fn ln_expm1(x: f64) -> f64 {
    if x > 35.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `ln(1 - e^{-x})` for `x > 0`.
pub fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x > 0.693 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}

/// `e^z - 1` for complex `z`, accurate when `z` is near zero.
pub fn expm1_complex(z: Complex64) -> Complex64 {
    let em1 = z.re.exp_m1();
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    // e^x cos y - 1 = expm1(x) cos y - 2 sin^2(y/2)
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = a % two_pi;
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

/// `z^m - 1` in log-polar form for `z = exp(ln_r + i theta)`, without forming
/// `z^m` when it would overflow or lose the `- 1` to cancellation.
pub fn power_minus_one(ln_r: f64, theta: f64, m: u32) -> LogPolar {
    let mf = m as f64;
    let w = Complex64::new(mf * ln_r, wrap_angle(mf * theta));
    if ln_r <= 0.0 {
        LogPolar::from_complex(expm1_complex(w))
    } else {
        // z^m - 1 = z^m (1 - z^{-m}) = z^m * (-(expm1(-w)))
        let tail = LogPolar::from_complex(-expm1_complex(-w));
        LogPolar::new(w.re + tail.ln_mod, w.im + tail.arg)
    }
}

/// `k * ln_r` with the convention `0 * ln 0 = 0`.
#[inline]
pub fn scaled_ln(k: f64, ln_r: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * ln_r
    }
}

/// `sin(x)/x` with the removable singularity at zero filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(e^{i a phi} - e^{i b phi}) / (i phi)`, i.e. `int_b^a e^{i c phi} dc`,
/// evaluated through its series when `phi` is small.
pub fn phase_quotient(a: f64, b: f64, phi: f64) -> Complex64 {
    let scale = a.abs().max(b.abs());
    if (phi * scale).abs() < 1e-4 {
        let re = (a - b) - phi * phi * (a * a * a - b * b * b) / 6.0;
        let im = phi * (a * a - b * b) / 2.0;
        Complex64::new(re, im)
    } else {
        let ea = Complex64::from_polar(1.0, a * phi);
        let eb = Complex64::from_polar(1.0, b * phi);
        (ea - eb) / Complex64::new(0.0, phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn accumulator_matches_direct_sum() {
        let terms = [
            Complex64::new(1.0, 2.0),
            Complex64::new(-3.0, 0.5),
            Complex64::new(1e-3, -1e-3),
        ];
        let mut acc = LogSumAccumulator::new();
        for t in terms {
            acc.add(LogPolar::from_complex(t));
        }
        let direct: Complex64 = terms.iter().sum();
        assert!((acc.value() - direct).norm() < 1e-14);
    }

    #[test]
    fn accumulator_survives_huge_magnitudes() {
        let mut acc = LogSumAccumulator::new();
        acc.add(LogPolar::new(800.0, 0.0));
        acc.add(LogPolar::new(800.0, 0.0));
        let v = acc.value();
        assert!(v.re.is_infinite());
        let mut acc = LogSumAccumulator::new();
        acc.add(LogPolar::new(-800.0, 0.0));
        acc.add(LogPolar::new(-799.0, 0.0));
        let lp = LogPolar::from_complex(acc.value());
        assert!(lp.ln_mod == f64::NEG_INFINITY || lp.ln_mod < -700.0);
    }

    #[test]
    fn power_minus_one_matches_direct() {
        for &(r, th, m) in &[(2.0, 0.3, 3u32), (0.5, -1.2, 2), (1.01, 0.0, 1), (0.97, 2.0, 5)] {
            let z = Complex64::from_polar(r, th);
            let direct = z.powu(m) - 1.0;
            let lp = power_minus_one(f64::ln(r), th, m);
            let back = lp.to_complex();
            assert!((back - direct).norm() < 1e-13 * direct.norm().max(1.0), "{r} {th} {m}");
        }
    }

    #[test]
    fn power_minus_one_large_m_does_not_overflow() {
        let lp = power_minus_one(f64::ln(3.0), 0.1, 2000);
        assert!(close(lp.ln_mod, 2000.0 * f64::ln(3.0), 1e-12));
    }

    #[test]
    fn ln_helpers() {
        assert!(close(ln_expm1(1e-8), f64::ln(1e-8), 1e-7));
        assert!(close(ln_expm1(50.0), 50.0, 1e-15));
        assert!(close(ln_one_minus_exp_neg(2.0), f64::ln(1.0 - f64::exp(-2.0)), 1e-14));
        assert!(close(log_sum_exp(&[0.0, 0.0]), f64::ln(2.0), 1e-15));
    }

    #[test]
    fn phase_quotient_limits() {
        let q = phase_quotient(1.0, 0.0, 0.0);
        assert!((q - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let phi: f64 = 0.7;
        let q = phase_quotient(0.6, 0.1, phi);
        let direct = (Complex64::from_polar(1.0, 0.6 * phi) - Complex64::from_polar(1.0, 0.1 * phi))
            / Complex64::new(0.0, phi);
        assert!((q - direct).norm() < 1e-15);
        let small = phase_quotient(0.6, 0.1, 1e-6);
        assert!((small.re - 0.5).abs() < 1e-12);
    }
}
