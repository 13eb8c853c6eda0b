//! Special functions behind the closed-form maximum-risk expressions.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this `harmonic` switches from direct summation to the asymptotic expansion.
pub const HARMONIC_EXACT_LIMIT: u64 = 1_000_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal branch `W0` of the Lambert W function: the `x >= -1` solving `x * exp(x) = y`.
///
/// Halley iteration from a branch-point series (near `-1/e`), a Taylor seed (near 0),
/// or the `log y - log log y` asymptote (large `y`).
pub fn lambert_w0(y: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if y.is_nan() || y < branch {
        return Err(Error::Domain(format!("lambert_w0 requires y >= -1/e, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut x = if y < -0.25 {
        // 1 + e*y can round below zero right at the branch point
        let p = (2.0 * (1.0 + E * y)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if y < 0.5 {
        y * (1.0 - y * (1.0 - 1.5 * y))
    } else if y < 3.0 {
        let l = y.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = y.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    if x <= -1.0 {
        return Ok(-1.0);
    }

    for _ in 0..64 {
        let ex = x.exp();
        let f = x * ex - y;
        let xp1 = x + 1.0;
        if xp1 <= 0.0 {
            return Ok(-1.0);
        }
        let denom = ex * xp1 - (x + 2.0) * f / (2.0 * xp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = (x - step).max(-1.0);
        if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7, with reflection below 1/2).
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).ln() - ln_gamma_positive(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Beta function `Gamma(a) Gamma(b) / Gamma(a + b)`, evaluated in log space.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta(a, b)?.exp())
}

pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("beta requires a, b > 0, got ({a}, {b})")));
    }
    Ok(ln_gamma_positive(a) + ln_gamma_positive(b) - ln_gamma_positive(a + b))
}

/// `n`-th harmonic number. Exact (reverse-order) summation up to [`HARMONIC_EXACT_LIMIT`],
/// asymptotic expansion beyond.
pub fn harmonic(n: u64) -> f64 {
    if n <= HARMONIC_EXACT_LIMIT {
        (1..=n).rev().map(|i| 1.0 / i as f64).sum()
    } else {
        harmonic_asymptotic(n)
    }
}

/// `gamma + ln n + 1/(2n) - 1/(12 n^2) + 1/(120 n^4)`.
pub fn harmonic_asymptotic(n: u64) -> f64 {
    let n = n as f64;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    EULER_GAMMA + n.ln() + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn lambert_known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert_relative_eq!(lambert_w0(E).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(lambert_w0(-1.0 / E).unwrap(), -1.0, epsilon = 1e-7);
        assert!(lambert_w0(-0.4).is_err());
    }

    #[test]
    fn lambert_at_one_matches_newton() {
        // Newton on x e^x - 1, independent of the Halley path
        let mut x = 0.5_f64;
        for _ in 0..100 {
            x -= (x * x.exp() - 1.0) / ((x + 1.0) * x.exp());
        }
        assert_relative_eq!(x, 0.567_143_290_4, epsilon = 1e-10);
        assert_relative_eq!(lambert_w0(1.0).unwrap(), x, max_relative = 1e-12);
    }

    #[test]
    fn lambert_large_arguments() {
        for y in [1e3, 1e8, 1e20, 1e100, 1e300] {
            let w = lambert_w0(y).unwrap();
            assert_relative_eq!(w + w.ln(), y.ln(), max_relative = 1e-13);
        }
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        assert_relative_eq!(log_gamma(0.5).unwrap(), 0.572_364_942_924_700_1, max_relative = 1e-12);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(log_gamma(171.0).unwrap(), 706.573_062_245_787_4, max_relative = 1e-12);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(beta(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(beta(7.0, 1.0).unwrap(), 1.0 / 7.0, max_relative = 1e-13);
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
    }

    #[test]
    fn beta_two_half_matches_quadrature() {
        // Gamma(x) = int_0^inf t^(x-1) e^-t dt; t = u^2 makes Gamma(1/2) = 2 int e^(-u^2) du,
        // and Gamma(2.5) = 2 int u^4 e^(-u^2) du, both smooth on [0, 12].
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let (a, b, m) = (0.0, 12.0, 20_000);
            let h = (b - a) / m as f64;
            let mut s = f(a) + f(b);
            for i in 1..m {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + i as f64 * h);
            }
            s * h / 3.0
        };
        let g_half = 2.0 * simpson(&|u| (-u * u).exp());
        let g_25 = 2.0 * simpson(&|u| u.powi(4) * (-u * u).exp());
        let oracle = 1.0 * g_half / g_25;
        assert_relative_eq!(oracle, 4.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(beta(2.0, 0.5).unwrap(), oracle, max_relative = 1e-12);
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(1), 1.0);
        assert_relative_eq!(harmonic(4), 25.0 / 12.0, max_relative = 1e-15);
        let direct: f64 = (1..=1_000_000u64).rev().map(|i| 1.0 / i as f64).sum();
        assert!((harmonic_asymptotic(1_000_000) - direct).abs() < 1e-9);
        assert!((harmonic(1_000_001) - direct - 1.0 / 1_000_001.0).abs() < 1e-9);
    }

    #[test]
    fn harmonic_increments() {
        let mut prev = harmonic(1);
        for n in 2..=10_000u64 {
            let h = harmonic(n);
            assert_relative_eq!(h - prev, 1.0 / n as f64, max_relative = 1e-9);
            prev = h;
        }
    }

    proptest! {
        #[test]
        fn lambert_inverts_product_log(x in -0.999f64..10.0) {
            let w = lambert_w0(x * x.exp()).unwrap();
            prop_assert!((w - x).abs() < 1e-10, "x={x} w={w}");
        }

        #[test]
        fn beta_is_symmetric(a in 0.01f64..50.0, b in 0.01f64..50.0) {
            let ab = beta(a, b).unwrap();
            let ba = beta(b, a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-13 * ab.abs());
        }

        #[test]
        fn gamma_recurrence(x in 1e-3f64..20.0) {
            let lhs = log_gamma(x + 1.0).unwrap().exp();
            let rhs = x * log_gamma(x).unwrap().exp();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
        }
    }
}
