//! Special functions: complex log-gamma, generalized Laguerre polynomials,
//! integer-order Bessel functions of the first kind.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute/relative tolerance pair used by the numerical routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Accuracy {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy { abs_tol: 1e-12, rel_tol: 1e-10 }
    }
}

impl Accuracy {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) || !abs_tol.is_finite() || !rel_tol.is_finite() {
            return Err(Error::validation("tolerances must be finite and strictly positive"));
        }
        Ok(Accuracy { abs_tol, rel_tol })
    }
}

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// log Γ(z) for Re z > 0, continuous in z and real on the positive axis.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) || !z.im.is_finite() {
        return Err(Error::domain(format!("ln_gamma_complex requires Re z > 0, got {z}")));
    }
    if z.re < 0.5 {
        // Γ(z) = Γ(z + 1) / z keeps the Lanczos sum in its accurate half-plane.
        return Ok(ln_gamma_complex(z + 1.0)? - z.ln());
    }
    let zm = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += *c / (zm + k as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    Ok(half_ln_2pi + (zm + 0.5) * t.ln() - t + a.ln())
}

/// Generalized Laguerre polynomial L_n^(alpha)(x) by the three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

const SERIES_LIMIT: f64 = 12.0;
const ASYMPTOTIC_LIMIT: f64 = 50.0;

/// Bessel function J_nu(x) of nonnegative integer order.
///
/// Power series below x = 12, Miller backward recurrence up to x = 50 and the
/// Hankel asymptotic expansion beyond.
pub fn bessel_j(nu: u32, x: f64) -> f64 {
    if x < 0.0 {
        // J_nu(-x) = (-1)^nu J_nu(x)
        let v = bessel_j(nu, -x);
        return if nu & 1 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT || (nu as f64) > x {
        bessel_series(nu, x)
    } else if x < ASYMPTOTIC_LIMIT + 2.0 * nu as f64 {
        bessel_miller(nu, x)
    } else {
        bessel_asymptotic(nu, x)
    }
}

fn bessel_series(nu: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=nu {
        term *= h / k as f64;
    }
    let q = h * h;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= -q / (k * (k + nu as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) || k > 500.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

fn bessel_miller(nu: u32, x: f64) -> f64 {
    // Start well above both nu and x so the minimal solution dominates.
    let start = (x.max(nu as f64) + 30.0 + 10.0 * x.sqrt()) as usize;
    let start = start + start % 2;
    let mut jp = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    let mut want = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if k - 1 == nu as usize {
            want = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
    }
    norm += j;
    want / norm
}

fn bessel_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1usize;
    let mut last = f64::INFINITY;
    loop {
        term *= (mu - ((2 * k - 1) as f64).powi(2)) / (k as f64 * 8.0 * x);
        if term.abs() > last || term.abs() < 1e-17 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1;
        if k > 60 {
            break;
        }
    }
    let chi = x - (0.5 * nu as f64 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// |Γ(3/2 + iλ)|², evaluated through the complex log-gamma.
pub fn gamma_abs2_three_half(lambda: f64) -> f64 {
    let lg = ln_gamma_complex(Complex64::new(1.5, lambda)).expect("Re z = 3/2 is in the domain");
    (2.0 * lg.re).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn log_gamma_fixed_points() {
        assert!(ln_gamma_complex(Complex64::new(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(ln_gamma_complex(Complex64::new(2.0, 0.0)).unwrap().norm() < 1e-14);
        let v = ln_gamma_complex(Complex64::new(1.5, 0.0)).unwrap();
        assert!((v.re - (PI.sqrt() / 2.0).ln()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        // ln Γ(10) = ln 362880
        let v = ln_gamma_complex(Complex64::new(10.0, 0.0)).unwrap();
        assert!((v.re - 362880f64.ln()).abs() < 1e-12);
        // small real argument goes through the shift
        let v = ln_gamma_complex(Complex64::new(0.25, 0.0)).unwrap();
        assert!((v.re - 3.625_609_908_221_908f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_rejects_left_half_plane() {
        assert!(ln_gamma_complex(Complex64::new(0.0, 1.0)).is_err());
        assert!(ln_gamma_complex(Complex64::new(-1.5, 0.0)).is_err());
    }

    #[test]
    fn log_gamma_satisfies_recurrence() {
        for &(re, im) in &[(0.7, 3.0), (1.5, -2.0), (4.2, 10.0), (1.5, 25.0)] {
            let z = Complex64::new(re, im);
            let lhs = ln_gamma_complex(z + 1.0).unwrap().exp();
            let rhs = z * ln_gamma_complex(z).unwrap().exp();
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm(), "{z}");
        }
    }

    #[test]
    fn gamma_three_half_line() {
        let closed = |l: f64| PI * (l * l + 0.25) / (PI * l).cosh();
        assert!((gamma_abs2_three_half(0.0) - PI / 4.0).abs() < 1e-14);
        assert!((gamma_abs2_three_half(1.0) - 0.338_768_689_249_273).abs() < 1e-12);
        // monotone decay; the value at 5 is about 2.39e-5, it drops below 1e-5 near 5.35
        assert!((gamma_abs2_three_half(5.0) - 2.390_889_372_605e-5).abs() < 1e-15);
        assert!(gamma_abs2_three_half(5.4) < 1e-5);
        for i in 0..100 {
            let l = 0.1 * i as f64;
            assert!(gamma_abs2_three_half(l + 0.1) < gamma_abs2_three_half(l));
        }
        for i in 0..=1000 {
            let l = i as f64 * 0.01;
            assert!((gamma_abs2_three_half(l) - closed(l)).abs() <= 1e-9);
        }
    }

    #[test]
    fn laguerre_small_cases() {
        assert_eq!(laguerre(0, 0.0, 7.3), 1.0);
        assert!((laguerre(1, 0.0, 0.5) - 0.5).abs() < 1e-15);
        assert!((laguerre(2, 0.0, 2.0) + 1.0).abs() < 1e-15);
        // L_2^(1)(x) = (x^2 - 6x + 6)/2
        let x = 1.7;
        assert!((laguerre(2, 1.0, x) - (x * x - 6.0 * x + 6.0) / 2.0).abs() < 1e-14);
        // L_n^(a)(0) = binom(n + a, n)
        assert!((laguerre(5, 2.0, 0.0) - 21.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert!(bessel_j(1, 3.831_705_970_207_512).abs() < 1e-12);
        // reference values (A&S tables)
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 10.0) - 0.043_472_746_168_861_44).abs() < 1e-13);
        assert!((bessel_j(0, 20.0) - 0.167_024_664_340_583_1).abs() < 1e-13);
        assert!((bessel_j(1, 100.0) + 0.077_145_352_014_112_16).abs() < 1e-13);
        assert!((bessel_j(0, 2.0 * PI) - 0.220_276_908_539_957_9).abs() < 1e-13);
    }

    #[test]
    fn bessel_branches_agree_at_boundaries() {
        for nu in 0..4 {
            for &x in &[12.0, 20.0, 35.0, 49.9, 50.1, 60.0] {
                let m = bessel_miller(nu, x);
                let a = bessel_asymptotic(nu, x);
                assert!((m - a).abs() < 1e-12 || x < 25.0, "nu={nu} x={x} {m} {a}");
                if x <= 12.0 {
                    assert!((m - bessel_series(nu, x)).abs() < 1e-11, "nu={nu} x={x}");
                }
            }
        }
    }
}
