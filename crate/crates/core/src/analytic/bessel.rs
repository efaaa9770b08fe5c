//! Modified Bessel functions of the second kind, orders 0, 1 and 2.
//!
//! `bessel_k` uses the ascending series for `x <= 2` and Steed's continued
//! fraction (Temme's formulation) above. `bessel_k_integral` evaluates the
//! representation `K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt` by adaptive
//! quadrature and serves as the reference the fast path is held to.

use super::quad::integrate;
use super::AnalyticError;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_args(n: u32, x: f64) -> Result<(), AnalyticError> {
    if n > 2 {
        return Err(AnalyticError::Unsupported(format!("bessel_k order {n}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(AnalyticError::Domain(format!("bessel_k argument must be positive, got {x}")));
    }
    Ok(())
}

pub fn bessel_k(n: u32, x: f64) -> Result<f64, AnalyticError> {
    check_args(n, x)?;
    let (k0, k1) = if x <= 2.0 { k01_series(x) } else { k01_continued_fraction(x) };
    Ok(match n {
        0 => k0,
        1 => k1,
        _ => k0 + 2.0 * k1 / x,
    })
}

/// Exponentially scaled `e^x K_n(x)`, finite for large arguments.
pub fn bessel_k_scaled(n: u32, x: f64) -> Result<f64, AnalyticError> {
    check_args(n, x)?;
    if x <= 2.0 {
        return Ok(bessel_k(n, x)? * x.exp());
    }
    let (k0, k1) = k01_continued_fraction_scaled(x);
    Ok(match n {
        0 => k0,
        1 => k1,
        _ => k0 + 2.0 * k1 / x,
    })
}

fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    // K0 = -(ln(x/2) + gamma) I0 + sum q^k/(k!)^2 H_k
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum q^k/(k!(k+1)!) (psi(k+1) + psi(k+2))
    let mut term0 = 1.0; // q^k / (k!)^2
    let mut term1 = 1.0; // q^k / (k! (k+1)!)
    let mut harmonic = 0.0;
    let mut i0 = 0.0;
    let mut i1_sum = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let psi_k1 = -EULER_GAMMA + harmonic;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i0 += term0;
        i1_sum += term1;
        s0 += term0 * harmonic;
        s1 += term1 * (psi_k1 + psi_k2);
        if term0 < 1e-18 * i0 && k > 2 {
            break;
        }
        term0 *= q / ((kf + 1.0) * (kf + 1.0));
        term1 *= q / ((kf + 1.0) * (kf + 2.0));
        harmonic += 1.0 / (kf + 1.0);
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let (k0, k1) = k01_continued_fraction_scaled(x);
    let e = (-x).exp();
    (k0 * e, k1 * e)
}

fn k01_continued_fraction_scaled(x: f64) -> (f64, f64) {
    // order mu = 0
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Reference evaluation by quadrature of the integral representation,
/// truncated where `exp(-x cosh t) cosh(n t) < 1e-18`.
pub fn bessel_k_integral(n: u32, x: f64) -> Result<f64, AnalyticError> {
    check_args(n, x)?;
    let nf = n as f64;
    // work with the scaled integrand exp(-x (cosh t - 1)) to keep large x finite
    let integrand = |t: f64| (-x * (t.cosh() - 1.0)).exp() * (nf * t).cosh();
    let mut t_max = 1.0;
    while integrand(t_max) > 1e-18 * integrand(0.0).max(1e-300) || t_max < 1.0 {
        t_max += 0.5;
    }
    let value = integrate(integrand, 0.0, t_max, 0.0, 1e-14);
    Ok(value * (-x).exp())
}
