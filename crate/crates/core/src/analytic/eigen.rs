//! Radial eigenfunctions of the force-free operator and spherical harmonics.
//!
//! `g_J(a) = C_J (z^2 - 1)^(J/2) (d/dz)^(J+1) cos(k acosh z)`, `z = cosh a`, solves
//! `D [g'' + 2 coth(a) g' - J(J+1) g / sinh^2 a] = -D (k^2 + 1) g`.
//! Closed forms for `J <= 2` are written out below; their first and second
//! derivatives come from second-order forward-mode differentiation.

use super::AnalyticError;
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenmodeIndex {
    pub j: u32,
    pub m: i32,
    pub kappa: f64,
}

impl EigenmodeIndex {
    pub fn new(j: u32, m: i32, kappa: f64) -> Result<Self, AnalyticError> {
        if m.unsigned_abs() > j {
            return Err(AnalyticError::Domain(format!("|M| = {} exceeds J = {j}", m.abs())));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(AnalyticError::Domain(format!("kappa must be positive, got {kappa}")));
        }
        Ok(EigenmodeIndex { j, m, kappa })
    }

    /// `lambda = D (kappa^2 + 1)`.
    pub fn eigenvalue(&self, diffusion: f64) -> f64 {
        diffusion * (self.kappa * self.kappa + 1.0)
    }
}

/// Truncated Taylor jet `(f, f', f'')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn variable(x: f64) -> Self {
        Jet2 { v: x, d1: 1.0, d2: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Jet2 { v: c, d1: 0.0, d2: 0.0 }
    }

    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Jet2 { v: f, d1: df * self.d1, d2: ddf * self.d1 * self.d1 + df * self.d2 }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn scale(self, k: f64) -> Self {
        Jet2 { v: k * self.v, d1: k * self.d1, d2: k * self.d2 }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let inv = 1.0 / o.v;
        let r = Jet2 { v: inv, d1: -o.d1 * inv * inv, d2: (2.0 * o.d1 * o.d1 * inv - o.d2) * inv * inv };
        self * r
    }
}

/// `(z^2 - 1)^(J/2) (d/dz)^(J+1) cos(k acosh z)` written in `a`.
fn radial_core(j: u32, k: f64, alpha: Jet2) -> Jet2 {
    let ka = alpha.scale(k);
    let (s, c) = (ka.sin(), ka.cos());
    let (sh, ch) = (alpha.sinh(), alpha.cosh());
    match j {
        0 => -(s.scale(k) / sh),
        1 => (-c.scale(k * k) + s.scale(k) * ch / sh) / sh,
        _ => (s.scale(k * k * k + k) * sh + c.scale(3.0 * k * k) * ch - s.scale(3.0 * k) * ch * ch / sh) / (sh * sh),
    }
}

/// `C_J = (-1)^J (sqrt(2) pi)^-1 prod_{n=0..J} (k^2 + n^2)^(-1/2)`, signed so
/// that `g_0 = -(sqrt(2) pi)^-1 sin(k a) / sinh a`.
pub fn eigen_constant(j: u32, kappa: f64) -> f64 {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let prod: f64 = (0..=j).map(|n| (kappa * kappa + (n * n) as f64).powf(-0.5)).product();
    sign * prod / (2f64.sqrt() * PI)
}

fn check_mode(idx: &EigenmodeIndex, alpha: f64) -> Result<(), AnalyticError> {
    if idx.j > 2 {
        return Err(AnalyticError::Unsupported(format!("eigenfunction for J = {}", idx.j)));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(AnalyticError::Domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// `g_J(a)` with its first two derivatives.
pub fn eigenfunction_jet(idx: &EigenmodeIndex, alpha: f64) -> Result<Jet2, AnalyticError> {
    check_mode(idx, alpha)?;
    Ok(radial_core(idx.j, idx.kappa, Jet2::variable(alpha)).scale(eigen_constant(idx.j, idx.kappa)))
}

pub fn eigenfunction_g(idx: &EigenmodeIndex, alpha: f64) -> Result<f64, AnalyticError> {
    eigenfunction_jet(idx, alpha).map(|j| j.v)
}

/// `|D [g'' + 2 coth(a) g' - J(J+1) g / sinh^2 a] + lambda g|` for a given `lambda`.
pub fn eigen_residual_with(
    idx: &EigenmodeIndex,
    alpha: f64,
    diffusion: f64,
    lambda: f64,
) -> Result<f64, AnalyticError> {
    let g = eigenfunction_jet(idx, alpha)?;
    let jj = (idx.j * (idx.j + 1)) as f64;
    let op = g.d2 + 2.0 / alpha.tanh() * g.d1 - jj * g.v / alpha.sinh().powi(2);
    Ok((diffusion * op + lambda * g.v).abs())
}

/// Residual at the eigenvalue `lambda = D (kappa^2 + 1)`.
pub fn eigen_residual(idx: &EigenmodeIndex, alpha: f64, diffusion: f64) -> Result<f64, AnalyticError> {
    eigen_residual_with(idx, alpha, diffusion, idx.eigenvalue(diffusion))
}

/// Spherical harmonic `Y_J^M(theta, phi)` with unit L2 norm on the sphere
/// and the Condon-Shortley phase; returns `(re, im)`.
pub fn spherical_harmonic(j: u32, m: i32, theta: f64, phi: f64) -> Result<(f64, f64), AnalyticError> {
    if j > 2 || m.unsigned_abs() > j {
        return Err(AnalyticError::Domain(format!("unsupported harmonic J = {j}, M = {m}")));
    }
    let am = m.unsigned_abs();
    let (st, ct) = theta.sin_cos();
    let legendre = match (j, am) {
        (0, 0) => 1.0,
        (1, 0) => ct,
        (1, 1) => -st,
        (2, 0) => 0.5 * (3.0 * ct * ct - 1.0),
        (2, 1) => -3.0 * ct * st,
        _ => 3.0 * st * st,
    };
    let fact = |n: u32| (1..=n).product::<u32>() as f64;
    let norm = ((2 * j + 1) as f64 / (4.0 * PI) * fact(j - am) / fact(j + am)).sqrt();
    let (s, c) = (am as f64 * phi).sin_cos();
    let (re, im) = (norm * legendre * c, norm * legendre * s);
    if m >= 0 {
        Ok((re, im))
    } else {
        // Y_J^{-M} = (-1)^M conj(Y_J^M)
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok((sign * re, -sign * im))
    }
}
