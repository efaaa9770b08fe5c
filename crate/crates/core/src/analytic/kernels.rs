//! Isotropic (J = 0) transition densities of force-free diffusion.
//!
//! All three kernels share the factor `sh(x) exp(-y)` with
//! `x = a a0 / (2 Dt)` and `y = (a^2 + a0^2) / (4 Dt)`; it is evaluated as
//! `exp(-(a - a0)^2 / 4Dt) (1 - exp(-2x)) / 2`, which has no cancellation and
//! no overflow, and the `1 / (a a0)`-type prefactors are folded into `sinhc`
//! so the `a0 -> 0` limit needs no special casing.
//!
//! Each kernel is a density with respect to the volume element of its space
//! (`4 pi sinh^2 a da` on the hyperboloid, `4 pi r^2 dr` otherwise) and
//! integrates to one.

use super::quad::{integrate, TabulatedCdf};
use super::AnalyticError;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    /// Hyperbolic heat kernel of the massive particle.
    Massive,
    /// Euclidean (Wiener) kernel of the nonrelativistic limit.
    Nonrel,
    /// Radial kernel on the null cone.
    Photon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub variant: KernelVariant,
    /// `alpha` or `r`.
    pub radius: f64,
    /// `alpha0` or `r0`.
    pub radius0: f64,
    /// `D * tau`.
    pub dtau: f64,
}

impl KernelQuery {
    pub fn new(variant: KernelVariant, radius: f64, radius0: f64, dtau: f64) -> Result<Self, AnalyticError> {
        if !(radius >= 0.0) || !(radius0 >= 0.0) || !radius.is_finite() || !radius0.is_finite() {
            return Err(AnalyticError::Domain(format!(
                "radial arguments must be nonnegative, got {radius}, {radius0}"
            )));
        }
        if !(dtau > 0.0) || !dtau.is_finite() {
            return Err(AnalyticError::Domain(format!("D*tau must be positive, got {dtau}")));
        }
        Ok(KernelQuery { variant, radius, radius0, dtau })
    }
}

/// `sinh(x) / x`.
#[inline]
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// `sinhc(a b / 2t) * exp(-(a^2 + b^2) / 4t)`.
#[inline]
fn sinhc_gauss(a: f64, b: f64, t: f64) -> f64 {
    let x = a * b / (2.0 * t);
    let near = (-(a - b).powi(2) / (4.0 * t)).exp();
    if x < 1e-8 {
        near * (1.0 - x)
    } else {
        near * (-(-2.0 * x).exp_m1()) / (2.0 * x)
    }
}

pub fn heat_kernel(q: &KernelQuery) -> f64 {
    let t = q.dtau;
    let (a, b) = (q.radius, q.radius0);
    let euclid = (4.0 * PI * t).powf(-1.5) * sinhc_gauss(a, b, t);
    match q.variant {
        KernelVariant::Massive => euclid * (-t).exp() / (sinhc(a) * sinhc(b)),
        KernelVariant::Nonrel | KernelVariant::Photon => euclid,
    }
}

/// The kernels with the shared prefactor `C = 2 (4 pi)^(-3/2)` for the massive
/// and nonrelativistic cases and `(2 r r0 sqrt(pi))^-1` for the photon. Only
/// the massive one is a probability density; the other two integrate to
/// `2` and `2 pi`.
pub fn heat_kernel_shared_constant(q: &KernelQuery) -> f64 {
    let normalized = heat_kernel(q);
    match q.variant {
        KernelVariant::Massive => normalized,
        KernelVariant::Nonrel => 2.0 * normalized,
        KernelVariant::Photon => 2.0 * PI * normalized,
    }
}

/// Density of the radial coordinate itself: `4 pi J(radius) Phi` with
/// `J = sinh^2` (massive) or `r^2`.
pub fn radial_marginal(q: &KernelQuery) -> f64 {
    let jac = match q.variant {
        KernelVariant::Massive => q.radius.sinh().powi(2),
        _ => q.radius * q.radius,
    };
    4.0 * PI * jac * heat_kernel(q)
}

/// Radius beyond which the marginal's tail is negligible (< 1e-14).
pub fn radial_upper_bound(variant: KernelVariant, radius0: f64, dtau: f64) -> f64 {
    let drift = match variant {
        KernelVariant::Massive => 2.0 * dtau,
        _ => 0.0,
    };
    radius0 + drift + 12.0 * (2.0 * dtau).sqrt() + 1.0
}

pub fn radial_cdf_table(
    variant: KernelVariant,
    radius0: f64,
    dtau: f64,
    cells: usize,
) -> Result<TabulatedCdf, AnalyticError> {
    KernelQuery::new(variant, 0.0, radius0, dtau)?;
    let hi = radial_upper_bound(variant, radius0, dtau);
    Ok(TabulatedCdf::from_pdf(|r| radial_marginal(&KernelQuery { variant, radius: r, radius0, dtau }), 0.0, hi, cells))
}

/// Both sides of the Chapman-Kolmogorov identity for the isotropic kernels,
/// `(4 pi int Phi(r, r1, t1) Phi(r1, r0, t2) J(r1) dr1, Phi(r, r0, t1 + t2))`.
pub fn chapman_kolmogorov(
    variant: KernelVariant,
    r: f64,
    r0: f64,
    t1: f64,
    t2: f64,
) -> Result<(f64, f64), AnalyticError> {
    let direct = heat_kernel(&KernelQuery::new(variant, r, r0, t1 + t2)?);
    KernelQuery::new(variant, r, r0, t1)?;
    let hi = radial_upper_bound(variant, r.max(r0), t1 + t2);
    let composed = integrate(
        |r1| {
            let first = heat_kernel(&KernelQuery { variant, radius: r, radius0: r1, dtau: t1 });
            first * radial_marginal(&KernelQuery { variant, radius: r1, radius0: r0, dtau: t2 })
        },
        0.0,
        hi,
        0.0,
        1e-12,
    );
    Ok((composed, direct))
}

/// Radial coefficient of the photon Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonRadialTerm {
    /// `(2 / r) d/dr`, the flat spherical Laplacian.
    TwoOverR,
    /// `2 r d/dr`; the photon kernel does not satisfy this form.
    TwoR,
}

/// Finite-difference residual `dPhi/ds - [Phi_rr + c(r) Phi_r]` of a kernel
/// at `(r, s = D tau)`, with second-order central stencils of width `h` in
/// both `r` and `s`.
pub fn kernel_pde_residual(
    variant: KernelVariant,
    r: f64,
    r0: f64,
    s: f64,
    h: f64,
    photon_term: PhotonRadialTerm,
) -> f64 {
    let phi = |r: f64, s: f64| heat_kernel(&KernelQuery { variant, radius: r, radius0: r0, dtau: s });
    let d_s = (phi(r, s + h) - phi(r, s - h)) / (2.0 * h);
    let d_r = (phi(r + h, s) - phi(r - h, s)) / (2.0 * h);
    let d_rr = (phi(r + h, s) - 2.0 * phi(r, s) + phi(r - h, s)) / (h * h);
    let coefficient = match (variant, photon_term) {
        (KernelVariant::Massive, _) => 2.0 / r.tanh(),
        (_, PhotonRadialTerm::TwoOverR) => 2.0 / r,
        (_, PhotonRadialTerm::TwoR) => 2.0 * r,
    };
    d_s - (d_rr + coefficient * d_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn massive(a: f64, a0: f64, t: f64) -> f64 {
        heat_kernel(&KernelQuery::new(KernelVariant::Massive, a, a0, t).unwrap())
    }

    /// The massive form evaluated term by term (valid away from zero).
    fn massive_direct(a: f64, a0: f64, t: f64) -> f64 {
        let c = 2.0 * (4.0 * PI).powf(-1.5);
        c * t.powf(-0.5) * (-t).exp() * (a * a0 / (2.0 * t)).sinh() / (a.sinh() * a0.sinh())
            * (-(a * a + a0 * a0) / (4.0 * t)).exp()
    }

    #[test]
    fn matches_direct_formula_away_from_origin() {
        for &(a, a0, t) in &[(0.5, 0.7, 0.3), (1.0, 2.0, 1.0), (3.0, 0.2, 2.5)] {
            let v = massive(a, a0, t);
            assert!((v - massive_direct(a, a0, t)).abs() < 1e-12 * v.max(1e-300));
        }
        let q = KernelQuery::new(KernelVariant::Nonrel, 0.8, 0.3, 0.4).unwrap();
        let c = 2.0 * (4.0 * PI).powf(-1.5);
        let (a, a0, t) = (0.8f64, 0.3f64, 0.4f64);
        let direct = c * t.powf(-0.5) / (a * a0)
            * ((-(a - a0).powi(2) / (4.0 * t)).exp() - (-(a + a0).powi(2) / (4.0 * t)).exp());
        assert!((heat_kernel_shared_constant(&q) - direct).abs() < 1e-12 * direct);
        let q = KernelQuery::new(KernelVariant::Photon, 0.8, 0.3, 0.4).unwrap();
        let direct = 1.0 / (2.0 * a * a0 * PI.sqrt())
            * t.powf(-0.5)
            * (a * a0 / (2.0 * t)).sinh()
            * (-(a * a + a0 * a0) / (4.0 * t)).exp();
        assert!((heat_kernel_shared_constant(&q) - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn origin_limit_value() {
        let expected = 2.0 * (4.0 * PI).powf(-1.5) * (-1f64).exp() * 0.5;
        assert_abs_diff_eq!(massive(0.0, 0.0, 1.0), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(massive(0.0, 0.0, 1.0), 0.0082590, epsilon = 1e-6);
        // continuity across the series switch
        assert!((massive(1e-7, 1e-7, 1.0) - expected).abs() < 1e-12);
        assert!((massive(0.3, 1e-7, 1.0) - massive(0.3, 0.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn nonrel_origin_limit_is_wiener() {
        for &(a, t) in &[(0.1, 0.5), (1.3, 2.0)] {
            let q = KernelQuery::new(KernelVariant::Nonrel, a, 0.0, t).unwrap();
            let wiener = (4.0 * PI * t).powf(-1.5) * (-a * a / (4.0 * t)).exp();
            assert!((heat_kernel(&q) - wiener).abs() < 1e-14);
        }
    }

    #[test]
    fn long_time_ratio() {
        let m = massive(0.05, 0.0, 3.0);
        let n = heat_kernel(&KernelQuery::new(KernelVariant::Nonrel, 0.05, 0.0, 3.0).unwrap());
        assert!(((m / n) / (-3f64).exp() - 1.0).abs() < 0.01);
    }

    #[test]
    fn symmetric_in_arguments() {
        for &(a, b, t) in &[(0.3, 1.7, 0.2), (2.0, 0.0, 1.0), (4.0, 3.5, 5.0)] {
            assert!((massive(a, b, t) - massive(b, a, t)).abs() <= 1e-14 * massive(a, b, t));
        }
    }

    #[test]
    fn normalization_by_quadrature() {
        for t in [0.1, 1.0, 5.0] {
            for a0 in [0.0, 0.5, 2.0] {
                let hi = radial_upper_bound(KernelVariant::Massive, a0, t);
                let total = integrate(
                    |a| {
                        radial_marginal(&KernelQuery {
                            variant: KernelVariant::Massive,
                            radius: a,
                            radius0: a0,
                            dtau: t,
                        })
                    },
                    0.0,
                    hi,
                    1e-14,
                    1e-12,
                );
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn shared_constants_normalize_to_two_and_two_pi() {
        for variant in [KernelVariant::Nonrel, KernelVariant::Photon] {
            let hi = radial_upper_bound(variant, 0.0, 1.0);
            let total = integrate(
                |r| {
                    4.0 * PI
                        * r
                        * r
                        * heat_kernel_shared_constant(&KernelQuery { variant, radius: r, radius0: 0.0, dtau: 1.0 })
                },
                0.0,
                hi,
                1e-14,
                1e-12,
            );
            let expected = if variant == KernelVariant::Nonrel { 2.0 } else { 2.0 * PI };
            assert_abs_diff_eq!(total, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn chapman_kolmogorov_holds() {
        for variant in [KernelVariant::Massive, KernelVariant::Nonrel, KernelVariant::Photon] {
            for (r, r0, t1, t2) in [(0.5, 0.0, 0.3, 0.7), (1.2, 0.8, 0.5, 0.25), (2.0, 1.0, 1.0, 1.0)] {
                let (composed, direct) = chapman_kolmogorov(variant, r, r0, t1, t2).unwrap();
                assert!((composed - direct).abs() <= 1e-5 * direct, "{variant:?} {r} {r0}: {composed} vs {direct}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(KernelQuery::new(KernelVariant::Massive, -0.1, 0.0, 1.0).is_err());
        assert!(KernelQuery::new(KernelVariant::Massive, 0.1, -1.0, 1.0).is_err());
        assert!(KernelQuery::new(KernelVariant::Photon, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn massive_pde_residual_is_second_order() {
        let r: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&h| kernel_pde_residual(KernelVariant::Massive, 1.2, 0.4, 0.7, h, PhotonRadialTerm::TwoOverR).abs())
            .collect();
        let order = (r[0] / r[1]).log2();
        assert!((1.8..2.2).contains(&order), "{r:?}");
        assert!(r[2] < 1e-5);
    }
}
