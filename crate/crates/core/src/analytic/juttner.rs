//! Jüttner equilibrium on the velocity hyperboloid.
//!
//! The density with respect to the Riemannian volume `sinh^2(a) da dOmega` is
//! proportional to `exp(-chi cosh a)`, so the rapidity marginal (w.r.t. `da`) is
//! `p(a) = exp(-chi cosh a) sinh^2 a / Z(chi)` with `Z` obtained by quadrature.

use super::bessel::bessel_k_scaled;
use super::quad::{integrate_to_infinity, TabulatedCdf};
use super::AnalyticError;
use crate::geometry::HyperbolicPoint;
use crate::noise::{NoiseStream, AUX_STREAM_BASE};
use std::f64::consts::{PI, TAU};

/// Inverse temperature `chi = nu / D = m c^2 / kT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JuttnerParams {
    chi: f64,
}

impl JuttnerParams {
    pub fn new(chi: f64) -> Result<Self, AnalyticError> {
        if chi.is_finite() && chi > 0.0 {
            Ok(JuttnerParams { chi })
        } else {
            Err(AnalyticError::Domain(format!("chi must be finite and positive, got {chi}")))
        }
    }

    /// From friction `nu` and diffusion `D`; the Einstein relation gives `chi = nu / D`.
    pub fn from_friction(nu: f64, diffusion: f64) -> Result<Self, AnalyticError> {
        Self::new(nu / diffusion)
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// `kT / m c^2`.
    pub fn temperature(&self) -> f64 {
        1.0 / self.chi
    }
}

/// `exp(-chi (cosh a - 1)) sinh^2 a`, the unnormalized marginal with the
/// constant factor `exp(-chi)` pulled out.
#[inline]
fn scaled_weight(chi: f64, alpha: f64) -> f64 {
    let s = alpha.sinh();
    (-chi * (alpha.cosh() - 1.0)).exp() * s * s
}

fn scaled_normalization(chi: f64) -> f64 {
    integrate_to_infinity(|a| scaled_weight(chi, a), 0.0, 1e-14)
}

/// Rapidity marginal with its quadrature normalization cached.
#[derive(Debug, Clone, Copy)]
pub struct JuttnerMarginal {
    chi: f64,
    scaled_z: f64,
}

impl JuttnerMarginal {
    pub fn new(p: JuttnerParams) -> Self {
        JuttnerMarginal { chi: p.chi, scaled_z: scaled_normalization(p.chi) }
    }

    pub fn pdf(&self, alpha: f64) -> f64 {
        if alpha < 0.0 {
            return 0.0;
        }
        scaled_weight(self.chi, alpha) / self.scaled_z
    }

    /// `Z(chi) = int_0^inf exp(-chi cosh a) sinh^2 a da`.
    pub fn normalization(&self) -> f64 {
        self.scaled_z * (-self.chi).exp()
    }

    /// Density w.r.t. the Riemannian volume, normalized so that
    /// `4 pi int phi sinh^2 a da = 1`.
    pub fn density(&self, alpha: f64) -> f64 {
        (-self.chi * (alpha.cosh() - 1.0)).exp() / (4.0 * PI * self.scaled_z)
    }

    /// `E[cosh a]` by quadrature.
    pub fn mean_u0(&self) -> f64 {
        let chi = self.chi;
        integrate_to_infinity(|a| scaled_weight(chi, a) * a.cosh(), 0.0, 1e-14) / self.scaled_z
    }

    /// Rapidity beyond which the remaining tail mass is below `1e-14`.
    pub fn alpha_max(&self) -> f64 {
        let mut a: f64 = 0.5;
        loop {
            // tail <= pdf(a) / (d/da log pdf) once past the mode
            let decay = self.chi * a.sinh() - 2.0 / a.tanh();
            if decay > 1.0 && self.pdf(a) / decay < 1e-14 {
                return a;
            }
            a += 0.05;
        }
    }

    pub fn cdf_table(&self, cells: usize) -> TabulatedCdf {
        TabulatedCdf::from_pdf(|a| self.pdf(a), 0.0, self.alpha_max(), cells)
    }
}

pub fn juttner_pdf_alpha(alpha: f64, p: JuttnerParams) -> Result<f64, AnalyticError> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(AnalyticError::Domain(format!("alpha must be nonnegative, got {alpha}")));
    }
    Ok(JuttnerMarginal::new(p).pdf(alpha))
}

/// Quadrature of the two candidate normalizations of `exp(-chi cosh a)`:
/// against the Riemannian volume (`sinh^2 a da`) and against the flat momentum
/// volume `d^3u = cosh a sinh^2 a da dOmega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureIntegrals {
    pub chi: f64,
    pub riemannian: f64,
    pub flat: f64,
    pub k1_over_chi: f64,
    pub k2_over_chi: f64,
}

impl MeasureIntegrals {
    pub fn riemannian_rel_error(&self) -> f64 {
        (self.riemannian - self.k1_over_chi).abs() / self.k1_over_chi
    }

    pub fn flat_rel_error(&self) -> f64 {
        (self.flat - self.k2_over_chi).abs() / self.k2_over_chi
    }

    /// Which measure the normalization `4 pi K_2(chi) / chi` belongs to.
    pub fn k2_constant_measure(&self, tol: f64) -> Option<Measure> {
        if self.flat_rel_error() <= tol {
            Some(Measure::Flat)
        } else if (self.riemannian - self.k2_over_chi).abs() <= tol * self.k2_over_chi {
            Some(Measure::Riemannian)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// `sinh^2 a da dOmega`, i.e. `d^3u / u0`.
    Riemannian,
    /// `d^3u = cosh a sinh^2 a da dOmega`.
    Flat,
}

pub fn measure_integrals(chi: f64) -> Result<MeasureIntegrals, AnalyticError> {
    JuttnerParams::new(chi)?;
    let e = (-chi).exp();
    let riemannian = integrate_to_infinity(|a| scaled_weight(chi, a), 0.0, 1e-15) * e;
    let flat = integrate_to_infinity(|a| scaled_weight(chi, a) * a.cosh(), 0.0, 1e-15) * e;
    Ok(MeasureIntegrals {
        chi,
        riemannian,
        flat,
        k1_over_chi: bessel_k_scaled(1, chi)? * e / chi,
        k2_over_chi: bessel_k_scaled(2, chi)? * e / chi,
    })
}

/// Inverse-CDF sampler of the equilibrium on the hyperboloid.
#[derive(Debug, Clone)]
pub struct JuttnerSampler {
    table: TabulatedCdf,
}

impl JuttnerSampler {
    pub fn new(p: JuttnerParams) -> Self {
        JuttnerSampler { table: JuttnerMarginal::new(p).cdf_table(1 << 14) }
    }

    pub fn table(&self) -> &TabulatedCdf {
        &self.table
    }

    /// Maps four uniforms to a point: rapidity by inversion, direction uniform.
    pub fn point_from_uniforms(&self, w: [f64; 4]) -> HyperbolicPoint {
        let alpha = self.table.quantile(w[0]);
        let cos_theta = (1.0 - 2.0 * w[1]).clamp(-1.0, 1.0);
        HyperbolicPoint { alpha, theta: cos_theta.acos(), phi: TAU * w[2] }
    }
}

/// `n` independent equilibrium points, reproducible from `seed`.
pub fn sample_juttner(p: JuttnerParams, n: usize, seed: u64) -> Vec<HyperbolicPoint> {
    let sampler = JuttnerSampler::new(p);
    let mut stream = NoiseStream::new(seed, AUX_STREAM_BASE);
    (0..n as u64).map(|k| sampler.point_from_uniforms(stream.uniforms(k))).collect()
}
