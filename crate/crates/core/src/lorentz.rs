//! Pure Lorentz boosts of phase-space states and a distributional test of
//! the scalar transformation law of the equilibrium density.

use crate::analytic::quad::{integrate_to_infinity, TabulatedCdf};
use crate::analytic::JuttnerParams;
use crate::ensemble::{ks_statistic, EnsembleError, KsResult};
use crate::geometry::SpatialVelocity;
use crate::langevin::ParticleState;
use nalgebra::{Matrix4, Vector3, Vector4};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LorentzError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Statistics(#[from] EnsembleError),
}

pub type Result<T> = std::result::Result<T, LorentzError>;

/// Minkowski metric `diag(-1, 1, 1, 1)`.
pub fn minkowski() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

/// Active boost with rapidity `w` along the unit vector `axis`; acting on
/// `(x0, x)` it maps the rest velocity to `sinh(w) axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boost {
    pub rapidity: f64,
    pub axis: Vector3<f64>,
    pub matrix: Matrix4<f64>,
}

pub fn boost_matrix(w: f64, axis: Vector3<f64>) -> Result<Boost> {
    let norm = axis.norm();
    if !(norm > 0.0) || !norm.is_finite() || !w.is_finite() {
        return Err(LorentzError::Domain(format!(
            "boost needs a finite rapidity and a nonzero axis, got w = {w}, axis = {axis:?}"
        )));
    }
    let n = axis / norm;
    let (sh, ch) = (w.sinh(), w.cosh());
    let mut m = Matrix4::identity();
    m[(0, 0)] = ch;
    for i in 0..3 {
        m[(0, i + 1)] = sh * n[i];
        m[(i + 1, 0)] = sh * n[i];
        for j in 0..3 {
            m[(i + 1, j + 1)] += (ch - 1.0) * n[i] * n[j];
        }
    }
    Ok(Boost { rapidity: w, axis: n, matrix: m })
}

impl Boost {
    pub fn inverse(&self) -> Boost {
        boost_matrix(-self.rapidity, self.axis).expect("axis already normalized")
    }

    /// `max |L^T eta L - eta|`.
    pub fn metric_defect(&self) -> f64 {
        let eta = minkowski();
        (self.matrix.transpose() * eta * self.matrix - eta).amax()
    }

    pub fn apply_velocity(&self, u: &SpatialVelocity) -> SpatialVelocity {
        let [u0, u1, u2, u3] = u.four_velocity();
        let v = self.matrix * Vector4::new(u0, u1, u2, u3);
        // the time component is discarded and rederived from the mass shell
        SpatialVelocity::from_vector_unchecked(Vector3::new(v[1], v[2], v[3]))
    }

    pub fn apply_event(&self, t: f64, x: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let v = self.matrix * Vector4::new(t, x[0], x[1], x[2]);
        (v[0], Vector3::new(v[1], v[2], v[3]))
    }
}

/// A boosted state: event `(t, x)`, velocity and the (invariant) proper time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostedState {
    pub t: f64,
    pub x: Vector3<f64>,
    pub u: SpatialVelocity,
    pub tau: f64,
}

impl BoostedState {
    pub fn boost(&self, b: &Boost) -> BoostedState {
        let (t, x) = b.apply_event(self.t, &self.x);
        BoostedState { t, x, u: b.apply_velocity(&self.u), tau: self.tau }
    }
}

/// Boosts a state, taking the event time as `x0 = tau u0` (straight-line
/// history through the origin).
pub fn boost_state(s: &ParticleState, b: &Boost) -> BoostedState {
    let unboosted = BoostedState { t: s.tau * s.u.u0(), x: s.x, u: s.u, tau: s.tau };
    unboosted.boost(b)
}

/// Longitudinal marginal `p(s) ~ exp(-chi (cosh w sqrt(1 + s^2) - sinh w s))`
/// of the scalar-transformed equilibrium, normalized by quadrature.
#[derive(Debug, Clone)]
pub struct BoostedLongitudinal {
    table: TabulatedCdf,
}

impl BoostedLongitudinal {
    pub fn new(p: JuttnerParams, w: f64) -> Self {
        let chi = p.chi();
        let (sh, ch) = (w.sinh(), w.cosh());
        // in terms of the longitudinal rapidity s = sinh(r) the exponent is -chi cosh(r - w)
        let mut spread: f64 = 1.0;
        while chi * (spread.cosh() - 1.0) < 40.0 {
            spread += 0.25;
        }
        let lo = (w - spread).sinh();
        let hi = (w + spread).sinh();
        let log_peak = -chi;
        let pdf = move |s: f64| (-chi * (ch * (1.0 + s * s).sqrt() - sh * s) - log_peak).exp();
        BoostedLongitudinal { table: TabulatedCdf::from_pdf(pdf, lo, hi, 1 << 14) }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        self.table.cdf(s)
    }
}

/// `E[u'0]` of the boosted equilibrium by quadrature over the boosted density,
/// using `int dOmega exp(b cos) = 4 pi sinh(b) / b` for the angular part.
pub fn boosted_mean_energy(p: JuttnerParams, w: f64) -> f64 {
    let chi = p.chi();
    let (sh_w, ch_w) = (w.sinh(), w.cosh());
    // log of exp(-chi ch_w ch a) sinh(b)/b, shifted by the bound chi
    let log_weight = move |a: f64| {
        let b = chi * sh_w.abs() * a.sinh();
        let angular = if b < 1e-8 { 0.0 } else { b + ((-(-2.0 * b).exp_m1()) / (2.0 * b)).ln() };
        -chi * ch_w * a.cosh() + angular + chi
    };
    let weight = move |a: f64| log_weight(a).exp() * a.sinh().powi(2);
    let z = integrate_to_infinity(weight, 0.0, 1e-13);
    integrate_to_infinity(move |a| weight(a) * a.cosh(), 0.0, 1e-13) / z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    pub ks_longitudinal: KsResult,
    pub mean_u0_sample: f64,
    pub mean_u0_predicted: f64,
    pub mean_u0_rel_error: f64,
}

/// Boosts every velocity of an equilibrium ensemble and compares the result
/// against the scalar-transformed density.
pub fn invariance_check(ensemble: &[SpatialVelocity], b: &Boost, p: JuttnerParams) -> Result<InvarianceReport> {
    if ensemble.is_empty() {
        return Err(EnsembleError::EmptyInput.into());
    }
    let boosted: Vec<SpatialVelocity> = ensemble.iter().map(|u| b.apply_velocity(u)).collect();
    let mut longitudinal: Vec<f64> = boosted.iter().map(|u| u.vector().dot(&b.axis)).collect();
    longitudinal.sort_by(f64::total_cmp);
    let target = BoostedLongitudinal::new(p, b.rapidity);
    let ks = ks_statistic(&longitudinal, |s| target.cdf(s))?;
    let mean_sample = boosted.iter().map(|u| u.u0()).sum::<f64>() / boosted.len() as f64;
    let predicted = boosted_mean_energy(p, b.rapidity);
    Ok(InvarianceReport {
        ks_longitudinal: ks,
        mean_u0_sample: mean_sample,
        mean_u0_predicted: predicted,
        mean_u0_rel_error: (mean_sample - predicted).abs() / predicted,
    })
}
