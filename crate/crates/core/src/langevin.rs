//! Langevin dynamics in the bundle of position, velocity and orthonormal
//! velocity frames.
//!
//! ```text
//! dx^i = u^i dtau
//! du^i = E_a^i dW^a + F^i dtau
//! dE_a^i = -gamma^i_ml(u) E_a^l o du^m
//! ```
//!
//! with `<dW^a dW^b> = 2 D dtau delta_ab`. Two integrators are provided:
//! a Heun predictor-corrector for the Stratonovich system that transports
//! the frame, and an Euler scheme for the equivalent Ito equation in which the
//! frame is regenerated from the boost section and the transport is replaced
//! by the drift `3 D u`.

use crate::geometry::{canonical_frame_matrix, orthonormalize_matrix, Frame, GeometryError, SpatialVelocity};
use crate::noise::NoiseStream;
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub use crate::noise::NoiseStream as Noise;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LangevinError {
    #[error("non-finite state for particle {particle} at step {step}")]
    NumericBlowup { particle: usize, step: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("frame repair failed for particle {particle} at step {step}: {source}")]
    Frame { particle: usize, step: u64, source: GeometryError },
}

pub type Result<T> = std::result::Result<T, LangevinError>;

/// Phase-space point together with its velocity frame and clocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub x: Vector3<f64>,
    pub u: SpatialVelocity,
    pub frame: Frame,
    /// Proper time.
    pub tau: f64,
    /// Laboratory time, accumulated as `sum u0 dtau`.
    pub lab_time: f64,
}

impl ParticleState {
    /// At the origin with the boost-section frame at `u`.
    pub fn new(u: SpatialVelocity) -> Self {
        ParticleState {
            x: Vector3::zeros(),
            u,
            frame: Frame(canonical_frame_matrix(u.vector())),
            tau: 0.0,
            lab_time: 0.0,
        }
    }

    pub fn at_rest() -> Self {
        ParticleState::new(SpatialVelocity::REST)
    }
}

pub type CustomForce = Arc<dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync>;

/// Deterministic part `F^i` of the velocity equation.
#[derive(Clone)]
pub enum ForceModel {
    Free,
    /// `F^i = -nu u^i u0`: friction against a heat bath at rest in the lab.
    IsotropicFriction {
        nu: f64,
    },
    /// `F^i = (e/m) F^{i mu} u_mu` with the contravariant field tensor.
    Electromagnetic {
        field: Matrix4<f64>,
        charge_to_mass: f64,
    },
    Custom(CustomForce),
}

impl fmt::Debug for ForceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForceModel::Free => write!(f, "Free"),
            ForceModel::IsotropicFriction { nu } => write!(f, "IsotropicFriction {{ nu: {nu} }}"),
            ForceModel::Electromagnetic { field, charge_to_mass } => {
                f.debug_struct("Electromagnetic").field("field", field).field("charge_to_mass", charge_to_mass).finish()
            }
            ForceModel::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl ForceModel {
    pub fn friction(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(ForceModel::IsotropicFriction { nu })
        } else {
            Err(LangevinError::InvalidConfig(format!("friction must be finite and >= 0, got {nu}")))
        }
    }

    pub fn electromagnetic(field: Matrix4<f64>, charge_to_mass: f64) -> Result<Self> {
        if (field + field.transpose()).amax() > 1e-12 {
            return Err(LangevinError::InvalidConfig("field tensor is not antisymmetric".into()));
        }
        Ok(ForceModel::Electromagnetic { field, charge_to_mass })
    }

    /// Field tensor from electric and magnetic 3-vectors,
    /// `F^{0i} = E^i`, `F^{ij} = eps^{ijk} B^k` (signature `-+++`).
    pub fn from_fields(e: Vector3<f64>, b: Vector3<f64>, charge_to_mass: f64) -> Self {
        let mut f = Matrix4::zeros();
        for i in 0..3 {
            f[(0, i + 1)] = e[i];
            f[(i + 1, 0)] = -e[i];
        }
        f[(1, 2)] = b[2];
        f[(2, 1)] = -b[2];
        f[(2, 3)] = b[0];
        f[(3, 2)] = -b[0];
        f[(3, 1)] = b[1];
        f[(1, 3)] = -b[1];
        ForceModel::Electromagnetic { field: f, charge_to_mass }
    }

    /// Largest rate the model imposes, for the step-size sanity check.
    fn rate_scale(&self) -> f64 {
        match self {
            ForceModel::IsotropicFriction { nu } => *nu,
            _ => 0.0,
        }
    }
}

#[inline]
fn force_vec(model: &ForceModel, u: &Vector3<f64>) -> Vector3<f64> {
    match model {
        ForceModel::Free => Vector3::zeros(),
        ForceModel::IsotropicFriction { nu } => u * (-nu * (1.0 + u.norm_squared()).sqrt()),
        ForceModel::Electromagnetic { field, charge_to_mass } => {
            let u0 = (1.0 + u.norm_squared()).sqrt();
            let lowered = Vector4::new(-u0, u[0], u[1], u[2]);
            let f = field * lowered;
            Vector3::new(f[1], f[2], f[3]) * *charge_to_mass
        }
        ForceModel::Custom(f) => f(u),
    }
}

pub fn force_eval(model: &ForceModel, u: &SpatialVelocity) -> Vector3<f64> {
    force_vec(model, u.vector())
}

/// Ito drift generated by the Stratonovich frame transport,
/// `-scale * G^ij gamma^k_ij = 3 * scale * u^k`, for a generator `scale * Laplacian`.
pub fn spurious_ito_drift(u: &SpatialVelocity, generator_scale: f64) -> Vector3<f64> {
    u.vector() * (3.0 * generator_scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    HeunStratonovich,
    EulerIto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Generator scale `D`: noise increments have variance `2 D dtau`.
    pub diffusion: f64,
    pub dtau: f64,
    pub steps: u64,
    pub particles: usize,
    pub seed: u64,
    pub integrator: Integrator,
    pub snapshot_every: Option<u64>,
    pub reortho_every: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            diffusion: 1.0,
            dtau: 1e-3,
            steps: 1000,
            particles: 1000,
            seed: 0,
            integrator: Integrator::HeunStratonovich,
            snapshot_every: None,
            reortho_every: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, model: &ForceModel) -> Result<()> {
        let bad = |m: String| Err(LangevinError::InvalidConfig(m));
        if !(self.diffusion >= 0.0) || !self.diffusion.is_finite() {
            return bad(format!("diffusion must be finite and >= 0, got {}", self.diffusion));
        }
        if !(self.dtau > 0.0) || !self.dtau.is_finite() {
            return bad(format!("dtau must be positive, got {}", self.dtau));
        }
        if self.reortho_every == 0 {
            return bad("reortho_every must be >= 1".into());
        }
        if self.snapshot_every == Some(0) {
            return bad("snapshot_every must be >= 1".into());
        }
        let stiffness = self.dtau * model.rate_scale().max(self.diffusion);
        if stiffness > 0.1 {
            log::warn!("dtau * max(nu, D) = {stiffness} exceeds 0.1; expect visible discretization bias");
        }
        Ok(())
    }

    #[inline]
    fn noise_scale(&self) -> f64 {
        (2.0 * self.diffusion * self.dtau).sqrt()
    }
}

/// `(du, dE)` for one evaluation of the Stratonovich vector fields:
/// `du = E dW + F dtau`, `dE_a = u (G(E_a, du))`.
#[inline]
fn stratonovich_increment(
    model: &ForceModel,
    u: &Vector3<f64>,
    e: &Matrix3<f64>,
    dw: &Vector3<f64>,
    dtau: f64,
) -> (Vector3<f64>, Matrix3<f64>) {
    let du = e * dw + force_vec(model, u) * dtau;
    let g_du = du - u * (u.dot(&du) / (1.0 + u.norm_squared()));
    let coeffs = e.transpose() * g_du;
    (du, u * coeffs.transpose())
}

fn finite_state(u: &Vector3<f64>, e: &Matrix3<f64>) -> bool {
    u.iter().all(|v| v.is_finite()) && e.iter().all(|v| v.is_finite())
}

/// Advances one particle by one proper-time step.
pub fn step(
    state: &ParticleState,
    model: &ForceModel,
    cfg: &SimConfig,
    noise: [f64; 3],
    particle: usize,
    step_index: u64,
) -> Result<ParticleState> {
    let dtau = cfg.dtau;
    let dw = Vector3::from(noise) * cfg.noise_scale();
    let u = state.u.vector();
    let (u_new, e_new) = match cfg.integrator {
        Integrator::HeunStratonovich => {
            let e = state.frame.matrix();
            let (du1, de1) = stratonovich_increment(model, u, e, &dw, dtau);
            let u_pred = u + du1;
            let e_pred = e + de1;
            let (du2, de2) = stratonovich_increment(model, &u_pred, &e_pred, &dw, dtau);
            let u_new = u + (du1 + du2) * 0.5;
            let mut e_new = e + (de1 + de2) * 0.5;
            if !finite_state(&u_new, &e_new) {
                return Err(LangevinError::NumericBlowup { particle, step: step_index });
            }
            if (step_index + 1).is_multiple_of(cfg.reortho_every) {
                e_new = orthonormalize_matrix(&e_new, &u_new).map_err(|source| LangevinError::Frame {
                    particle,
                    step: step_index,
                    source,
                })?;
            }
            (u_new, e_new)
        }
        Integrator::EulerIto => {
            let e = canonical_frame_matrix(u);
            let drift = force_vec(model, u) + u * (3.0 * cfg.diffusion);
            let u_new = u + e * dw + drift * dtau;
            let e_new = canonical_frame_matrix(&u_new);
            (u_new, e_new)
        }
    };
    let x_new = state.x + u * dtau;
    let lab_time = state.lab_time + state.u.u0() * dtau;
    if !finite_state(&u_new, &e_new) || !x_new.iter().all(|v| v.is_finite()) || !lab_time.is_finite() {
        return Err(LangevinError::NumericBlowup { particle, step: step_index });
    }
    Ok(ParticleState {
        x: x_new,
        u: SpatialVelocity::from_vector_unchecked(u_new),
        frame: Frame(e_new),
        tau: state.tau + dtau,
        lab_time,
    })
}

/// States of the whole ensemble after a given number of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub tau: f64,
    pub states: Vec<ParticleState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub final_states: Vec<ParticleState>,
    pub snapshots: Vec<Snapshot>,
}

/// Integrates a single trajectory with the noise stream of `particle`.
pub fn simulate_path(
    init: &ParticleState,
    model: &ForceModel,
    cfg: &SimConfig,
    particle: usize,
) -> Result<(ParticleState, Vec<ParticleState>)> {
    let mut noise = NoiseStream::new(cfg.seed, particle as u64);
    let mut state = *init;
    let mut recorded = Vec::new();
    for k in 0..cfg.steps {
        state = step(&state, model, cfg, noise.deviates(k), particle, k)?;
        if let Some(every) = cfg.snapshot_every {
            if (k + 1) % every == 0 {
                recorded.push(state);
            }
        }
    }
    Ok((state, recorded))
}

/// Runs every particle independently (in parallel) and assembles results in
/// particle order; output does not depend on the number of worker threads.
pub fn simulate_ensemble(inits: &[ParticleState], model: &ForceModel, cfg: &SimConfig) -> Result<EnsembleRun> {
    if inits.is_empty() {
        return Err(LangevinError::InvalidConfig("ensemble needs at least one particle".into()));
    }
    cfg.validate(model)?;
    let paths: Vec<(ParticleState, Vec<ParticleState>)> =
        inits.par_iter().enumerate().map(|(i, init)| simulate_path(init, model, cfg, i)).collect::<Result<_>>()?;

    let n_snap = paths[0].1.len();
    let every = cfg.snapshot_every.unwrap_or(0);
    let snapshots = (0..n_snap)
        .map(|s| Snapshot {
            step: (s as u64 + 1) * every,
            tau: paths[0].1[s].tau,
            states: paths.iter().map(|p| p.1[s]).collect(),
        })
        .collect();
    Ok(EnsembleRun { final_states: paths.into_iter().map(|p| p.0).collect(), snapshots })
}

/// `n` particles at rest with identity frames.
pub fn rest_ensemble(n: usize) -> Vec<ParticleState> {
    vec![ParticleState::at_rest(); n]
}
