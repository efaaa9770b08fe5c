//! Run configuration: one JSON document, unknown keys rejected.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use reldiff::langevin::Integrator;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Equilibrium,
    Transition,
    Pde,
    Boost,
    Figure1,
    PhotonCheck,
    OracleCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Equilibrium => "equilibrium",
            Experiment::Transition => "transition",
            Experiment::Pde => "pde",
            Experiment::Boost => "boost",
            Experiment::Figure1 => "figure1",
            Experiment::PhotonCheck => "photon-check",
            Experiment::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorChoice {
    HeunStratonovich,
    EulerIto,
}

impl IntegratorChoice {
    pub fn integrator(self) -> Integrator {
        match self {
            IntegratorChoice::HeunStratonovich => Integrator::HeunStratonovich,
            IntegratorChoice::EulerIto => Integrator::EulerIto,
        }
    }

    pub fn other(self) -> Self {
        match self {
            IntegratorChoice::HeunStratonovich => IntegratorChoice::EulerIto,
            IntegratorChoice::EulerIto => IntegratorChoice::HeunStratonovich,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxChoice {
    Central,
    ExponentialFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    /// Generator scale `D`.
    pub diffusion: Option<f64>,
    /// Friction rate.
    pub nu: Option<f64>,
    /// `m c^2 / kT`; must equal `nu / D` when all three are given.
    pub chi: Option<f64>,
    pub boost_rapidity: f64,
    /// Initial rapidity of kernel-based runs.
    pub alpha0: f64,
    /// Target values of `D tau`; experiment-specific default when empty.
    pub d_tau: Vec<f64>,
    /// `D tau` at which PDE and kernel-sampled runs start.
    pub initial_d_tau: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            diffusion: None,
            nu: None,
            chi: None,
            boost_rapidity: 0.5,
            alpha0: 0.0,
            d_tau: Vec::new(),
            initial_d_tau: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub dtau: f64,
    /// Steps of the equilibrium run; `relaxation_time / (nu dtau)` when absent.
    pub steps: Option<u64>,
    pub particles: usize,
    pub grid_n: usize,
    pub alpha_max: f64,
    pub seed: u64,
    pub integrator: IntegratorChoice,
    pub reortho_every: u64,
    /// Crank-Nicolson step in proper time.
    pub pde_dtau: f64,
    pub flux: FluxChoice,
    pub bins: usize,
    /// Proper time of the equilibrium run in units of `1 / nu`.
    pub relaxation_time: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            dtau: 1e-3,
            steps: None,
            particles: 50_000,
            grid_n: 2000,
            alpha_max: 10.0,
            seed: 0,
            integrator: IntegratorChoice::HeunStratonovich,
            reortho_every: 1,
            pde_dtau: 2e-4,
            flux: FluxChoice::ExponentialFit,
            bins: 25,
            relaxation_time: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for Output {
    fn default() -> Self {
        Output { directory: PathBuf::from("out"), formats: vec![OutputFormat::Csv, OutputFormat::Json] }
    }
}

/// Optional sub-checks of the transition and pde experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    /// Rerun with the other integrator and compare the two ensembles.
    pub compare_integrators: bool,
    /// Short-time slope of `E|u|^2` from rest.
    pub generator: bool,
    pub generator_particles: usize,
    pub generator_dtau: f64,
    /// Langevin ensemble alongside the PDE solution.
    pub monte_carlo: bool,
    /// Upper edge of the rapidity histograms.
    pub histogram_alpha_max: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            compare_integrators: false,
            generator: false,
            generator_particles: 1_000_000,
            generator_dtau: 1e-4,
            monte_carlo: false,
            histogram_alpha_max: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub ks: f64,
    pub ks_two_sample: f64,
    /// Minimum two-sample p-value; not enforced when absent.
    pub ks_p_value_min: Option<f64>,
    pub l1: f64,
    pub kernel_linf: f64,
    /// Relative mass drift per 1000 PDE steps.
    pub mass_drift: f64,
    pub order_min: f64,
    pub order_max: f64,
    pub eigen_residual: f64,
    pub normalization: f64,
    pub chapman_kolmogorov: f64,
    pub symmetry: f64,
    pub long_time_ratio: f64,
    pub measure: f64,
    /// Largest convergence order that still counts as "not converging".
    pub divergent_order_max: f64,
    pub mean_rel: f64,
    pub generator_sigmas: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ks: 0.02,
            ks_two_sample: 0.02,
            ks_p_value_min: None,
            l1: 0.03,
            kernel_linf: 1e-3,
            mass_drift: 1e-10,
            order_min: 1.8,
            order_max: 2.2,
            eigen_residual: 1e-8,
            normalization: 1e-6,
            chapman_kolmogorov: 1e-5,
            symmetry: 1e-12,
            long_time_ratio: 0.01,
            measure: 1e-8,
            divergent_order_max: 0.5,
            mean_rel: 0.01,
            generator_sigmas: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// `D`, `nu` and `chi` after applying the Einstein relation `chi = nu / D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub diffusion: f64,
    pub nu: f64,
    /// `None` without friction (no equilibrium).
    pub chi: Option<f64>,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            physics: Physics::default(),
            numerics: Numerics::default(),
            output: Output::default(),
            checks: Checks::default(),
            thresholds: Thresholds::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn coefficients(&self) -> Result<Coefficients, CliError> {
        let p = &self.physics;
        let bad = |m: String| Err(CliError::Config(m));
        let (diffusion, nu) = match (p.diffusion, p.nu, p.chi) {
            (Some(d), Some(nu), Some(chi)) => {
                if (nu / d - chi).abs() > 1e-12 * chi.abs().max(1.0) {
                    return bad(format!("chi = {chi} is inconsistent with nu / D = {}", nu / d));
                }
                (d, nu)
            }
            (Some(d), Some(nu), None) => (d, nu),
            (Some(d), None, Some(chi)) => (d, chi * d),
            (None, Some(nu), Some(chi)) => (nu / chi, nu),
            (None, None, Some(chi)) => (1.0, chi),
            (Some(d), None, None) => (d, 1.0),
            (None, Some(nu), None) => (1.0, nu),
            (None, None, None) => (1.0, 1.0),
        };
        if !(diffusion > 0.0) || !diffusion.is_finite() {
            return bad(format!("diffusion must be positive, got {diffusion}"));
        }
        if !(nu >= 0.0) || !nu.is_finite() {
            return bad(format!("nu must be finite and >= 0, got {nu}"));
        }
        Ok(Coefficients { diffusion, nu, chi: (nu > 0.0).then(|| nu / diffusion) })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.coefficients()?;
        let n = &self.numerics;
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if !(n.dtau > 0.0) || !n.dtau.is_finite() {
            return bad("numerics.dtau must be positive");
        }
        if !(n.pde_dtau > 0.0) || !n.pde_dtau.is_finite() {
            return bad("numerics.pde_dtau must be positive");
        }
        if n.particles == 0 {
            return bad("numerics.particles must be >= 1");
        }
        if n.grid_n < 16 {
            return bad("numerics.grid_n must be >= 16");
        }
        if !(n.alpha_max > 0.0) || !n.alpha_max.is_finite() {
            return bad("numerics.alpha_max must be positive");
        }
        if n.reortho_every == 0 {
            return bad("numerics.reortho_every must be >= 1");
        }
        if n.bins == 0 {
            return bad("numerics.bins must be >= 1");
        }
        if !(n.relaxation_time > 0.0) {
            return bad("numerics.relaxation_time must be positive");
        }
        let p = &self.physics;
        if p.d_tau.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return bad("physics.d_tau values must be positive");
        }
        if !(p.initial_d_tau > 0.0) {
            return bad("physics.initial_d_tau must be positive");
        }
        if !(p.alpha0 >= 0.0) || !p.boost_rapidity.is_finite() {
            return bad("physics.alpha0 must be >= 0 and boost_rapidity finite");
        }
        let c = &self.checks;
        if c.generator_particles < 2 || !(c.generator_dtau > 0.0) || !(c.histogram_alpha_max > 0.0) {
            return bad("checks: generator_particles >= 2, generator_dtau > 0, histogram_alpha_max > 0");
        }
        Ok(())
    }

    /// `D tau` targets, falling back to the experiment's default set.
    pub fn d_tau_values(&self) -> Vec<f64> {
        if !self.physics.d_tau.is_empty() {
            return self.physics.d_tau.clone();
        }
        match self.experiment {
            Experiment::Figure1 => vec![0.1, 1.0, 3.0],
            Experiment::Pde => vec![self.physics.initial_d_tau + 1.0],
            _ => vec![0.5, 2.0],
        }
    }

    pub fn writes(&self, format: OutputFormat) -> bool {
        self.output.formats.contains(&format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_defaults() {
        let cfg = RunConfig::from_json(r#"{"experiment": "photon-check"}"#).unwrap();
        assert_eq!(cfg.experiment, Experiment::PhotonCheck);
        assert_eq!(cfg.numerics, Numerics::default());
        let c = cfg.coefficients().unwrap();
        assert_eq!((c.diffusion, c.nu, c.chi), (1.0, 1.0, Some(1.0)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"experiment": "pde", "colour": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment": "pde", "numerics": {"stepz": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment": "warp"}"#).is_err());
    }

    #[test]
    fn einstein_relation_fills_missing_coefficient() {
        let cfg = RunConfig::from_json(r#"{"experiment": "equilibrium", "physics": {"chi": 2.0, "diffusion": 0.5}}"#)
            .unwrap();
        assert_eq!(cfg.coefficients().unwrap().nu, 1.0);
        let cfg = RunConfig::from_json(r#"{"experiment": "equilibrium", "physics": {"chi": 4.0, "nu": 2.0}}"#).unwrap();
        assert_eq!(cfg.coefficients().unwrap().diffusion, 0.5);
    }

    #[test]
    fn inconsistent_chi_is_rejected() {
        let doc = r#"{"experiment": "equilibrium", "physics": {"chi": 1.0, "nu": 2.0, "diffusion": 1.0}}"#;
        assert!(matches!(RunConfig::from_json(doc), Err(CliError::Config(_))));
        let doc = r#"{"experiment": "equilibrium", "physics": {"chi": 2.0, "nu": 2.0, "diffusion": 1.0}}"#;
        assert!(RunConfig::from_json(doc).is_ok());
    }

    #[test]
    fn zero_friction_has_no_chi() {
        let cfg = RunConfig::from_json(r#"{"experiment": "pde", "physics": {"nu": 0.0}}"#).unwrap();
        assert_eq!(cfg.coefficients().unwrap().chi, None);
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::new(Experiment::Transition);
        cfg.physics.d_tau = vec![0.5];
        cfg.numerics.integrator = IntegratorChoice::EulerIto;
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
