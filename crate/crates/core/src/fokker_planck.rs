//! Radial Fokker-Planck solver for isotropic densities on the hyperboloid.
//!
//! Solves `d phi / d tau = sinh^-2(a) d_a [ sinh^2(a) D d_a phi + nu sinh^3(a) phi ]`
//! with a finite-volume discretization on a uniform rapidity grid: node `k`
//! owns the cell `[a_k - h/2, a_k + h/2]` (clipped to `[0, a_max]`), cell
//! volumes are integrated exactly, and the flux through every cell face is a
//! linear combination of the two neighbouring node values. The flux vanishes
//! at `a = 0` (regularity) and is set to zero at `a_max`, so the discrete mass
//! `4 pi sum V_k phi_k` is conserved by construction.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FokkerPlanckError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),
}

pub type Result<T> = std::result::Result<T, FokkerPlanckError>;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    alpha_max: f64,
    n: usize,
}

impl RadialGrid {
    pub fn new(alpha_max: f64, n: usize) -> Result<Self> {
        if !(alpha_max > 0.0) || !alpha_max.is_finite() {
            return Err(FokkerPlanckError::InvalidGrid(format!("alpha_max must be positive, got {alpha_max}")));
        }
        if n < 16 {
            return Err(FokkerPlanckError::InvalidGrid(format!("need at least 16 nodes, got {n}")));
        }
        Ok(RadialGrid { alpha_max, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn spacing(&self) -> f64 {
        self.alpha_max / (self.n - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Exact `int sinh^2` over each node's cell.
    pub fn cell_volumes(&self) -> Vec<f64> {
        let h = self.spacing();
        let prim = |a: f64| 0.25 * (2.0 * a).sinh() - 0.5 * a;
        (0..self.n)
            .map(|k| {
                let lo = (self.node(k) - 0.5 * h).max(0.0);
                let hi = (self.node(k) + 0.5 * h).min(self.alpha_max);
                // sinh(2a)/4 - a/2 cancels badly near 0; use the series there
                if hi < 1e-2 {
                    let s = |a: f64| a.powi(3) / 3.0 + a.powi(5) / 15.0 + 2.0 * a.powi(7) / 315.0;
                    s(hi) - s(lo)
                } else {
                    prim(hi) - prim(lo)
                }
            })
            .collect()
    }
}

/// Density with respect to the Riemannian volume, sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub values: Vec<f64>,
    pub tau: f64,
}

impl RadialField {
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &RadialGrid, f: F, tau: f64) -> Self {
        RadialField { values: grid.nodes().into_iter().map(f).collect(), tau }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        RadialField { values: vec![0.0; grid.len()], tau: 0.0 }
    }

    /// `exp(-chi cosh a)`, scaled so that the discrete mass is exactly one.
    pub fn juttner(grid: &RadialGrid, chi: f64) -> Self {
        let mut field = RadialField::from_fn(grid, |a| (-chi * (a.cosh() - 1.0)).exp(), 0.0);
        let m = mass(&field, grid);
        field.values.iter_mut().for_each(|v| *v /= m);
        field
    }
}

/// `4 pi sum V_k phi_k`: the quantity conserved by the discretization.
pub fn mass(field: &RadialField, grid: &RadialGrid) -> f64 {
    4.0 * PI * grid.cell_volumes().iter().zip(&field.values).map(|(v, p)| v * p).sum::<f64>()
}

/// `4 pi int phi sinh^2` by composite Simpson on the nodes (closed with the
/// 3/8 rule when the interval count is odd). Fourth order in `h`, so it is the
/// better estimate of the mass of a sampled continuous density; it is not the
/// quantity conserved by the time stepping.
pub fn simpson_mass(field: &RadialField, grid: &RadialGrid) -> f64 {
    let h = grid.spacing();
    let y: Vec<f64> = grid.nodes().iter().zip(&field.values).map(|(a, p)| p * a.sinh().powi(2)).collect();
    let intervals = y.len() - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    let mut sum = 0.0;
    for k in (0..simpson_end).step_by(2) {
        sum += h / 3.0 * (y[k] + 4.0 * y[k + 1] + y[k + 2]);
    }
    if simpson_end < intervals {
        let k = simpson_end;
        sum += 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
    }
    4.0 * PI * sum
}

/// How the friction part of the face flux is interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrictionFlux {
    /// Arithmetic mean of `sinh^3 phi` at the face; second order.
    #[default]
    Central,
    /// Exponentially fitted (Scharfetter-Gummel) flux; second order and the
    /// sampled equilibrium `exp(-chi cosh a)` is an exact discrete steady state.
    ExponentialFit,
}

/// `A` in `V d phi/d tau = A phi`, stored as three diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    /// Cell volumes `V_k` (without the `4 pi`).
    pub volumes: Vec<f64>,
}

impl TridiagonalOperator {
    /// Flux divergence `(A phi)_k`.
    pub fn apply_flux(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|k| {
                let mut v = self.diag[k] * phi[k];
                if k > 0 {
                    v += self.lower[k] * phi[k - 1];
                }
                if k + 1 < n {
                    v += self.upper[k] * phi[k + 1];
                }
                v
            })
            .collect()
    }

    /// The right-hand side `V^-1 A phi`, an approximation of the continuous operator.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        self.apply_flux(phi).iter().zip(&self.volumes).map(|(a, v)| a / v).collect()
    }
}

/// `B(x) = x / (e^x - 1)`.
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-10 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

pub fn assemble_operator(grid: &RadialGrid, diffusion: f64, nu: f64) -> TridiagonalOperator {
    assemble_operator_with(grid, diffusion, nu, FrictionFlux::Central)
}

pub fn assemble_operator_with(grid: &RadialGrid, diffusion: f64, nu: f64, scheme: FrictionFlux) -> TridiagonalOperator {
    let n = grid.len();
    let h = grid.spacing();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let fitted = scheme == FrictionFlux::ExponentialFit && diffusion > 0.0;
    for k in 0..n - 1 {
        // face flux J = a phi_k + b phi_{k+1} between nodes k and k+1
        let mid = grid.node(k) + 0.5 * h;
        let s = mid.sinh();
        let (a, b) = if fitted {
            let chi = nu / diffusion;
            let du = chi * (grid.node(k + 1).cosh() - grid.node(k).cosh());
            let c = diffusion * s * s / h;
            (-c * bernoulli(du), c * bernoulli(-du))
        } else {
            let c = diffusion * s * s / h;
            let f = 0.5 * nu * s * s * s;
            (-c + f, c + f)
        };
        // node k gains J, node k+1 loses it
        diag[k] += a;
        upper[k] += b;
        lower[k + 1] -= a;
        diag[k + 1] -= b;
    }
    TridiagonalOperator { lower, diag, upper, volumes: grid.cell_volumes() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    CrankNicolson,
}

/// Thomas factorization of a fixed tridiagonal matrix.
struct Thomas {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    pivot: Vec<f64>,
}

impl Thomas {
    fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut upper_mod = vec![0.0; n];
        let mut pivot = vec![0.0; n];
        for k in 0..n {
            let p = if k == 0 { diag[0] } else { diag[k] - lower[k] * upper_mod[k - 1] };
            if p.abs() < 1e-300 || !p.is_finite() {
                return Err(FokkerPlanckError::Singular(k));
            }
            pivot[k] = p;
            upper_mod[k] = upper[k] / p;
        }
        Ok(Thomas { lower: lower.to_vec(), upper_mod, pivot })
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] /= self.pivot[0];
        for k in 1..n {
            rhs[k] = (rhs[k] - self.lower[k] * rhs[k - 1]) / self.pivot[k];
        }
        for k in (0..n - 1).rev() {
            rhs[k] -= self.upper_mod[k] * rhs[k + 1];
        }
    }
}

/// Advances `field` to proper time `t_end` with a uniform step no larger than
/// `dtau` (the step is shortened so that `t_end` is hit exactly).
pub fn evolve(
    field: &RadialField,
    op: &TridiagonalOperator,
    dtau: f64,
    t_end: f64,
    scheme: TimeScheme,
) -> Result<RadialField> {
    let TimeScheme::CrankNicolson = scheme;
    if !(dtau > 0.0) || !dtau.is_finite() {
        return Err(FokkerPlanckError::InvalidArgument(format!("dtau must be positive, got {dtau}")));
    }
    if field.values.len() != op.diag.len() {
        return Err(FokkerPlanckError::InvalidArgument("field and operator sizes differ".into()));
    }
    let span = t_end - field.tau;
    if span < 0.0 {
        return Err(FokkerPlanckError::InvalidArgument(format!("t_end {t_end} precedes field time {}", field.tau)));
    }
    if span == 0.0 {
        return Ok(field.clone());
    }
    let steps = (span / dtau * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let dt = span / steps as f64;
    let half = 0.5 * dt;
    let n = op.diag.len();

    // (V - dt/2 A) phi' = (V + dt/2 A) phi
    let lhs_lower: Vec<f64> = op.lower.iter().map(|l| -half * l).collect();
    let lhs_upper: Vec<f64> = op.upper.iter().map(|u| -half * u).collect();
    let lhs_diag: Vec<f64> = op.diag.iter().zip(&op.volumes).map(|(d, v)| v - half * d).collect();
    let solver = Thomas::factor(&lhs_lower, &lhs_diag, &lhs_upper)?;

    let mut phi = field.values.clone();
    let mut rhs = vec![0.0; n];
    for _ in 0..steps {
        for k in 0..n {
            let mut a = op.diag[k] * phi[k];
            if k > 0 {
                a += op.lower[k] * phi[k - 1];
            }
            if k + 1 < n {
                a += op.upper[k] * phi[k + 1];
            }
            rhs[k] = op.volumes[k] * phi[k] + half * a;
        }
        solver.solve(&mut rhs);
        std::mem::swap(&mut phi, &mut rhs);
    }
    Ok(RadialField { values: phi, tau: t_end })
}

/// Relative L-infinity change `max |b - a| / max |a|`.
pub fn relative_linf_change(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// L1 distance `4 pi sum V_k |a_k - b_k|` between two densities on the grid.
pub fn l1_distance(a: &RadialField, b: &RadialField, grid: &RadialGrid) -> f64 {
    4.0 * PI
        * grid
            .cell_volumes()
            .iter()
            .zip(a.values.iter().zip(&b.values))
            .map(|(v, (x, y))| v * (x - y).abs())
            .sum::<f64>()
}
