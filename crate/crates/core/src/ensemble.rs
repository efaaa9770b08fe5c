//! Histograms, empirical distribution comparisons and moment summaries.

use crate::geometry::SpatialVelocity;
use crate::langevin::ParticleState;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("empty input")]
    EmptyInput,
    #[error("sample is not sorted ascending at index {0}")]
    Unsorted(usize),
    #[error("histogram edges must be finite and strictly increasing")]
    InvalidEdges,
    #[error("histograms have different binning")]
    IncompatibleBins,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, EnsembleError>;

/// Fixed-edge histogram. Samples outside `[edges[0], edges[last])` are
/// counted in `outside` and excluded from `total`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
    outside: u64,
    weights: Option<Vec<f64>>,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EnsembleError::InvalidEdges);
        }
        let bins = edges.len() - 1;
        Ok(Histogram { edges, counts: vec![0; bins], total: 0, outside: 0, weights: None })
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(EnsembleError::InvalidEdges);
        }
        let w = (hi - lo) / bins as f64;
        Histogram::new((0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * w }).collect())
    }

    /// A histogram that additionally accumulates per-sample weights.
    pub fn weighted(edges: Vec<f64>) -> Result<Self> {
        let mut h = Histogram::new(edges)?;
        h.weights = Some(vec![0.0; h.counts.len()]);
        Ok(h)
    }

    pub fn from_sample(edges: Vec<f64>, sample: &[f64]) -> Result<Self> {
        let mut h = Histogram::new(edges)?;
        sample.iter().for_each(|&x| h.add(x));
        Ok(h)
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        let last = *self.edges.last().unwrap();
        if !(x >= self.edges[0]) || x >= last {
            return None;
        }
        // index of the last edge <= x
        Some(self.edges.partition_point(|e| *e <= x) - 1)
    }

    pub fn add(&mut self, x: f64) {
        self.add_weighted(x, 1.0);
    }

    pub fn add_weighted(&mut self, x: f64, w: f64) {
        match self.bin_of(x) {
            Some(b) => {
                self.counts[b] += 1;
                self.total += 1;
                if let Some(ws) = &mut self.weights {
                    ws[b] += w;
                }
            }
            None => self.outside += 1,
        }
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.edges != other.edges || self.weights.is_some() != other.weights.is_some() {
            return Err(EnsembleError::IncompatibleBins);
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        if let (Some(a), Some(b)) = (&mut self.weights, &other.weights) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.total += other.total;
        self.outside += other.outside;
        Ok(())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn outside(&self) -> u64 {
        self.outside
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Probability density per bin, normalized by all samples seen
    /// (including those outside the range).
    pub fn density(&self) -> Vec<f64> {
        let n = (self.total + self.outside).max(1) as f64;
        self.edges.windows(2).zip(&self.counts).map(|(w, &c)| c as f64 / (n * (w[1] - w[0]))).collect()
    }
}

/// Sorted rapidities `a = asinh |u|` of an ensemble.
pub fn alpha_marginal(states: &[ParticleState]) -> Result<Vec<f64>> {
    alpha_marginal_of(states.iter().map(|s| s.u))
}

pub fn alpha_marginal_of<I: IntoIterator<Item = SpatialVelocity>>(velocities: I) -> Result<Vec<f64>> {
    let mut a: Vec<f64> = velocities.into_iter().map(|u| u.rapidity()).collect();
    if a.is_empty() {
        return Err(EnsembleError::EmptyInput);
    }
    a.sort_by(f64::total_cmp);
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n_effective: f64,
    pub threshold: Option<f64>,
}

impl KsResult {
    pub fn with_threshold(self, threshold: f64) -> Self {
        KsResult { threshold: Some(threshold), ..self }
    }

    pub fn pass(&self) -> Option<bool> {
        self.threshold.map(|t| self.statistic <= t)
    }

    /// Asymptotic p-value from the Kolmogorov distribution, with Stephens'
    /// finite-sample correction of the scaled statistic.
    pub fn p_value(&self) -> f64 {
        let sn = self.n_effective.sqrt();
        let lambda = (sn + 0.12 + 0.11 / sn) * self.statistic;
        if lambda < 0.2 {
            return 1.0;
        }
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-16 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }

    /// Asymptotic critical value `c / sqrt(n_eff)`; `c = 1.36` at 5%.
    pub fn critical_value(&self, c: f64) -> f64 {
        c / self.n_effective.sqrt()
    }
}

fn check_sorted(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(EnsembleError::EmptyInput);
    }
    match sample.windows(2).position(|w| !(w[0] <= w[1])) {
        Some(i) => Err(EnsembleError::Unsorted(i + 1)),
        None => Ok(()),
    }
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|` of a sorted sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], target_cdf: F) -> Result<KsResult> {
    check_sorted(sample)?;
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = target_cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult { statistic: d.clamp(0.0, 1.0), n_effective: n, threshold: None })
}

/// Two-sample Kolmogorov-Smirnov statistic of two sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult { statistic: d, n_effective: na * nb / (na + nb), threshold: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
}

/// Pearson chi-square of binned counts against bin probabilities; bins with
/// expected count below `min_expected` are pooled into their right neighbour.
pub fn chi_square(hist: &Histogram, probabilities: &[f64], min_expected: f64) -> Result<ChiSquare> {
    if probabilities.len() != hist.counts.len() {
        return Err(EnsembleError::InvalidArgument("one probability per bin required".into()));
    }
    let n = (hist.total + hist.outside) as f64;
    if n == 0.0 {
        return Err(EnsembleError::EmptyInput);
    }
    let mut stat = 0.0;
    let mut dof = 0usize;
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &p) in hist.counts.iter().zip(probabilities) {
        obs += c as f64;
        exp += n * p;
        if exp >= min_expected {
            stat += (obs - exp).powi(2) / exp;
            dof += 1;
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 {
        stat += (obs - exp).powi(2) / exp;
        dof += 1;
    }
    Ok(ChiSquare { statistic: stat, dof: dof.saturating_sub(1) })
}

/// Moments of `u0` and `|u|`, mergeable across disjoint sub-ensembles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: u64,
    pub mean_u0: f64,
    /// Sum of squared deviations of `u0` from the mean.
    m2_u0: f64,
    pub mean_speed: f64,
}

impl Summary {
    pub fn from_velocities<I: IntoIterator<Item = SpatialVelocity>>(velocities: I) -> Result<Self> {
        let mut s = Summary { count: 0, mean_u0: 0.0, m2_u0: 0.0, mean_speed: 0.0 };
        for u in velocities {
            s.count += 1;
            let n = s.count as f64;
            let u0 = u.u0();
            let delta = u0 - s.mean_u0;
            s.mean_u0 += delta / n;
            s.m2_u0 += delta * (u0 - s.mean_u0);
            s.mean_speed += (u.vector().norm() - s.mean_speed) / n;
        }
        if s.count == 0 {
            return Err(EnsembleError::EmptyInput);
        }
        Ok(s)
    }

    /// Unbiased sample variance of `u0`.
    pub fn var_u0(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2_u0 / (self.count - 1) as f64
        }
    }

    pub fn std_error_u0(&self) -> f64 {
        (self.var_u0() / self.count as f64).sqrt()
    }

    pub fn merge(&self, other: &Summary) -> Summary {
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean_u0 - self.mean_u0;
        Summary {
            count: self.count + other.count,
            mean_u0: self.mean_u0 + delta * nb / n,
            m2_u0: self.m2_u0 + other.m2_u0 + delta * delta * na * nb / n,
            mean_speed: (self.mean_speed * na + other.mean_speed * nb) / n,
        }
    }
}

pub fn summary(states: &[ParticleState]) -> Result<Summary> {
    Summary::from_velocities(states.iter().map(|s| s.u))
}
