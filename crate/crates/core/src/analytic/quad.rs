//! Adaptive Gauss-Kronrod quadrature and tabulated distribution functions.

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// 7-point Gauss weights for the odd-indexed Kronrod nodes
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel; returns `(kronrod, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive integration of `f` over `[a, b]`: the panel with the
/// largest error estimate is bisected until the summed estimate falls below
/// `max(abs_tol, rel_tol * |I|)` or the panel budget is exhausted.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    const MAX_PANELS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * value.abs()).max(64.0 * f64::EPSILON * value.abs());
        if error <= target || panels.len() >= MAX_PANELS {
            return value;
        }
        let worst = (0..panels.len()).max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3)).unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return value;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Integral of a decaying `f` over `[a, inf)`, summed over unit panels until
/// a panel contributes less than `rel_tol` of the running total twice in a row.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    let mut quiet = 0;
    for _ in 0..10_000 {
        let piece = integrate(&f, lo, lo + 1.0, 0.0, (rel_tol * 1e-2).max(1e-15));
        total += piece;
        lo += 1.0;
        if piece.abs() <= rel_tol * total.abs() && total != 0.0 {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total
}

/// Piecewise-linear cumulative distribution tabulated from a density on
/// `[lo, hi]`, normalized so that `cdf(hi) = 1`.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    total_mass: f64,
}

impl TabulatedCdf {
    pub fn from_pdf<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64, cells: usize) -> Self {
        assert!(hi > lo && cells >= 1);
        let width = (hi - lo) / cells as f64;
        let nodes: Vec<f64> = (0..=cells).map(|k| lo + k as f64 * width).collect();
        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            acc += gk15(&pdf, w[0], w[1]).0;
            cumulative.push(acc);
        }
        let total_mass = acc;
        for c in cumulative.iter_mut() {
            *c /= total_mass;
        }
        TabulatedCdf { nodes, cumulative, total_mass }
    }

    /// Unnormalized integral of the density over the table range.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo() {
            return 0.0;
        }
        if x >= self.hi() {
            return 1.0;
        }
        let k = self.nodes.partition_point(|&n| n <= x) - 1;
        let t = (x - self.nodes[k]) / (self.nodes[k + 1] - self.nodes[k]);
        self.cumulative[k] + t * (self.cumulative[k + 1] - self.cumulative[k])
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let k = self.cumulative.partition_point(|&c| c < p).clamp(1, self.nodes.len() - 1);
        let (c0, c1) = (self.cumulative[k - 1], self.cumulative[k]);
        let t = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
        self.nodes[k - 1] + t * (self.nodes[k] - self.nodes[k - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_and_exponentials() {
        assert_abs_diff_eq!(integrate(|x| x.powi(7), 0.0, 2.0, 0.0, 1e-14), 32.0, epsilon = 1e-12);
        assert_abs_diff_eq!(integrate(|x| (-x).exp(), 0.0, 30.0, 1e-15, 1e-14), 1.0 - (-30f64).exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13), 2.0 / 3.0, epsilon = 1e-11);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let v = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1e-14);
        assert_abs_diff_eq!(v, std::f64::consts::PI.sqrt() / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn tabulated_cdf_of_exponential() {
        let t = TabulatedCdf::from_pdf(|x| (-x).exp(), 0.0, 40.0, 4000);
        for x in [0.1, 0.5, 1.0, 3.0] {
            assert_abs_diff_eq!(t.cdf(x), 1.0 - (-x).exp(), epsilon = 1e-5);
            assert_abs_diff_eq!(t.quantile(t.cdf(x)), x, epsilon = 1e-9);
        }
        assert_eq!(t.cdf(-1.0), 0.0);
        assert_eq!(t.cdf(41.0), 1.0);
    }
}
