//! Gauss-Legendre quadrature.

use crate::numerics::NeumaierSum;

/// A Gauss-Legendre rule of fixed degree on `[-1, 1]`.
///
/// Nodes are found by Newton iteration on the Legendre recurrence, which is
/// accurate to machine precision for the degrees used here (up to a few
/// thousand).
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "quadrature degree must be positive");
        let m = degree;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..(m + 1) / 2 {
            // Tricomi-style initial guess, then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            let (_, d) = legendre_and_derivative(m, 0.0);
            nodes[m / 2] = 0.0;
            weights[m / 2] = 2.0 / (d * d);
        }
        Self { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn nodes_weights(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mut s = NeumaierSum::new();
        for (x, w) in self.nodes_weights(a, b) {
            s.add(w * f(x));
        }
        s.total()
    }
}

fn legendre_and_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a composite rule: `panels` equal panels on `[a, b]`,
/// each carrying a Gauss-Legendre rule of the given degree. Used where the
/// integrand has structure on a known short scale.
pub fn composite_nodes(a: f64, b: f64, panels: usize, degree: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(degree);
    let mut out = Vec::with_capacity(panels * degree);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        out.extend(rule.nodes_weights(lo, lo + width));
    }
    out
}
