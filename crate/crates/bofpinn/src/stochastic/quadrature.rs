//! Gauss-Legendre rules and tensor products.

use crate::error::{Error, Result};

/// Nodes and weights, possibly multi-dimensional (row-major node tuples).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Dimension of each node.
    pub dim: usize,
    /// `n × dim` node coordinates, flattened row-major.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate a function of the node tuple.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * f(self.node(i))).sum()
    }
}

/// n-point Gauss-Legendre rule on `[a, b]`, exact for polynomials of degree
/// `2n-1`. Roots of the Legendre polynomial by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre_rule(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArg("quadrature needs at least one point".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidArg(format!("bad interval [{a}, {b}]")));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    // map [-1,1] -> [a,b]
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for i in 0..n {
        nodes[i] = mid + half * nodes[i];
        weights[i] *= half;
    }
    Ok(QuadratureRule { dim: 1, nodes, weights })
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor product of one-dimensional rules.
pub fn tensor_quadrature(rules: &[QuadratureRule]) -> Result<QuadratureRule> {
    if rules.is_empty() {
        return Err(Error::InvalidArg("tensor product of zero rules".into()));
    }
    if rules.iter().any(|r| r.dim != 1) {
        return Err(Error::InvalidArg("tensor factors must be one-dimensional".into()));
    }
    let total: usize = rules.iter().map(|r| r.len()).product();
    if total > 1_000_000 {
        return Err(Error::InvalidArg(format!("tensor rule would hold {total} nodes")));
    }
    let dim = rules.len();
    let mut nodes = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    loop {
        let mut w = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            nodes.push(rules[d].nodes[i]);
            w *= rules[d].weights[i];
        }
        weights.push(w);
        // odometer increment
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(QuadratureRule { dim, nodes, weights });
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < rules[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}
