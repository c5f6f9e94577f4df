//! Riesz fractional derivatives on uniform grids via shifted
//! Grünwald-Letnikov formulas.
//!
//! The weights follow the recurrence `w_0 = 1`, `w_k = (1-(α+1)/k) w_{k-1}`.
//! The first-order operator is `c_α δ_{Δx,1}`; the second-order one blends
//! the shifted and unshifted differences with coefficients `α/2` and
//! `1-α/2`. Signs are fixed so that α=2 reproduces the classical three-point
//! Laplacian exactly, which is asserted in the tests below.
//!
//! Operators are materialized as dense interior-by-full matrices. At the
//! grid sizes used here (N ≤ 4096) the O(N²) apply is fine; the weight table
//! is Toeplitz-structured should a faster path ever be needed.

mod oracle;

pub use oracle::{left_rl_bump, left_rl_sine, AnalyticFracOracle, FracBasis};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Uniform grid with `n` cells on `[a, b]`; nodes `x_j = a + j Δx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArg(format!("bad interval [{a}, {b}]")));
        }
        if n < 2 {
            return Err(Error::InvalidArg(format!("grid needs >= 2 cells, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.n + 1
    }

    pub fn n_interior(&self) -> usize {
        self.n - 1
    }

    pub fn node(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.n).map(|j| self.node(j)).collect()
    }

    /// Composite trapezoid weights over all nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.n_nodes()];
        w[0] = 0.5 * dx;
        w[self.n] = 0.5 * dx;
        w
    }

    /// Trapezoid inner product of two node fields.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let w = self.trapezoid_weights();
        f.iter().zip(g).zip(&w).map(|((a, b), w)| a * b * w).sum()
    }
}

/// GL weights `w_0..w_K` for order α.
pub fn gl_weights(alpha: f64, k: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidArg(format!("GL order must lie in (0,2], got {alpha}")));
    }
    let mut w = Vec::with_capacity(k + 1);
    w.push(1.0);
    for i in 1..=k {
        let prev = w[i - 1];
        w.push((1.0 - (alpha + 1.0) / i as f64) * prev);
    }
    Ok(w)
}

/// d/dα of the GL weights, by the differentiated recurrence.
pub fn gl_weights_dalpha(alpha: f64, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = gl_weights(alpha, k)?;
    let mut dw = Vec::with_capacity(k + 1);
    dw.push(0.0);
    for i in 1..=k {
        let v = (1.0 - (alpha + 1.0) / i as f64) * dw[i - 1] - w[i - 1] / i as f64;
        dw.push(v);
    }
    Ok((w, dw))
}

/// Riesz coefficient `c_α = -1/(2 cos(πα/2))`, positive on (1,2].
pub fn riesz_coeff(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::InvalidArg(format!(
            "Riesz coefficient defined for α in (1,2], got {alpha}"
        )));
    }
    Ok(-1.0 / (2.0 * (std::f64::consts::PI * alpha / 2.0).cos()))
}

fn riesz_coeff_dalpha(alpha: f64) -> f64 {
    // d/dα of -1/(2 cos(πα/2)) = -(π/4) sin(πα/2)/cos²(πα/2)
    let th = std::f64::consts::PI * alpha / 2.0;
    -(std::f64::consts::PI / 4.0) * th.sin() / (th.cos() * th.cos())
}

/// Approximation order of the shifted GL formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlOrder {
    First,
    Second,
}

/// Both one-sided sums of the shifted difference `δ_{Δx,p}` assembled as an
/// interior-by-full matrix (without the `1/Δx^α` factor).
fn shift_pair_matrix(n: usize, p: usize, w: &[f64]) -> Tensor {
    let mut m = Tensor::zeros(n - 1, n + 1);
    for j in 1..n {
        let r = j - 1;
        // left-transported sum: u(x_j - (k-p)Δx) = u at index j - k + p
        for k in 0..=(j + p).min(n + p) {
            let idx = j as isize - k as isize + p as isize;
            if (0..=n as isize).contains(&idx) {
                let v = m.get(r, idx as usize) + w[k];
                m.set(r, idx as usize, v);
            }
        }
        // right-transported sum: u(x_j + (k-p)Δx) = u at index j + k - p
        for k in 0..=(n - j + p) {
            let idx = j as isize + k as isize - p as isize;
            if (0..=n as isize).contains(&idx) {
                let v = m.get(r, idx as usize) + w[k];
                m.set(r, idx as usize, v);
            }
        }
    }
    m
}

/// Precomputed GL stencil for one (grid, α, order) triple.
#[derive(Clone, Debug)]
pub struct GlStencil {
    pub grid: Grid1D,
    pub alpha: f64,
    pub order: GlOrder,
    pub weights: Vec<f64>,
    pub c_alpha: f64,
    matrix: Tensor,
}

impl GlStencil {
    pub fn new(grid: Grid1D, alpha: f64, order: GlOrder) -> Result<Self> {
        let c_alpha = riesz_coeff(alpha)?;
        let weights = gl_weights(alpha, grid.n + 1)?;
        let matrix = assemble(grid, alpha, order, c_alpha, &weights, None).0;
        Ok(Self { grid, alpha, order, weights, c_alpha, matrix })
    }

    /// The dense operator, shape (interior × nodes).
    pub fn matrix(&self) -> &Tensor {
        &self.matrix
    }

    /// dD/dα at this stencil's α (used when the order is a trainable
    /// parameter).
    pub fn alpha_derivative_matrix(&self) -> Result<Tensor> {
        let (w, dw) = gl_weights_dalpha(self.alpha, self.grid.n + 1)?;
        let (_, dm) = assemble(self.grid, self.alpha, self.order, self.c_alpha, &w, Some(&dw));
        Ok(dm.expect("assemble returns derivative when dw supplied"))
    }

    /// Apply to a full-node field with homogeneous Dirichlet data; returns
    /// interior values.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n;
        if values.len() != n + 1 {
            return Err(Error::Shape(format!(
                "field has {} nodes, grid has {}",
                values.len(),
                n + 1
            )));
        }
        if values[0].abs() > 1e-12 || values[n].abs() > 1e-12 {
            return Err(Error::InvalidArg(format!(
                "nonzero boundary values ({:.3e}, {:.3e}); operator requires homogeneous Dirichlet data",
                values[0], values[n]
            )));
        }
        let f = Tensor::from_raw(n + 1, 1, values.to_vec());
        Ok(self.matrix.matmul(&f).into_data())
    }
}

fn assemble(
    grid: Grid1D,
    alpha: f64,
    order: GlOrder,
    c_alpha: f64,
    w: &[f64],
    dw: Option<&[f64]>,
) -> (Tensor, Option<Tensor>) {
    let n = grid.n;
    let dx = grid.dx();
    let hscale = dx.powf(-alpha);
    let (b1, b0, db1, db0) = match order {
        GlOrder::First => (1.0, 0.0, 0.0, 0.0),
        GlOrder::Second => (alpha / 2.0, 1.0 - alpha / 2.0, 0.5, -0.5),
    };

    let t1 = shift_pair_matrix(n, 1, w);
    let t0 = if b0 != 0.0 || dw.is_some() {
        shift_pair_matrix(n, 0, w)
    } else {
        Tensor::zeros(n - 1, n + 1)
    };

    let mut m = t1.scale(b1);
    m.axpy(b0, &t0);
    let matrix = m.scale(c_alpha * hscale);

    let dm = dw.map(|dw| {
        let dc = riesz_coeff_dalpha(alpha);
        let dt1 = shift_pair_matrix(n, 1, dw);
        let dt0 = shift_pair_matrix(n, 0, dw);
        // product rule over c_α, Δx^{-α}, blend coefficients, and weights
        let mut inner = t1.scale(db1);
        inner.axpy(db0, &t0);
        inner.axpy(b1, &dt1);
        inner.axpy(b0, &dt0);
        let mut out = inner.scale(c_alpha * hscale);
        let mut base = t1.scale(b1);
        base.axpy(b0, &t0);
        out.axpy(dc * hscale - c_alpha * hscale * dx.ln(), &base);
        out
    });
    (matrix, dm)
}

/// One-shot convenience wrapper around [`GlStencil`].
pub fn shifted_gl_apply(grid: Grid1D, values: &[f64], alpha: f64, order: GlOrder) -> Result<Vec<f64>> {
    GlStencil::new(grid, alpha, order)?.apply(values)
}

/// Directional Riesz derivatives on a tensor-product grid:
/// `D^α` along rows (first coordinate) plus `D^β` along columns. `field` has
/// shape (nodes_x × nodes_y); the result covers interior × interior.
pub fn riesz_2d_apply(
    gx: Grid1D,
    gy: Grid1D,
    field: &Tensor,
    alpha: f64,
    beta: f64,
    order: GlOrder,
) -> Result<Tensor> {
    if field.shape() != (gx.n_nodes(), gy.n_nodes()) {
        return Err(Error::Shape(format!(
            "2D field {:?} does not match grids ({}, {})",
            field.shape(),
            gx.n_nodes(),
            gy.n_nodes()
        )));
    }
    for j in 0..gy.n_nodes() {
        if field.get(0, j).abs() > 1e-12 || field.get(gx.n, j).abs() > 1e-12 {
            return Err(Error::InvalidArg("nonzero boundary values on x-edges".into()));
        }
    }
    for i in 0..gx.n_nodes() {
        if field.get(i, 0).abs() > 1e-12 || field.get(i, gy.n).abs() > 1e-12 {
            return Err(Error::InvalidArg("nonzero boundary values on y-edges".into()));
        }
    }
    let sx = GlStencil::new(gx, alpha, order)?;
    let sy = GlStencil::new(gy, beta, order)?;
    // D_x F: (ix-1, ny+1) then trim columns; F D_yᵀ: (nx+1, iy-1) then trim rows
    let dxf = sx.matrix().matmul(field);
    let fdy = field.matmul_nt(sy.matrix());
    let (ni, nj) = (gx.n_interior(), gy.n_interior());
    let mut out = Tensor::zeros(ni, nj);
    for i in 0..ni {
        for j in 0..nj {
            out.set(i, j, dxf.get(i, j + 1) + fdy.get(i + 1, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_match_hand_recurrence() {
        let w = gl_weights(1.5, 4).unwrap();
        let expect = [1.0, -1.5, 0.375, 0.0625, 0.0234375];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn weights_cut_off_at_integer_orders() {
        let w2 = gl_weights(2.0, 4).unwrap();
        assert_eq!(w2, vec![1.0, -2.0, 1.0, 0.0, 0.0]);
        let w1 = gl_weights(1.0, 3).unwrap();
        assert_eq!(w1, vec![1.0, -1.0, 0.0, 0.0]);
        assert!(gl_weights(2.5, 3).is_err());
        assert!(gl_weights(0.0, 3).is_err());
    }

    #[test]
    fn weight_partial_sums_decay_and_are_monotone_after_two() {
        for &alpha in &[1.2, 1.5, 1.8] {
            let w = gl_weights(alpha, 10_000).unwrap();
            let mut s = 0.0;
            let mut partial = Vec::new();
            for v in &w {
                s += v;
                partial.push(s);
            }
            assert!(s.abs() <= 1e-2, "α={alpha}: Σw = {s}");
            // after k=2 the weights are positive, so partial sums climb
            // monotonically toward zero from below
            for k in 3..partial.len() {
                assert!(partial[k] >= partial[k - 1] - 1e-15);
                assert!(partial[k] <= 1e-12);
            }
        }
    }

    #[test]
    fn riesz_coefficient_values() {
        assert!((riesz_coeff(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((riesz_coeff(1.5).unwrap() - 0.7071067811865476).abs() < 1e-15);
        assert!((riesz_coeff(1.2).unwrap() - 1.618033988749895).abs() < 1e-12);
        assert!(riesz_coeff(1.0).is_err());
        assert!(riesz_coeff(0.9).is_err());
    }

    #[test]
    fn alpha_two_reproduces_laplacian_on_parabola() {
        // f = x(1-x) has f'' = -2 exactly; α=2 must collapse to the centered
        // second difference for either order. This pins the sign convention.
        let grid = Grid1D::new(0.0, 1.0, 16).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|&x| x * (1.0 - x)).collect();
        for order in [GlOrder::First, GlOrder::Second] {
            let out = shifted_gl_apply(grid, &f, 2.0, order).unwrap();
            for v in out {
                assert!((v + 2.0).abs() < 1e-10, "got {v}, want -2");
            }
        }
    }

    #[test]
    fn zero_field_maps_to_zero_and_boundaries_are_enforced() {
        let grid = Grid1D::new(0.0, 1.0, 8).unwrap();
        let z = vec![0.0; 9];
        let out = shifted_gl_apply(grid, &z, 1.5, GlOrder::Second).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));

        let mut bad = z.clone();
        bad[0] = 1e-6;
        assert!(shifted_gl_apply(grid, &bad, 1.5, GlOrder::Second).is_err());
    }

    #[test]
    fn operator_is_linear() {
        let grid = Grid1D::new(0.0, 1.0, 32).unwrap();
        let s = GlStencil::new(grid, 1.4, GlOrder::Second).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|&x| x * x * (1.0 - x)).collect();
        let g: Vec<f64> = grid.nodes().iter().map(|&x| (std::f64::consts::PI * x).sin() * x * (1.0 - x)).collect();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| 2.5 * a - 0.7 * b).collect();
        let lhs = s.apply(&combo).unwrap();
        let fa = s.apply(&f).unwrap();
        let ga = s.apply(&g).unwrap();
        for i in 0..lhs.len() {
            assert!((lhs[i] - (2.5 * fa[i] - 0.7 * ga[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_derivative_matrix_matches_finite_differences() {
        let grid = Grid1D::new(0.0, 1.0, 12).unwrap();
        let alpha = 1.6;
        let h = 1e-6;
        let s = GlStencil::new(grid, alpha, GlOrder::Second).unwrap();
        let dm = s.alpha_derivative_matrix().unwrap();
        let mp = GlStencil::new(grid, alpha + h, GlOrder::Second).unwrap();
        let mm = GlStencil::new(grid, alpha - h, GlOrder::Second).unwrap();
        let fd = mp.matrix().sub(mm.matrix()).scale(0.5 / h);
        let err = dm.sub(&fd).max_abs();
        let scale = fd.max_abs().max(1.0);
        assert!(err / scale < 1e-6, "dM/dα mismatch {err} (scale {scale})");
    }

    #[test]
    fn separable_2d_matches_composed_1d() {
        let gx = Grid1D::new(0.0, 1.0, 24).unwrap();
        let gy = Grid1D::new(0.0, 1.0, 20).unwrap();
        let gfun = |x: f64| x * x * (1.0 - x);
        let hfun = |y: f64| (std::f64::consts::PI * y).sin() * y * (1.0 - y);
        let field = Tensor::from_fn(gx.n_nodes(), gy.n_nodes(), |i, j| {
            gfun(gx.node(i)) * hfun(gy.node(j))
        });
        let (alpha, beta) = (1.3, 1.7);
        let out = riesz_2d_apply(gx, gy, &field, alpha, beta, GlOrder::Second).unwrap();

        let gvals: Vec<f64> = gx.nodes().iter().map(|&x| gfun(x)).collect();
        let hvals: Vec<f64> = gy.nodes().iter().map(|&y| hfun(y)).collect();
        let dg = shifted_gl_apply(gx, &gvals, alpha, GlOrder::Second).unwrap();
        let dh = shifted_gl_apply(gy, &hvals, beta, GlOrder::Second).unwrap();
        for i in 0..gx.n_interior() {
            for j in 0..gy.n_interior() {
                let expect = dg[i] * hvals[j + 1] + gvals[i + 1] * dh[j];
                assert!(
                    (out.get(i, j) - expect).abs() <= 1e-13 * (1.0 + expect.abs()),
                    "({i},{j}): {} vs {expect}",
                    out.get(i, j)
                );
            }
        }
    }

    #[test]
    fn symmetric_2d_input_gives_symmetric_output() {
        let g = Grid1D::new(0.0, 1.0, 18).unwrap();
        let field = Tensor::from_fn(g.n_nodes(), g.n_nodes(), |i, j| {
            let (x, y) = (g.node(i), g.node(j));
            (x * (1.0 - x) * y * (1.0 - y)).powi(2) * (1.0 + x + y)
        });
        let out = riesz_2d_apply(g, g, &field, 1.5, 1.5, GlOrder::Second).unwrap();
        for i in 0..g.n_interior() {
            for j in 0..g.n_interior() {
                assert!((out.get(i, j) - out.get(j, i)).abs() < 1e-12);
            }
        }
        let zero = Tensor::zeros(g.n_nodes(), g.n_nodes());
        let out = riesz_2d_apply(g, g, &zero, 1.5, 1.5, GlOrder::Second).unwrap();
        assert!(out.max_abs() == 0.0);
    }
}
