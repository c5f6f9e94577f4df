//! Tape-based reverse-mode automatic differentiation over [`Tensor`]s.
//!
//! A [`Tape`] is a Wengert list built fresh for every loss evaluation. [`Var`]s
//! are cheap copyable handles into the tape. Supported primitives: +, -, *, /,
//! powers, exp, sin, cos, tanh, matrix multiply, sum, mean, square, a few
//! shape/broadcast ops, and a "linear map with parameter derivative" node used
//! for fractional-derivative stencils (the stencil matrix depends smoothly on
//! the fractional order, so its adjoint carries a dM/dα term).
//!
//! Time derivatives of network outputs are not taken by differentiating the
//! tape twice; the forward pass computes them as tangent expressions built
//! from the same primitives (see `nn::TapeMlp::forward_with_tangent`), so one
//! reverse sweep yields exact mixed derivatives with respect to parameters.

use std::cell::RefCell;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// A linear map `x -> M x`, optionally differentiable with respect to one
/// scalar parameter that `M` was built from.
pub struct LinMap {
    pub m: Tensor,
    /// dM/dp, same shape as `m`.
    pub dm_dp: Option<Tensor>,
}

enum Op {
    Leaf,
    Neg(usize),
    Scale(usize, f64),
    AddConst(usize),
    Tanh(usize),
    Exp(usize),
    Sin(usize),
    Cos(usize),
    Square(usize),
    Powf(usize, f64),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    /// (m,n) + (1,n) broadcast down rows.
    AddRow(usize, usize),
    /// (m,n) * (1,1) scalar broadcast.
    MulScalar(usize, usize),
    Matmul(usize, usize),
    Sum(usize),
    Mean(usize),
    /// (m,n) -> (1,n), sum down each column.
    SumRows(usize),
    Reshape(usize),
    /// Select `count` rows starting at `start`.
    SliceRows { p: usize, start: usize, count: usize },
    /// Select `count` columns starting at `start`.
    SliceCols { p: usize, start: usize, count: usize },
    /// (r,c) -> (r, c*m): each column repeated m consecutive times.
    RepeatCols { p: usize, m: usize },
    /// (1,c) -> (m,c).
    BroadcastRows { p: usize, m: usize },
    /// (r, c*m) -> (r, c): sum consecutive blocks of m columns.
    BlockSumCols { p: usize, m: usize },
    /// x -> M x with optional d/dparam.
    ApplyLinear { x: usize, param: Option<usize>, map: Rc<LinMap> },
}

struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

/// Computation tape. Build one per loss evaluation.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a tape node.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: usize,
}

/// Per-node gradients produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of the root with respect to `v`. Zero tensor if the node was
    /// never reached (e.g. constants).
    pub fn wrt(&self, v: Var<'_>) -> Tensor {
        match &self.grads[v.idx] {
            Some(g) => g.clone(),
            None => {
                let (r, c) = v.shape();
                Tensor::zeros(r, c)
            }
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, op: Op, value: Tensor, needs_grad: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { op, value, needs_grad });
        Var { tape: self, idx: nodes.len() - 1 }
    }

    /// Differentiable leaf (parameter or input).
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        self.push(Op::Leaf, value, true)
    }

    /// Non-differentiable leaf (data, quadrature weights, forcing, ...).
    pub fn constant(&self, value: Tensor) -> Var<'_> {
        self.push(Op::Leaf, value, false)
    }

    pub fn constant_scalar(&self, v: f64) -> Var<'_> {
        self.constant(Tensor::scalar(v))
    }

    fn with_node<R>(&self, idx: usize, f: impl FnOnce(&Node) -> R) -> R {
        f(&self.nodes.borrow()[idx])
    }

    /// Reverse sweep from a scalar root.
    pub fn backward(&self, root: Var<'_>) -> Result<Gradients> {
        if root.shape() != (1, 1) {
            return Err(Error::Shape(format!(
                "backward root must be scalar, got {:?}",
                root.shape()
            )));
        }
        let nodes = self.nodes.borrow();
        let mut grads: Vec<Option<Tensor>> = vec![None; nodes.len()];
        grads[root.idx] = Some(Tensor::scalar(1.0));

        for idx in (0..=root.idx).rev() {
            let node = &nodes[idx];
            if !node.needs_grad {
                grads[idx] = None;
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            accumulate(&nodes, &mut grads, idx, &node.op, &g);
            // Keep gradients only where a caller may ask for them (leaves).
            if matches!(node.op, Op::Leaf) {
                grads[idx] = Some(g);
            }
        }
        Ok(Gradients { grads })
    }
}

fn add_grad(nodes: &[Node], grads: &mut [Option<Tensor>], idx: usize, g: Tensor) {
    if !nodes[idx].needs_grad {
        return;
    }
    match &mut grads[idx] {
        Some(acc) => acc.axpy(1.0, &g),
        slot @ None => *slot = Some(g),
    }
}

fn accumulate(nodes: &[Node], grads: &mut [Option<Tensor>], _idx: usize, op: &Op, g: &Tensor) {
    match op {
        Op::Leaf => {}
        Op::Neg(p) => add_grad(nodes, grads, *p, g.scale(-1.0)),
        Op::Scale(p, c) => add_grad(nodes, grads, *p, g.scale(*c)),
        Op::AddConst(p) => add_grad(nodes, grads, *p, g.clone()),
        Op::Tanh(p) => {
            // y = tanh(x), dy/dx = 1 - y^2; use the stored output.
            let y = &nodes[_idx].value;
            add_grad(nodes, grads, *p, g.zip_map(y, |gi, yi| gi * (1.0 - yi * yi)));
        }
        Op::Exp(p) => {
            let y = &nodes[_idx].value;
            add_grad(nodes, grads, *p, g.zip_map(y, |gi, yi| gi * yi));
        }
        Op::Sin(p) => {
            let x = &nodes[*p].value;
            add_grad(nodes, grads, *p, g.zip_map(x, |gi, xi| gi * xi.cos()));
        }
        Op::Cos(p) => {
            let x = &nodes[*p].value;
            add_grad(nodes, grads, *p, g.zip_map(x, |gi, xi| -gi * xi.sin()));
        }
        Op::Square(p) => {
            let x = &nodes[*p].value;
            add_grad(nodes, grads, *p, g.zip_map(x, |gi, xi| 2.0 * gi * xi));
        }
        Op::Powf(p, e) => {
            let x = &nodes[*p].value;
            add_grad(nodes, grads, *p, g.zip_map(x, |gi, xi| gi * e * xi.powf(e - 1.0)));
        }
        Op::Add(a, b) => {
            add_grad(nodes, grads, *a, g.clone());
            add_grad(nodes, grads, *b, g.clone());
        }
        Op::Sub(a, b) => {
            add_grad(nodes, grads, *a, g.clone());
            add_grad(nodes, grads, *b, g.scale(-1.0));
        }
        Op::Mul(a, b) => {
            add_grad(nodes, grads, *a, g.zip_map(&nodes[*b].value, |gi, bi| gi * bi));
            add_grad(nodes, grads, *b, g.zip_map(&nodes[*a].value, |gi, ai| gi * ai));
        }
        Op::Div(a, b) => {
            let bv = &nodes[*b].value;
            add_grad(nodes, grads, *a, g.zip_map(bv, |gi, bi| gi / bi));
            if nodes[*b].needs_grad {
                let av = &nodes[*a].value;
                let mut gb = Tensor::zeros(bv.rows(), bv.cols());
                for ((o, &gi), (&ai, &bi)) in gb
                    .data_mut()
                    .iter_mut()
                    .zip(g.data())
                    .zip(av.data().iter().zip(bv.data()))
                {
                    *o = -gi * ai / (bi * bi);
                }
                add_grad(nodes, grads, *b, gb);
            }
        }
        Op::AddRow(mat, row) => {
            add_grad(nodes, grads, *mat, g.clone());
            if nodes[*row].needs_grad {
                let mut gr = Tensor::zeros(1, g.cols());
                for i in 0..g.rows() {
                    for j in 0..g.cols() {
                        gr.data_mut()[j] += g.get(i, j);
                    }
                }
                add_grad(nodes, grads, *row, gr);
            }
        }
        Op::MulScalar(mat, s) => {
            let sv = nodes[*s].value.item();
            add_grad(nodes, grads, *mat, g.scale(sv));
            if nodes[*s].needs_grad {
                let dot: f64 = g
                    .data()
                    .iter()
                    .zip(nodes[*mat].value.data())
                    .map(|(&gi, &mi)| gi * mi)
                    .sum();
                add_grad(nodes, grads, *s, Tensor::scalar(dot));
            }
        }
        Op::Matmul(a, b) => {
            if nodes[*a].needs_grad {
                add_grad(nodes, grads, *a, g.matmul_nt(&nodes[*b].value));
            }
            if nodes[*b].needs_grad {
                add_grad(nodes, grads, *b, nodes[*a].value.matmul_tn(g));
            }
        }
        Op::Sum(p) => {
            let (r, c) = nodes[*p].value.shape();
            add_grad(nodes, grads, *p, Tensor::filled(r, c, g.item()));
        }
        Op::Mean(p) => {
            let (r, c) = nodes[*p].value.shape();
            let n = (r * c) as f64;
            add_grad(nodes, grads, *p, Tensor::filled(r, c, g.item() / n));
        }
        Op::SumRows(p) => {
            let (r, c) = nodes[*p].value.shape();
            let mut gp = Tensor::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    gp.set(i, j, g.get(0, j));
                }
            }
            add_grad(nodes, grads, *p, gp);
        }
        Op::Reshape(p) => {
            let (r, c) = nodes[*p].value.shape();
            add_grad(nodes, grads, *p, g.clone().reshape(r, c));
        }
        Op::SliceRows { p, start, count } => {
            let (r, c) = nodes[*p].value.shape();
            let mut gp = Tensor::zeros(r, c);
            for i in 0..*count {
                for j in 0..c {
                    gp.set(start + i, j, g.get(i, j));
                }
            }
            add_grad(nodes, grads, *p, gp);
        }
        Op::SliceCols { p, start, count } => {
            let (r, c) = nodes[*p].value.shape();
            let mut gp = Tensor::zeros(r, c);
            for i in 0..r {
                for j in 0..*count {
                    gp.set(i, start + j, g.get(i, j));
                }
            }
            add_grad(nodes, grads, *p, gp);
        }
        Op::RepeatCols { p, m } => {
            let (r, c) = nodes[*p].value.shape();
            let mut gp = Tensor::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    let mut acc = 0.0;
                    for k in 0..*m {
                        acc += g.get(i, j * m + k);
                    }
                    gp.set(i, j, acc);
                }
            }
            add_grad(nodes, grads, *p, gp);
        }
        Op::BroadcastRows { p, m } => {
            let c = nodes[*p].value.cols();
            let mut gp = Tensor::zeros(1, c);
            for i in 0..*m {
                for j in 0..c {
                    gp.data_mut()[j] += g.get(i, j);
                }
            }
            add_grad(nodes, grads, *p, gp);
        }
        Op::BlockSumCols { p, m } => {
            let (r, c) = nodes[*p].value.shape();
            let cb = c / m;
            let mut gp = Tensor::zeros(r, c);
            for i in 0..r {
                for j in 0..cb {
                    for k in 0..*m {
                        gp.set(i, j * m + k, g.get(i, j));
                    }
                }
            }
            add_grad(nodes, grads, *p, gp);
        }
        Op::ApplyLinear { x, param, map } => {
            if nodes[*x].needs_grad {
                add_grad(nodes, grads, *x, map.m.matmul_tn(g));
            }
            if let Some(p) = param {
                if nodes[*p].needs_grad {
                    let dm = map
                        .dm_dp
                        .as_ref()
                        .expect("ApplyLinear with param requires dm_dp");
                    let dx = dm.matmul(&nodes[*x].value);
                    let dot: f64 = g.data().iter().zip(dx.data()).map(|(&a, &b)| a * b).sum();
                    add_grad(nodes, grads, *p, Tensor::scalar(dot));
                }
            }
        }
    }
}

macro_rules! unary {
    ($name:ident, $op:ident, $f:expr) => {
        pub fn $name(self) -> Var<'t> {
            let (value, ng) = self.tape.with_node(self.idx, |n| (n.value.map($f), n.needs_grad));
            self.tape.push(Op::$op(self.idx), value, ng)
        }
    };
}

macro_rules! binary {
    ($name:ident, $op:ident, $f:expr) => {
        pub fn $name(self, other: Var<'t>) -> Var<'t> {
            let value = self.tape.with_node(self.idx, |a| {
                self.tape.with_node(other.idx, |b| a.value.zip_map(&b.value, $f))
            });
            let ng = self.needs_grad() || other.needs_grad();
            self.tape.push(Op::$op(self.idx, other.idx), value, ng)
        }
    };
}

impl<'t> Var<'t> {
    pub fn shape(&self) -> (usize, usize) {
        self.tape.with_node(self.idx, |n| n.value.shape())
    }

    pub fn value(&self) -> Tensor {
        self.tape.with_node(self.idx, |n| n.value.clone())
    }

    pub fn item(&self) -> f64 {
        self.tape.with_node(self.idx, |n| n.value.item())
    }

    fn needs_grad(&self) -> bool {
        self.tape.with_node(self.idx, |n| n.needs_grad)
    }

    unary!(neg, Neg, |v| -v);
    unary!(tanh, Tanh, f64::tanh);
    unary!(exp, Exp, f64::exp);
    unary!(sin, Sin, f64::sin);
    unary!(cos, Cos, f64::cos);
    unary!(square, Square, |v| v * v);

    pub fn scale(self, c: f64) -> Var<'t> {
        let (value, ng) = self
            .tape
            .with_node(self.idx, |n| (n.value.scale(c), n.needs_grad));
        self.tape.push(Op::Scale(self.idx, c), value, ng)
    }

    pub fn add_const(self, c: f64) -> Var<'t> {
        let (value, ng) = self
            .tape
            .with_node(self.idx, |n| (n.value.map(|v| v + c), n.needs_grad));
        self.tape.push(Op::AddConst(self.idx), value, ng)
    }

    pub fn powf(self, e: f64) -> Var<'t> {
        let (value, ng) = self
            .tape
            .with_node(self.idx, |n| (n.value.map(|v| v.powf(e)), n.needs_grad));
        self.tape.push(Op::Powf(self.idx, e), value, ng)
    }

    binary!(add, Add, |a, b| a + b);
    binary!(sub, Sub, |a, b| a - b);
    binary!(mul, Mul, |a, b| a * b);
    binary!(div, Div, |a, b| a / b);

    /// (m,n) + (1,n) row broadcast.
    pub fn add_row(self, row: Var<'t>) -> Var<'t> {
        let value = self.tape.with_node(self.idx, |a| {
            self.tape.with_node(row.idx, |r| {
                assert_eq!(r.value.rows(), 1, "add_row expects a row vector");
                assert_eq!(a.value.cols(), r.value.cols(), "add_row width mismatch");
                let mut out = a.value.clone();
                for i in 0..out.rows() {
                    for j in 0..out.cols() {
                        let v = out.get(i, j) + r.value.get(0, j);
                        out.set(i, j, v);
                    }
                }
                out
            })
        });
        let ng = self.needs_grad() || row.needs_grad();
        self.tape.push(Op::AddRow(self.idx, row.idx), value, ng)
    }

    /// (m,n) * scalar var.
    pub fn mul_scalar(self, s: Var<'t>) -> Var<'t> {
        let value = self.tape.with_node(self.idx, |a| {
            self.tape.with_node(s.idx, |sv| a.value.scale(sv.value.item()))
        });
        let ng = self.needs_grad() || s.needs_grad();
        self.tape.push(Op::MulScalar(self.idx, s.idx), value, ng)
    }

    pub fn matmul(self, other: Var<'t>) -> Var<'t> {
        let value = self.tape.with_node(self.idx, |a| {
            self.tape.with_node(other.idx, |b| a.value.matmul(&b.value))
        });
        let ng = self.needs_grad() || other.needs_grad();
        self.tape.push(Op::Matmul(self.idx, other.idx), value, ng)
    }

    pub fn sum(self) -> Var<'t> {
        let (v, ng) = self
            .tape
            .with_node(self.idx, |n| (n.value.sum(), n.needs_grad));
        self.tape.push(Op::Sum(self.idx), Tensor::scalar(v), ng)
    }

    pub fn mean(self) -> Var<'t> {
        let (v, len, ng) = self
            .tape
            .with_node(self.idx, |n| (n.value.sum(), n.value.len(), n.needs_grad));
        self.tape
            .push(Op::Mean(self.idx), Tensor::scalar(v / len as f64), ng)
    }

    /// Column sums: (m,n) -> (1,n).
    pub fn sum_rows(self) -> Var<'t> {
        let (value, ng) = self.tape.with_node(self.idx, |n| {
            let (r, c) = n.value.shape();
            let mut out = Tensor::zeros(1, c);
            for i in 0..r {
                for j in 0..c {
                    out.data_mut()[j] += n.value.get(i, j);
                }
            }
            (out, n.needs_grad)
        });
        self.tape.push(Op::SumRows(self.idx), value, ng)
    }

    pub fn reshape(self, rows: usize, cols: usize) -> Var<'t> {
        let (value, ng) = self.tape.with_node(self.idx, |n| {
            (n.value.clone().reshape(rows, cols), n.needs_grad)
        });
        self.tape.push(Op::Reshape(self.idx), value, ng)
    }

    pub fn slice_rows(self, start: usize, count: usize) -> Var<'t> {
        let (value, ng) = self.tape.with_node(self.idx, |n| {
            let c = n.value.cols();
            let mut out = Tensor::zeros(count, c);
            for i in 0..count {
                for j in 0..c {
                    out.set(i, j, n.value.get(start + i, j));
                }
            }
            (out, n.needs_grad)
        });
        self.tape
            .push(Op::SliceRows { p: self.idx, start, count }, value, ng)
    }

    pub fn slice_cols(self, start: usize, count: usize) -> Var<'t> {
        let (value, ng) = self.tape.with_node(self.idx, |n| {
            let r = n.value.rows();
            let mut out = Tensor::zeros(r, count);
            for i in 0..r {
                for j in 0..count {
                    out.set(i, j, n.value.get(i, start + j));
                }
            }
            (out, n.needs_grad)
        });
        self.tape
            .push(Op::SliceCols { p: self.idx, start, count }, value, ng)
    }

    /// (r,c) -> (r, c*m), each column repeated m consecutive times.
    pub fn repeat_cols(self, m: usize) -> Var<'t> {
        let (value, ng) = self.tape.with_node(self.idx, |n| {
            let (r, c) = n.value.shape();
            let mut out = Tensor::zeros(r, c * m);
            for i in 0..r {
                for j in 0..c {
                    let v = n.value.get(i, j);
                    for k in 0..m {
                        out.set(i, j * m + k, v);
                    }
                }
            }
            (out, n.needs_grad)
        });
        self.tape.push(Op::RepeatCols { p: self.idx, m }, value, ng)
    }

    /// (1,c) -> (m,c).
    pub fn broadcast_rows(self, m: usize) -> Var<'t> {
        let (value, ng) = self.tape.with_node(self.idx, |n| {
            assert_eq!(n.value.rows(), 1, "broadcast_rows expects a row vector");
            let c = n.value.cols();
            let mut out = Tensor::zeros(m, c);
            for i in 0..m {
                for j in 0..c {
                    out.set(i, j, n.value.get(0, j));
                }
            }
            (out, n.needs_grad)
        });
        self.tape
            .push(Op::BroadcastRows { p: self.idx, m }, value, ng)
    }

    /// (r, c*m) -> (r, c): sums consecutive column blocks of width m.
    pub fn block_sum_cols(self, m: usize) -> Var<'t> {
        let (value, ng) = self.tape.with_node(self.idx, |n| {
            let (r, c) = n.value.shape();
            assert_eq!(c % m, 0, "block_sum_cols block mismatch");
            let cb = c / m;
            let mut out = Tensor::zeros(r, cb);
            for i in 0..r {
                for j in 0..cb {
                    let mut acc = 0.0;
                    for k in 0..m {
                        acc += n.value.get(i, j * m + k);
                    }
                    out.set(i, j, acc);
                }
            }
            (out, n.needs_grad)
        });
        self.tape
            .push(Op::BlockSumCols { p: self.idx, m }, value, ng)
    }

    /// `M x` where `M` may depend on a scalar tape variable (e.g. the
    /// fractional order); `map.m` must have been built from `param`'s current
    /// value and `map.dm_dp` carries the matrix derivative.
    pub fn apply_linear(self, map: Rc<LinMap>, param: Option<Var<'t>>) -> Var<'t> {
        if param.is_some() {
            assert!(map.dm_dp.is_some(), "apply_linear with param requires dm_dp");
        }
        let value = self
            .tape
            .with_node(self.idx, |n| map.m.matmul(&n.value));
        let ng = self.needs_grad() || param.map(|p| p.needs_grad()).unwrap_or(false);
        self.tape.push(
            Op::ApplyLinear { x: self.idx, param: param.map(|p| p.idx), map },
            value,
            ng,
        )
    }
}
