//! Feed-forward networks and the parameter store they live in.
//!
//! Hidden layers use tanh, the output layer is linear. Parameters are owned
//! by a [`ParamStore`] whose insertion order defines a stable flat-vector
//! layout: the optimizers work on the flat view, the tape binds each tensor
//! as a leaf in the same order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Named parameter tensors with a fixed, documented ordering (insertion
/// order). `flatten`/`unflatten` round-trip bit-exactly.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, t: Tensor) {
        assert!(
            !self.names.iter().any(|n| n == name),
            "duplicate parameter name {name}"
        );
        self.names.push(name.to_string());
        self.tensors.push(t);
    }

    pub fn get(&self, name: &str) -> &Tensor {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("no parameter named {name}"));
        &self.tensors[i]
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("no parameter named {name}"));
        &mut self.tensors[i]
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(|n| n.as_str()).zip(self.tensors.iter())
    }

    pub fn n_tensors(&self) -> usize {
        self.tensors.len()
    }

    pub fn flat_len(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        for t in &self.tensors {
            out.extend_from_slice(t.data());
        }
        out
    }

    pub fn unflatten(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.flat_len() {
            return Err(Error::Shape(format!(
                "flat vector length {} != parameter count {}",
                flat.len(),
                self.flat_len()
            )));
        }
        let mut off = 0;
        for t in &mut self.tensors {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }
}

/// Layer widths of a dense network, `[d_in, h_1, ..., h_k, d_out]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 || widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArg(format!(
                "layer widths must be >= 2 entries, all positive: {widths:?}"
            )));
        }
        Ok(Self { widths })
    }

    /// `depth` hidden layers of `width` neurons.
    pub fn hidden(d_in: usize, depth: usize, width: usize, d_out: usize) -> Self {
        let mut widths = Vec::with_capacity(depth + 2);
        widths.push(d_in);
        widths.extend(std::iter::repeat(width).take(depth));
        widths.push(d_out);
        Self { widths }
    }

    pub fn d_in(&self) -> usize {
        self.widths[0]
    }

    pub fn d_out(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    fn param_name(prefix: &str, kind: char, layer: usize) -> String {
        format!("{prefix}.{kind}{layer}")
    }

    /// Insert Xavier-uniform weights and zero biases under `prefix`.
    pub fn init_into(&self, store: &mut ParamStore, prefix: &str, rng: &mut impl Rng) {
        for l in 0..self.n_layers() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Tensor::from_fn(fan_in, fan_out, |_, _| rng.gen_range(-bound..bound));
            store.insert(&Self::param_name(prefix, 'w', l), w);
            store.insert(&Self::param_name(prefix, 'b', l), Tensor::zeros(1, fan_out));
        }
    }

    /// Plain forward pass (no tape), batched over rows of `x`.
    pub fn eval(&self, store: &ParamStore, prefix: &str, x: &Tensor) -> Tensor {
        assert_eq!(
            x.cols(),
            self.d_in(),
            "input width {} does not match first layer {}",
            x.cols(),
            self.d_in()
        );
        let mut z = x.clone();
        for l in 0..self.n_layers() {
            let w = store.get(&Self::param_name(prefix, 'w', l));
            let b = store.get(&Self::param_name(prefix, 'b', l));
            let mut a = z.matmul(w);
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    let v = a.get(i, j) + b.get(0, j);
                    a.set(i, j, v);
                }
            }
            z = if l + 1 < self.n_layers() { a.map(f64::tanh) } else { a };
        }
        z
    }
}

/// A standalone network owning its parameters.
#[derive(Clone, Debug)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub store: ParamStore,
}

impl Mlp {
    pub fn new(spec: MlpSpec, seed: u64) -> Self {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        spec.init_into(&mut store, "net", &mut rng);
        Self { spec, store }
    }

    pub fn forward(&self, x: &Tensor) -> Tensor {
        self.spec.eval(&self.store, "net", x)
    }
}

/// Xavier-initialized store for a single network named `net`.
pub fn xavier_init(widths: &[usize], seed: u64) -> Result<ParamStore> {
    let spec = MlpSpec::new(widths.to_vec())?;
    let mut store = ParamStore::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spec.init_into(&mut store, "net", &mut rng);
    Ok(store)
}

/// All tensors of a store bound as tape leaves, in store order.
pub struct ParamBinding<'t> {
    names: Vec<String>,
    vars: Vec<Var<'t>>,
}

impl<'t> ParamBinding<'t> {
    pub fn bind(tape: &'t Tape, store: &ParamStore) -> Self {
        let mut names = Vec::with_capacity(store.n_tensors());
        let mut vars = Vec::with_capacity(store.n_tensors());
        for (name, t) in store.iter() {
            names.push(name.to_string());
            vars.push(tape.leaf(t.clone()));
        }
        Self { names, vars }
    }

    pub fn var(&self, name: &str) -> Var<'t> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("no bound parameter {name}"));
        self.vars[i]
    }

    /// Flatten gradients in store order (zeros for untouched leaves).
    pub fn flat_grads(&self, grads: &crate::autodiff::Gradients) -> Vec<f64> {
        let mut out = Vec::new();
        for v in &self.vars {
            out.extend_from_slice(grads.wrt(*v).data());
        }
        out
    }
}

/// Network bound on a tape via a [`ParamBinding`].
pub struct TapeMlp<'t> {
    ws: Vec<Var<'t>>,
    bs: Vec<Var<'t>>,
}

impl<'t> TapeMlp<'t> {
    pub fn bind(binding: &ParamBinding<'t>, prefix: &str, spec: &MlpSpec) -> Self {
        let mut ws = Vec::with_capacity(spec.n_layers());
        let mut bs = Vec::with_capacity(spec.n_layers());
        for l in 0..spec.n_layers() {
            ws.push(binding.var(&MlpSpec::param_name(prefix, 'w', l)));
            bs.push(binding.var(&MlpSpec::param_name(prefix, 'b', l)));
        }
        Self { ws, bs }
    }

    pub fn forward(&self, x: Var<'t>) -> Var<'t> {
        let last = self.ws.len() - 1;
        let mut z = x;
        for l in 0..self.ws.len() {
            let a = z.matmul(self.ws[l]).add_row(self.bs[l]);
            z = if l < last { a.tanh() } else { a };
        }
        z
    }

    /// Forward pass together with the directional derivative of the output
    /// along a tangent `dx` of the input rows (a Jacobian-vector product).
    /// The tangent is assembled from tape primitives, so reverse mode through
    /// it yields exact mixed input/parameter derivatives.
    pub fn forward_with_tangent(&self, x: Var<'t>, dx: Var<'t>) -> (Var<'t>, Var<'t>) {
        let last = self.ws.len() - 1;
        let mut z = x;
        let mut dz = dx;
        for l in 0..self.ws.len() {
            let a = z.matmul(self.ws[l]).add_row(self.bs[l]);
            let da = dz.matmul(self.ws[l]);
            if l < last {
                let h = a.tanh();
                // d tanh = (1 - tanh^2) da
                dz = h.square().neg().add_const(1.0).mul(da);
                z = h;
            } else {
                z = a;
                dz = da;
            }
        }
        (z, dz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xavier_is_deterministic_and_biases_zero() {
        let a = xavier_init(&[4, 16, 2], 42).unwrap();
        let b = xavier_init(&[4, 16, 2], 42).unwrap();
        assert_eq!(a.flatten(), b.flatten());
        for (name, t) in a.iter() {
            if name.contains(".b") {
                assert!(t.data().iter().all(|&v| v == 0.0));
            }
        }
        let c = xavier_init(&[4, 16, 2], 43).unwrap();
        assert_ne!(a.flatten(), c.flatten());
    }

    #[test]
    fn xavier_rejects_bad_widths() {
        assert!(xavier_init(&[], 0).is_err());
        assert!(xavier_init(&[3], 0).is_err());
        assert!(xavier_init(&[3, 0, 1], 0).is_err());
    }

    #[test]
    fn xavier_variance_near_expected() {
        let store = xavier_init(&[64, 64], 7).unwrap();
        let w = store.get("net.w0");
        let n = w.len() as f64;
        let mean: f64 = w.data().iter().sum::<f64>() / n;
        let var: f64 = w.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        // Uniform(-b, b) has variance b^2/3 = 2/(fan_in+fan_out).
        let expect = 2.0 / 128.0;
        assert!(
            (var - expect).abs() < 0.2 * expect,
            "variance {var} vs {expect}"
        );
    }

    #[test]
    fn flatten_unflatten_roundtrip_bit_exact() {
        let mut store = xavier_init(&[3, 8, 8, 1], 5).unwrap();
        let flat = store.flatten();
        let mut shuffled: Vec<f64> = flat.iter().map(|v| v * 1.7 - 0.3).collect();
        shuffled[0] = f64::MIN_POSITIVE; // subnormals must survive too
        store.unflatten(&shuffled).unwrap();
        assert_eq!(store.flatten(), shuffled);
        assert!(store.unflatten(&flat[1..]).is_err());
    }

    #[test]
    fn zero_weights_output_bias() {
        let mut store = xavier_init(&[2, 4, 3], 1).unwrap();
        for (_, t) in store.iter().map(|(n, t)| (n.to_string(), t.clone())).collect::<Vec<_>>() {
            let _ = t;
        }
        // zero all weights, set output bias
        let flat_len = store.flat_len();
        store.unflatten(&vec![0.0; flat_len]).unwrap();
        let b = store.get_mut("net.b1");
        b.data_mut().copy_from_slice(&[1.5, -2.0, 0.25]);
        let spec = MlpSpec::new(vec![2, 4, 3]).unwrap();
        let x = Tensor::from_fn(5, 2, |i, j| (i + j) as f64);
        let y = spec.eval(&store, "net", &x);
        for i in 0..5 {
            assert_eq!(y.row(i), &[1.5, -2.0, 0.25]);
        }
    }

    #[test]
    fn identity_linear_layer_passes_input_through() {
        let mut store = ParamStore::new();
        store.insert("net.w0", Tensor::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 }));
        store.insert("net.b0", Tensor::zeros(1, 3));
        let spec = MlpSpec::new(vec![3, 3]).unwrap();
        let x = Tensor::from_fn(4, 3, |i, j| (i * 3 + j) as f64 * 0.1 - 0.4);
        let y = spec.eval(&store, "net", &x);
        assert!(y.sub(&x).max_abs() == 0.0);
    }

    #[test]
    #[should_panic(expected = "input width")]
    fn forward_rejects_width_mismatch() {
        let mlp = Mlp::new(MlpSpec::new(vec![3, 4, 1]).unwrap(), 0);
        let x = Tensor::zeros(2, 2);
        let _ = mlp.forward(&x);
    }

    #[test]
    fn tanh_layer_output_bounded_by_weight_sums() {
        // One hidden tanh layer: |y_j| <= sum_i |Wout_ij| + |bout_j|.
        let mlp = Mlp::new(MlpSpec::new(vec![2, 16, 3]).unwrap(), 11);
        let w1 = mlp.store.get("net.w1");
        let b1 = mlp.store.get("net.b1");
        let x = Tensor::from_fn(40, 2, |i, j| ((i * 13 + j * 7) as f64).sin() * 50.0);
        let y = mlp.forward(&x);
        for j in 0..3 {
            let bound: f64 =
                (0..16).map(|i| w1.get(i, j).abs()).sum::<f64>() + b1.get(0, j).abs();
            for i in 0..y.rows() {
                assert!(y.get(i, j).abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn tape_forward_matches_plain_eval_and_tangent_matches_fd() {
        let spec = MlpSpec::new(vec![2, 8, 8, 2]).unwrap();
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        spec.init_into(&mut store, "f", &mut rng);

        let x0 = Tensor::from_fn(6, 2, |i, j| 0.3 * i as f64 - 0.2 * j as f64);
        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, &store);
        let net = TapeMlp::bind(&binding, "f", &spec);
        let x = tape.constant(x0.clone());
        // tangent along the second input column (think: time)
        let dx = tape.constant(Tensor::from_fn(6, 2, |_, j| if j == 1 { 1.0 } else { 0.0 }));
        let (y, dy) = net.forward_with_tangent(x, dx);

        let y_plain = spec.eval(&store, "f", &x0);
        assert!(y.value().sub(&y_plain).max_abs() < 1e-14);

        let h = 1e-6;
        let xp = Tensor::from_fn(6, 2, |i, j| x0.get(i, j) + if j == 1 { h } else { 0.0 });
        let xm = Tensor::from_fn(6, 2, |i, j| x0.get(i, j) - if j == 1 { h } else { 0.0 });
        let fd = spec
            .eval(&store, "f", &xp)
            .sub(&spec.eval(&store, "f", &xm))
            .scale(0.5 / h);
        assert!(dy.value().sub(&fd).max_abs() < 1e-8);
    }

    #[test]
    fn mlp_gradient_matches_central_differences() {
        // The module-level gradient-correctness invariant at its documented
        // tolerance: relative error <= 1e-6 elementwise vs h = 1e-5.
        let spec = MlpSpec::new(vec![2, 6, 6, 1]).unwrap();
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        spec.init_into(&mut store, "f", &mut rng);

        let x0 = Tensor::from_fn(5, 2, |i, j| 0.4 * (i as f64).sin() + 0.1 * j as f64);
        let loss_of = |flat: &[f64]| -> f64 {
            let mut s = store.clone();
            s.unflatten(flat).unwrap();
            let y = spec.eval(&s, "f", &x0);
            y.data().iter().map(|v| v * v).sum::<f64>() / y.len() as f64
        };

        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, &store);
        let net = TapeMlp::bind(&binding, "f", &spec);
        let x = tape.constant(x0.clone());
        let loss = net.forward(x).square().mean();
        let grads = tape.backward(loss).unwrap();
        let flat_grad = binding.flat_grads(&grads);

        let flat = store.flatten();
        let h = 1e-5;
        for k in 0..flat.len() {
            let mut fp = flat.clone();
            let mut fm = flat.clone();
            fp[k] += h;
            fm[k] -= h;
            let fd = (loss_of(&fp) - loss_of(&fm)) / (2.0 * h);
            let scale = fd.abs().max(flat_grad[k].abs()).max(1e-4);
            assert!(
                (flat_grad[k] - fd).abs() / scale < 1e-6,
                "param {k}: ad {} vs fd {}",
                flat_grad[k],
                fd
            );
        }
    }
}
