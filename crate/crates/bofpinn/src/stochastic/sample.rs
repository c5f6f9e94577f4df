//! Sample sets over the random inputs and Gaussian-process realizations.

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::kl::KlBasis;
use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Distribution of each random coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariableLaw {
    StandardNormal,
    Uniform01,
    /// U(-1, 1)
    UniformSym,
    /// U(-√3, √3), unit variance
    UniformSqrt3,
}

impl VariableLaw {
    /// Transform a unit-cube coordinate into this law.
    pub fn from_unit(&self, u: f64) -> f64 {
        match self {
            VariableLaw::StandardNormal => {
                Normal::new(0.0, 1.0).unwrap().inverse_cdf(u.clamp(1e-16, 1.0 - 1e-16))
            }
            VariableLaw::Uniform01 => u,
            VariableLaw::UniformSym => 2.0 * u - 1.0,
            VariableLaw::UniformSqrt3 => 3.0f64.sqrt() * (2.0 * u - 1.0),
        }
    }

    /// Support for quadrature construction; `None` for unbounded laws.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            VariableLaw::StandardNormal => None,
            VariableLaw::Uniform01 => Some((0.0, 1.0)),
            VariableLaw::UniformSym => Some((-1.0, 1.0)),
            VariableLaw::UniformSqrt3 => Some((-(3.0f64.sqrt()), 3.0f64.sqrt())),
        }
    }

    /// First-order generalized polynomial-chaos basis with unit variance
    /// (used as the stochastic-coefficient targets at a deterministic
    /// initial time).
    pub fn gpc_unit_variance(&self, xi: f64) -> f64 {
        match self {
            VariableLaw::StandardNormal => xi,
            VariableLaw::Uniform01 => 3.0f64.sqrt() * (2.0 * xi - 1.0),
            VariableLaw::UniformSym => 3.0f64.sqrt() * xi,
            VariableLaw::UniformSqrt3 => xi,
        }
    }
}

/// ξ samples (`n × dim`) with expectation weights summing to one.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub dim: usize,
    pub points: Tensor,
    pub weights: Vec<f64>,
    pub tag: String,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    /// Weighted expectation of a function of ξ.
    pub fn expect(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * f(self.point(i))).sum()
    }

    /// Pseudo-random iid samples; each sample index owns an independent RNG
    /// substream of (seed, index), so the set does not depend on generation
    /// order.
    pub fn pseudo_random(law: VariableLaw, dim: usize, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArg("sample count must be positive".into()));
        }
        let uni = rand::distributions::Uniform::new(0.0f64, 1.0f64);
        let mut pts = Vec::with_capacity(count * dim);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            for _ in 0..dim {
                pts.push(law.from_unit(uni.sample(&mut rng)));
            }
        }
        Ok(Self {
            dim,
            points: Tensor::from_raw(count, dim, pts),
            weights: vec![1.0 / count as f64; count],
            tag: "pseudo".into(),
            seed,
        })
    }

    /// Map a unit-cube set (e.g. Sobol points) into a law coordinate-wise.
    pub fn mapped_to(&self, law: VariableLaw) -> Self {
        let pts: Vec<f64> = self.points.data().iter().map(|&u| law.from_unit(u)).collect();
        Self {
            dim: self.dim,
            points: Tensor::from_raw(self.len(), self.dim, pts),
            weights: self.weights.clone(),
            tag: format!("{}-{:?}", self.tag, law),
            seed: self.seed,
        }
    }

    /// Quadrature nodes as a weighted sample set; weights are normalized by
    /// the total measure so expectations of 1 are exactly 1.
    pub fn from_quadrature(rule: &QuadratureRule) -> Self {
        let total = rule.total_weight();
        Self {
            dim: rule.dim,
            points: Tensor::from_raw(rule.len(), rule.dim, rule.nodes.clone()),
            weights: rule.weights.iter().map(|w| w / total).collect(),
            tag: "quadrature".into(),
            seed: 0,
        }
    }
}

/// Realizations of a truncated KL field on its grid.
#[derive(Clone, Debug)]
pub struct GpRealizations {
    /// `n_samples × n_nodes`.
    pub fields: Tensor,
}

/// Draw `count` realizations `mean + Σ √λ_i φ_i ξ_i` of the field described
/// by `basis`, with ξ by the requested generator and law.
pub fn sample_gp(
    basis: &KlBasis,
    mean: &[f64],
    count: usize,
    seed: u64,
    low_discrepancy: bool,
    law: VariableLaw,
) -> Result<(SampleSet, GpRealizations)> {
    if basis.n_modes() == 0 {
        return Err(Error::InvalidArg("empty KL basis".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArg("sample count must be positive".into()));
    }
    let n_nodes = basis.phis[0].len();
    if mean.len() != n_nodes {
        return Err(Error::Shape(format!(
            "mean field has {} nodes, basis {}",
            mean.len(),
            n_nodes
        )));
    }
    let set = if low_discrepancy {
        super::sobol_seq::low_discrepancy_points(basis.n_modes(), count, Some(seed))?
            .mapped_to(law)
    } else {
        SampleSet::pseudo_random(law, basis.n_modes(), count, seed)?
    };
    let mut fields = Tensor::zeros(count, n_nodes);
    for l in 0..count {
        let xi = set.point(l);
        for j in 0..n_nodes {
            let mut v = mean[j];
            for (i, phi) in basis.phis.iter().enumerate() {
                v += basis.lambdas[i].sqrt() * phi[j] * xi[i];
            }
            fields.set(l, j, v);
        }
    }
    Ok((set, GpRealizations { fields }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::Grid1D;
    use crate::stochastic::{gauss_legendre_rule, kl_decompose, se_kernel_matrix, CovKernel};

    fn test_basis() -> (Grid1D, KlBasis) {
        let grid = Grid1D::new(-1.0, 1.0, 60).unwrap();
        let k = CovKernel::squared_exponential(1.0, 0.5).unwrap();
        let c = se_kernel_matrix(&grid.nodes(), &k);
        let basis = kl_decompose(&c, &grid.trapezoid_weights(), 6).unwrap();
        (grid, basis)
    }

    #[test]
    fn same_seed_reproduces_realizations() {
        let (grid, basis) = test_basis();
        let mean = vec![1.0; grid.n_nodes()];
        let (s1, r1) = sample_gp(&basis, &mean, 32, 7, false, VariableLaw::StandardNormal).unwrap();
        let (s2, r2) = sample_gp(&basis, &mean, 32, 7, false, VariableLaw::StandardNormal).unwrap();
        assert_eq!(s1.points.data(), s2.points.data());
        assert_eq!(r1.fields.data(), r2.fields.data());
    }

    #[test]
    fn sample_mean_within_monte_carlo_error() {
        let (grid, basis) = test_basis();
        let mean = vec![1.0; grid.n_nodes()];
        let n = 10_000;
        let (_, r) = sample_gp(&basis, &mean, n, 3, false, VariableLaw::StandardNormal).unwrap();
        // per-node std is sqrt(Σ λ φ²) <= sqrt(σ²) ~ 1, so 4/sqrt(n) is a 4σ bound
        let tol = 4.0 / (n as f64).sqrt();
        for j in (0..grid.n_nodes()).step_by(9) {
            let m: f64 = (0..n).map(|l| r.fields.get(l, j)).sum::<f64>() / n as f64;
            assert!((m - 1.0).abs() < tol.max(0.05), "node {j}: mean {m}");
        }
    }

    #[test]
    fn pointwise_variance_matches_kl_identity() {
        let (grid, basis) = test_basis();
        let mean = vec![0.0; grid.n_nodes()];
        let n = 10_000;
        let (_, r) = sample_gp(&basis, &mean, n, 11, false, VariableLaw::StandardNormal).unwrap();
        for j in (2..grid.n_nodes() - 2).step_by(13) {
            let mv: f64 = (0..n).map(|l| r.fields.get(l, j)).sum::<f64>() / n as f64;
            let var: f64 =
                (0..n).map(|l| (r.fields.get(l, j) - mv).powi(2)).sum::<f64>() / n as f64;
            let expect: f64 = basis
                .lambdas
                .iter()
                .zip(&basis.phis)
                .map(|(l, p)| l * p[j] * p[j])
                .sum();
            assert!(
                (var - expect).abs() <= 0.10 * expect.max(1e-6),
                "node {j}: {var} vs {expect}"
            );
        }
    }

    #[test]
    fn expectation_of_one_is_exactly_one() {
        let r = gauss_legendre_rule(8, 0.0, 1.0).unwrap();
        let sets = [
            SampleSet::from_quadrature(&r),
            SampleSet::pseudo_random(VariableLaw::Uniform01, 3, 17, 5).unwrap(),
        ];
        for s in &sets {
            // weights are constructed to sum to one after normalization
            let e = s.expect(|_| 1.0);
            assert!((e - 1.0).abs() < 1e-15, "{}: {e}", s.tag);
        }
    }

    #[test]
    fn law_transforms_have_right_moments() {
        let set = SampleSet::pseudo_random(VariableLaw::UniformSqrt3, 1, 20_000, 9).unwrap();
        let m = set.expect(|x| x[0]);
        let v = set.expect(|x| x[0] * x[0]) - m * m;
        assert!(m.abs() < 0.03, "mean {m}");
        assert!((v - 1.0).abs() < 0.05, "variance {v}");
    }
}
