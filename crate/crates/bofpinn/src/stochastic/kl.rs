//! Discrete Karhunen-Loève decomposition.
//!
//! The continuous eigenproblem `∫ C(x,y) φ(y) dy = λ φ(x)` is discretized on
//! quadrature weights `W` as `C W φ = λ φ` and symmetrized to
//! `W^{1/2} C W^{1/2} ψ = λ ψ`, which keeps the solve Hermitian; then
//! `φ = W^{-1/2} ψ` is orthonormal under `⟨·,·⟩_W`. Eigenvalues come back
//! sorted descending, tiny negative round-off clipped to zero, and each
//! eigenfunction is sign-fixed so its first component above tolerance is
//! positive.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Eigenpairs of a covariance kernel on a grid, with energy fractions.
#[derive(Clone, Debug)]
pub struct KlBasis {
    /// Quadrature weights the basis is orthonormal under.
    pub weights: Vec<f64>,
    /// Eigenvalues, descending.
    pub lambdas: Vec<f64>,
    /// Eigenfunctions as grid fields, one per retained mode.
    pub phis: Vec<Vec<f64>>,
    /// Cumulative energy fraction per retained mode (relative to the full
    /// spectrum, not just the retained part).
    pub energy: Vec<f64>,
}

impl KlBasis {
    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    /// `⟨f, g⟩_W`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
    }
}

/// Fix the sign so the first component with magnitude above `tol` is
/// positive.
pub fn fix_sign(v: &mut [f64], tol: f64) {
    for &x in v.iter() {
        if x.abs() > tol {
            if x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

/// Decompose a symmetric kernel matrix under quadrature weights, keeping at
/// most `n_max` modes.
pub fn kl_decompose(kernel: &Tensor, weights: &[f64], n_max: usize) -> Result<KlBasis> {
    let n = weights.len();
    if kernel.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "kernel {:?} vs {} weights",
            kernel.shape(),
            n
        )));
    }
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (kernel.get(i, j) - kernel.get(j, i)).abs())
        .fold(0.0f64, f64::max);
    if asym > 1e-10 * (1.0 + kernel.max_abs()) {
        return Err(Error::InvalidArg(format!("kernel not symmetric (dev {asym:.3e})")));
    }
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidArg("quadrature weights must be positive".into()));
    }

    let sq: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let b = DMatrix::from_fn(n, n, |i, j| sq[i] * kernel.get(i, j) * sq[j]);
    let eig = b.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    // clip round-off eigenvalues so degenerate kernels report clean ranks
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let clip = |l: f64| if l < 1e-12 * lam_max { 0.0 } else { l };
    let total: f64 = eig.eigenvalues.iter().map(|&l| clip(l)).sum();
    let keep = n_max.min(n);
    let mut lambdas = Vec::with_capacity(keep);
    let mut phis = Vec::with_capacity(keep);
    let mut energy = Vec::with_capacity(keep);
    let mut acc = 0.0;
    for &k in order.iter().take(keep) {
        let lam = clip(eig.eigenvalues[k]);
        let mut phi: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, k)] / sq[i]).collect();
        fix_sign(&mut phi, 1e-9);
        acc += lam;
        lambdas.push(lam);
        phis.push(phi);
        energy.push(if total > 0.0 { acc / total } else { 1.0 });
    }
    Ok(KlBasis { weights: weights.to_vec(), lambdas, phis, energy })
}

/// Smallest mode count whose cumulative energy reaches `threshold`.
/// `threshold = 0` returns 1 by convention so callers never see zero modes.
pub fn kl_mode_count(basis: &KlBasis, threshold: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArg(format!("threshold {threshold} outside [0,1]")));
    }
    for (i, &e) in basis.energy.iter().enumerate() {
        if e >= threshold {
            return Ok(i + 1);
        }
    }
    Err(Error::InvalidArg(format!(
        "threshold {threshold} exceeds attainable energy {:.6} of {} stored modes",
        basis.energy.last().copied().unwrap_or(0.0),
        basis.n_modes()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::Grid1D;
    use crate::stochastic::{se_kernel_matrix, CovKernel};

    #[test]
    fn rank_one_kernel_has_single_mode() {
        let n = 40;
        let grid = Grid1D::new(0.0, 1.0, n - 1).unwrap();
        let w = grid.trapezoid_weights();
        let sigma2 = 1.7;
        let kernel = Tensor::filled(n, n, sigma2);
        let basis = kl_decompose(&kernel, &w, n).unwrap();
        let total_weight: f64 = w.iter().sum();
        assert!((basis.lambdas[0] - sigma2 * total_weight).abs() < 1e-10);
        for &l in &basis.lambdas[1..] {
            assert!(l.abs() < 1e-10);
        }
        assert_eq!(kl_mode_count(&basis, 1.0).unwrap(), 1);
        assert_eq!(kl_mode_count(&basis, 0.0).unwrap(), 1);
    }

    #[test]
    fn eigenfunctions_orthonormal_and_kernel_reconstructed() {
        let grid = Grid1D::new(-1.0, 1.0, 80).unwrap();
        let pts = grid.nodes();
        let w = grid.trapezoid_weights();
        let k = CovKernel::squared_exponential(1.0, 0.3).unwrap();
        let c = se_kernel_matrix(&pts, &k);
        let basis = kl_decompose(&c, &w, pts.len()).unwrap();

        for i in 0..basis.n_modes().min(12) {
            for j in 0..basis.n_modes().min(12) {
                let ip = basis.inner(&basis.phis[i], &basis.phis[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (ip - expect).abs() <= 1e-10,
                    "⟨φ_{i},φ_{j}⟩ = {ip}"
                );
            }
        }

        // full-mode spectral reconstruction of C
        let n = pts.len();
        let mut rec = Tensor::zeros(n, n);
        for m in 0..basis.n_modes() {
            let lam = basis.lambdas[m];
            for i in 0..n {
                for j in 0..n {
                    let v = rec.get(i, j) + lam * basis.phis[m][i] * basis.phis[m][j];
                    rec.set(i, j, v);
                }
            }
        }
        assert!(rec.sub(&c).max_abs() < 1e-8, "reconstruction error {}", rec.sub(&c).max_abs());
    }

    #[test]
    fn truncated_reconstruction_error_bounded_by_energy() {
        let grid = Grid1D::new(-1.0, 1.0, 64).unwrap();
        let pts = grid.nodes();
        let w = grid.trapezoid_weights();
        let k = CovKernel::squared_exponential(1.0, 0.25).unwrap();
        let c = se_kernel_matrix(&pts, &k);
        let basis = kl_decompose(&c, &w, 10).unwrap();
        // The weighted remainder has Frobenius norm ||tail λ||_2, bounded by
        // the tail trace (1 - energy_N) * tr(B). The Frobenius norm of the
        // full matrix does not bound this in general, so the trace is the
        // right-hand side here.
        let n = pts.len();
        let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let mut rem = Tensor::from_fn(n, n, |i, j| sq[i] * c.get(i, j) * sq[j]);
        for m in 0..basis.n_modes() {
            let lam = basis.lambdas[m];
            for i in 0..n {
                for j in 0..n {
                    let v = rem.get(i, j)
                        - lam * sq[i] * basis.phis[m][i] * sq[j] * basis.phis[m][j];
                    rem.set(i, j, v);
                }
            }
        }
        let frob = rem.norm();
        let trace: f64 = (0..n).map(|i| w[i] * c.get(i, i)).sum();
        let bound = (1.0 - basis.energy.last().unwrap()) * trace * (1.0 + 1e-6);
        assert!(frob <= bound, "remainder {frob} vs bound {bound}");
    }

    #[test]
    fn nineteen_modes_capture_98_percent_of_forcing_energy() {
        // The mode count refers to the forcing g = (1-x²)h, so the kernel
        // carries the boundary bubble on both arguments.
        let grid = Grid1D::new(-1.0, 1.0, 256).unwrap();
        let pts = grid.nodes();
        let w = grid.trapezoid_weights();
        let k = CovKernel::squared_exponential(1.0, 0.1).unwrap();
        let c = se_kernel_matrix(&pts, &k);
        let cw = Tensor::from_fn(pts.len(), pts.len(), |i, j| {
            (1.0 - pts[i] * pts[i]) * (1.0 - pts[j] * pts[j]) * c.get(i, j)
        });
        let basis = kl_decompose(&cw, &w, 40).unwrap();
        let n = kl_mode_count(&basis, 0.98).unwrap();
        assert!(
            (18..=20).contains(&n),
            "98% energy needs {n} modes, expected 19±1"
        );
    }

    #[test]
    fn asymmetric_kernel_rejected_and_threshold_errors() {
        let w = vec![0.5, 0.5];
        let bad = Tensor::new(2, 2, vec![1.0, 0.2, 0.3, 1.0]).unwrap();
        assert!(kl_decompose(&bad, &w, 2).is_err());

        let ok = Tensor::new(2, 2, vec![1.0, 0.2, 0.2, 1.0]).unwrap();
        let basis = kl_decompose(&ok, &w, 1).unwrap();
        assert!(kl_mode_count(&basis, 0.9999).is_err());
    }
}
