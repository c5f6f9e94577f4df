//! Covariance kernels.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Squared-exponential kernel `C(x,y) = σ² exp(-(x-y)²/l²)`.
#[derive(Clone, Copy, Debug)]
pub struct CovKernel {
    pub sigma: f64,
    pub length: f64,
}

impl CovKernel {
    pub fn squared_exponential(sigma: f64, length: f64) -> Result<Self> {
        if sigma <= 0.0 || length <= 0.0 {
            return Err(Error::InvalidArg(format!(
                "kernel needs positive σ and correlation length, got ({sigma}, {length})"
            )));
        }
        Ok(Self { sigma, length })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        self.sigma * self.sigma * (-d * d / (self.length * self.length)).exp()
    }
}

/// Kernel matrix on a point set, `C_ij = C(x_i, x_j)`.
pub fn se_kernel_matrix(points: &[f64], kernel: &CovKernel) -> Tensor {
    Tensor::from_fn(points.len(), points.len(), |i, j| kernel.eval(points[i], points[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::Grid1D;

    #[test]
    fn diagonal_is_sigma_squared_and_decay_correct() {
        let k = CovKernel::squared_exponential(1.5, 0.3).unwrap();
        let pts: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let c = se_kernel_matrix(&pts, &k);
        for i in 0..11 {
            assert!((c.get(i, i) - 2.25).abs() < 1e-14);
        }
        // C(0, l_c) = σ² e^{-1}
        assert!((k.eval(0.0, 0.3) - 2.25 * (-1.0f64).exp()).abs() < 1e-14);
        assert!(CovKernel::squared_exponential(0.0, 1.0).is_err());
    }

    #[test]
    fn kernel_matrix_is_psd_up_to_roundoff() {
        let k = CovKernel::squared_exponential(1.0, 0.2).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 100).unwrap();
        let pts = grid.nodes();
        let c = se_kernel_matrix(&pts, &k);
        let n = pts.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| c.get(i, j));
        let eig = m.symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "smallest eigenvalue {min}");
    }
}
