//! Random-field machinery: covariance kernels, discrete Karhunen-Loève
//! decomposition, quadrature in random space, and sampling.

mod kernel;
mod kl;
mod quadrature;
mod sample;
mod sobol_seq;

pub use kernel::{se_kernel_matrix, CovKernel};
pub use kl::{kl_decompose, kl_mode_count, KlBasis};
pub use quadrature::{gauss_legendre_rule, tensor_quadrature, QuadratureRule};
pub use sample::{sample_gp, GpRealizations, SampleSet, VariableLaw};
pub use sobol_seq::low_discrepancy_points;
