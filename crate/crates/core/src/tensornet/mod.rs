//! Dense tensors, tensor trains and truncated SVD compression.

mod dense;
mod linalg;
mod train;

pub use dense::{CMatrix, DenseTensor};
pub use linalg::{reconstruct, svd_truncate, Factorize, SvdFactors, TruncationPolicy, Truncated};
pub use train::{ChainStep, Core, SweepReport, TensorTrain, PHYS};
