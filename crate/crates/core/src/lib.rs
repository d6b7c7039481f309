//! Third-order tensors under the t-product: tubal SVD, randomized slice
//! sampling, CX/CUR decompositions and robust low-tubal-rank recovery.

mod error;
mod linalg;
mod scalar;
mod spectral;
mod tensor;

pub mod decomp;
pub mod ops;
pub mod oracle;
pub mod sampling;
pub mod robust;
pub mod synth;
pub mod tsvd;

pub use decomp::{
    coherence, mu0, mu1, rfe, rse_frob, rse_spec, t_cur, t_cx, truncated_tsvd, CoherenceReport, CurResult, CxResult,
};
pub use error::{Result, TensorError};
pub use ops::{t_identity, t_product, t_product3, t_transpose};
pub use scalar::Scalar;
pub use spectral::{dft3, idft3, CMatrix, SpectralTensor};
pub use synth::{gen_gaussian, gen_lowrank, gen_rpca_instance, gen_sparse_replicated};
pub use tensor::Tensor3;
pub use robust::{
    admm_complete, admm_rpca, corrupt_salt_pepper, cur_tnn, cur_tnn_with, make_mask, soft_threshold, t_svt, AdmmConfig,
    AdmmReport, CurProblem, CurSampling, CurTnnResult, ObservationMask, Residuals, StopReason,
};
pub use sampling::{
    approx_leverage, draw_plan, draw_without_replacement, horizontal_leverage, lateral_leverage, probs_norm_a,
    probs_norm_product, probs_uniform, rt_product, ProbKind, ProbSpec, SamplingPlan,
};
pub use tsvd::{multi_rank, spectral_norm, t_pinv, t_project, t_svd, tnn, tubal_rank, TSvd};

pub type Tensor3f64 = Tensor3<f64>;
pub type Tensor3f32 = Tensor3<f32>;
pub type SpectralTensorF64 = SpectralTensor<f64>;
pub type SpectralTensorF32 = SpectralTensor<f32>;
pub type AdmmConfigF64 = AdmmConfig<f64>;
