//! Structured-sparse bilinear similarity metrics for embedding retrieval.
//!
//! The central object is a learnable weight matrix `W` restricted to a fixed
//! binary support: the full matrix (Dense), its diagonal (Diag), or disjoint
//! diagonal blocks (BlockDiag). A pair of embeddings is scored as
//! `x^T (W ⊙ U) y`, which reduces to plain cosine similarity when `W` is the
//! identity. The crate provides the metric kernels, retrieval losses with
//! analytic masked gradients, a small deterministic trainer, ranking-based
//! evaluation, and bit-exact binary file formats for features and checkpoints.

pub mod apps;
pub mod error;
pub mod eval;
pub mod grad;
pub mod gradcheck;
pub mod io;
pub mod loss;
pub mod metric;
pub mod rng;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use metric::{
    l2_normalize, FeatureMatrix, MetricConfig, MetricParams, MetricVariant, SimilarityMatrix,
};

use num_traits::{Float, FromPrimitive};

/// Scalar type bound for everything numeric in this crate.
///
/// Production scoring and training run at `f32`; verification oracles and
/// gradient checks run the same code at `f64`.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + 'static {
    fn from_f64_exact(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
