//! Plug-in application recipes: token-wise fine-grained alignment,
//! metric-augmented attention, and similarity-distribution distillation.

use crate::error::{Error, Result};
use crate::metric::{FeatureMatrix, MetricParams, SimilarityMatrix};
use crate::Real;

/// How a token-pair similarity matrix is compressed into one pair score
/// after the directional max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlignmentStrategy {
    /// Mean of directional maxima.
    MaxAve,
    /// Sum of directional maxima.
    MaxSum,
    /// Softmax-weighted fusion of directional maxima at temperature `tau`.
    MaxSoft { tau: f64 },
}

impl AlignmentStrategy {
    pub fn max_soft(tau: f64) -> Result<Self> {
        if tau <= 0.0 || !tau.is_finite() {
            return Err(Error::Config(format!(
                "soft fusion temperature must be > 0, got {tau}"
            )));
        }
        Ok(AlignmentStrategy::MaxSoft { tau })
    }
}

/// Compress a vector of directional maxima into a scalar.
fn compress<T: Real>(maxima: &[T], strategy: AlignmentStrategy) -> T {
    let count = T::from_f64_exact(maxima.len() as f64);
    let sum = maxima.iter().fold(T::zero(), |acc, &m| acc + m);
    match strategy {
        AlignmentStrategy::MaxAve => sum / count,
        AlignmentStrategy::MaxSum => sum,
        AlignmentStrategy::MaxSoft { tau } => {
            let tau = T::from_f64_exact(tau);
            let peak = maxima.iter().fold(T::neg_infinity(), |acc, &m| acc.max(m));
            let weights: Vec<T> = maxima.iter().map(|&m| ((m - peak) / tau).exp()).collect();
            let denom = weights.iter().fold(T::zero(), |acc, &w| acc + w);
            maxima
                .iter()
                .zip(&weights)
                .fold(T::zero(), |acc, (&m, &w)| acc + (w / denom) * m)
        }
    }
}

/// One direction of token alignment: column-wise maxima of the token score
/// grid (best source token per target token), compressed by the strategy.
/// Feed the transposed grid for the opposite direction.
pub fn directional_alignment_score<T: Real>(
    m: &SimilarityMatrix<T>,
    strategy: AlignmentStrategy,
) -> T {
    let maxima: Vec<T> = (0..m.gallery())
        .map(|j| {
            (0..m.queries())
                .map(|i| m.get(i, j))
                .fold(T::neg_infinity(), |acc, v| acc.max(v))
        })
        .collect();
    compress(&maxima, strategy)
}

/// Token-wise alignment score of two token sets under a metric: build the
/// pairwise score grid, take maxima along each direction, compress with the
/// strategy, and average the two directional scores.
pub fn token_alignment_score<T: Real>(
    tokens_a: &FeatureMatrix<T>,
    tokens_b: &FeatureMatrix<T>,
    params: &MetricParams<T>,
    strategy: AlignmentStrategy,
) -> Result<T> {
    if tokens_a.rows() == 0 {
        return Err(Error::EmptyTokenSet("alignment side A"));
    }
    if tokens_b.rows() == 0 {
        return Err(Error::EmptyTokenSet("alignment side B"));
    }
    let grid = params.score_matrix(tokens_a, tokens_b)?;
    let ab = directional_alignment_score(&grid, strategy);
    let ba = directional_alignment_score(&grid.transposed(), strategy);
    Ok((ab + ba) / T::from_f64_exact(2.0))
}

/// Row-wise softmax attention with the metric spliced into the query–key
/// product: `softmax(score_matrix(Q, K) / temperature) · V`. With identity
/// parameters this is exactly scaled dot-product attention.
pub fn metric_attention<T: Real>(
    queries: &FeatureMatrix<T>,
    keys: &FeatureMatrix<T>,
    values: &FeatureMatrix<T>,
    params: &MetricParams<T>,
    temperature: T,
) -> Result<FeatureMatrix<T>> {
    if temperature <= T::zero() {
        return Err(Error::Config(format!(
            "attention temperature must be > 0, got {temperature}"
        )));
    }
    if keys.rows() != values.rows() {
        return Err(Error::DimensionMismatch {
            context: "attention keys vs values",
            expected: keys.rows(),
            got: values.rows(),
        });
    }
    if keys.rows() == 0 {
        return Err(Error::EmptyTokenSet("attention keys"));
    }
    let scores = params.score_matrix(queries, keys)?;
    let dv = values.dim();
    let mut out = vec![T::zero(); queries.rows() * dv];
    for q in 0..queries.rows() {
        let logits: Vec<T> = scores.row(q).iter().map(|&s| s / temperature).collect();
        let peak = logits.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
        let exps: Vec<T> = logits.iter().map(|&v| (v - peak).exp()).collect();
        let denom = exps.iter().fold(T::zero(), |acc, &e| acc + e);
        for (k, &e) in exps.iter().enumerate() {
            let w = e / denom;
            let row = values.row(k);
            for c in 0..dv {
                out[q * dv + c] = out[q * dv + c] + w * row[c];
            }
        }
    }
    FeatureMatrix::new(queries.rows(), dv, out, false)
}

/// Default attention temperature `√D` for key dimension `D`.
pub fn default_attention_temperature<T: Real>(dim: usize) -> T {
    T::from_f64_exact((dim as f64).sqrt())
}

/// Row KL divergence `Σ_k t_k (ln t_k − ln s_k)` between two softmax rows.
fn kl_row<T: Real>(t: &[T], s: &[T]) -> T {
    t.iter().zip(s).fold(T::zero(), |acc, (&tv, &sv)| {
        if tv > T::zero() {
            acc + tv * (tv.ln() - sv.ln())
        } else {
            acc
        }
    })
}

fn softmax_scaled<T: Real>(row: &[T], tau: T) -> Vec<T> {
    let logits: Vec<T> = row.iter().map(|&v| v / tau).collect();
    let peak = logits.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
    let exps: Vec<T> = logits.iter().map(|&v| (v - peak).exp()).collect();
    let denom = exps.iter().fold(T::zero(), |acc, &e| acc + e);
    exps.into_iter().map(|e| e / denom).collect()
}

/// KL divergence from teacher to student similarity distributions at
/// temperature `tau`, averaged over rows and both directions.
pub fn distill_kl<T: Real>(
    teacher: &SimilarityMatrix<T>,
    student: &SimilarityMatrix<T>,
    tau: T,
) -> Result<T> {
    if tau <= T::zero() {
        return Err(Error::Config(format!(
            "distillation temperature must be > 0, got {tau}"
        )));
    }
    if teacher.queries() != student.queries() || teacher.gallery() != student.gallery() {
        return Err(Error::DimensionMismatch {
            context: "distillation matrices",
            expected: teacher.queries() * teacher.gallery(),
            got: student.queries() * student.gallery(),
        });
    }
    let q = teacher.queries();
    let g = teacher.gallery();
    let mut total = T::zero();
    for i in 0..q {
        let t = softmax_scaled(teacher.row(i), tau);
        let s = softmax_scaled(student.row(i), tau);
        total = total + kl_row(&t, &s);
    }
    for j in 0..g {
        let t = softmax_scaled(&teacher.column(j), tau);
        let s = softmax_scaled(&student.column(j), tau);
        total = total + kl_row(&t, &s);
    }
    Ok(total / T::from_f64_exact((q + g) as f64))
}

/// Task loss plus the teacher→student KL term with a 1:1 contribution.
pub fn distill_loss<T: Real>(
    teacher: &SimilarityMatrix<T>,
    student: &SimilarityMatrix<T>,
    tau: T,
    task_loss: T,
) -> Result<T> {
    Ok(task_loss + distill_kl(teacher, student, tau)?)
}
