//! Metric configurations, masked parameter storage, and scoring kernels.
//!
//! A metric scores a pair of `D`-dimensional embeddings as `x^T (W ⊙ U) y`
//! where `U` is a fixed binary support pattern. Only entries inside the
//! support are stored, so off-support entries of the conceptual `D×D` matrix
//! are zero by construction:
//!
//! - `Cosine`: `W = I` fixed, no parameters
//! - `Diag`: the diagonal of `W`, stored as a length-`D` vector
//! - `BlockDiag`: `N = D/d` diagonal blocks of shape `d×d`, stored as `N`
//!   contiguous row-major blocks
//! - `Dense`: the full `D×D` matrix, row-major
//!
//! Accumulation order is part of the contract so independent implementations
//! agree within stated tolerances: entries are accumulated in ascending index
//! order, flat row-major within a block, with per-block subtotals added to the
//! total in ascending block order. `Dense` accumulates flat row-major, which
//! makes `BlockDiag` with `d = D` bit-identical to `Dense`, and `BlockDiag`
//! with `d = 1` bit-identical to `Diag`.

use crate::error::{Error, Result};
use crate::rng::Pcg32;
use crate::Real;

/// Support pattern of the learnable weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricVariant {
    Cosine,
    Diag,
    BlockDiag,
    Dense,
}

impl MetricVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricVariant::Cosine => "cosine",
            MetricVariant::Diag => "diag",
            MetricVariant::BlockDiag => "bdiag",
            MetricVariant::Dense => "dense",
        }
    }
}

impl std::fmt::Display for MetricVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Metric variant plus dimensions. `block_size` is present iff the variant
/// is `BlockDiag`, in which case it must divide `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricConfig {
    variant: MetricVariant,
    dim: usize,
    block_size: Option<usize>,
}

impl MetricConfig {
    pub fn new(variant: MetricVariant, dim: usize, block_size: Option<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        match (variant, block_size) {
            (MetricVariant::BlockDiag, Some(d)) => {
                if d == 0 || d > dim {
                    return Err(Error::Config(format!(
                        "block size {d} must satisfy 1 <= d <= dim ({dim})"
                    )));
                }
                if !dim.is_multiple_of(d) {
                    return Err(Error::Config(format!(
                        "dim {dim} is not divisible by block size {d}"
                    )));
                }
                Ok(MetricConfig {
                    variant,
                    dim,
                    block_size: Some(d),
                })
            }
            (MetricVariant::BlockDiag, None) => Err(Error::Config(
                "block-diagonal metric requires a block size".into(),
            )),
            (_, Some(_)) => Err(Error::Config(format!(
                "block size is only valid for the block-diagonal variant, not {variant}"
            ))),
            (_, None) => Ok(MetricConfig {
                variant,
                dim,
                block_size: None,
            }),
        }
    }

    pub fn cosine(dim: usize) -> Result<Self> {
        Self::new(MetricVariant::Cosine, dim, None)
    }

    pub fn diag(dim: usize) -> Result<Self> {
        Self::new(MetricVariant::Diag, dim, None)
    }

    pub fn block_diag(dim: usize, block_size: usize) -> Result<Self> {
        Self::new(MetricVariant::BlockDiag, dim, Some(block_size))
    }

    pub fn dense(dim: usize) -> Result<Self> {
        Self::new(MetricVariant::Dense, dim, None)
    }

    pub fn variant(&self) -> MetricVariant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Block size `d`; `None` unless the variant is `BlockDiag`.
    pub fn block_size(&self) -> Option<usize> {
        self.block_size
    }

    /// Number of diagonal blocks `N = D/d` for `BlockDiag`, otherwise `None`.
    pub fn block_count(&self) -> Option<usize> {
        self.block_size.map(|d| self.dim / d)
    }

    /// Number of stored (learnable) parameters.
    pub fn param_count(&self) -> usize {
        match self.variant {
            MetricVariant::Cosine => 0,
            MetricVariant::Diag => self.dim,
            MetricVariant::BlockDiag => self.dim * self.block_size.expect("validated"),
            MetricVariant::Dense => self.dim * self.dim,
        }
    }
}

/// L2-normalize a vector with an epsilon clamp on the norm. A vector whose
/// norm falls below `eps` (in particular the zero vector) is scaled by
/// `1/eps`, so exact zero maps to exact zero; callers decide how to flag it.
pub fn l2_normalize<T: Real>(v: &[T], eps: T) -> Result<Vec<T>> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("l2_normalize input"));
    }
    let norm = v
        .iter()
        .fold(T::zero(), |acc, &c| acc + c * c)
        .sqrt()
        .max(eps);
    Ok(v.iter().map(|&c| c / norm).collect())
}

/// Default norm clamp for normalization.
pub const NORM_EPS: f64 = 1e-12;

/// Row-major matrix of embedding rows. When `normalized` is set, every row
/// has unit Euclidean norm within 1e-5 (validated at construction).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    rows: usize,
    dim: usize,
    data: Vec<T>,
    normalized: bool,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn new(rows: usize, dim: usize, data: Vec<T>, normalized: bool) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch {
                context: "feature matrix payload",
                expected: rows * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        let fm = FeatureMatrix {
            rows,
            dim,
            data,
            normalized,
        };
        if normalized {
            let tol = T::from_f64_exact(1e-5);
            for r in 0..rows {
                let norm = fm
                    .row(r)
                    .iter()
                    .fold(T::zero(), |acc, &c| acc + c * c)
                    .sqrt();
                if (norm - T::one()).abs() > tol {
                    return Err(Error::Config(format!(
                        "row {r} claimed normalized but has norm {norm}"
                    )));
                }
            }
        }
        Ok(fm)
    }

    /// Build from raw rows and L2-normalize each of them. Rows of exact zero
    /// are rejected, since they cannot carry the normalized invariant.
    pub fn normalize_rows(rows: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch {
                context: "feature matrix payload",
                expected: rows * dim,
                got: data.len(),
            });
        }
        let eps = T::from_f64_exact(NORM_EPS);
        let mut out = Vec::with_capacity(data.len());
        for r in 0..rows {
            let row = &data[r * dim..(r + 1) * dim];
            let unit = l2_normalize(row, eps)?;
            if unit.iter().all(|&c| c == T::zero()) {
                return Err(Error::Config(format!("row {r} is zero; cannot normalize")));
            }
            out.extend_from_slice(&unit);
        }
        FeatureMatrix::new(rows, dim, out, true)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Gather a subset of rows into a new matrix (batch assembly).
    pub fn gather(&self, indices: &[usize]) -> FeatureMatrix<T> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            dim: self.dim,
            data,
            normalized: self.normalized,
        }
    }
}

impl FeatureMatrix<f32> {
    /// Lossless widening for the f64 oracle paths.
    pub fn to_f64(&self) -> FeatureMatrix<f64> {
        FeatureMatrix {
            rows: self.rows,
            dim: self.dim,
            data: self.data.iter().map(|&v| v as f64).collect(),
            normalized: self.normalized,
        }
    }
}

/// Dense `Q×G` grid of pair scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    queries: usize,
    gallery: usize,
    scores: Vec<T>,
}

impl<T: Real> SimilarityMatrix<T> {
    pub fn new(queries: usize, gallery: usize, scores: Vec<T>) -> Result<Self> {
        if scores.len() != queries * gallery {
            return Err(Error::DimensionMismatch {
                context: "similarity matrix payload",
                expected: queries * gallery,
                got: scores.len(),
            });
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("similarity matrix"));
        }
        Ok(SimilarityMatrix {
            queries,
            gallery,
            scores,
        })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn gallery(&self) -> usize {
        self.gallery
    }

    pub fn get(&self, q: usize, g: usize) -> T {
        self.scores[q * self.gallery + g]
    }

    pub fn row(&self, q: usize) -> &[T] {
        &self.scores[q * self.gallery..(q + 1) * self.gallery]
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn column(&self, g: usize) -> Vec<T> {
        (0..self.queries).map(|q| self.get(q, g)).collect()
    }

    pub fn transposed(&self) -> SimilarityMatrix<T> {
        let mut scores = Vec::with_capacity(self.scores.len());
        for g in 0..self.gallery {
            for q in 0..self.queries {
                scores.push(self.get(q, g));
            }
        }
        SimilarityMatrix {
            queries: self.gallery,
            gallery: self.queries,
            scores,
        }
    }
}

/// Which side of the bilinear form a projection folds the weights into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionSide {
    /// `x ↦ (W ⊙ U)^T x`, so `dot(project(x), y) = score_pair(x, y)`.
    Left,
    /// `y ↦ (W ⊙ U) y`, so `dot(x, project(y)) = score_pair(x, y)`.
    Right,
}

/// Masked weight storage for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricParams<T> {
    config: MetricConfig,
    weights: Vec<T>,
}

impl<T: Real> MetricParams<T> {
    /// Identity initialization: scoring starts out equal to plain cosine.
    pub fn identity(config: MetricConfig) -> Self {
        let mut weights = vec![T::zero(); config.param_count()];
        match config.variant() {
            MetricVariant::Cosine => {}
            MetricVariant::Diag => weights.fill(T::one()),
            MetricVariant::BlockDiag => {
                let d = config.block_size().expect("validated");
                let n = config.block_count().expect("validated");
                for block in 0..n {
                    for i in 0..d {
                        weights[block * d * d + i * d + i] = T::one();
                    }
                }
            }
            MetricVariant::Dense => {
                let dim = config.dim();
                for i in 0..dim {
                    weights[i * dim + i] = T::one();
                }
            }
        }
        MetricParams { config, weights }
    }

    /// Random initialization: every stored entry drawn i.i.d. N(0, std^2).
    pub fn random_normal(config: MetricConfig, std: f64, rng: &mut Pcg32) -> Self {
        let weights = (0..config.param_count())
            .map(|_| T::from_f64_exact(rng.next_gaussian() * std))
            .collect();
        MetricParams { config, weights }
    }

    pub fn from_weights(config: MetricConfig, weights: Vec<T>) -> Result<Self> {
        if weights.len() != config.param_count() {
            return Err(Error::DimensionMismatch {
                context: "metric weights",
                expected: config.param_count(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("metric weights"));
        }
        Ok(MetricParams { config, weights })
    }

    pub fn config(&self) -> &MetricConfig {
        &self.config
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    /// Bilinear score of one pair: `x^T (W ⊙ U) y`.
    pub fn score_pair(&self, x: &[T], y: &[T]) -> Result<T> {
        let dim = self.config.dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "score_pair x",
                expected: dim,
                got: x.len(),
            });
        }
        if y.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "score_pair y",
                expected: dim,
                got: y.len(),
            });
        }
        Ok(self.score_pair_unchecked(x, y))
    }

    // Index loops are deliberate here: the accumulation order over indices
    // is part of the scoring contract.
    #[allow(clippy::needless_range_loop)]
    fn score_pair_unchecked(&self, x: &[T], y: &[T]) -> T {
        match self.config.variant() {
            MetricVariant::Cosine => {
                let mut acc = T::zero();
                for m in 0..self.config.dim() {
                    acc = acc + x[m] * y[m];
                }
                acc
            }
            MetricVariant::Diag => {
                let mut acc = T::zero();
                for m in 0..self.config.dim() {
                    acc = acc + self.weights[m] * x[m] * y[m];
                }
                acc
            }
            MetricVariant::BlockDiag => {
                let d = self.config.block_size().expect("validated");
                let n = self.config.block_count().expect("validated");
                let mut total = T::zero();
                for block in 0..n {
                    let base = block * d;
                    let wbase = block * d * d;
                    let mut acc = T::zero();
                    for i in 0..d {
                        for j in 0..d {
                            acc = acc + self.weights[wbase + i * d + j] * x[base + i] * y[base + j];
                        }
                    }
                    total = total + acc;
                }
                total
            }
            MetricVariant::Dense => {
                let dim = self.config.dim();
                let mut acc = T::zero();
                for i in 0..dim {
                    for j in 0..dim {
                        acc = acc + self.weights[i * dim + j] * x[i] * y[j];
                    }
                }
                acc
            }
        }
    }

    /// Score every query row against every gallery row. Each entry follows
    /// the exact pairwise accumulation order of [`score_pair`].
    ///
    /// [`score_pair`]: MetricParams::score_pair
    pub fn score_matrix(
        &self,
        queries: &FeatureMatrix<T>,
        gallery: &FeatureMatrix<T>,
    ) -> Result<SimilarityMatrix<T>> {
        let dim = self.config.dim();
        if queries.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "score_matrix queries",
                expected: dim,
                got: queries.dim(),
            });
        }
        if gallery.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "score_matrix gallery",
                expected: dim,
                got: gallery.dim(),
            });
        }
        let mut scores = Vec::with_capacity(queries.rows() * gallery.rows());
        for q in 0..queries.rows() {
            let xq = queries.row(q);
            for g in 0..gallery.rows() {
                scores.push(self.score_pair_unchecked(xq, gallery.row(g)));
            }
        }
        SimilarityMatrix::new(queries.rows(), gallery.rows(), scores)
    }

    /// Fold the weights into one side so retrieval becomes a plain dot
    /// product. Output rows are not re-normalized.
    pub fn pre_project(
        &self,
        features: &FeatureMatrix<T>,
        side: ProjectionSide,
    ) -> Result<FeatureMatrix<T>> {
        let dim = self.config.dim();
        if features.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "pre_project",
                expected: dim,
                got: features.dim(),
            });
        }
        let mut data = Vec::with_capacity(features.rows() * dim);
        for r in 0..features.rows() {
            let row = features.row(r);
            data.extend_from_slice(&self.project_row(row, side));
        }
        FeatureMatrix::new(features.rows(), dim, data, false)
    }

    #[allow(clippy::needless_range_loop)]
    fn project_row(&self, v: &[T], side: ProjectionSide) -> Vec<T> {
        let dim = self.config.dim();
        match self.config.variant() {
            MetricVariant::Cosine => v.to_vec(),
            // The diagonal is its own transpose.
            MetricVariant::Diag => (0..dim).map(|m| self.weights[m] * v[m]).collect(),
            MetricVariant::BlockDiag => {
                let d = self.config.block_size().expect("validated");
                let n = self.config.block_count().expect("validated");
                let mut out = vec![T::zero(); dim];
                for block in 0..n {
                    let base = block * d;
                    let wbase = block * d * d;
                    for a in 0..d {
                        let mut acc = T::zero();
                        for b in 0..d {
                            let w = match side {
                                ProjectionSide::Left => self.weights[wbase + b * d + a],
                                ProjectionSide::Right => self.weights[wbase + a * d + b],
                            };
                            acc = acc + w * v[base + b];
                        }
                        out[base + a] = acc;
                    }
                }
                out
            }
            MetricVariant::Dense => {
                let mut out = vec![T::zero(); dim];
                for a in 0..dim {
                    let mut acc = T::zero();
                    for b in 0..dim {
                        let w = match side {
                            ProjectionSide::Left => self.weights[b * dim + a],
                            ProjectionSide::Right => self.weights[a * dim + b],
                        };
                        acc = acc + w * v[b];
                    }
                    out[a] = acc;
                }
                out
            }
        }
    }

    /// Expand the masked storage into the explicit `D×D` matrix. Entries
    /// outside the support are exactly zero. Primarily a testing oracle.
    pub fn materialize_dense(&self) -> Vec<T> {
        let dim = self.config.dim();
        let mut full = vec![T::zero(); dim * dim];
        match self.config.variant() {
            MetricVariant::Cosine => {
                for i in 0..dim {
                    full[i * dim + i] = T::one();
                }
            }
            MetricVariant::Diag => {
                for m in 0..dim {
                    full[m * dim + m] = self.weights[m];
                }
            }
            MetricVariant::BlockDiag => {
                let d = self.config.block_size().expect("validated");
                let n = self.config.block_count().expect("validated");
                for block in 0..n {
                    let base = block * d;
                    let wbase = block * d * d;
                    for i in 0..d {
                        for j in 0..d {
                            full[(base + i) * dim + (base + j)] = self.weights[wbase + i * d + j];
                        }
                    }
                }
            }
            MetricVariant::Dense => full.copy_from_slice(&self.weights),
        }
        full
    }

    /// Fraction of total absolute weight mass sitting on the main diagonal.
    /// Returns 1.0 for Cosine (the identity) and for an all-zero state.
    pub fn diagonal_mass_fraction(&self) -> f64 {
        if self.config.variant() == MetricVariant::Cosine {
            return 1.0;
        }
        let dim = self.config.dim();
        let full = self.materialize_dense();
        let mut diag = 0.0f64;
        let mut total = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let a = full[i * dim + j].to_f64().unwrap().abs();
                total += a;
                if i == j {
                    diag += a;
                }
            }
        }
        if total == 0.0 {
            1.0
        } else {
            diag / total
        }
    }
}

impl MetricParams<f32> {
    pub fn to_f64(&self) -> MetricParams<f64> {
        MetricParams {
            config: self.config,
            weights: self.weights.iter().map(|&w| w as f64).collect(),
        }
    }
}

impl MetricParams<f64> {
    /// Narrowing cast for moving oracle-fitted params into the f32 pipeline.
    pub fn to_f32(&self) -> MetricParams<f32> {
        MetricParams {
            config: self.config,
            weights: self.weights.iter().map(|&w| w as f32).collect(),
        }
    }
}
