//! Training objectives over square similarity matrices.
//!
//! All four losses treat the diagonal of a `B×B` score matrix as the
//! positive pairs and sum both retrieval directions (rows: x→y, columns:
//! y→x). Each loss also exposes its derivative with respect to the score
//! matrix (`dS`), which the gradient module chains into masked weight
//! gradients.

use crate::error::{Error, Result};
use crate::metric::SimilarityMatrix;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Hinge against the single hardest in-batch negative per anchor,
    /// summed over the batch and both directions.
    TripletHardest,
    /// Symmetric cross entropy over temperature-scaled rows and columns.
    InfoNce,
    /// KL from one-hot match labels to row/column softmax of the scores.
    Cmpm,
    /// Hinge over all negatives, each weighted by its own similarity
    /// raised to `poly_order` (harder negatives weigh more).
    Poly,
}

impl LossKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::TripletHardest => "triplet",
            LossKind::InfoNce => "infonce",
            LossKind::Cmpm => "cmpm",
            LossKind::Poly => "poly",
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Objective selector plus hyperparameters. Unused fields are ignored by
/// the losses that do not read them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Hinge margin γ (triplet, poly).
    pub margin: f64,
    /// Softmax temperature τ (InfoNCE).
    pub temperature: f64,
    /// Polynomial weighting order k (poly); k = 0 degenerates to plain hinge.
    pub poly_order: u32,
    /// Scale applied to the polynomial weight before clamping to [0, 1].
    pub poly_scale: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        LossSpec {
            kind,
            margin: 0.2,
            temperature: 0.05,
            poly_order: 2,
            poly_scale: 1.0,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        if margin < 0.0 || !margin.is_finite() {
            return Err(Error::Config(format!("margin must be >= 0, got {margin}")));
        }
        self.margin = margin;
        Ok(self)
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        if temperature <= 0.0 || !temperature.is_finite() {
            return Err(Error::Config(format!(
                "temperature must be > 0, got {temperature}"
            )));
        }
        self.temperature = temperature;
        Ok(self)
    }

    pub fn with_poly(mut self, order: u32, scale: f64) -> Result<Self> {
        if scale < 0.0 || !scale.is_finite() {
            return Err(Error::Config(format!(
                "poly scale must be >= 0, got {scale}"
            )));
        }
        self.poly_order = order;
        self.poly_scale = scale;
        Ok(self)
    }
}

/// Smoothing added inside CMPM logs so a vanishing softmax never yields −∞.
pub const CMPM_LOG_EPS: f64 = 1e-8;

fn require_square<T: Real>(s: &SimilarityMatrix<T>, min: usize) -> Result<usize> {
    if s.queries() != s.gallery() {
        return Err(Error::DimensionMismatch {
            context: "loss matrix (square required)",
            expected: s.queries(),
            got: s.gallery(),
        });
    }
    if s.queries() < min {
        return Err(Error::BatchTooSmall {
            got: s.queries(),
            min,
        });
    }
    Ok(s.queries())
}

/// Numerically stable softmax of a slice.
fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
    let exps: Vec<T> = logits.iter().map(|&v| (v - max).exp()).collect();
    let denom = exps.iter().fold(T::zero(), |acc, &e| acc + e);
    exps.into_iter().map(|e| e / denom).collect()
}

/// Index of the largest entry excluding `skip`; ties resolved to the lowest
/// index so gradient routing is deterministic.
fn hardest_negative<T: Real>(scores: &[T], skip: usize) -> usize {
    let mut best = usize::MAX;
    let mut best_val = T::neg_infinity();
    for (j, &v) in scores.iter().enumerate() {
        if j == skip {
            continue;
        }
        if v > best_val {
            best_val = v;
            best = j;
        }
    }
    best
}

/// Row/column hinge bookkeeping shared by the loss value and its gradient.
pub(crate) struct TripletHinges<T> {
    /// Per row `i`: hardest column `ĵ` and hinge `γ + S[i][ĵ] − S[i][i]`.
    pub rows: Vec<(usize, T)>,
    /// Per column `j`: hardest row `î` and hinge `γ + S[î][j] − S[j][j]`.
    pub cols: Vec<(usize, T)>,
}

pub(crate) fn triplet_hinges<T: Real>(
    s: &SimilarityMatrix<T>,
    margin: T,
) -> Result<TripletHinges<T>> {
    let b = require_square(s, 2)?;
    let mut rows = Vec::with_capacity(b);
    for i in 0..b {
        let row = s.row(i);
        let j = hardest_negative(row, i);
        rows.push((j, margin + row[j] - row[i]));
    }
    let mut cols = Vec::with_capacity(b);
    for j in 0..b {
        let col = s.column(j);
        let i = hardest_negative(&col, j);
        cols.push((i, margin + col[i] - col[j]));
    }
    Ok(TripletHinges { rows, cols })
}

/// Hard triplet loss: `Σ_i [γ + max_{j≠i} S_ij − S_ii]₊` plus the same over
/// columns. Sum reduction, no batch normalization.
pub fn triplet_hardest_loss<T: Real>(s: &SimilarityMatrix<T>, margin: T) -> Result<T> {
    let hinges = triplet_hinges(s, margin)?;
    let mut total = T::zero();
    for (_, l) in &hinges.rows {
        total = total + l.max(T::zero());
    }
    for (_, l) in &hinges.cols {
        total = total + l.max(T::zero());
    }
    Ok(total)
}

/// ∂(triplet loss)/∂S. Active hinges (ℓ ≥ 0, boundary included) route +1 to
/// the hardest negative and −1 to the positive.
pub fn triplet_ds<T: Real>(s: &SimilarityMatrix<T>, margin: T) -> Result<Vec<T>> {
    let b = require_square(s, 2)?;
    let hinges = triplet_hinges(s, margin)?;
    let mut ds = vec![T::zero(); b * b];
    for (i, &(j, l)) in hinges.rows.iter().enumerate() {
        if l >= T::zero() {
            ds[i * b + j] = ds[i * b + j] + T::one();
            ds[i * b + i] = ds[i * b + i] - T::one();
        }
    }
    for (j, &(i, l)) in hinges.cols.iter().enumerate() {
        if l >= T::zero() {
            ds[i * b + j] = ds[i * b + j] + T::one();
            ds[j * b + j] = ds[j * b + j] - T::one();
        }
    }
    Ok(ds)
}

/// Symmetric InfoNCE: mean over rows and columns of the cross entropy of the
/// temperature-scaled softmax against the diagonal positives,
/// `(1/2B)[Σ_i −log p_row_i(i) + Σ_j −log p_col_j(j)]`.
pub fn infonce_loss<T: Real>(s: &SimilarityMatrix<T>, temperature: T) -> Result<T> {
    if temperature <= T::zero() {
        return Err(Error::Config(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    let b = require_square(s, 1)?;
    let mut total = T::zero();
    for i in 0..b {
        let logits: Vec<T> = s.row(i).iter().map(|&v| v / temperature).collect();
        total = total - softmax(&logits)[i].ln();
    }
    for j in 0..b {
        let logits: Vec<T> = s.column(j).iter().map(|&v| v / temperature).collect();
        total = total - softmax(&logits)[j].ln();
    }
    let two_b = T::from_f64_exact(2.0 * b as f64);
    Ok(total / two_b)
}

/// ∂(InfoNCE)/∂S.
pub fn infonce_ds<T: Real>(s: &SimilarityMatrix<T>, temperature: T) -> Result<Vec<T>> {
    if temperature <= T::zero() {
        return Err(Error::Config(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    let b = require_square(s, 1)?;
    let scale = T::one() / (T::from_f64_exact(2.0 * b as f64) * temperature);
    let mut ds = vec![T::zero(); b * b];
    for i in 0..b {
        let logits: Vec<T> = s.row(i).iter().map(|&v| v / temperature).collect();
        let p = softmax(&logits);
        for j in 0..b {
            let delta = if i == j { T::one() } else { T::zero() };
            ds[i * b + j] = ds[i * b + j] + scale * (p[j] - delta);
        }
    }
    for j in 0..b {
        let logits: Vec<T> = s.column(j).iter().map(|&v| v / temperature).collect();
        let p = softmax(&logits);
        for i in 0..b {
            let delta = if i == j { T::one() } else { T::zero() };
            ds[i * b + j] = ds[i * b + j] + scale * (p[i] - delta);
        }
    }
    Ok(ds)
}

/// CMPM-style projection matching: KL from the one-hot label distribution
/// to the row/column softmax of the raw scores,
/// `(1/2B)[Σ_i −log(q_row_i(i)+ε) + Σ_j −log(q_col_j(j)+ε)]`, each term
/// clamped at zero (the ε smoothing can otherwise push a fully converged
/// term a hair below zero).
pub fn cmpm_loss<T: Real>(s: &SimilarityMatrix<T>) -> Result<T> {
    let b = require_square(s, 1)?;
    let eps = T::from_f64_exact(CMPM_LOG_EPS);
    let mut total = T::zero();
    for i in 0..b {
        let q = softmax(s.row(i));
        total = total + (-(q[i] + eps).ln()).max(T::zero());
    }
    for j in 0..b {
        let q = softmax(&s.column(j));
        total = total + (-(q[j] + eps).ln()).max(T::zero());
    }
    let two_b = T::from_f64_exact(2.0 * b as f64);
    Ok(total / two_b)
}

/// ∂(CMPM)/∂S. Rows whose clamped KL term is zero contribute no gradient.
pub fn cmpm_ds<T: Real>(s: &SimilarityMatrix<T>) -> Result<Vec<T>> {
    let b = require_square(s, 1)?;
    let eps = T::from_f64_exact(CMPM_LOG_EPS);
    let scale = T::one() / T::from_f64_exact(2.0 * b as f64);
    let mut ds = vec![T::zero(); b * b];
    for i in 0..b {
        let q = softmax(s.row(i));
        if -(q[i] + eps).ln() <= T::zero() {
            continue;
        }
        let factor = q[i] / (q[i] + eps);
        for j in 0..b {
            let delta = if i == j { T::one() } else { T::zero() };
            ds[i * b + j] = ds[i * b + j] + scale * factor * (q[j] - delta);
        }
    }
    for j in 0..b {
        let q = softmax(&s.column(j));
        if -(q[j] + eps).ln() <= T::zero() {
            continue;
        }
        let factor = q[j] / (q[j] + eps);
        for i in 0..b {
            let delta = if i == j { T::one() } else { T::zero() };
            ds[i * b + j] = ds[i * b + j] + scale * factor * (q[i] - delta);
        }
    }
    Ok(ds)
}

/// Polynomial weight `clamp(scale · s^k, 0, 1)` on a negative similarity.
fn poly_weight<T: Real>(s: T, order: u32, scale: T) -> T {
    (scale * s.powi(order as i32)).max(T::zero()).min(T::one())
}

/// Derivative of [`poly_weight`] with respect to `s`; zero in the clamped
/// regions.
fn poly_weight_ds<T: Real>(s: T, order: u32, scale: T) -> T {
    if order == 0 {
        return T::zero();
    }
    let raw = scale * s.powi(order as i32);
    if raw <= T::zero() || raw >= T::one() {
        return T::zero();
    }
    scale * T::from_f64_exact(order as f64) * s.powi(order as i32 - 1)
}

/// Polynomially weighted hinge over all negatives, both directions:
/// `Σ_{i≠j} w(S_ij)([γ + S_ij − S_ii]₊ + [γ + S_ij − S_jj]₊)` with
/// `w(s) = clamp(scale · s^k, 0, 1)`. At `k = 0` this is the plain
/// all-negatives hinge sum.
pub fn poly_loss<T: Real>(s: &SimilarityMatrix<T>, spec: &LossSpec) -> Result<T> {
    let b = require_square(s, 1)?;
    let margin = T::from_f64_exact(spec.margin);
    let scale = T::from_f64_exact(spec.poly_scale);
    let mut total = T::zero();
    for i in 0..b {
        for j in 0..b {
            if i == j {
                continue;
            }
            let sij = s.get(i, j);
            let w = poly_weight(sij, spec.poly_order, scale);
            let row_hinge = (margin + sij - s.get(i, i)).max(T::zero());
            let col_hinge = (margin + sij - s.get(j, j)).max(T::zero());
            total = total + w * row_hinge + w * col_hinge;
        }
    }
    Ok(total)
}

/// ∂(poly loss)/∂S, including the weight's own dependence on the negative
/// score.
pub fn poly_ds<T: Real>(s: &SimilarityMatrix<T>, spec: &LossSpec) -> Result<Vec<T>> {
    let b = require_square(s, 1)?;
    let margin = T::from_f64_exact(spec.margin);
    let scale = T::from_f64_exact(spec.poly_scale);
    let mut ds = vec![T::zero(); b * b];
    for i in 0..b {
        for j in 0..b {
            if i == j {
                continue;
            }
            let sij = s.get(i, j);
            let w = poly_weight(sij, spec.poly_order, scale);
            let dw = poly_weight_ds(sij, spec.poly_order, scale);
            // An inactive hinge zeroes the whole product, including the
            // weight's own derivative term.
            let row_hinge = margin + sij - s.get(i, i);
            if row_hinge >= T::zero() {
                ds[i * b + j] = ds[i * b + j] + dw * row_hinge + w;
                ds[i * b + i] = ds[i * b + i] - w;
            }
            let col_hinge = margin + sij - s.get(j, j);
            if col_hinge >= T::zero() {
                ds[i * b + j] = ds[i * b + j] + dw * col_hinge + w;
                ds[j * b + j] = ds[j * b + j] - w;
            }
        }
    }
    Ok(ds)
}

/// Dispatch a loss value by spec.
pub fn loss_value<T: Real>(s: &SimilarityMatrix<T>, spec: &LossSpec) -> Result<T> {
    match spec.kind {
        LossKind::TripletHardest => triplet_hardest_loss(s, T::from_f64_exact(spec.margin)),
        LossKind::InfoNce => infonce_loss(s, T::from_f64_exact(spec.temperature)),
        LossKind::Cmpm => cmpm_loss(s),
        LossKind::Poly => poly_loss(s, spec),
    }
}

/// Dispatch ∂L/∂S by spec.
pub fn loss_ds<T: Real>(s: &SimilarityMatrix<T>, spec: &LossSpec) -> Result<Vec<T>> {
    match spec.kind {
        LossKind::TripletHardest => triplet_ds(s, T::from_f64_exact(spec.margin)),
        LossKind::InfoNce => infonce_ds(s, T::from_f64_exact(spec.temperature)),
        LossKind::Cmpm => cmpm_ds(s),
        LossKind::Poly => poly_ds(s, spec),
    }
}
