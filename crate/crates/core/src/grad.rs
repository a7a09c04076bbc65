//! Analytic weight gradients under the structural mask, plus the
//! finite-difference oracle used to verify them.
//!
//! Every loss factors through the score matrix, so one chain rule covers all
//! of them: `∂L/∂W = Σ_{q,g} dS[q][g] · (x_q y_g^T ⊙ U)`, accumulated
//! directly in masked storage (off-support components are never formed).
//! The hard-triplet gradient is this chain with the indicator/sign pattern of
//! the hinge loss as `dS`: +1 at each active (anchor, hardest negative) cell
//! and −1 at the matching positive, for both directions.

use crate::error::{Error, Result};
use crate::loss::{loss_ds, loss_value, triplet_ds, LossSpec};
use crate::metric::{FeatureMatrix, MetricConfig, MetricParams, MetricVariant};
use crate::Real;

/// Gradient with the same masked layout as [`MetricParams`] weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGradient<T> {
    config: MetricConfig,
    values: Vec<T>,
}

impl<T: Real> MaskedGradient<T> {
    pub fn zeros(config: MetricConfig) -> Self {
        MaskedGradient {
            config,
            values: vec![T::zero(); config.param_count()],
        }
    }

    pub fn config(&self) -> &MetricConfig {
        &self.config
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn l2_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    /// Expand into the conceptual `D×D` layout; off-support entries are
    /// exactly zero by construction.
    pub fn materialize_dense(&self) -> Vec<T> {
        MetricParams::from_weights(self.config, self.values.clone())
            .expect("layout matches by construction")
            .materialize_dense()
    }
}

/// Chain-rule accumulation of `Σ dS[q][g] · (x_q y_g^T ⊙ U)` into masked
/// storage. Pairs are visited in ascending `(q, g)` order.
pub fn grad_w_from_ds<T: Real>(
    x: &FeatureMatrix<T>,
    y: &FeatureMatrix<T>,
    ds: &[T],
    config: MetricConfig,
) -> Result<MaskedGradient<T>> {
    let dim = config.dim();
    if x.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "grad_w_from_ds x",
            expected: dim,
            got: x.dim(),
        });
    }
    if y.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "grad_w_from_ds y",
            expected: dim,
            got: y.dim(),
        });
    }
    if ds.len() != x.rows() * y.rows() {
        return Err(Error::DimensionMismatch {
            context: "grad_w_from_ds dS",
            expected: x.rows() * y.rows(),
            got: ds.len(),
        });
    }
    let mut grad = MaskedGradient::zeros(config);
    let g = grad.values_mut();
    for q in 0..x.rows() {
        let xq = x.row(q);
        for gal in 0..y.rows() {
            let coeff = ds[q * y.rows() + gal];
            if coeff == T::zero() {
                continue;
            }
            let yg = y.row(gal);
            match config.variant() {
                MetricVariant::Cosine => {}
                MetricVariant::Diag => {
                    for m in 0..dim {
                        g[m] = g[m] + coeff * xq[m] * yg[m];
                    }
                }
                MetricVariant::BlockDiag => {
                    let d = config.block_size().expect("validated");
                    let n = config.block_count().expect("validated");
                    for block in 0..n {
                        let base = block * d;
                        let wbase = block * d * d;
                        for i in 0..d {
                            for j in 0..d {
                                let idx = wbase + i * d + j;
                                g[idx] = g[idx] + coeff * xq[base + i] * yg[base + j];
                            }
                        }
                    }
                }
                MetricVariant::Dense => {
                    for i in 0..dim {
                        for j in 0..dim {
                            g[i * dim + j] = g[i * dim + j] + coeff * xq[i] * yg[j];
                        }
                    }
                }
            }
        }
    }
    Ok(grad)
}

/// Hard-triplet gradient of the weights over a batch of matched pairs
/// `(X[i], Y[i])`: outer products `x(ỹ−y)^T` and `(x̃−x)y^T` masked by the
/// support, for every anchor whose hinge is active (ℓ ≥ 0).
pub fn triplet_grad_w<T: Real>(
    x: &FeatureMatrix<T>,
    y: &FeatureMatrix<T>,
    params: &MetricParams<T>,
    margin: T,
) -> Result<MaskedGradient<T>> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            context: "triplet batch pairing",
            expected: x.rows(),
            got: y.rows(),
        });
    }
    let s = params.score_matrix(x, y)?;
    let ds = triplet_ds(&s, margin)?;
    grad_w_from_ds(x, y, &ds, *params.config())
}

/// Forward-and-backward pass for any loss: the value and the masked weight
/// gradient for a batch of matched pairs.
pub fn loss_grad_w<T: Real>(
    x: &FeatureMatrix<T>,
    y: &FeatureMatrix<T>,
    params: &MetricParams<T>,
    spec: &LossSpec,
) -> Result<(T, MaskedGradient<T>)> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            context: "loss batch pairing",
            expected: x.rows(),
            got: y.rows(),
        });
    }
    let s = params.score_matrix(x, y)?;
    let value = loss_value(&s, spec)?;
    let ds = loss_ds(&s, spec)?;
    let grad = grad_w_from_ds(x, y, &ds, *params.config())?;
    Ok((value, grad))
}

/// Central finite differences `(L(w+h) − L(w−h)) / 2h` per stored parameter.
/// A 64-bit verification oracle, deliberately independent of the analytic
/// gradient path.
pub fn finite_diff_grad<F>(
    loss_fn: F,
    params: &MetricParams<f64>,
    h: f64,
) -> Result<MaskedGradient<f64>>
where
    F: Fn(&MetricParams<f64>) -> Result<f64>,
{
    if h <= 0.0 {
        return Err(Error::Config(format!("step size must be > 0, got {h}")));
    }
    let mut grad = MaskedGradient::zeros(*params.config());
    let mut probe = params.clone();
    for k in 0..params.weights().len() {
        let original = params.weights()[k];
        probe.weights_mut()[k] = original + h;
        let plus = loss_fn(&probe)?;
        probe.weights_mut()[k] = original - h;
        let minus = loss_fn(&probe)?;
        probe.weights_mut()[k] = original;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite("finite-difference loss evaluation"));
        }
        grad.values_mut()[k] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Worst relative disagreement between two gradients sharing a layout.
/// The denominator is floored so that near-zero components compare
/// absolutely.
pub fn max_relative_error<T: Real>(a: &MaskedGradient<T>, b: &MaskedGradient<T>) -> f64 {
    let floor = 1e-6;
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| {
            let x = x.to_f64().unwrap();
            let y = y.to_f64().unwrap();
            (x - y).abs() / x.abs().max(y.abs()).max(floor)
        })
        .fold(0.0, f64::max)
}
