//! Mini-batch optimization of metric parameters over paired features.
//!
//! The loop is deliberately plain: identity (or random) initialization,
//! per-epoch shuffled full batches, an SGD or adaptive-moment update over the
//! masked storage, optional weight decay and weight dropout, global gradient
//! clipping, and a single PRNG stream so runs are bitwise reproducible.

use crate::error::{Error, Result};
use crate::eval::{evaluate_retrieval, GroundTruth, RetrievalReport};
use crate::grad::{loss_grad_w, MaskedGradient};
use crate::loss::LossSpec;
use crate::metric::{FeatureMatrix, MetricConfig, MetricParams};
use crate::rng::Pcg32;

const ADAM_BETA1: f32 = 0.9;
const ADAM_BETA2: f32 = 0.999;
const ADAM_EPS: f32 = 1e-8;
const INIT_STREAM_SALT: u64 = 0x5eed_1217_ab1e_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    AdaptiveMoment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitKind {
    /// Start from the identity so the first evaluation is exactly cosine.
    Identity,
    /// Every stored entry drawn i.i.d. N(0, std²).
    RandomNormal { std: f64 },
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub loss: LossSpec,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f32,
    pub optimizer: OptimizerKind,
    /// L2 penalty strength λ; applied to stored entries only.
    pub weight_decay: f32,
    /// Per-pass keep probability is `1 − weight_dropout`.
    pub weight_dropout: f32,
    pub seed: u64,
    /// Evaluate every this many epochs (0 = never).
    pub eval_every: usize,
    pub init: InitKind,
    /// Global L2 clip on the batch gradient.
    pub grad_clip: f32,
}

impl TrainConfig {
    pub fn new(loss: LossSpec) -> Self {
        TrainConfig {
            loss,
            epochs: 30,
            batch_size: 128,
            learning_rate: 5e-4,
            optimizer: OptimizerKind::AdaptiveMoment,
            weight_decay: 0.0,
            weight_dropout: 0.0,
            seed: 0,
            eval_every: 0,
            init: InitKind::Identity,
            grad_clip: 10.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::Config(format!(
                "batch size must be >= 2, got {}",
                self.batch_size
            )));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::Config("weight decay must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.weight_dropout) {
            return Err(Error::Config(format!(
                "weight dropout must lie in [0, 1), got {}",
                self.weight_dropout
            )));
        }
        Ok(())
    }
}

/// Matched feature pairs: row `i` of `x` corresponds to row `i` of `y`.
#[derive(Debug, Clone)]
pub struct PairedDataset {
    pub x: FeatureMatrix<f32>,
    pub y: FeatureMatrix<f32>,
}

impl PairedDataset {
    pub fn new(x: FeatureMatrix<f32>, y: FeatureMatrix<f32>) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::DimensionMismatch {
                context: "paired dataset rows",
                expected: x.rows(),
                got: y.rows(),
            });
        }
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                context: "paired dataset dim",
                expected: x.dim(),
                got: y.dim(),
            });
        }
        Ok(PairedDataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Mutable optimization state.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub params: MetricParams<f32>,
    /// First moment (adaptive) — same masked layout as the weights.
    moment1: Vec<f32>,
    /// Second moment (adaptive).
    moment2: Vec<f32>,
    pub step: u64,
    pub loss_history: Vec<f32>,
}

impl TrainState {
    pub fn new(params: MetricParams<f32>) -> Self {
        let n = params.weights().len();
        TrainState {
            params,
            moment1: vec![0.0; n],
            moment2: vec![0.0; n],
            step: 0,
            loss_history: Vec::new(),
        }
    }
}

/// Draw `batch_size` distinct pair indices without replacement
/// (partial Fisher–Yates on the shared PRNG).
pub fn sample_batch(
    dataset: &PairedDataset,
    batch_size: usize,
    rng: &mut Pcg32,
) -> Result<Vec<usize>> {
    if batch_size > dataset.len() {
        return Err(Error::BatchTooLarge {
            requested: batch_size,
            available: dataset.len(),
        });
    }
    Ok(rng.sample_indices(dataset.len(), batch_size))
}

/// Inverted-dropout keep pattern over the stored entries: each entry is kept
/// with probability `1 − p`; kept entries are scaled by `1/(1 − p)` during
/// the pass. Evaluation always uses the undropped weights.
pub fn weight_dropout_mask(len: usize, p: f32, rng: &mut Pcg32) -> Vec<bool> {
    (0..len).map(|_| rng.next_f64() >= p as f64).collect()
}

/// One first-order update over the masked storage. Rejects non-finite
/// gradients without touching the state.
pub fn apply_update(
    state: &mut TrainState,
    grad: &MaskedGradient<f32>,
    config: &TrainConfig,
) -> Result<()> {
    if grad.values().len() != state.params.weights().len() {
        return Err(Error::DimensionMismatch {
            context: "gradient layout",
            expected: state.params.weights().len(),
            got: grad.values().len(),
        });
    }
    if !grad.is_finite() {
        return Err(Error::NonFinite("gradient update"));
    }
    state.step += 1;
    let lr = config.learning_rate;
    let lambda = config.weight_decay;
    match config.optimizer {
        OptimizerKind::Sgd => {
            for (w, &g) in state.params.weights_mut().iter_mut().zip(grad.values()) {
                *w -= lr * (g + lambda * *w);
            }
        }
        OptimizerKind::AdaptiveMoment => {
            let t = state.step as i32;
            let bias1 = 1.0 - ADAM_BETA1.powi(t);
            let bias2 = 1.0 - ADAM_BETA2.powi(t);
            for (k, (w, &g)) in state
                .params
                .weights_mut()
                .iter_mut()
                .zip(grad.values())
                .enumerate()
            {
                let m = ADAM_BETA1 * state.moment1[k] + (1.0 - ADAM_BETA1) * g;
                let v = ADAM_BETA2 * state.moment2[k] + (1.0 - ADAM_BETA2) * g * g;
                state.moment1[k] = m;
                state.moment2[k] = v;
                let m_hat = m / bias1;
                let v_hat = v / bias2;
                // Decay is decoupled from the moment estimates.
                *w -= lr * (m_hat / (v_hat.sqrt() + ADAM_EPS)) - lr * lambda * *w;
            }
        }
    }
    Ok(())
}

fn clip_gradient(grad: &mut MaskedGradient<f32>, clip: f32) {
    if clip <= 0.0 {
        return;
    }
    let norm = grad.l2_norm();
    if norm > clip {
        let scale = clip / norm;
        for g in grad.values_mut() {
            *g *= scale;
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: MetricParams<f32>,
    /// Mean batch loss per epoch.
    pub loss_history: Vec<f32>,
    /// `(epoch, report)` for every evaluation that ran.
    pub reports: Vec<(usize, RetrievalReport)>,
}

/// Train metric parameters on a paired dataset. Fully deterministic for a
/// fixed `(seed, config, dataset)` triple in a single-threaded run.
pub fn train(
    dataset: &PairedDataset,
    metric: MetricConfig,
    config: &TrainConfig,
    eval_set: Option<(&PairedDataset, &GroundTruth)>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if metric.dim() != dataset.x.dim() {
        return Err(Error::DimensionMismatch {
            context: "train metric dim",
            expected: dataset.x.dim(),
            got: metric.dim(),
        });
    }
    if dataset.len() < config.batch_size && config.epochs > 0 {
        return Err(Error::BatchTooLarge {
            requested: config.batch_size,
            available: dataset.len(),
        });
    }

    // Initialization draws from a salted side stream so identity- and
    // random-initialized runs with the same seed see identical batches.
    let mut rng = Pcg32::new(config.seed);
    let params = match config.init {
        InitKind::Identity => MetricParams::identity(metric),
        InitKind::RandomNormal { std } => {
            let mut init_rng = Pcg32::new(config.seed ^ INIT_STREAM_SALT);
            MetricParams::random_normal(metric, std, &mut init_rng)
        }
    };
    let mut state = TrainState::new(params);
    let mut reports = Vec::new();

    let n = dataset.len();
    let batches_per_epoch = n / config.batch_size;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0f64;
        for b in 0..batches_per_epoch {
            let idx = &order[b * config.batch_size..(b + 1) * config.batch_size];
            let bx = dataset.x.gather(idx);
            let by = dataset.y.gather(idx);

            let (value, mut grad) =
                if config.weight_dropout > 0.0 && !state.params.weights().is_empty() {
                    let p = config.weight_dropout;
                    let keep = weight_dropout_mask(state.params.weights().len(), p, &mut rng);
                    let scale = 1.0 / (1.0 - p);
                    let mut dropped = state.params.clone();
                    for (w, &k) in dropped.weights_mut().iter_mut().zip(&keep) {
                        *w = if k { *w * scale } else { 0.0 };
                    }
                    let (value, mut grad) = loss_grad_w(&bx, &by, &dropped, &config.loss)?;
                    for (g, &k) in grad.values_mut().iter_mut().zip(&keep) {
                        *g = if k { *g * scale } else { 0.0 };
                    }
                    (value, grad)
                } else {
                    loss_grad_w(&bx, &by, &state.params, &config.loss)?
                };

            clip_gradient(&mut grad, config.grad_clip);
            apply_update(&mut state, &grad, config)?;
            epoch_loss += value as f64;
        }
        state
            .loss_history
            .push((epoch_loss / batches_per_epoch.max(1) as f64) as f32);

        if config.eval_every > 0 && epoch % config.eval_every == 0 {
            if let Some((eval, gt)) = eval_set {
                let s = state.params.score_matrix(&eval.x, &eval.y)?;
                reports.push((epoch, evaluate_retrieval(&s, gt)?));
            }
        }
    }

    Ok(TrainOutcome {
        params: state.params,
        loss_history: state.loss_history,
        reports,
    })
}
