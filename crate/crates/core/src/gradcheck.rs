//! Verification harness comparing analytic weight gradients against
//! 64-bit central finite differences on randomized batches.

use crate::error::Result;
use crate::grad::{finite_diff_grad, loss_grad_w, max_relative_error};
use crate::loss::{loss_value, LossSpec};
use crate::metric::{l2_normalize, FeatureMatrix, MetricConfig, MetricParams};
use crate::rng::Pcg32;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Pass threshold on the max relative error.
pub const PASS_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub trials: usize,
    pub max_rel_err: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < PASS_THRESHOLD
    }
}

fn random_unit_rows(rows: usize, dim: usize, rng: &mut Pcg32) -> Result<FeatureMatrix<f64>> {
    let mut data = Vec::with_capacity(rows * dim);
    for _ in 0..rows {
        let raw: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
        data.extend(l2_normalize(&raw, 1e-12)?);
    }
    FeatureMatrix::new(rows, dim, data, true)
}

/// Run `trials` randomized batches for one loss × metric combination and
/// report the worst analytic-vs-numeric disagreement. Parameters are drawn
/// as identity plus N(0, 0.3) noise on every stored entry so the mask is
/// exercised away from the cosine starting point.
pub fn gradcheck(
    config: MetricConfig,
    spec: &LossSpec,
    batch: usize,
    trials: usize,
    seed: u64,
    step: f64,
) -> Result<GradCheckReport> {
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let mut rng = Pcg32::new(seed ^ (trial as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let x = random_unit_rows(batch, config.dim(), &mut rng)?;
        let y = random_unit_rows(batch, config.dim(), &mut rng)?;
        let mut params = MetricParams::<f64>::identity(config);
        for w in params.weights_mut() {
            *w += 0.3 * rng.next_gaussian();
        }
        let (_, analytic) = loss_grad_w(&x, &y, &params, spec)?;
        let numeric = finite_diff_grad(
            |p| {
                let s = p.score_matrix(&x, &y)?;
                loss_value(&s, spec)
            },
            &params,
            step,
        )?;
        worst = worst.max(max_relative_error(&analytic, &numeric));
    }
    Ok(GradCheckReport {
        trials,
        max_rel_err: worst,
    })
}
