//! Prediction dispatch and evaluation metrics (mean absolute percentage
//! error, Spearman rank correlation).

use crate::config::{Configuration, InfluenceModel};

use super::{CartTree, LearnError};

/// Anything that predicts a scalar for a configuration: influence models
/// and CART trees.
pub trait Predictor {
    fn dimension(&self) -> usize;
    fn predict(&self, config: &Configuration) -> Result<f64, LearnError>;
}

impl Predictor for InfluenceModel {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn predict(&self, config: &Configuration) -> Result<f64, LearnError> {
        Ok(self.evaluate(config)?)
    }
}

impl Predictor for CartTree {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn predict(&self, config: &Configuration) -> Result<f64, LearnError> {
        if config.len() != self.dimension {
            return Err(LearnError::Config(crate::config::ConfigError::DimensionMismatch {
                expected: self.dimension,
                got: config.len(),
            }));
        }
        Ok(self.predict_bits(config.bits()))
    }
}

/// MAPE result: the mean percentage error plus how many evaluation points
/// were dropped for a zero true value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapeOutcome {
    pub percent: f64,
    pub excluded_zero_truth: usize,
}

/// Mean over the evaluation set of |predicted - true| / |true| * 100.
/// Points with a zero true value are excluded and counted.
pub fn mean_abs_pct_error(
    predictor: &dyn Predictor,
    truth: &dyn Predictor,
    eval_configs: &[Configuration],
) -> Result<MapeOutcome, LearnError> {
    if eval_configs.is_empty() {
        return Err(LearnError::EmptyEvaluation);
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut excluded = 0usize;
    for config in eval_configs {
        let t = truth.predict(config)?;
        if t == 0.0 {
            excluded += 1;
            continue;
        }
        let p = predictor.predict(config)?;
        sum += ((p - t) / t).abs() * 100.0;
        used += 1;
    }
    if used == 0 {
        return Err(LearnError::EmptyEvaluation);
    }
    Ok(MapeOutcome { percent: sum / used as f64, excluded_zero_truth: excluded })
}

/// Fractional ranks with ties averaged, 1-based.
fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share the average rank
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            out[idx] = avg;
        }
        i = j;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of fractional ranks.
/// Fails distinctly when either argument has zero rank variance.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, LearnError> {
    if xs.len() != ys.len() {
        return Err(LearnError::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 2 {
        return Err(LearnError::TooFewObservations { needed: 2, got: xs.len() });
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(LearnError::SpearmanUndefined);
    }
    Ok(cov / (vx * vy).sqrt())
}
