//! Stepwise linear regression with F-test term selection, a CART
//! regression-tree baseline, and evaluation metrics.

mod cart;
mod ftest;
mod metrics;
mod stepwise;

pub use cart::{fit_cart, CartNode, CartParams, CartTree};
pub use ftest::{f_upper_tail, ln_gamma, partial_f_pvalue, reg_inc_beta};
pub use metrics::{mean_abs_pct_error, spearman, MapeOutcome, Predictor};
pub use stepwise::{fit_stepwise, FitResult, Observation, StepwiseParams};

use thiserror::Error;

use crate::config::ConfigError;

/// Errors raised by learning operations.
#[derive(Debug, Error)]
pub enum LearnError {
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("observations have inconsistent configuration dimensions")]
    InconsistentDimensions,
    #[error("observation values must be finite")]
    NonFiniteValue,
    #[error("no option column varies across the observations")]
    NoVaryingColumn,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("{0}")]
    InvalidFTest(String),
    #[error("argument lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("Spearman correlation undefined: zero rank variance")]
    SpearmanUndefined,
    #[error("evaluation set is empty (or every true value was zero)")]
    EmptyEvaluation,
    #[error("bad training data: {0}")]
    BadTrainingData(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Parses training data in `bit-string,value` CSV lines into observations.
/// A leading header line is skipped when its second field is not numeric.
pub fn parse_observations_csv(text: &str) -> Result<Vec<Observation>, LearnError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (bits, value) = line.split_once(',').ok_or_else(|| {
            LearnError::BadTrainingData(format!("line {}: expected 'bits,value'", lineno + 1))
        })?;
        let value: f64 = match value.trim().parse() {
            Ok(v) => v,
            Err(_) if lineno == 0 => continue, // header
            Err(e) => {
                return Err(LearnError::BadTrainingData(format!(
                    "line {}: bad value: {e}",
                    lineno + 1
                )))
            }
        };
        let config = crate::config::Configuration::from_bit_string(bits.trim())?;
        out.push(Observation::new(config, value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_csv_with_and_without_header() {
        let with_header = "bits,value\n10,1.5\n01,2.5\n";
        let obs = parse_observations_csv(with_header).unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].config.bit_string(), "10");
        assert_eq!(obs[1].value, 2.5);

        let bare = "10,1.5\n01,2.5";
        assert_eq!(parse_observations_csv(bare).unwrap(), obs);
    }
}
