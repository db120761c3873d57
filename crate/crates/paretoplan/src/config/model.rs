use serde::{Deserialize, Serialize};

use super::{ConfigError, Configuration};

/// One polynomial term: a non-empty set of option indices and its coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub options: Vec<usize>,
    pub coef: f64,
}

impl Term {
    pub fn new(mut options: Vec<usize>, coef: f64) -> Self {
        options.sort_unstable();
        options.dedup();
        Self { options, coef }
    }

    /// Interaction order: number of options in the term.
    pub fn order(&self) -> usize {
        self.options.len()
    }
}

/// A performance-influence model: a polynomial over binary options with an
/// intercept, per-option terms, and interaction terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceModel {
    pub dimension: usize,
    pub intercept: f64,
    pub terms: Vec<Term>,
}

impl InfluenceModel {
    /// Validating constructor: every index within dimension, no empty or
    /// duplicate option sets.
    pub fn new(dimension: usize, intercept: f64, terms: Vec<Term>) -> Result<Self, ConfigError> {
        let mut seen: Vec<&[usize]> = Vec::with_capacity(terms.len());
        for term in &terms {
            if term.options.is_empty() {
                return Err(ConfigError::EmptyTerm);
            }
            for &idx in &term.options {
                if idx >= dimension {
                    return Err(ConfigError::TermIndexOutOfRange { index: idx, dimension });
                }
            }
            if seen.contains(&term.options.as_slice()) {
                return Err(ConfigError::DuplicateTerm(term.options.clone()));
            }
            seen.push(&term.options);
        }
        Ok(Self { dimension, intercept, terms })
    }

    pub fn intercept_only(dimension: usize, intercept: f64) -> Self {
        Self { dimension, intercept, terms: Vec::new() }
    }

    /// Evaluates the polynomial at a configuration:
    /// intercept + Σ coef_T · Π_{i∈T} bits[i].
    pub fn evaluate(&self, config: &Configuration) -> Result<f64, ConfigError> {
        if config.len() != self.dimension {
            return Err(ConfigError::DimensionMismatch {
                expected: self.dimension,
                got: config.len(),
            });
        }
        Ok(self.evaluate_bits(config.bits()))
    }

    pub(crate) fn evaluate_bits(&self, bits: &[bool]) -> f64 {
        let mut value = self.intercept;
        for term in &self.terms {
            if term.options.iter().all(|&i| bits[i]) {
                value += term.coef;
            }
        }
        value
    }

    /// Number of interaction terms (order >= 2).
    pub fn interaction_count(&self) -> usize {
        self.terms.iter().filter(|t| t.order() >= 2).count()
    }

    /// Precomputes terms as bit masks for fast repeated evaluation.
    /// Only valid for `dimension <= 64`.
    pub(crate) fn compile(&self) -> CompiledModel {
        debug_assert!(self.dimension <= 64);
        CompiledModel {
            intercept: self.intercept,
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mask = t.options.iter().fold(0u64, |m, &i| m | (1 << i));
                    (mask, t.coef)
                })
                .collect(),
        }
    }
}

/// Mask-compiled influence model for hot enumeration loops.
pub(crate) struct CompiledModel {
    intercept: f64,
    terms: Vec<(u64, f64)>,
}

impl CompiledModel {
    /// Evaluates at a configuration packed as a mask (bit i = option i).
    pub(crate) fn evaluate_mask(&self, config: u64) -> f64 {
        let mut value = self.intercept;
        for &(mask, coef) in &self.terms {
            if config & mask == mask {
                value += coef;
            }
        }
        value
    }
}
