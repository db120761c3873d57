//! Stepwise linear regression over binary option terms: forward selection
//! and backward elimination driven by partial F-test p-values.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{Configuration, InfluenceModel, Term};

use super::ftest::partial_f_pvalue;
use super::LearnError;

/// One measured configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub config: Configuration,
    pub value: f64,
}

impl Observation {
    pub fn new(config: Configuration, value: f64) -> Self {
        Self { config, value }
    }
}

/// Selection thresholds and the interaction-order cap.
#[derive(Debug, Clone)]
pub struct StepwiseParams {
    /// A candidate enters the model when its p-value is below this.
    pub entry_p: f64,
    /// A model term is eliminated when its p-value exceeds this.
    pub exit_p: f64,
    /// Highest interaction order considered.
    pub max_order: usize,
}

impl Default for StepwiseParams {
    fn default() -> Self {
        Self { entry_p: 0.05, exit_p: 0.05, max_order: 3 }
    }
}

impl StepwiseParams {
    pub fn with_thresholds(entry_p: f64, exit_p: f64) -> Self {
        Self { entry_p, exit_p, ..Self::default() }
    }
}

/// Result of a stepwise fit: the selected influence model, per-term
/// p-values at termination, the residual sum of squares, and the number
/// of model-changing steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: InfluenceModel,
    pub term_pvalues: BTreeMap<Vec<usize>, f64>,
    pub rss: f64,
    pub n_obs: usize,
    pub iterations: usize,
}

fn term_key(options: &[usize]) -> String {
    options.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_term_key(key: &str) -> Result<Vec<usize>, String> {
    key.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("bad term key {key:?}: {e}")))
        .collect()
}

impl Serialize for FitResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("FitResult", 5)?;
        s.serialize_field("model", &self.model)?;
        let pvalues: BTreeMap<String, f64> = self
            .term_pvalues
            .iter()
            .map(|(k, v)| (term_key(k), *v))
            .collect();
        s.serialize_field("pvalues", &pvalues)?;
        s.serialize_field("rss", &self.rss)?;
        s.serialize_field("n", &self.n_obs)?;
        s.serialize_field("iterations", &self.iterations)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for FitResult {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            model: InfluenceModel,
            pvalues: BTreeMap<String, f64>,
            rss: f64,
            n: usize,
            #[serde(default)]
            iterations: usize,
        }
        let raw = Raw::deserialize(deserializer)?;
        let term_pvalues = raw
            .pvalues
            .into_iter()
            .map(|(k, v)| parse_term_key(&k).map(|t| (t, v)))
            .collect::<Result<_, _>>()
            .map_err(D::Error::custom)?;
        Ok(FitResult {
            model: raw.model,
            term_pvalues,
            rss: raw.rss,
            n_obs: raw.n,
            iterations: raw.iterations,
        })
    }
}

/// Ordinary least squares on the intercept plus the given terms.
struct Ols {
    coefs: DVector<f64>,
    residual: DVector<f64>,
    rss: f64,
    /// Orthonormal basis of the design columns (modified Gram-Schmidt,
    /// re-orthogonalized once), used for fast candidate screening.
    basis: Vec<DVector<f64>>,
}

fn term_column(obs: &[Observation], options: &[usize]) -> DVector<f64> {
    DVector::from_iterator(
        obs.len(),
        obs.iter().map(|o| {
            if options.iter().all(|&i| o.config.bits()[i]) {
                1.0
            } else {
                0.0
            }
        }),
    )
}

fn design_columns(obs: &[Observation], terms: &[Vec<usize>]) -> Vec<DVector<f64>> {
    let n = obs.len();
    let mut cols = Vec::with_capacity(terms.len() + 1);
    cols.push(DVector::from_element(n, 1.0));
    cols.extend(terms.iter().map(|t| term_column(obs, t)));
    cols
}

fn fit_ols(obs: &[Observation], terms: &[Vec<usize>], y: &DVector<f64>) -> Option<Ols> {
    let cols = design_columns(obs, terms);
    let n = obs.len();
    let p = cols.len();
    let mut x = DMatrix::zeros(n, p);
    for (j, col) in cols.iter().enumerate() {
        x.set_column(j, col);
    }
    let svd = x.clone().svd(true, true);
    let coefs = svd.solve(y, 1e-12).ok()?;
    let coefs = DVector::from_column_slice(coefs.as_slice());
    let residual = y - &x * &coefs;
    let rss = residual.norm_squared();

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(p);
    for col in cols {
        let mut v = col;
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-10 {
            basis.push(v / norm);
        }
    }
    Some(Ols { coefs, residual, rss, basis })
}

/// RSS reduction from adding one column to a model with orthonormal
/// basis `basis` and residual `residual`. `None` when the column is
/// (numerically) dependent on the current design.
fn candidate_gain(basis: &[DVector<f64>], residual: &DVector<f64>, col: &DVector<f64>) -> Option<f64> {
    let raw_norm2 = col.norm_squared();
    let mut v = col.clone();
    for _ in 0..2 {
        for q in basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
    }
    let norm2 = v.norm_squared();
    if norm2 <= 1e-10 * raw_norm2.max(1e-300) {
        return None;
    }
    let num = v.dot(residual);
    Some((num * num / norm2).max(0.0))
}

/// Visits all (0..d) choose `order` combinations in lexicographic order.
fn for_each_combination(d: usize, order: usize, mut f: impl FnMut(&[usize])) {
    if order > d || order == 0 {
        return;
    }
    let mut combo: Vec<usize> = (0..order).collect();
    loop {
        f(&combo);
        let mut i = order;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if combo[i] != i + d - order {
                combo[i] += 1;
                for k in i + 1..order {
                    combo[k] = combo[k - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return;
        }
    }
}

/// All candidate terms not currently in the model, ordered by
/// (interaction order, lexicographic option indices): every single
/// option, plus interactions up to `max_order` containing at least one
/// option already present in a model term.
fn candidate_terms(d: usize, terms: &[Vec<usize>], max_order: usize) -> Vec<Vec<usize>> {
    let in_model: BTreeSet<&[usize]> = terms.iter().map(|t| t.as_slice()).collect();
    let model_options: BTreeSet<usize> = terms.iter().flatten().copied().collect();
    let mut out = Vec::new();
    for j in 0..d {
        let t = vec![j];
        if !in_model.contains(t.as_slice()) {
            out.push(t);
        }
    }
    for order in 2..=max_order.min(d) {
        for_each_combination(d, order, |combo| {
            if combo.iter().any(|o| model_options.contains(o))
                && !in_model.contains(combo)
            {
                out.push(combo.to_vec());
            }
        });
    }
    out
}

/// p-value for adding a candidate that changes the RSS from `rss_cur` to
/// `rss_new` in a model that would then have `n_terms + 1` terms.
///
/// Zero-residual judgments are made relative to the total sum of squares,
/// not the (possibly already tiny) current RSS. An exact fit is admitted
/// even when the design becomes saturated (zero residual degrees of
/// freedom); an inexact candidate with no residual degrees of freedom is
/// never admitted.
fn forward_pvalue(rss_cur: f64, rss_new: f64, n: usize, n_terms: usize, tss: f64) -> f64 {
    let params_full = n_terms + 2; // intercept + terms + candidate
    if rss_new <= 1e-12 * tss && rss_cur > 1e-12 * tss {
        return 0.0;
    }
    if n <= params_full {
        return 1.0;
    }
    partial_f_pvalue(rss_cur, rss_new, 1, n, params_full).unwrap_or(1.0)
}

/// p-value of an in-model term: partial F of dropping it from the model.
/// A term whose removal keeps the fit exact is redundant (p = 1), even
/// though the fit itself is perfect.
fn term_pvalue(
    obs: &[Observation],
    y: &DVector<f64>,
    terms: &[Vec<usize>],
    index: usize,
    rss_full: f64,
    tss: f64,
) -> f64 {
    let reduced: Vec<Vec<usize>> = terms
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != index)
        .map(|(_, t)| t.clone())
        .collect();
    let rss_reduced = match fit_ols(obs, &reduced, y) {
        Some(fit) => fit.rss,
        None => return 1.0,
    };
    if rss_reduced <= 1e-12 * tss {
        return 1.0; // still a perfect fit without this term
    }
    if rss_full <= 1e-12 * tss {
        return 0.0; // the term carries the last of an exact fit
    }
    let n = obs.len();
    let params_full = terms.len() + 1;
    if n <= params_full {
        // saturated but imperfect: allow backward elimination to unwind
        return 1.0;
    }
    partial_f_pvalue(rss_reduced.max(rss_full), rss_full, 1, n, params_full).unwrap_or(1.0)
}

/// Fits an influence model by stepwise selection:
///
/// 1. start from the intercept-only model;
/// 2. repeatedly add the candidate term with the smallest partial-F
///    p-value while one is below `entry_p`;
/// 3. when no candidate qualifies, remove the in-model term with the
///    largest p-value if it exceeds `exit_p` and go back to 2;
/// 4. stop when neither step changes the model.
///
/// Ties are broken toward lower interaction order, then lexicographic
/// option indices. Coefficients are the least-squares fit of the final
/// term set.
pub fn fit_stepwise(obs: &[Observation], params: &StepwiseParams) -> Result<FitResult, LearnError> {
    if obs.len() < 2 {
        return Err(LearnError::TooFewObservations { needed: 2, got: obs.len() });
    }
    let d = obs[0].config.len();
    if obs.iter().any(|o| o.config.len() != d) {
        return Err(LearnError::InconsistentDimensions);
    }
    if obs.iter().any(|o| !o.value.is_finite()) {
        return Err(LearnError::NonFiniteValue);
    }
    let varying = (0..d).any(|j| {
        let first = obs[0].config.bits()[j];
        obs.iter().any(|o| o.config.bits()[j] != first)
    });
    if !varying {
        return Err(LearnError::NoVaryingColumn);
    }

    let n = obs.len();
    let y = DVector::from_iterator(n, obs.iter().map(|o| o.value));
    let mean = y.sum() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let mut terms: Vec<Vec<usize>> = Vec::new();
    let mut fit = fit_ols(obs, &terms, &y).ok_or(LearnError::RankDeficient)?;
    let mut iterations = 0usize;
    let max_steps = 400 + 20 * d;

    // Interleaved selection: each accepted term is followed by backward
    // elimination, so temporary proxy terms leave as soon as stronger
    // explanations arrive instead of accumulating into a saturated fit.
    loop {
        if iterations >= max_steps {
            break;
        }

        // Backward elimination: largest-p in-model term above the exit
        // threshold. On ties the later (higher-order) term goes.
        let mut removed = false;
        while !terms.is_empty() && iterations < max_steps {
            let mut worst: Option<(f64, usize)> = None;
            for i in 0..terms.len() {
                let p = term_pvalue(obs, &y, &terms, i, fit.rss, tss);
                if worst.as_ref().is_none_or(|(wp, _)| p >= *wp) {
                    worst = Some((p, i));
                }
            }
            match worst {
                Some((p, i)) if p > params.exit_p => {
                    terms.remove(i);
                    fit = fit_ols(obs, &terms, &y).ok_or(LearnError::RankDeficient)?;
                    iterations += 1;
                    removed = true;
                }
                _ => break,
            }
        }

        // Forward selection: smallest-p candidate below the entry threshold.
        let mut best: Option<(f64, Vec<usize>, f64)> = None;
        if n >= terms.len() + 2 {
            for cand in candidate_terms(d, &terms, params.max_order) {
                let col = term_column(obs, &cand);
                let Some(gain) = candidate_gain(&fit.basis, &fit.residual, &col) else {
                    continue;
                };
                let rss_new = (fit.rss - gain).max(0.0);
                let p = forward_pvalue(fit.rss, rss_new, n, terms.len(), tss);
                if best.as_ref().is_none_or(|(bp, _, _)| p < *bp) {
                    best = Some((p, cand, rss_new));
                }
            }
        }
        let mut added = false;
        if let Some((p, cand, _)) = best {
            if p < params.entry_p {
                terms.push(cand);
                terms.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
                match fit_ols(obs, &terms, &y) {
                    Some(f) => {
                        debug_assert!(f.rss <= fit.rss * (1.0 + 1e-9) + 1e-12);
                        fit = f;
                        iterations += 1;
                        added = true;
                    }
                    None => {
                        terms.pop();
                    }
                }
            }
        }
        if !added && !removed {
            break;
        }
    }

    let term_pvalues: BTreeMap<Vec<usize>, f64> = (0..terms.len())
        .map(|i| (terms[i].clone(), term_pvalue(obs, &y, &terms, i, fit.rss, tss)))
        .collect();
    let model = InfluenceModel::new(
        d,
        fit.coefs[0],
        terms
            .iter()
            .enumerate()
            .map(|(i, t)| Term::new(t.clone(), fit.coefs[i + 1]))
            .collect(),
    )
    .expect("stepwise terms are valid by construction");

    Ok(FitResult { model, term_pvalues, rss: fit.rss, n_obs: n, iterations })
}
