//! CART regression-tree baseline: greedy variance-reduction splits on
//! single binary options.

use serde::{Deserialize, Serialize};

use super::{LearnError, Observation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CartNode {
    Leaf {
        mean: f64,
        count: usize,
    },
    Split {
        option: usize,
        left: Box<CartNode>,
        right: Box<CartNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartTree {
    pub dimension: usize,
    pub root: CartNode,
}

#[derive(Debug, Clone)]
pub struct CartParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        Self { max_depth: 12, min_leaf: 2 }
    }
}

/// Fits a regression tree by greedily choosing, at each node, the option
/// whose split yields the largest SSE decrease. Splitting stops at
/// `max_depth`, when a child would fall under `min_leaf` samples, or when
/// no split reduces the SSE. Each option is split at most once per path.
pub fn fit_cart(obs: &[Observation], params: &CartParams) -> Result<CartTree, LearnError> {
    if obs.is_empty() || obs.len() < params.min_leaf {
        return Err(LearnError::TooFewObservations {
            needed: params.min_leaf.max(1),
            got: obs.len(),
        });
    }
    let d = obs[0].config.len();
    if obs.iter().any(|o| o.config.len() != d) {
        return Err(LearnError::InconsistentDimensions);
    }
    let indices: Vec<usize> = (0..obs.len()).collect();
    let available: Vec<usize> = (0..d).collect();
    let root = build(obs, &indices, &available, 0, params);
    Ok(CartTree { dimension: d, root })
}

fn sse(obs: &[Observation], indices: &[usize]) -> (f64, f64) {
    let n = indices.len() as f64;
    let sum: f64 = indices.iter().map(|&i| obs[i].value).sum();
    let mean = sum / n;
    let sse = indices.iter().map(|&i| (obs[i].value - mean).powi(2)).sum();
    (mean, sse)
}

fn build(
    obs: &[Observation],
    indices: &[usize],
    available: &[usize],
    depth: usize,
    params: &CartParams,
) -> CartNode {
    let (mean, parent_sse) = sse(obs, indices);
    let leaf = CartNode::Leaf { mean, count: indices.len() };
    if depth >= params.max_depth || indices.len() < 2 * params.min_leaf {
        return leaf;
    }

    let mut best: Option<(f64, usize)> = None;
    for &option in available {
        let (left, right): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| !obs[i].config.bits()[option]);
        if left.len() < params.min_leaf || right.len() < params.min_leaf {
            continue;
        }
        let (_, sse_l) = sse(obs, &left);
        let (_, sse_r) = sse(obs, &right);
        let gain = parent_sse - sse_l - sse_r;
        if gain > 1e-12 * parent_sse.max(1.0)
            && best.as_ref().is_none_or(|(bg, _)| gain > *bg)
        {
            best = Some((gain, option));
        }
    }
    let Some((_, option)) = best else { return leaf };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| !obs[i].config.bits()[option]);
    let remaining: Vec<usize> = available.iter().copied().filter(|&o| o != option).collect();
    CartNode::Split {
        option,
        left: Box::new(build(obs, &left_idx, &remaining, depth + 1, params)),
        right: Box::new(build(obs, &right_idx, &remaining, depth + 1, params)),
    }
}

impl CartTree {
    pub fn predict_bits(&self, bits: &[bool]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                CartNode::Leaf { mean, .. } => return *mean,
                CartNode::Split { option, left, right } => {
                    node = if bits[*option] { right } else { left };
                }
            }
        }
    }

    /// All leaves as (mean, count) pairs, left to right.
    pub fn leaves(&self) -> Vec<(f64, usize)> {
        fn walk(node: &CartNode, out: &mut Vec<(f64, usize)>) {
            match node {
                CartNode::Leaf { mean, count } => out.push((*mean, *count)),
                CartNode::Split { left, right, .. } => {
                    walk(left, out);
                    walk(right, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{sample_configs, Configuration, ConfigurationSpace, InfluenceModel, Term};

    fn obs_from(model: &InfluenceModel, configs: Vec<Configuration>) -> Vec<Observation> {
        configs
            .into_iter()
            .map(|c| {
                let v = model.evaluate(&c).unwrap();
                Observation::new(c, v)
            })
            .collect()
    }

    #[test]
    fn constant_values_give_single_leaf() {
        let space = ConfigurationSpace::with_dimension(4).unwrap();
        let obs: Vec<Observation> = sample_configs(&space, 8, 1)
            .unwrap()
            .into_iter()
            .map(|c| Observation::new(c, 3.25))
            .collect();
        let tree = fit_cart(&obs, &CartParams::default()).unwrap();
        assert_eq!(tree.root, CartNode::Leaf { mean: 3.25, count: 8 });
    }

    #[test]
    fn splits_on_the_single_influential_option() {
        let d = 6;
        let model = InfluenceModel::new(d, 0.0, vec![Term::new(vec![3], 10.0)]).unwrap();
        let space = ConfigurationSpace::with_dimension(d).unwrap();
        let obs = obs_from(&model, sample_configs(&space, 40, 2).unwrap());

        // Exhaustive check that option 3 is the best split.
        let indices: Vec<usize> = (0..obs.len()).collect();
        let (_, parent) = sse(&obs, &indices);
        let mut best_gain = f64::NEG_INFINITY;
        let mut best_opt = usize::MAX;
        for option in 0..d {
            let (l, r): (Vec<usize>, Vec<usize>) =
                indices.iter().partition(|&&i| !obs[i].config.bits()[option]);
            if l.is_empty() || r.is_empty() {
                continue;
            }
            let gain = parent - sse(&obs, &l).1 - sse(&obs, &r).1;
            if gain > best_gain {
                best_gain = gain;
                best_opt = option;
            }
        }
        assert_eq!(best_opt, 3);

        let tree = fit_cart(&obs, &CartParams { max_depth: 1, min_leaf: 1 }).unwrap();
        match &tree.root {
            CartNode::Split { option, left, right } => {
                assert_eq!(*option, 3);
                assert_eq!(left.as_ref(), &CartNode::Leaf { mean: 0.0, count: obs.iter().filter(|o| !o.config.bits()[3]).count() });
                match right.as_ref() {
                    CartNode::Leaf { mean, .. } => assert!((mean - 10.0).abs() < 1e-12),
                    other => panic!("expected right leaf, got {other:?}"),
                }
            }
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn depth_two_tree_reproduces_exact_two_option_values() {
        let model = InfluenceModel::new(
            2,
            2.0,
            vec![
                Term::new(vec![0], 3.0),
                Term::new(vec![1], 20.0),
                Term::new(vec![0, 1], 17.0),
            ],
        )
        .unwrap();
        let configs: Vec<Configuration> =
            (0..4).map(|i| Configuration::from_index(i, 2)).collect();
        let obs = obs_from(&model, configs.clone());
        let tree = fit_cart(&obs, &CartParams { max_depth: 2, min_leaf: 1 }).unwrap();
        let got: Vec<f64> = configs.iter().map(|c| tree.predict_bits(c.bits())).collect();
        assert_eq!(got, vec![2.0, 22.0, 5.0, 42.0]);
    }

    #[test]
    fn weighted_leaf_mean_equals_global_mean() {
        let d = 8;
        let model = InfluenceModel::new(
            d,
            5.0,
            vec![
                Term::new(vec![0], 2.0),
                Term::new(vec![2], -3.0),
                Term::new(vec![0, 2], 4.0),
                Term::new(vec![5], 1.5),
            ],
        )
        .unwrap();
        let space = ConfigurationSpace::with_dimension(d).unwrap();
        let obs = obs_from(&model, sample_configs(&space, 70, 9).unwrap());
        let tree = fit_cart(&obs, &CartParams::default()).unwrap();

        let total: f64 = tree.leaves().iter().map(|(m, c)| m * *c as f64).sum();
        let count: usize = tree.leaves().iter().map(|(_, c)| c).sum();
        assert_eq!(count, obs.len());
        let global = obs.iter().map(|o| o.value).sum::<f64>() / obs.len() as f64;
        assert!((total / count as f64 - global).abs() < 1e-9);
    }

    #[test]
    fn each_path_splits_an_option_at_most_once() {
        let d = 5;
        let model = InfluenceModel::new(
            d,
            0.0,
            vec![Term::new(vec![0], 8.0), Term::new(vec![1], 4.0), Term::new(vec![2], 2.0)],
        )
        .unwrap();
        let space = ConfigurationSpace::with_dimension(d).unwrap();
        let obs = obs_from(&model, sample_configs(&space, 32, 4).unwrap());
        let tree = fit_cart(&obs, &CartParams { max_depth: 5, min_leaf: 1 }).unwrap();

        fn check(node: &CartNode, seen: &mut Vec<usize>) {
            if let CartNode::Split { option, left, right } = node {
                assert!(!seen.contains(option), "option {option} split twice on a path");
                seen.push(*option);
                check(left, seen);
                check(right, seen);
                seen.pop();
            }
        }
        check(&tree.root, &mut Vec::new());
    }
}
