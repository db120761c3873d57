use serde::{Deserialize, Serialize};

use super::{ConfigError, Configuration, ConfigurationSpace, InfluenceModel};

/// Optimization direction of one objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

/// A vector of objective values, one per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub values: Vec<f64>,
}

impl ObjectivePoint {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// `a` dominates `b` when it is at least as good everywhere and strictly
/// better somewhere (values already normalized to minimization).
fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Indices of the points not dominated by any other point, ascending.
///
/// Duplicates of a non-dominated point are all kept: equal vectors do not
/// dominate each other.
pub fn pareto_front(points: &[ObjectivePoint], senses: &[Sense]) -> Result<Vec<usize>, ConfigError> {
    for p in points {
        if p.values.len() != senses.len() {
            return Err(ConfigError::ArityMismatch {
                expected: senses.len(),
                got: p.values.len(),
            });
        }
    }
    let normalized: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.values.iter().zip(senses).map(|(v, s)| v * s.sign()).collect())
        .collect();
    let mut front = cull_front(&normalized);
    front.sort_unstable();
    Ok(front)
}

/// Simple-cull archive: candidates enter unless a member dominates them,
/// evicting members they dominate.
fn cull_front(normalized: &[Vec<f64>]) -> Vec<usize> {
    let mut archive: Vec<usize> = Vec::new();
    for (i, v) in normalized.iter().enumerate() {
        if archive.iter().any(|&j| dominates(&normalized[j], v)) {
            continue;
        }
        archive.retain(|&j| !dominates(v, &normalized[j]));
        archive.push(i);
    }
    archive
}

/// Exact Pareto set of the predicted objective vectors over the full
/// enumeration of a configuration space, in lexicographic bit order.
///
/// Fails when `2^d` exceeds `enum_limit`; callers must subsample larger
/// spaces before calling.
pub fn pareto_optimal_configs(
    space: &ConfigurationSpace,
    objectives: &[(InfluenceModel, Sense)],
    enum_limit: u64,
) -> Result<Vec<(Configuration, ObjectivePoint)>, ConfigError> {
    let d = space.dimension();
    for (model, _) in objectives {
        if model.dimension != d {
            return Err(ConfigError::DimensionMismatch {
                expected: d,
                got: model.dimension,
            });
        }
    }
    if d >= 64 || 1u64 << d > enum_limit {
        return Err(ConfigError::EnumerationTooLarge { dimension: d, limit: enum_limit });
    }
    let total = (1u64 << d) as usize;
    let m = objectives.len();
    let compiled: Vec<_> = objectives.iter().map(|(model, _)| model.compile()).collect();
    let signs: Vec<f64> = objectives.iter().map(|(_, s)| s.sign()).collect();

    // Sense-normalized values, flat row-major: one row per configuration.
    let mut normalized = vec![0.0f64; total * m];
    for index in 0..total {
        let mask = lex_index_to_mask(index as u64, d);
        for (k, model) in compiled.iter().enumerate() {
            normalized[index * m + k] = model.evaluate_mask(mask) * signs[k];
        }
    }

    let mut front = if m == 2 {
        sweep_front_2d_flat(&normalized)
    } else {
        cull_front_flat(&normalized, m)
    };
    front.sort_unstable();

    Ok(front
        .into_iter()
        .map(|i| {
            let values = (0..m)
                .map(|k| normalized[i * m + k] * signs[k]) // un-normalize
                .collect();
            (Configuration::from_index(i as u64, d), ObjectivePoint::new(values))
        })
        .collect())
}

fn cull_front_flat(normalized: &[f64], m: usize) -> Vec<usize> {
    let n = normalized.len() / m;
    let row = |i: usize| &normalized[i * m..(i + 1) * m];
    let mut archive: Vec<usize> = Vec::new();
    for i in 0..n {
        if archive.iter().any(|&j| dominates(row(j), row(i))) {
            continue;
        }
        archive.retain(|&j| !dominates(row(i), row(j)));
        archive.push(i);
    }
    archive
}

/// Two-objective front over flat rows: sort by the first value, keep
/// group minima of the second that strictly improve on every earlier
/// group (ties within a group all survive).
fn sweep_front_2d_flat(normalized: &[f64]) -> Vec<usize> {
    let n = normalized.len() / 2;
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        normalized[a * 2]
            .total_cmp(&normalized[b * 2])
            .then(normalized[a * 2 + 1].total_cmp(&normalized[b * 2 + 1]))
    });

    let mut front = Vec::new();
    let mut best_second = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        let group_value = normalized[order[i] as usize * 2];
        let mut j = i;
        while j < order.len() && normalized[order[j] as usize * 2] == group_value {
            j += 1;
        }
        let group_min = normalized[order[i] as usize * 2 + 1];
        if group_min < best_second {
            for &idx in &order[i..j] {
                if normalized[idx as usize * 2 + 1] == group_min {
                    front.push(idx as usize);
                }
            }
            best_second = group_min;
        }
        i = j;
    }
    front
}

/// Maps a lexicographic enumeration index to the option mask used by
/// compiled models (bit i = option i).
fn lex_index_to_mask(index: u64, d: usize) -> u64 {
    let mut mask = 0u64;
    for i in 0..d {
        if (index >> (d - 1 - i)) & 1 == 1 {
            mask |= 1 << i;
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Term;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent all-pairs dominance check, straight from the definition.
    fn oracle_front(points: &[ObjectivePoint], senses: &[Sense]) -> Vec<usize> {
        let norm: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.values.iter().zip(senses).map(|(v, s)| v * s.sign()).collect())
            .collect();
        (0..norm.len())
            .filter(|&i| !(0..norm.len()).any(|j| j != i && dominates(&norm[j], &norm[i])))
            .collect()
    }

    fn points(values: &[&[f64]]) -> Vec<ObjectivePoint> {
        values.iter().map(|v| ObjectivePoint::new(v.to_vec())).collect()
    }

    #[test]
    fn strict_domination() {
        let pts = points(&[&[1.0, 1.0], &[2.0, 2.0]]);
        let front = pareto_front(&pts, &[Sense::Minimize, Sense::Minimize]).unwrap();
        assert_eq!(front, vec![0]);
    }

    #[test]
    fn incomparable_points_both_survive() {
        let pts = points(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let front = pareto_front(&pts, &[Sense::Minimize, Sense::Minimize]).unwrap();
        assert_eq!(front, vec![0, 1]);
    }

    #[test]
    fn empty_input_gives_empty_front() {
        let front = pareto_front(&[], &[Sense::Minimize]).unwrap();
        assert!(front.is_empty());
    }

    #[test]
    fn duplicates_of_nondominated_points_are_kept() {
        let pts = points(&[&[1.0, 1.0], &[1.0, 1.0], &[2.0, 0.5]]);
        let front = pareto_front(&pts, &[Sense::Minimize, Sense::Minimize]).unwrap();
        assert_eq!(front, vec![0, 1, 2]);
    }

    #[test]
    fn random_points_match_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let senses = [Sense::Minimize, Sense::Minimize];
        let pts: Vec<ObjectivePoint> = (0..200)
            .map(|_| ObjectivePoint::new(vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)]))
            .collect();
        let front = pareto_front(&pts, &senses).unwrap();
        assert_eq!(front, oracle_front(&pts, &senses));
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let pts = points(&[&[1.0, 2.0]]);
        assert_eq!(
            pareto_front(&pts, &[Sense::Minimize]),
            Err(ConfigError::ArityMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn single_option_trade_off_keeps_both_configs() {
        let space = ConfigurationSpace::with_dimension(1).unwrap();
        let energy = InfluenceModel::new(1, 10.0, vec![Term::new(vec![0], 5.0)]).unwrap();
        let speed = InfluenceModel::new(1, 0.5, vec![Term::new(vec![0], 0.5)]).unwrap();
        let front = pareto_optimal_configs(
            &space,
            &[(energy, Sense::Minimize), (speed, Sense::Maximize)],
            1 << 20,
        )
        .unwrap();
        assert_eq!(front.len(), 2);
        assert_eq!(front[0].0.bit_string(), "0");
        assert_eq!(front[0].1.values, vec![10.0, 0.5]);
        assert_eq!(front[1].0.bit_string(), "1");
        assert_eq!(front[1].1.values, vec![15.0, 1.0]);
    }

    #[test]
    fn single_objective_degenerates_to_argmin_set() {
        let space = ConfigurationSpace::with_dimension(3).unwrap();
        // Value depends on option 1 only; four configs share the minimum.
        let model = InfluenceModel::new(3, 5.0, vec![Term::new(vec![1], 2.0)]).unwrap();
        let front =
            pareto_optimal_configs(&space, &[(model, Sense::Minimize)], 1 << 20).unwrap();
        assert_eq!(front.len(), 4);
        for (config, point) in &front {
            assert!(!config.bits()[1]);
            assert_eq!(point.values, vec![5.0]);
        }
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let space = ConfigurationSpace::with_dimension(12).unwrap();
        let model = InfluenceModel::intercept_only(12, 1.0);
        assert_eq!(
            pareto_optimal_configs(&space, &[(model, Sense::Minimize)], 4095),
            Err(ConfigError::EnumerationTooLarge { dimension: 12, limit: 4095 })
        );
    }

    fn random_model(rng: &mut ChaCha8Rng, d: usize, n_terms: usize) -> InfluenceModel {
        let mut terms = Vec::new();
        let mut seen = std::collections::HashSet::new();
        while terms.len() < n_terms {
            let order = rng.gen_range(1..=2usize);
            let mut opts: Vec<usize> = (0..order).map(|_| rng.gen_range(0..d)).collect();
            opts.sort_unstable();
            opts.dedup();
            if seen.insert(opts.clone()) {
                terms.push(Term::new(opts, rng.gen_range(-10.0..10.0)));
            }
        }
        InfluenceModel::new(d, rng.gen_range(0.0..100.0), terms).unwrap()
    }

    #[test]
    fn full_enumeration_matches_oracle_at_d12() {
        let d = 12;
        let space = ConfigurationSpace::with_dimension(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let energy = random_model(&mut rng, d, 8);
        let speed = random_model(&mut rng, d, 8);
        let objectives = [(energy, Sense::Minimize), (speed, Sense::Maximize)];
        let front = pareto_optimal_configs(&space, &objectives, 1 << 12).unwrap();

        let senses = [Sense::Minimize, Sense::Maximize];
        let all_points: Vec<ObjectivePoint> = (0..(1u64 << d))
            .map(|i| {
                let c = Configuration::from_index(i, d);
                ObjectivePoint::new(vec![
                    objectives[0].0.evaluate(&c).unwrap(),
                    objectives[1].0.evaluate(&c).unwrap(),
                ])
            })
            .collect();
        let expected: Vec<Configuration> = oracle_front(&all_points, &senses)
            .into_iter()
            .map(|i| Configuration::from_index(i as u64, d))
            .collect();
        let got: Vec<Configuration> = front.into_iter().map(|(c, _)| c).collect();
        assert_eq!(got, expected);
    }

    proptest! {
        #[test]
        fn front_is_mutually_nondominated_and_covers_exclusions(
            raw in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..60)
        ) {
            let pts: Vec<ObjectivePoint> =
                raw.iter().map(|&(a, b)| ObjectivePoint::new(vec![a, b])).collect();
            let senses = [Sense::Minimize, Sense::Minimize];
            let front = pareto_front(&pts, &senses).unwrap();
            let norm: Vec<Vec<f64>> = pts.iter().map(|p| p.values.clone()).collect();

            for &i in &front {
                for &j in &front {
                    prop_assert!(!dominates(&norm[j], &norm[i]));
                }
            }
            for i in 0..pts.len() {
                if !front.contains(&i) {
                    prop_assert!(
                        front.iter().any(|&j| dominates(&norm[j], &norm[i])),
                        "excluded point {} must be dominated by a front member", i
                    );
                }
            }
        }

        #[test]
        fn front_is_invariant_under_monotone_transforms(
            raw in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..60)
        ) {
            let senses = [Sense::Minimize, Sense::Minimize];
            let pts: Vec<ObjectivePoint> =
                raw.iter().map(|&(a, b)| ObjectivePoint::new(vec![a, b])).collect();
            let affine: Vec<ObjectivePoint> = raw
                .iter()
                .map(|&(a, b)| ObjectivePoint::new(vec![2.0 * a + 1.0, 2.0 * b + 1.0]))
                .collect();
            let cubic: Vec<ObjectivePoint> = raw
                .iter()
                .map(|&(a, b)| ObjectivePoint::new(vec![a.powi(3), b.powi(3)]))
                .collect();
            let base = pareto_front(&pts, &senses).unwrap();
            prop_assert_eq!(&base, &pareto_front(&affine, &senses).unwrap());
            prop_assert_eq!(&base, &pareto_front(&cubic, &senses).unwrap());
        }

        #[test]
        fn enumeration_front_equals_front_of_all_points(seed in 0u64..50) {
            let d = 7;
            let space = ConfigurationSpace::with_dimension(d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_model(&mut rng, d, 5);
            let b = random_model(&mut rng, d, 5);
            let objectives = [(a.clone(), Sense::Minimize), (b.clone(), Sense::Maximize)];
            let front = pareto_optimal_configs(&space, &objectives, 1 << d).unwrap();

            let all_points: Vec<ObjectivePoint> = (0..(1u64 << d))
                .map(|i| {
                    let c = Configuration::from_index(i, d);
                    ObjectivePoint::new(vec![a.evaluate(&c).unwrap(), b.evaluate(&c).unwrap()])
                })
                .collect();
            let expected =
                pareto_front(&all_points, &[Sense::Minimize, Sense::Maximize]).unwrap();
            let got: Vec<usize> = front
                .iter()
                .map(|(c, _)| {
                    c.bits().iter().fold(0usize, |acc, &bit| (acc << 1) | bit as usize)
                })
                .collect();
            prop_assert_eq!(got, expected);
        }
    }
}
