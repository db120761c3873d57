use std::collections::HashSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Configuration, InfluenceModel, Term};

/// Complexity class of a model, determined by its interaction-term count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Complexity {
    Easy,
    Medium,
    Hard,
}

/// Easy: 0-4 interaction terms, Medium: 5-14, Hard: 15 or more.
pub fn complexity_class(model: &InfluenceModel) -> Complexity {
    match model.interaction_count() {
        0..=4 => Complexity::Easy,
        5..=14 => Complexity::Medium,
        _ => Complexity::Hard,
    }
}

/// Ground-truth model pair for one synthetic robot: battery discharge rate
/// (mWh/s) and speed (m/s), both positive over the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthModelPair {
    pub id: u32,
    pub discharge_model: InfluenceModel,
    pub speed_model: InfluenceModel,
    pub complexity: Complexity,
    pub seed: u64,
}

/// Knobs of the synthetic generator. The defaults bracket the magnitudes of
/// the bundled demo environment (moves costing a few hundred mWh).
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub discharge_intercept: (f64, f64),
    pub discharge_effect: (f64, f64),
    pub speed_intercept: (f64, f64),
    pub speed_effect: (f64, f64),
    pub main_effects: (usize, usize),
    /// Interaction-count draw ranges per class (Easy, Medium, Hard).
    pub interactions: [(usize, usize); 3],
    pub positivity_probes: usize,
    /// Accept a draw only when probed minima clear these floors.
    pub min_discharge: f64,
    pub min_speed: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            discharge_intercept: (50.0, 500.0),
            discharge_effect: (-100.0, 100.0),
            speed_intercept: (0.3, 1.5),
            speed_effect: (-0.2, 0.2),
            main_effects: (3, 8),
            interactions: [(0, 4), (5, 14), (15, 25)],
            positivity_probes: 10_000,
            min_discharge: 1.0,
            min_speed: 0.05,
        }
    }
}

/// Declared class quotas for a suite of `count` models: the count is split
/// as evenly as possible, extras going to Easy then Medium.
pub fn class_quotas(count: usize) -> (usize, usize, usize) {
    ((count + 2) / 3, (count + 1) / 3, count / 3)
}

/// Generates `count` ground-truth model pairs over `dimension` binary
/// options, deterministically for a given seed, partitioned across the
/// complexity classes per [`class_quotas`].
pub fn generate_model_suite(count: usize, dimension: usize, seed: u64) -> Vec<GroundTruthModelPair> {
    generate_model_suite_with(count, dimension, seed, &SuiteParams::default())
}

pub fn generate_model_suite_with(
    count: usize,
    dimension: usize,
    seed: u64,
    params: &SuiteParams,
) -> Vec<GroundTruthModelPair> {
    assert!(count >= 1, "suite must contain at least one model");
    assert!(dimension >= 2, "suite dimension must be at least 2");
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let (n_easy, n_medium, _) = class_quotas(count);

    (0..count)
        .map(|id| {
            let class = if id < n_easy {
                Complexity::Easy
            } else if id < n_easy + n_medium {
                Complexity::Medium
            } else {
                Complexity::Hard
            };
            let model_seed = master.next_u64();
            generate_pair(id as u32, dimension, class, model_seed, params)
        })
        .collect()
}

fn generate_pair(
    id: u32,
    dimension: usize,
    class: Complexity,
    model_seed: u64,
    params: &SuiteParams,
) -> GroundTruthModelPair {
    let mut rng = ChaCha8Rng::seed_from_u64(model_seed);
    let class_range = params.interactions[class as usize];
    let discharge_model = generate_positive_model(
        &mut rng,
        dimension,
        class_range,
        params.discharge_intercept,
        params.discharge_effect,
        params.main_effects,
        params.positivity_probes,
        params.min_discharge,
        model_seed ^ 0x9e37_79b9_7f4a_7c15,
    );
    let speed_model = generate_positive_model(
        &mut rng,
        dimension,
        class_range,
        params.speed_intercept,
        params.speed_effect,
        params.main_effects,
        params.positivity_probes,
        params.min_speed,
        model_seed ^ 0x6a09_e667_f3bc_c909,
    );
    debug_assert_eq!(complexity_class(&discharge_model), class);
    GroundTruthModelPair { id, discharge_model, speed_model, complexity: class, seed: model_seed }
}

/// Draws a model structure once, then rescales the coefficients until the
/// worst-case value (intercept plus every negative coefficient active)
/// clears the floor, so positivity holds on the whole space, not just on
/// probed configurations. The intercept bounds are strictly positive, so
/// shrinking always terminates. Probes double-check the accepted model.
#[allow(clippy::too_many_arguments)]
fn generate_positive_model(
    rng: &mut ChaCha8Rng,
    dimension: usize,
    interactions: (usize, usize),
    intercept_range: (f64, f64),
    effect_range: (f64, f64),
    main_effects: (usize, usize),
    probes: usize,
    floor: f64,
    probe_seed: u64,
) -> InfluenceModel {
    let n_interactions = rng.gen_range(interactions.0..=interactions.1);
    let n_mains = rng.gen_range(main_effects.0..=main_effects.1).min(dimension);
    let intercept = rng.gen_range(intercept_range.0..intercept_range.1);

    let mut option_sets: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut unused: Vec<usize> = (0..dimension).collect();
    let mut active: Vec<usize> = Vec::new();
    for _ in 0..n_mains {
        let i = rng.gen_range(0..unused.len());
        let opt = unused.swap_remove(i);
        active.push(opt);
        let set = vec![opt];
        seen.insert(set.clone());
        option_sets.push(set);
    }
    // Interactions couple options within a small active subset (the
    // influential options plus a couple of extras), mirroring functionally
    // related features rather than arbitrary pairs across the whole space.
    for _ in 0..2 {
        if !unused.is_empty() {
            let i = rng.gen_range(0..unused.len());
            active.push(unused.swap_remove(i));
        }
    }
    active.sort_unstable();
    let mut stalls = 0;
    while option_sets.len() < n_mains + n_interactions {
        let order = if rng.gen_bool(0.8) { 2 } else { 3 }.min(active.len());
        let mut set: Vec<usize> = Vec::with_capacity(order);
        while set.len() < order {
            let opt = active[rng.gen_range(0..active.len())];
            if !set.contains(&opt) {
                set.push(opt);
            }
        }
        set.sort_unstable();
        if seen.insert(set.clone()) {
            option_sets.push(set);
            stalls = 0;
        } else {
            stalls += 1;
            if stalls > 40 && !unused.is_empty() {
                let i = rng.gen_range(0..unused.len());
                active.push(unused.swap_remove(i));
                active.sort_unstable();
                stalls = 0;
            }
        }
    }

    let base: Vec<f64> = (0..option_sets.len())
        .map(|_| rng.gen_range(effect_range.0..effect_range.1))
        .collect();

    let mut scale = 1.0;
    loop {
        let worst_case =
            intercept + scale * base.iter().filter(|c| c.is_sign_negative()).sum::<f64>();
        if worst_case > floor {
            let terms: Vec<Term> = option_sets
                .iter()
                .zip(&base)
                .map(|(set, &coef)| Term::new(set.clone(), coef * scale))
                .collect();
            let model = InfluenceModel::new(dimension, intercept, terms).unwrap();
            debug_assert!(probed_minimum(&model, probes, probe_seed) > floor);
            return model;
        }
        scale *= 0.7;
    }
}

/// Minimum of the model over random probes plus the all-zeros and all-ones
/// corners.
fn probed_minimum(model: &InfluenceModel, probes: usize, probe_seed: u64) -> f64 {
    let d = model.dimension;
    let compiled = model.compile();
    let mut min = model
        .evaluate(&Configuration::new(vec![false; d]))
        .unwrap()
        .min(model.evaluate(&Configuration::new(vec![true; d])).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(probe_seed);
    if d <= 64 {
        let space_mask = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
        for _ in 0..probes {
            let mask = rng.next_u64() & space_mask;
            min = min.min(compiled.evaluate_mask(mask));
        }
    } else {
        for _ in 0..probes {
            let bits: Vec<bool> = (0..d).map(|_| rng.gen()).collect();
            min = min.min(model.evaluate_bits(&bits));
        }
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::sample_configs;
    use crate::config::ConfigurationSpace;

    #[test]
    fn complexity_thresholds() {
        let easy = InfluenceModel::new(3, 1.0, vec![Term::new(vec![0], 1.0)]).unwrap();
        assert_eq!(complexity_class(&easy), Complexity::Easy);

        // One interaction is still Easy.
        let one = InfluenceModel::new(
            3,
            1.0,
            vec![Term::new(vec![0], 1.0), Term::new(vec![0, 1], 2.0)],
        )
        .unwrap();
        assert_eq!(complexity_class(&one), Complexity::Easy);

        let five: Vec<Term> = (0..5).map(|i| Term::new(vec![i, i + 1], 1.0)).collect();
        let medium = InfluenceModel::new(10, 1.0, five).unwrap();
        assert_eq!(complexity_class(&medium), Complexity::Medium);

        let thirty: Vec<Term> = (0..30)
            .map(|i| Term::new(vec![i % 10, i % 10 + 1 + i / 10], 1.0))
            .collect();
        let hard = InfluenceModel::new(20, 1.0, thirty).unwrap();
        assert_eq!(hard.interaction_count(), 30);
        assert_eq!(complexity_class(&hard), Complexity::Hard);
    }

    #[test]
    fn suite_is_deterministic() {
        let a = generate_model_suite(12, 10, 7);
        let b = generate_model_suite(12, 10, 7);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn suite_respects_class_quotas() {
        let suite = generate_model_suite(100, 20, 7);
        let (easy, medium, hard) = class_quotas(100);
        let count = |c: Complexity| {
            suite
                .iter()
                .filter(|p| complexity_class(&p.discharge_model) == c)
                .count()
        };
        assert_eq!(count(Complexity::Easy), easy);
        assert_eq!(count(Complexity::Medium), medium);
        assert_eq!(count(Complexity::Hard), hard);
        for pair in &suite {
            assert_eq!(pair.complexity, complexity_class(&pair.discharge_model));
        }
    }

    #[test]
    fn suite_models_are_positive_on_random_configs() {
        let suite = generate_model_suite(100, 20, 7);
        let space = ConfigurationSpace::with_dimension(20).unwrap();
        let probes = sample_configs(&space, 10_000, 99).unwrap();
        for pair in &suite {
            let mut min_speed = f64::INFINITY;
            let mut min_discharge = f64::INFINITY;
            for c in &probes {
                min_speed = min_speed.min(pair.speed_model.evaluate(c).unwrap());
                min_discharge = min_discharge.min(pair.discharge_model.evaluate(c).unwrap());
            }
            assert!(min_speed > 0.0, "model {} has non-positive speed", pair.id);
            assert!(min_discharge > 0.0, "model {} has non-positive discharge", pair.id);
        }
    }
}
