use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ConfigError;

/// A space of `d` binary options, each identified by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationSpace {
    option_names: Vec<String>,
}

impl ConfigurationSpace {
    pub fn new(option_names: Vec<String>) -> Result<Self, ConfigError> {
        if option_names.is_empty() {
            return Err(ConfigError::EmptySpace);
        }
        let mut seen = HashSet::new();
        for name in &option_names {
            if !seen.insert(name.as_str()) {
                return Err(ConfigError::DuplicateOption(name.clone()));
            }
        }
        Ok(Self { option_names })
    }

    /// A space with options named `o0..o{d-1}`.
    pub fn with_dimension(d: usize) -> Result<Self, ConfigError> {
        Self::new((0..d).map(|i| format!("o{i}")).collect())
    }

    pub fn dimension(&self) -> usize {
        self.option_names.len()
    }

    pub fn option_names(&self) -> &[String] {
        &self.option_names
    }

    /// Number of configurations, saturating at `u128::MAX` for huge `d`.
    pub fn size(&self) -> u128 {
        1u128.checked_shl(self.dimension() as u32).unwrap_or(u128::MAX)
    }
}

/// An assignment of all binary options of a space.
///
/// Serializes as a 0/1 string, first option first: `"1100"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    bits: Vec<bool>,
}

impl Configuration {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Decodes `index` as a bit pattern of width `d`, bit 0 most significant,
    /// so ascending indices enumerate configurations in lexicographic bit order.
    pub fn from_index(index: u64, d: usize) -> Self {
        let bits = (0..d).map(|i| (index >> (d - 1 - i)) & 1 == 1).collect();
        Self { bits }
    }

    pub fn from_bit_string(s: &str) -> Result<Self, ConfigError> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ConfigError::InvalidBitChar(other)),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Packs the first 64 options into a mask, bit `i` of the result
    /// holding option `i`. Only valid for `len() <= 64`.
    #[cfg(test)]
    pub(crate) fn mask(&self) -> u64 {
        debug_assert!(self.bits.len() <= 64);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| if b { m | (1 << i) } else { m })
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string())
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.bit_string())
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Configuration::from_bit_string(&s).map_err(D::Error::custom)
    }
}

/// Draws `n` distinct configurations uniformly without replacement.
///
/// Deterministic for a given `(space, n, seed)`. Fails when `n` exceeds
/// the size of the space.
pub fn sample_configs(
    space: &ConfigurationSpace,
    n: usize,
    seed: u64,
) -> Result<Vec<Configuration>, ConfigError> {
    let size = space.size();
    if n as u128 > size {
        return Err(ConfigError::SampleTooLarge {
            requested: n as u128,
            available: size,
        });
    }
    let d = space.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Dense request on a small space: partial Fisher-Yates over the full
    // enumeration; rejection sampling would coupon-collect forever.
    if size <= 1 << 22 && (n as u128) * 2 >= size {
        let mut all: Vec<u64> = (0..size as u64).collect();
        for i in 0..n {
            let j = rng.gen_range(i..all.len());
            all.swap(i, j);
        }
        return Ok(all[..n]
            .iter()
            .map(|&idx| Configuration::from_index(idx, d))
            .collect());
    }

    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let config = if d <= 64 {
            let idx = rng.gen_range(0..size as u64);
            Configuration::from_index(idx, d)
        } else {
            Configuration::new((0..d).map(|_| rng.gen::<bool>()).collect())
        };
        if seen.insert(config.clone()) {
            out.push(config);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn space_rejects_empty_and_duplicates() {
        assert_eq!(ConfigurationSpace::new(vec![]), Err(ConfigError::EmptySpace));
        let err = ConfigurationSpace::new(vec!["a".into(), "a".into()]);
        assert_eq!(err, Err(ConfigError::DuplicateOption("a".into())));
    }

    #[test]
    fn from_index_is_lexicographic() {
        let d = 3;
        let configs: Vec<_> = (0..8).map(|i| Configuration::from_index(i, d)).collect();
        let mut sorted = configs.clone();
        sorted.sort();
        assert_eq!(configs, sorted);
        assert_eq!(configs[0].bit_string(), "000");
        assert_eq!(configs[1].bit_string(), "001");
        assert_eq!(configs[4].bit_string(), "100");
    }

    #[test]
    fn bit_string_round_trip() {
        let c = Configuration::from_bit_string("10110").unwrap();
        assert_eq!(c.bit_string(), "10110");
        assert_eq!(
            Configuration::from_bit_string("10x"),
            Err(ConfigError::InvalidBitChar('x'))
        );
    }

    #[test]
    fn exhaustive_sample_returns_all_configs() {
        let space = ConfigurationSpace::with_dimension(2).unwrap();
        for seed in [0u64, 1, 99] {
            let sample = sample_configs(&space, 4, seed).unwrap();
            let set: BTreeSet<_> = sample.iter().map(|c| c.bit_string()).collect();
            assert_eq!(set.len(), 4, "seed {seed} must cover the whole space");
        }
    }

    #[test]
    fn sample_is_deterministic_and_distinct() {
        let space = ConfigurationSpace::with_dimension(20).unwrap();
        let a = sample_configs(&space, 100, 1).unwrap();
        let b = sample_configs(&space, 100, 1).unwrap();
        assert_eq!(a, b);
        let distinct: HashSet<_> = a.iter().collect();
        assert_eq!(distinct.len(), 100);
    }

    #[test]
    fn sample_rejects_oversized_requests() {
        let space = ConfigurationSpace::with_dimension(2).unwrap();
        assert!(matches!(
            sample_configs(&space, 5, 0),
            Err(ConfigError::SampleTooLarge { .. })
        ));
    }

    #[test]
    fn config_serializes_as_bit_string() {
        let c = Configuration::from_bit_string("1100").unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"1100\"");
        let back: Configuration = serde_json::from_str("\"1100\"").unwrap();
        assert_eq!(back, c);
    }
}
