//! Campaign execution: expand a campaign file into test specs, run each
//! triple, append results crash-safely as JSONL, and summarize.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::GroundTruthModelPair;
use crate::planner::EnvironmentMap;

use super::stage::{default_suite, run_triple, HarnessContext, TripleResult};
use super::verdict::{Validity, Verdict};
use super::{HarnessError, PerturbationClass, TestSpec};

/// A campaign file lists explicit test specs, a generator stanza, or both.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CampaignFile {
    #[serde(default)]
    pub tests: Vec<TestSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateStanza>,
    /// Map shared by every triple; the bundled grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_file: Option<PathBuf>,
    /// Ground-truth suite; the default suite when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models_file: Option<PathBuf>,
}

/// Deterministically expands into `count` specs from one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateStanza {
    pub count: usize,
    pub seed: u64,
    pub perturbation_kind: PerturbationClass,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
}

fn default_dimension() -> usize {
    20
}

/// Expands a campaign into its ordered spec list.
pub fn expand_campaign(file: &CampaignFile, suite_size: usize) -> Vec<TestSpec> {
    let mut specs = file.tests.clone();
    if let Some(generate) = &file.generate {
        let mut rng = ChaCha8Rng::seed_from_u64(generate.seed);
        for i in 0..generate.count {
            specs.push(TestSpec {
                seed: generate.seed.wrapping_add(i as u64).wrapping_mul(2654435761) ^ rng.gen::<u64>(),
                n_tasks: rng.gen_range(2..=4),
                power_model_id: rng.gen_range(0..suite_size as u32),
                learning_budget: rng.gen_range(100..=250),
                perturbation_kind: generate.perturbation_kind,
                n_perturbations: rng.gen_range(1..=3),
                map_file: None,
                dimension: generate.dimension,
            });
        }
    }
    specs
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub triples: usize,
    pub valid: usize,
    pub invalid: usize,
    pub error: usize,
    pub pass: usize,
    pub degraded: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

impl KindCounts {
    fn add(&mut self, result: &TripleResult) {
        self.triples += 1;
        match result.validity {
            Validity::Valid => self.valid += 1,
            Validity::Invalid => self.invalid += 1,
            Validity::Error => self.error += 1,
        }
        match result.verdict {
            Verdict::Pass => self.pass += 1,
            Verdict::Degraded => self.degraded += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
            Verdict::NotApplicable => {}
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub per_kind: BTreeMap<String, KindCounts>,
    pub results: Vec<TripleResult>,
}

impl CampaignSummary {
    /// The verdict table plus a per-test score listing.
    pub fn render(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        writeln!(
            out,
            "{:<10} {:>7} {:>6} {:>8} {:>6} {:>5} {:>9} {:>5} {:>13}",
            "kind", "triples", "valid", "invalid", "error", "pass", "degraded", "fail", "inconclusive"
        )
        .unwrap();
        for (kind, c) in &self.per_kind {
            writeln!(
                out,
                "{:<10} {:>7} {:>6} {:>8} {:>6} {:>5} {:>9} {:>5} {:>13}",
                kind, c.triples, c.valid, c.invalid, c.error, c.pass, c.degraded, c.fail, c.inconclusive
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(
            out,
            "{:<6} {:<10} {:>8} {:>8} {:>8}  {:<12} {:<14}",
            "test", "kind", "scoreA", "scoreB", "scoreC", "validity", "verdict"
        )
        .unwrap();
        for (i, r) in self.results.iter().enumerate() {
            writeln!(
                out,
                "{:<6} {:<10} {:>8.3} {:>8.3} {:>8.3}  {:<12} {:<14}",
                i,
                format!("{:?}", r.spec.perturbation_kind).to_lowercase(),
                r.a.score,
                r.b.score,
                r.challenge.score,
                format!("{:?}", r.validity),
                format!("{:?}", r.verdict),
            )
            .unwrap();
        }
        out
    }
}

fn read_campaign(path: &Path) -> Result<CampaignFile, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_context(file: &CampaignFile, dimension: usize) -> Result<HarnessContext, HarnessError> {
    let suite: Vec<GroundTruthModelPair> = match &file.models_file {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => default_suite(dimension),
    };
    let map = match &file.map_file {
        Some(path) => {
            let mf: crate::planner::MapFile =
                serde_json::from_str(&std::fs::read_to_string(path)?)?;
            EnvironmentMap::from_map_file(&mf)?
        }
        None => crate::planner::demo_grid(4, 4),
    };
    Ok(HarnessContext::new(suite, map))
}

/// Runs a campaign, appending one `TripleResult` JSON object per line to
/// `out_path` as each triple finishes. Existing result lines are treated
/// as completed work: a rerun resumes after them, so interrupting and
/// restarting reproduces the remaining triples identically.
pub fn run_campaign(
    campaign_path: &Path,
    out_path: &Path,
    trace_dir: Option<&Path>,
) -> Result<CampaignSummary, HarnessError> {
    let file = read_campaign(campaign_path)?;
    let dimension = file
        .generate
        .as_ref()
        .map(|g| g.dimension)
        .or_else(|| file.tests.first().map(|t| t.dimension))
        .unwrap_or(20);
    let ctx = load_context(&file, dimension)?;
    let specs = expand_campaign(&file, ctx.suite.len());

    // resume: previously appended results stand
    let mut results: Vec<TripleResult> = Vec::new();
    if out_path.exists() {
        let reader = BufReader::new(std::fs::File::open(out_path)?);
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            results.push(serde_json::from_str(&line)?);
        }
    }
    let done = results.len().min(specs.len());

    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = OpenOptions::new().create(true).append(true).open(out_path)?;
    for spec in &specs[done..] {
        let result = run_triple(spec, &ctx, trace_dir);
        let line = serde_json::to_string(&result)?;
        writeln!(out, "{line}")?;
        out.flush()?;
        results.push(result);
    }

    let mut per_kind: BTreeMap<String, KindCounts> = BTreeMap::new();
    for r in &results {
        per_kind
            .entry(format!("{:?}", r.spec.perturbation_kind).to_lowercase())
            .or_default()
            .add(r);
    }
    Ok(CampaignSummary { per_kind, results })
}
