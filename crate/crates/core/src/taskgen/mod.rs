//! Benchmark task generation: ground-truth programs and their examples for
//! each compositional-generalization category, in both domains.
//!
//! Every task is built from its own random stream, derived from the corpus
//! seed, the category triple and the task index, so corpora are identical
//! however the indices are scheduled.

mod deepcoder;
mod robustfill;

use std::collections::HashSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::program::{Domain, Program};
use crate::spec::TaskSpec;
use crate::value::Limits;

pub use deepcoder::{concept_a, concept_b, dc_category_holds};
pub use robustfill::rf_category_holds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    TrainDistribution,
    LengthGeneralization,
    ComposeDifferentConcepts,
    SwitchConceptOrder,
    ComposeNewOperation,
    AddOperationFunctionality,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::TrainDistribution,
        Category::LengthGeneralization,
        Category::ComposeDifferentConcepts,
        Category::SwitchConceptOrder,
        Category::ComposeNewOperation,
        Category::AddOperationFunctionality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::TrainDistribution => "train-distribution",
            Category::LengthGeneralization => "length-generalization",
            Category::ComposeDifferentConcepts => "compose-different-concepts",
            Category::SwitchConceptOrder => "switch-concept-order",
            Category::ComposeNewOperation => "compose-new-operation",
            Category::AddOperationFunctionality => "add-operation-functionality",
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            Category::TrainDistribution => &["train", "td"],
            Category::LengthGeneralization => &["length", "lg"],
            Category::ComposeDifferentConcepts => &["compose-concepts", "cdc"],
            Category::SwitchConceptOrder => &["switch-order", "sco"],
            Category::ComposeNewOperation => &["compose-new-op", "cno"],
            Category::AddOperationFunctionality => &["add-op", "aof"],
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {what} {found:?}; expected one of {expected}")]
pub struct UnknownName {
    pub what: &'static str,
    pub found: String,
    pub expected: String,
}

impl FromStr for Category {
    type Err = UnknownName;

    /// Accepts the kebab-case name, the CamelCase name, or a short alias
    /// (`length`, `cdc`, ...), ignoring case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Category::ALL
            .into_iter()
            .find(|c| c.name() == norm || c.name().replace('-', "") == norm || c.aliases().contains(&norm.as_str()))
            .ok_or_else(|| UnknownName {
                what: "category",
                found: s.to_owned(),
                expected: Category::ALL.map(Category::name).join(", "),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub const ALL: [Split; 2] = [Split::Train, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(UnknownName {
                what: "split",
                found: s.to_owned(),
                expected: "train, test".to_owned(),
            }),
        }
    }
}

/// A generated benchmark task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    pub domain: Domain,
    pub category: Category,
    pub split: Split,
    pub seed: u64,
    pub index: u64,
    pub spec: TaskSpec,
    pub ground_truth: Program,
}

/// Task identity: a hash of the corpus seed, the category triple, the task
/// index and the ground-truth text.
pub fn task_id(seed: u64, domain: Domain, category: Category, split: Split, index: u64, program: &Program) -> String {
    let mut h = Sha256::new();
    h.update(format!("{seed}\n{domain}\n{category}\n{split}\n{index}\n{program}"));
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub n_examples: usize,
    pub limits: Limits,
    /// Restricts program lengths further than the category does.
    pub lengths: Option<RangeInclusive<usize>>,
    /// Whole-task attempts before giving up on one task.
    pub max_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_examples: 3,
            limits: Limits::DEFAULT,
            lengths: None,
            max_attempts: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no program length satisfies both {category} and the requested range {requested:?}")]
    NoLengths {
        category: Category,
        requested: RangeInclusive<usize>,
    },
    #[error("task {index}: no valid task within {attempts} attempts")]
    Exhausted { index: u64, attempts: usize },
    #[error("count must be at least 1")]
    ZeroCount,
}

/// What to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusRequest {
    pub domain: Domain,
    pub category: Category,
    pub split: Split,
    pub count: u64,
    pub seed: u64,
}

/// Which of a category's sub-populations a task index belongs to. Only the
/// compose-new-operation training split has two: the first quarter of the
/// indices (rounded down) are single-step programs of the new operation.
pub(crate) fn in_isolation_stratum(req: &CorpusRequest, index: u64) -> bool {
    req.category == Category::ComposeNewOperation && req.split == Split::Train && index < req.count / 4
}

fn clip(
    range: RangeInclusive<usize>,
    config: &GenConfig,
    category: Category,
) -> Result<RangeInclusive<usize>, GenError> {
    let Some(want) = &config.lengths else { return Ok(range) };
    let lo = *range.start().max(want.start());
    let hi = *range.end().min(want.end());
    if lo > hi {
        return Err(GenError::NoLengths {
            category,
            requested: want.clone(),
        });
    }
    Ok(lo..=hi)
}

fn task_rng(req: &CorpusRequest, index: u64, attempt: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(format!(
        "{}\n{}\n{}\n{}\n{attempt}",
        req.seed, req.domain, req.category, req.split
    ));
    let key: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Generates task `index` of a corpus; `attempt` selects an independent
/// random stream (used to replace duplicates).
pub fn generate_task(req: &CorpusRequest, index: u64, attempt: u64, config: &GenConfig) -> Result<Task, GenError> {
    let mut rng = task_rng(req, index, attempt);
    let stratum = in_isolation_stratum(req, index);
    let (spec, program) = match req.domain {
        Domain::DeepCoder => deepcoder::sample(req.category, req.split, stratum, config, &mut rng, index)?,
        Domain::RobustFill => robustfill::sample(req.category, req.split, stratum, config, &mut rng, index)?,
    };
    Ok(Task {
        id: task_id(req.seed, req.domain, req.category, req.split, index, &program),
        domain: req.domain,
        category: req.category,
        split: req.split,
        seed: req.seed,
        index,
        spec,
        ground_truth: program,
    })
}

/// Whether a program meets the constraints of its category and split.
pub fn category_holds(domain: Domain, category: Category, split: Split, program: &Program) -> bool {
    match program {
        Program::DeepCoder(p) => domain == Domain::DeepCoder && dc_category_holds(category, split, p),
        Program::RobustFill(p) => domain == Domain::RobustFill && rf_category_holds(category, split, p),
    }
}

fn dedup_key(task: &Task) -> String {
    format!(
        "{}\n{}",
        task.ground_truth,
        serde_json::to_string(&task.spec).expect("specs serialize")
    )
}

/// Builds a corpus, generating each batch of task indices with `generate`
/// (which may run them in parallel) and replacing duplicates serially.
/// Duplicates are tasks with the same ground truth and the same examples.
pub fn build_corpus_with<F>(req: &CorpusRequest, config: &GenConfig, generate: F) -> Result<Vec<Task>, GenError>
where
    F: Fn(&[u64]) -> Vec<Result<Task, GenError>>,
{
    if req.count == 0 {
        return Err(GenError::ZeroCount);
    }
    let indices: Vec<u64> = (0..req.count).collect();
    let first = generate(&indices);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(first.len());
    for (index, task) in indices.into_iter().zip(first) {
        let mut task = task?;
        let mut attempt = 1;
        while !seen.insert(dedup_key(&task)) {
            task = generate_task(req, index, attempt, config)?;
            attempt += 1;
        }
        out.push(task);
    }
    Ok(out)
}

/// Builds a corpus serially.
pub fn build_corpus(req: &CorpusRequest, config: &GenConfig) -> Result<Vec<Task>, GenError> {
    build_corpus_with(req, config, |indices| {
        indices.iter().map(|&i| generate_task(req, i, 0, config)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_names_parse() {
        for c in Category::ALL {
            assert_eq!(c.name().parse::<Category>().unwrap(), c);
        }
        assert_eq!("length".parse::<Category>().unwrap(), Category::LengthGeneralization);
        assert_eq!(
            "ComposeNewOperation".parse::<Category>().unwrap(),
            Category::ComposeNewOperation
        );
        assert!("lenght".parse::<Category>().is_err());
    }

    #[test]
    fn isolation_stratum_rounds_down() {
        let req = CorpusRequest {
            domain: Domain::DeepCoder,
            category: Category::ComposeNewOperation,
            split: Split::Train,
            count: 10,
            seed: 0,
        };
        let n = (0..10).filter(|&i| in_isolation_stratum(&req, i)).count();
        assert_eq!(n, 2);
    }
}
