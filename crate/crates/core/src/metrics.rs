//! Decomposition-quality metrics over run results.
//!
//! Both accuracies count the largest one-to-one matching between a run's
//! steps and the ground-truth steps, ignoring order, divided by the number
//! of ground-truth steps and clamped to 1. Subtask accuracy compares
//! per-step value tuples; subprogram accuracy compares the steps
//! themselves, after renaming intermediate variables away.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::deepcoder::{eval_program, DcStep};
use crate::engine::RunResult;
use crate::program::{Program, Subprogram};
use crate::robustfill::{eval_expr, INPUT_VAR};
use crate::spec::TaskSpec;
use crate::value::{Limits, Value};

/// Which per-step values a run's subtask states are read from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSource {
    /// What each accepted step produced.
    #[default]
    Executed,
    /// The subgoal each step was synthesized for, where there was one.
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("ground truth fails on the specification: {0}")]
    GroundTruth(String),
    #[error("bin count must be at least 2")]
    Bins,
}

/// Matched step counts of one run; accuracies derive from them exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskScore {
    pub subtask_matches: usize,
    pub subprogram_matches: usize,
    pub steps_used: usize,
    pub gt_steps: usize,
    pub solved: bool,
}

impl TaskScore {
    pub fn subtask_accuracy(&self) -> f64 {
        ratio(self.subtask_matches, self.gt_steps)
    }

    pub fn subprogram_accuracy(&self) -> f64 {
        ratio(self.subprogram_matches, self.gt_steps)
    }
}

fn ratio(m: usize, gt: usize) -> f64 {
    m.min(gt) as f64 / gt.max(1) as f64
}

/// Size of the multiset intersection.
fn overlap<T: Eq + Hash>(predicted: impl IntoIterator<Item = T>, truth: impl IntoIterator<Item = T>) -> usize {
    let mut counts: HashMap<T, usize> = HashMap::new();
    for t in truth {
        *counts.entry(t).or_default() += 1;
    }
    predicted
        .into_iter()
        .filter(|p| match counts.get_mut(p) {
            Some(c) if *c > 0 => {
                *c -= 1;
                true
            }
            _ => false,
        })
        .count()
}

/// Per-step value tuples of the ground truth on the specification's
/// original inputs.
pub fn ground_truth_states(gt: &Program, spec: &TaskSpec, limits: &Limits) -> Result<Vec<Vec<Value>>, MetricError> {
    let fail = |e: &dyn std::fmt::Display| MetricError::GroundTruth(e.to_string());
    let per_example: Vec<Vec<Value>> = spec
        .examples()
        .iter()
        .map(|ex| match gt {
            Program::DeepCoder(p) => {
                let inputs: Vec<Value> = ex.inputs.values().take(p.num_inputs()).cloned().collect();
                eval_program(p, &inputs, limits).map_err(|e| fail(&e))
            }
            Program::RobustFill(p) => {
                let x = ex
                    .inputs
                    .get(INPUT_VAR)
                    .and_then(Value::as_str)
                    .ok_or_else(|| fail(&"no string input"))?;
                p.exprs()
                    .iter()
                    .map(|e| eval_expr(e, x).map(Value::Str).map_err(|e| fail(&e)))
                    .collect()
            }
        })
        .collect::<Result<_, _>>()?;
    Ok((0..gt.len())
        .map(|step| per_example.iter().map(|vals| vals[step].clone()).collect())
        .collect())
}

pub fn subtask_matches(run: &RunResult, gt_states: &[Vec<Value>], source: StateSource) -> usize {
    let predicted = run.traces.iter().map(|t| match (source, &t.subgoal) {
        (StateSource::Predicted, Some(goal)) => goal,
        _ => &t.values,
    });
    overlap(predicted, gt_states.iter())
}

pub fn subtask_accuracy(
    run: &RunResult,
    gt: &Program,
    spec: &TaskSpec,
    source: StateSource,
) -> Result<f64, MetricError> {
    let states = ground_truth_states(gt, spec, &Limits::DEFAULT)?;
    Ok(ratio(subtask_matches(run, &states, source), gt.len()))
}

/// Keys under which steps compare equal: list-domain steps with every
/// intermediate argument expanded into the expression computing it, so
/// variable numbering does not matter; string-domain steps by their text.
pub fn step_keys(steps: &[Subprogram], num_inputs: usize) -> Vec<String> {
    let mut expanded: Vec<String> = (0..num_inputs).map(|i| format!("x{i}")).collect();
    steps
        .iter()
        .map(|s| match s {
            Subprogram::DeepCoder(DcStep { op, .. }) => {
                let mut key = op.operation().name().to_owned();
                if let Some(l) = op.lambda() {
                    key.push(' ');
                    key.push_str(l.token());
                }
                for arg in op.args() {
                    let a = expanded.get(arg.index()).map_or_else(|| arg.to_string(), Clone::clone);
                    if arg.index() < num_inputs {
                        key.push_str(&format!(" {a}"));
                    } else {
                        key.push_str(&format!(" ({a})"));
                    }
                }
                expanded.push(key.clone());
                key
            }
            Subprogram::RobustFill(e) => e.to_string(),
        })
        .collect()
}

fn num_inputs(gt: &Program) -> usize {
    match gt {
        Program::DeepCoder(p) => p.num_inputs(),
        Program::RobustFill(_) => 1,
    }
}

pub fn subprogram_matches(run: &RunResult, gt: &Program) -> usize {
    let n = num_inputs(gt);
    let predicted: Vec<Subprogram> = run.traces.iter().map(|t| t.subprogram.clone()).collect();
    overlap(step_keys(&predicted, n), step_keys(&gt.steps(), n))
}

pub fn subprogram_accuracy(run: &RunResult, gt: &Program) -> f64 {
    ratio(subprogram_matches(run, gt), gt.len())
}

pub fn score_run(
    run: &RunResult,
    gt: &Program,
    spec: &TaskSpec,
    source: StateSource,
) -> Result<TaskScore, MetricError> {
    let states = ground_truth_states(gt, spec, &Limits::DEFAULT)?;
    Ok(TaskScore {
        subtask_matches: subtask_matches(run, &states, source),
        subprogram_matches: subprogram_matches(run, gt),
        steps_used: run.steps_used,
        gt_steps: gt.len(),
        solved: run.solved,
    })
}

/// Joint counts of (ground-truth steps, steps used) over solved runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecompositionHistogram {
    pub counts: BTreeMap<(usize, usize), usize>,
    pub mean_gt_steps: f64,
    pub mean_steps_used: f64,
}

impl DecompositionHistogram {
    pub fn is_diagonal(&self) -> bool {
        self.counts.keys().all(|(gt, used)| gt == used)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn decomposition_histogram(scores: &[TaskScore]) -> DecompositionHistogram {
    let mut h = DecompositionHistogram::default();
    for s in scores.iter().filter(|s| s.solved) {
        *h.counts.entry((s.gt_steps, s.steps_used)).or_default() += 1;
    }
    let n = h.total();
    if n > 0 {
        let solved = scores.iter().filter(|s| s.solved);
        h.mean_gt_steps = solved.clone().map(|s| s.gt_steps).sum::<usize>() as f64 / n as f64;
        h.mean_steps_used = solved.map(|s| s.steps_used).sum::<usize>() as f64 / n as f64;
    }
    h
}

/// Equal-width bins on both accuracy axes, right-closed: bin `k` of `b`
/// holds (k/b, (k+1)/b], and bin 0 also holds 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityGrid {
    pub bins: usize,
    /// `counts[x][y]`, x the subtask bin, y the subprogram bin.
    pub counts: Vec<Vec<usize>>,
    pub total: usize,
}

/// Computed from match counts in integer arithmetic, so values on a bin
/// edge land exactly.
pub fn bin_of(matches: usize, gt_steps: usize, bins: usize) -> usize {
    let m = matches.min(gt_steps);
    if m == 0 || gt_steps == 0 {
        0
    } else {
        (m * bins).div_ceil(gt_steps) - 1
    }
}

pub fn density_grid(scores: &[TaskScore], bins: usize) -> Result<DensityGrid, MetricError> {
    if bins < 2 {
        return Err(MetricError::Bins);
    }
    let mut counts = vec![vec![0; bins]; bins];
    for s in scores {
        counts[bin_of(s.subtask_matches, s.gt_steps, bins)][bin_of(s.subprogram_matches, s.gt_steps, bins)] += 1;
    }
    Ok(DensityGrid {
        bins,
        counts,
        total: scores.len(),
    })
}

pub fn end_to_end_accuracy(solved: &[bool]) -> f64 {
    if solved.is_empty() {
        return 0.0;
    }
    solved.iter().filter(|s| **s).count() as f64 / solved.len() as f64
}

pub const CI_METHOD: &str = "student-t 95%";

/// Mean with a two-sided 95% Student-t interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
    pub n: usize,
}

/// With fewer than two samples the interval collapses to the mean.
pub fn confidence_interval(samples: &[f64]) -> Interval {
    let n = samples.len();
    let mean = if n == 0 {
        0.0
    } else {
        samples.iter().sum::<f64>() / n as f64
    };
    if n < 2 {
        return Interval {
            mean,
            low: mean,
            high: mean,
            n,
        };
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    Interval {
        mean,
        low: mean - half,
        high: mean + half,
        n,
    }
}
