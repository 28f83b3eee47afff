//! Exhaustive single-step synthesis, ranked by progress toward the target.

use std::collections::HashSet;

use super::{BackendError, Capabilities, PredictionBackend, Request, Role};
use crate::deepcoder::{enumerate_steps, eval_step, OpVariant};
use crate::program::{Domain, Subprogram};
use crate::robustfill::search::prefix_candidates;
use crate::robustfill::{RfOpKind, INPUT_VAR};
use crate::value::{Limits, Value};

fn lcs_len(a: &[i64], b: &[i64]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for &x in a {
        let mut diag = 0;
        for (j, &y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Distance in [0, 1] from an executed value to its target: 0/1 for
/// scalars and mismatched variants, one minus the longest common
/// subsequence over the longer length for lists, normalized edit distance
/// for strings.
pub fn progress_distance(got: &Value, want: &Value) -> f64 {
    match (got, want) {
        (Value::List(a), Value::List(b)) => {
            let longest = a.len().max(b.len());
            if longest == 0 {
                0.0
            } else {
                1.0 - lcs_len(a, b) as f64 / longest as f64
            }
        }
        (Value::Str(a), Value::Str(b)) => {
            let longest = a.chars().count().max(b.chars().count());
            if longest == 0 {
                0.0
            } else {
                strsim::levenshtein(a, b) as f64 / longest as f64
            }
        }
        _ if got == want => 0.0,
        _ => 1.0,
    }
}

fn mean_distance<'a>(got: impl Iterator<Item = &'a Value>, want: impl Iterator<Item = &'a Value>) -> f64 {
    let (sum, n) = got
        .zip(want)
        .fold((0.0, 0usize), |(s, n), (g, w)| (s + progress_distance(g, w), n + 1));
    sum / n.max(1) as f64
}

/// Enumerates every single step, drops those that fail on some example,
/// keeps the first of each group with identical values, and ranks exact
/// matches first, then by mean progress distance, then by enumeration
/// order.
#[derive(Clone, Debug)]
pub struct OracleBackend {
    list_ops: Vec<OpVariant>,
    string_kinds: Vec<RfOpKind>,
    /// Caps enumerated list steps, or string search work; `None` is unbounded.
    budget: Option<u64>,
    limits: Limits,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("the oracle needs at least one allowed operation")]
pub struct EmptyAllowed;

impl Default for OracleBackend {
    fn default() -> Self {
        OracleBackend {
            list_ops: OpVariant::all(),
            string_kinds: RfOpKind::ALL.to_vec(),
            budget: None,
            limits: Limits::DEFAULT,
        }
    }
}

impl OracleBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_list_ops(mut self, ops: Vec<OpVariant>) -> Result<Self, EmptyAllowed> {
        if ops.is_empty() {
            return Err(EmptyAllowed);
        }
        self.list_ops = ops;
        Ok(self)
    }

    pub fn with_string_kinds(mut self, kinds: Vec<RfOpKind>) -> Result<Self, EmptyAllowed> {
        if kinds.is_empty() {
            return Err(EmptyAllowed);
        }
        self.string_kinds = kinds;
        Ok(self)
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    fn list_candidates(&self, req: &Request<'_>) -> Vec<Subprogram> {
        let spec = req.spec;
        let envs: Vec<Vec<Value>> = spec
            .examples()
            .iter()
            .map(|e| e.inputs.values().cloned().collect())
            .collect();
        let columns: HashSet<Vec<Value>> = (0..envs[0].len())
            .map(|v| envs.iter().map(|env| env[v].clone()).collect())
            .collect();
        let mut groups = HashSet::new();
        let mut ranked = Vec::new();
        let steps = enumerate_steps(&spec.input_kinds(), &self.list_ops);
        let cap = self.budget.map_or(usize::MAX, |b| b as usize);
        for (order, step) in steps.take(cap).enumerate() {
            let values: Option<Vec<Value>> = envs
                .iter()
                .map(|env| eval_step(&step.op, env, &self.limits).ok())
                .collect();
            let Some(values) = values else { continue };
            if columns.contains(&values) || !groups.insert(values.clone()) {
                continue;
            }
            let d = mean_distance(values.iter(), spec.outputs());
            ranked.push((d, order, Subprogram::DeepCoder(step)));
        }
        finish(ranked, req.beam)
    }

    fn string_candidates(&self, req: &Request<'_>) -> Vec<Subprogram> {
        let spec = req.spec;
        let inputs: Option<Vec<&str>> = spec
            .examples()
            .iter()
            .map(|e| e.inputs.get(INPUT_VAR).and_then(Value::as_str))
            .collect();
        let targets: Option<Vec<&str>> = spec.outputs().map(Value::as_str).collect();
        let (Some(inputs), Some(targets)) = (inputs, targets) else {
            return Vec::new();
        };
        let outcome = prefix_candidates(&inputs, &targets, &self.string_kinds, self.budget);
        let ranked = outcome
            .found
            .into_iter()
            .enumerate()
            .map(|(order, f)| {
                let values: Vec<Value> = f.outputs.into_iter().map(Value::Str).collect();
                let d = mean_distance(values.iter(), spec.outputs());
                (d, order, Subprogram::RobustFill(f.expr))
            })
            .collect();
        finish(ranked, req.beam)
    }
}

fn finish(mut ranked: Vec<(f64, usize, Subprogram)>, beam: usize) -> Vec<Subprogram> {
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.truncate(beam);
    ranked.into_iter().map(|(_, _, s)| s).collect()
}

impl PredictionBackend for OracleBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            subgoal: false,
            subprogram: true,
        }
    }

    fn subgoals(&mut self, _req: &Request<'_>) -> Result<Vec<Vec<Value>>, BackendError> {
        Err(BackendError::Unsupported(Role::Subgoal))
    }

    fn subprograms(&mut self, req: &Request<'_>) -> Result<Vec<Subprogram>, BackendError> {
        Ok(match req.domain {
            Domain::DeepCoder => self.list_candidates(req),
            Domain::RobustFill => self.string_candidates(req),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcs_small_cases() {
        assert_eq!(lcs_len(&[1, 2, 3], &[1, 3]), 2);
        assert_eq!(lcs_len(&[], &[1]), 0);
        assert_eq!(lcs_len(&[4, 1, 4], &[1, 4, 4]), 2);
    }

    #[test]
    fn distances() {
        let l = |xs: &[i64]| Value::List(xs.to_vec());
        assert_eq!(progress_distance(&l(&[42, 42]), &l(&[42, 42])), 0.0);
        assert_eq!(progress_distance(&l(&[-48, 42]), &l(&[42, 42])), 0.5);
        assert_eq!(progress_distance(&Value::Int(3), &Value::Int(4)), 1.0);
        assert_eq!(progress_distance(&Value::Int(3), &l(&[3])), 1.0);
        assert_eq!(progress_distance(&Value::from("ab"), &Value::from("abcd")), 0.5);
        assert_eq!(progress_distance(&Value::from(""), &Value::from("")), 0.0);
    }
}
