//! CSV reports from a corpus and its run results.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use anyhow::{bail, Context};

use exedec_core::metrics::{
    confidence_interval, decomposition_histogram, density_grid, end_to_end_accuracy, ground_truth_states,
    subprogram_matches, subtask_matches, StateSource, TaskScore, CI_METHOD,
};
use exedec_core::records::ResultRecord;
use exedec_core::taskgen::Task;
use exedec_core::Limits;

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub bins: usize,
    /// Density grids use subtask accuracy from predicted subgoals.
    pub predicted_states: bool,
}

/// Rows are grouped by these, in this order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    domain: String,
    category: String,
    split: String,
    mode: String,
    backend: String,
}

struct Scored<'a> {
    task: &'a Task,
    record: &'a ResultRecord,
    executed: TaskScore,
    predicted: TaskScore,
}

/// What `write_reports` wrote, for the console.
pub struct ReportSummary {
    pub runs: usize,
    pub groups: usize,
}

impl fmt::Display for ReportSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} runs scored in {} groups", self.runs, self.groups)
    }
}

fn f(x: f64) -> String {
    format!("{x:.6}")
}

/// Scores every result and writes `scores.csv`, `summary.csv`,
/// `density.csv` and `histogram.csv` into `out`.
///
/// Fails, naming them, if any result refers to a task missing from the
/// corpus or repeats a (task, seed) pair.
pub fn write_reports(
    tasks: &[Task],
    results: &[ResultRecord],
    options: &ReportOptions,
    out: &Path,
) -> anyhow::Result<ReportSummary> {
    let by_id: HashMap<&str, &Task> = tasks.iter().map(|t| (t.id.as_str(), t)).collect();
    let unknown: BTreeSet<&str> = results
        .iter()
        .map(|r| r.task_id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !unknown.is_empty() {
        bail!(
            "{} result task ids are not in the corpus: {}",
            unknown.len(),
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    let mut seen = BTreeSet::new();
    let repeated: BTreeSet<String> = results
        .iter()
        .filter(|r| !seen.insert((r.task_id.as_str(), r.seed, r.mode.as_str(), r.backend.as_str())))
        .map(|r| format!("{} (seed {})", r.task_id, r.seed))
        .collect();
    if !repeated.is_empty() {
        bail!(
            "results repeat task ids: {}",
            repeated.into_iter().collect::<Vec<_>>().join(", ")
        );
    }

    let limits = Limits::DEFAULT;
    let mut states_cache: HashMap<&str, Vec<Vec<exedec_core::Value>>> = HashMap::new();
    let mut scored = Vec::with_capacity(results.len());
    for record in results {
        let task = by_id[record.task_id.as_str()];
        if !states_cache.contains_key(task.id.as_str()) {
            let states = ground_truth_states(&task.ground_truth, &task.spec, &limits)
                .with_context(|| format!("task {}", task.id))?;
            states_cache.insert(&task.id, states);
        }
        let states = &states_cache[task.id.as_str()];
        let run = &record.result;
        let base = TaskScore {
            subtask_matches: subtask_matches(run, states, StateSource::Executed),
            subprogram_matches: subprogram_matches(run, &task.ground_truth),
            steps_used: run.steps_used,
            gt_steps: task.ground_truth.len(),
            solved: run.solved,
        };
        let predicted = TaskScore {
            subtask_matches: subtask_matches(run, states, StateSource::Predicted),
            ..base
        };
        scored.push(Scored {
            task,
            record,
            executed: base,
            predicted,
        });
    }

    let mut groups: BTreeMap<GroupKey, Vec<&Scored>> = BTreeMap::new();
    for s in &scored {
        let key = GroupKey {
            domain: s.task.domain.to_string(),
            category: s.task.category.to_string(),
            split: s.task.split.to_string(),
            mode: s.record.mode.clone(),
            backend: s.record.backend.clone(),
        };
        groups.entry(key).or_default().push(s);
    }

    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let open = |name: &str| {
        let path = out.join(name);
        csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))
    };
    let group_cols = ["domain", "category", "split", "mode", "backend"];
    let group_vals = |k: &GroupKey| {
        vec![
            k.domain.clone(),
            k.category.clone(),
            k.split.clone(),
            k.mode.clone(),
            k.backend.clone(),
        ]
    };

    let mut w = open("scores.csv")?;
    w.write_record(group_cols.iter().copied().chain([
        "task_id",
        "seed",
        "solved",
        "stop",
        "steps_used",
        "gt_steps",
        "subtask_accuracy",
        "subtask_accuracy_predicted",
        "subprogram_accuracy",
    ]))?;
    for (key, rows) in &groups {
        for s in rows {
            let mut rec = group_vals(key);
            rec.extend([
                s.task.id.clone(),
                s.record.seed.to_string(),
                s.executed.solved.to_string(),
                serde_json::to_value(s.record.result.stop)?
                    .as_str()
                    .unwrap_or_default()
                    .to_owned(),
                s.executed.steps_used.to_string(),
                s.executed.gt_steps.to_string(),
                f(s.executed.subtask_accuracy()),
                f(s.predicted.subtask_accuracy()),
                f(s.executed.subprogram_accuracy()),
            ]);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;

    let mut w = open("summary.csv")?;
    w.write_record(group_cols.iter().copied().chain([
        "seeds",
        "tasks",
        "runs",
        "accuracy_mean",
        "accuracy_ci_low",
        "accuracy_ci_high",
        "ci_method",
        "subtask_accuracy_mean",
        "subprogram_accuracy_mean",
        "solved_mean_steps_used",
        "solved_mean_gt_steps",
    ]))?;
    for (key, rows) in &groups {
        let mut per_seed: BTreeMap<u64, Vec<bool>> = BTreeMap::new();
        for s in rows {
            per_seed.entry(s.record.seed).or_default().push(s.executed.solved);
        }
        let accuracies: Vec<f64> = per_seed.values().map(|v| end_to_end_accuracy(v)).collect();
        let ci = confidence_interval(&accuracies);
        let tasks: BTreeSet<&str> = rows.iter().map(|s| s.task.id.as_str()).collect();
        let n = rows.len() as f64;
        let chosen: Vec<TaskScore> = rows.iter().map(|s| pick(s, options)).collect();
        let hist = decomposition_histogram(&chosen);
        let mut rec = group_vals(key);
        rec.extend([
            per_seed.len().to_string(),
            tasks.len().to_string(),
            rows.len().to_string(),
            f(ci.mean),
            f(ci.low),
            f(ci.high),
            CI_METHOD.to_owned(),
            f(chosen.iter().map(TaskScore::subtask_accuracy).sum::<f64>() / n),
            f(chosen.iter().map(TaskScore::subprogram_accuracy).sum::<f64>() / n),
            f(hist.mean_steps_used),
            f(hist.mean_gt_steps),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = open("density.csv")?;
    w.write_record(
        group_cols
            .iter()
            .copied()
            .chain(["x_bin", "x_low", "x_high", "y_bin", "y_low", "y_high", "count"]),
    )?;
    let edge = |k: usize| f(k as f64 / options.bins as f64);
    for (key, rows) in &groups {
        let chosen: Vec<TaskScore> = rows.iter().map(|s| pick(s, options)).collect();
        let grid = density_grid(&chosen, options.bins)?;
        for (x, col) in grid.counts.iter().enumerate() {
            for (y, count) in col.iter().enumerate() {
                let mut rec = group_vals(key);
                rec.extend([
                    x.to_string(),
                    edge(x),
                    edge(x + 1),
                    y.to_string(),
                    edge(y),
                    edge(y + 1),
                    count.to_string(),
                ]);
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;

    let mut w = open("histogram.csv")?;
    w.write_record(group_cols.iter().copied().chain(["gt_steps", "steps_used", "count"]))?;
    for (key, rows) in &groups {
        let chosen: Vec<TaskScore> = rows.iter().map(|s| s.executed).collect();
        for ((gt, used), count) in decomposition_histogram(&chosen).counts {
            let mut rec = group_vals(key);
            rec.extend([gt.to_string(), used.to_string(), count.to_string()]);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;

    Ok(ReportSummary {
        runs: scored.len(),
        groups: groups.len(),
    })
}

fn pick(s: &Scored, options: &ReportOptions) -> TaskScore {
    if options.predicted_states {
        s.predicted
    } else {
        s.executed
    }
}
