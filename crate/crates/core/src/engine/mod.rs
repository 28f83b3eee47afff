//! Execution-guided synthesis loops.
//!
//! Both loops build a program one step at a time. Each accepted step is
//! executed on every example and its values update the specification: in
//! the list domain they become a new input variable, in the string domain
//! they are stripped from the front of the remaining outputs. ExeDec first
//! asks a backend for the next step's per-example values (a subgoal) and
//! synthesizes against that subtask; REGISM synthesizes against the task
//! outputs directly.

mod external;
mod oracle;
mod teacher;

use std::cell::RefCell;
use std::collections::HashSet;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deepcoder::{eval_step, DcProgram, DcStep, StepError, Var};
use crate::program::{Domain, Program, Subprogram};
use crate::robustfill::{eval_expr, MatchError, RfProgram, INPUT_VAR};
use crate::spec::{Example, TaskSpec};
use crate::value::{Limits, Value};

pub use external::{Endpoint, ExternalBackend, WireRequest, WireResponse, DEFAULT_TIMEOUT};
pub use oracle::{progress_distance, OracleBackend};
pub use teacher::TeacherBackend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub subgoal: bool,
    pub subprogram: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subgoal,
    Subprogram,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Subgoal => "subgoal",
            Role::Subprogram => "subprogram",
        })
    }
}

/// One prediction request. `step` counts the steps accepted so far.
#[derive(Clone, Copy, Debug)]
pub struct Request<'a> {
    pub domain: Domain,
    pub spec: &'a TaskSpec,
    pub beam: usize,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend does not answer {0} requests")]
    Unsupported(Role),
    #[error("no subgoal for step {step}: the ground truth has {len} steps")]
    BeyondGroundTruth { step: usize, len: usize },
    #[error("ground truth fails on the task inputs: {0}")]
    GroundTruth(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("backend reported: {0}")]
    Remote(String),
    #[error("subgoal candidate {index} has {found} values for {expected} examples")]
    SubgoalArity {
        index: usize,
        expected: usize,
        found: usize,
    },
}

/// A source of ranked subgoal and single-step program predictions.
///
/// Candidates are ranked best first; callers truncate to the beam.
pub trait PredictionBackend {
    fn capabilities(&self) -> Capabilities;

    /// Per-example values for the next step, one list per candidate.
    fn subgoals(&mut self, req: &Request<'_>) -> Result<Vec<Vec<Value>>, BackendError>;

    fn subprograms(&mut self, req: &Request<'_>) -> Result<Vec<Subprogram>, BackendError>;
}

/// Lets one backend serve both roles of an ExeDec run.
pub struct Shared<'a, B>(pub &'a RefCell<B>);

impl<B: PredictionBackend> PredictionBackend for Shared<'_, B> {
    fn capabilities(&self) -> Capabilities {
        self.0.borrow().capabilities()
    }

    fn subgoals(&mut self, req: &Request<'_>) -> Result<Vec<Vec<Value>>, BackendError> {
        self.0.borrow_mut().subgoals(req)
    }

    fn subprograms(&mut self, req: &Request<'_>) -> Result<Vec<Subprogram>, BackendError> {
        self.0.borrow_mut().subprograms(req)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error("a {found} step cannot update a {expected} specification")]
    Domain { expected: Domain, found: Domain },
    #[error("list-domain inputs must be named x0, x1, ... in order")]
    InputNames,
    #[error("string-domain examples need one string input {INPUT_VAR:?} and a string output")]
    StringSpec,
    #[error("example {example}: {error}")]
    Step { example: usize, error: StepError },
    #[error("example {example}: {error}")]
    Match { example: usize, error: MatchError },
    #[error("example {example}: {produced:?} is not a prefix of the remaining output {remaining:?}")]
    Prefix {
        example: usize,
        produced: String,
        remaining: String,
    },
}

/// The outcome of executing one step against a specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub spec: TaskSpec,
    /// Per-example values the step produced.
    pub values: Vec<Value>,
    /// The step as bound: list-domain steps are renamed to assign the next
    /// fresh variable.
    pub subprogram: Subprogram,
}

fn check_list_inputs(spec: &TaskSpec) -> Result<usize, UpdateError> {
    let mut n = 0;
    for (i, name) in spec.input_names().enumerate() {
        if name != Var(i as u16).to_string() {
            return Err(UpdateError::InputNames);
        }
        n += 1;
    }
    Ok(n)
}

/// Executes `sub` on every example and updates the specification.
pub fn apply_step(spec: &TaskSpec, sub: &Subprogram, limits: &Limits) -> Result<Applied, UpdateError> {
    match sub {
        Subprogram::DeepCoder(step) => {
            let target = Var(check_list_inputs(spec)? as u16);
            let step = DcStep { target, op: step.op };
            let mut values = Vec::with_capacity(spec.len());
            let mut examples = Vec::with_capacity(spec.len());
            for (example, ex) in spec.examples().iter().enumerate() {
                let env: Vec<Value> = ex.inputs.values().cloned().collect();
                let v = eval_step(&step.op, &env, limits).map_err(|error| UpdateError::Step { example, error })?;
                let mut inputs = ex.inputs.clone();
                inputs.insert(target.to_string(), v.clone());
                examples.push(Example {
                    inputs,
                    output: ex.output.clone(),
                });
                values.push(v);
            }
            let spec = TaskSpec::new(examples).expect("each operation has a fixed result kind");
            Ok(Applied {
                spec,
                values,
                subprogram: Subprogram::DeepCoder(step),
            })
        }
        Subprogram::RobustFill(e) => {
            let mut values = Vec::with_capacity(spec.len());
            let mut outputs = Vec::with_capacity(spec.len());
            for (example, ex) in spec.examples().iter().enumerate() {
                let (Some(x), Some(remaining)) = (ex.inputs.get(INPUT_VAR).and_then(Value::as_str), ex.output.as_str())
                else {
                    return Err(UpdateError::StringSpec);
                };
                let produced = eval_expr(e, x).map_err(|error| UpdateError::Match { example, error })?;
                let Some(rest) = remaining.strip_prefix(produced.as_str()) else {
                    return Err(UpdateError::Prefix {
                        example,
                        produced,
                        remaining: remaining.to_owned(),
                    });
                };
                outputs.push(Value::Str(rest.to_owned()));
                values.push(Value::Str(produced));
            }
            let spec = spec.with_outputs(outputs).expect("one output per example");
            Ok(Applied {
                spec,
                values,
                subprogram: sub.clone(),
            })
        }
    }
}

/// Executes `sub` and returns the updated specification.
pub fn update_spec(spec: &TaskSpec, sub: &Subprogram, domain: Domain) -> Result<TaskSpec, UpdateError> {
    if sub.domain() != domain {
        return Err(UpdateError::Domain {
            expected: domain,
            found: sub.domain(),
        });
    }
    apply_step(spec, sub, &Limits::DEFAULT).map(|a| a.spec)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTrace {
    pub index: usize,
    /// The subgoal the step was synthesized for (ExeDec only).
    pub subgoal: Option<Vec<Value>>,
    pub subprogram: Subprogram,
    /// Executed per-example values.
    pub values: Vec<Value>,
    /// Specification after the update.
    pub spec: TaskSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Solved,
    StepLimit,
    NoExecutableCandidate,
    BackendError,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub solved: bool,
    /// The accepted steps; absent when no step was accepted.
    pub program: Option<Program>,
    pub traces: Vec<StepTrace>,
    pub steps_used: usize,
    pub max_steps: usize,
    pub beam_size: usize,
    pub stop: StopReason,
    pub error: Option<String>,
}

impl RunResult {
    /// A run that failed before its first step.
    pub fn failed(config: &RunConfig, error: String) -> RunResult {
        RunResult {
            solved: false,
            program: None,
            traces: Vec::new(),
            steps_used: 0,
            max_steps: config.max_steps,
            beam_size: config.beam,
            stop: StopReason::BackendError,
            error: Some(error),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub max_steps: usize,
    pub beam: usize,
    pub limits: Limits,
}

impl RunConfig {
    pub fn new(max_steps: usize, beam: usize) -> Self {
        RunConfig {
            max_steps,
            beam,
            limits: Limits::DEFAULT,
        }
    }
}

/// Twice the ground-truth length, and at least 5.
pub fn default_max_steps(gt_steps: usize) -> usize {
    (2 * gt_steps).max(5)
}

pub const DEFAULT_BEAM: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("{loop_name} needs a backend that answers {role} requests")]
    Capability { loop_name: &'static str, role: Role },
    #[error("beam size must be at least 1")]
    ZeroBeam,
}

fn require(backend: &dyn PredictionBackend, role: Role, loop_name: &'static str) -> Result<(), EngineError> {
    let caps = backend.capabilities();
    let ok = match role {
        Role::Subgoal => caps.subgoal,
        Role::Subprogram => caps.subprogram,
    };
    if ok {
        Ok(())
    } else {
        Err(EngineError::Capability { loop_name, role })
    }
}

/// Whether the specification reached after a step is solved.
fn solves(domain: Domain, original: &TaskSpec, applied: &Applied) -> bool {
    match domain {
        Domain::DeepCoder => original.outputs().eq(applied.values.iter()),
        Domain::RobustFill => applied.spec.outputs().all(|o| o.as_str() == Some("")),
    }
}

/// Per-run state shared by the loops.
struct Run<'a> {
    domain: Domain,
    original: &'a TaskSpec,
    current: TaskSpec,
    config: &'a RunConfig,
    /// List domain: every bound value column. String domain: every
    /// remaining-output tuple.
    seen: HashSet<Vec<Value>>,
    traces: Vec<StepTrace>,
    solved: bool,
}

impl<'a> Run<'a> {
    fn new(domain: Domain, spec: &'a TaskSpec, config: &'a RunConfig) -> Self {
        let mut seen = HashSet::new();
        match domain {
            Domain::DeepCoder => {
                for var in 0..spec.examples()[0].inputs.len() {
                    seen.insert(spec.examples().iter().map(|e| e.inputs[var].clone()).collect());
                }
            }
            Domain::RobustFill => {
                seen.insert(spec.outputs().cloned().collect());
            }
        }
        let solved = domain == Domain::RobustFill && spec.outputs().all(|o| o.as_str() == Some(""));
        Run {
            domain,
            original: spec,
            current: spec.clone(),
            config,
            seen,
            traces: Vec::new(),
            solved,
        }
    }

    fn request(&self) -> Request<'_> {
        Request {
            domain: self.domain,
            spec: &self.current,
            beam: self.config.beam,
            step: self.traces.len(),
        }
    }

    /// Executes a candidate; `None` if it fails or revisits a state.
    fn try_step(&self, sub: &Subprogram) -> Option<Applied> {
        if sub.domain() != self.domain {
            return None;
        }
        let applied = apply_step(&self.current, sub, &self.config.limits).ok()?;
        let key = match self.domain {
            Domain::DeepCoder => applied.values.clone(),
            Domain::RobustFill => applied.spec.outputs().cloned().collect(),
        };
        (!self.seen.contains(&key)).then_some(applied)
    }

    fn commit(&mut self, applied: Applied, subgoal: Option<Vec<Value>>) {
        let key = match self.domain {
            Domain::DeepCoder => applied.values.clone(),
            Domain::RobustFill => applied.spec.outputs().cloned().collect(),
        };
        self.seen.insert(key);
        self.solved = solves(self.domain, self.original, &applied);
        self.traces.push(StepTrace {
            index: self.traces.len(),
            subgoal,
            subprogram: applied.subprogram,
            values: applied.values,
            spec: applied.spec.clone(),
        });
        self.current = applied.spec;
    }

    /// Accepts the first candidate within the beam that executes.
    fn accept(&mut self, candidates: &[Subprogram], subgoal: Option<&Vec<Value>>) -> bool {
        let beam = self.config.beam;
        match candidates.iter().take(beam).find_map(|c| self.try_step(c)) {
            Some(applied) => {
                self.commit(applied, subgoal.cloned());
                true
            }
            None => false,
        }
    }

    fn finish(self, stop: StopReason, error: Option<String>) -> RunResult {
        let program = (!self.traces.is_empty()).then(|| match self.domain {
            Domain::DeepCoder => {
                let num_inputs = self.original.examples()[0].inputs.len();
                let steps = self
                    .traces
                    .iter()
                    .map(|t| match &t.subprogram {
                        Subprogram::DeepCoder(s) => *s,
                        Subprogram::RobustFill(_) => unreachable!("domain checked on acceptance"),
                    })
                    .collect();
                Program::DeepCoder(DcProgram::new(num_inputs, steps).expect("accepted steps bind fresh variables"))
            }
            Domain::RobustFill => Program::RobustFill(RfProgram::new(
                self.traces
                    .iter()
                    .map(|t| match &t.subprogram {
                        Subprogram::RobustFill(e) => *e,
                        Subprogram::DeepCoder(_) => unreachable!("domain checked on acceptance"),
                    })
                    .collect(),
            )),
        });
        RunResult {
            solved: self.solved,
            program,
            steps_used: self.traces.len(),
            traces: self.traces,
            max_steps: self.config.max_steps,
            beam_size: self.config.beam,
            stop,
            error,
        }
    }

    /// The reason to stop before the next step, if any.
    fn should_stop(&self) -> Option<StopReason> {
        if self.solved {
            Some(StopReason::Solved)
        } else if self.traces.len() >= self.config.max_steps {
            Some(StopReason::StepLimit)
        } else {
            None
        }
    }
}

/// Repeated single-step synthesis against the task outputs.
pub fn run_regism(
    domain: Domain,
    spec: &TaskSpec,
    synthesizer: &mut dyn PredictionBackend,
    config: &RunConfig,
) -> Result<RunResult, EngineError> {
    require(synthesizer, Role::Subprogram, "REGISM")?;
    if config.beam == 0 {
        return Err(EngineError::ZeroBeam);
    }
    let mut run = Run::new(domain, spec, config);
    loop {
        if let Some(stop) = run.should_stop() {
            return Ok(run.finish(stop, None));
        }
        let candidates = match synthesizer.subprograms(&run.request()) {
            Ok(c) => c,
            Err(e) => return Ok(run.finish(StopReason::BackendError, Some(e.to_string()))),
        };
        if !run.accept(&candidates, None) {
            return Ok(run.finish(StopReason::NoExecutableCandidate, None));
        }
    }
}

/// Subgoal prediction, then synthesis against the subtask, per step.
pub fn run_exedec(
    domain: Domain,
    spec: &TaskSpec,
    subgoals: &mut dyn PredictionBackend,
    synthesizer: &mut dyn PredictionBackend,
    config: &RunConfig,
) -> Result<RunResult, EngineError> {
    require(subgoals, Role::Subgoal, "ExeDec")?;
    require(synthesizer, Role::Subprogram, "ExeDec")?;
    if config.beam == 0 {
        return Err(EngineError::ZeroBeam);
    }
    let mut run = Run::new(domain, spec, config);
    loop {
        if let Some(stop) = run.should_stop() {
            return Ok(run.finish(stop, None));
        }
        let mut goals = match subgoals.subgoals(&run.request()) {
            Ok(g) => g,
            Err(e) => return Ok(run.finish(StopReason::BackendError, Some(e.to_string()))),
        };
        goals.truncate(config.beam);
        if let Some((index, g)) = goals.iter().enumerate().find(|(_, g)| g.len() != spec.len()) {
            let e = BackendError::SubgoalArity {
                index,
                expected: spec.len(),
                found: g.len(),
            };
            return Ok(run.finish(StopReason::BackendError, Some(e.to_string())));
        }
        let mut accepted = false;
        for goal in &goals {
            let subtask = run.current.with_outputs(goal.clone()).expect("arity checked");
            let req = Request {
                spec: &subtask,
                ..run.request()
            };
            let candidates = match synthesizer.subprograms(&req) {
                Ok(c) => c,
                Err(e) => return Ok(run.finish(StopReason::BackendError, Some(e.to_string()))),
            };
            if run.accept(&candidates, Some(goal)) {
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Ok(run.finish(StopReason::NoExecutableCandidate, None));
        }
    }
}

/// One synthesizer invocation, no iteration: the first candidate that
/// solves the task, else the first that executes.
pub fn run_single_step(
    domain: Domain,
    spec: &TaskSpec,
    synthesizer: &mut dyn PredictionBackend,
    config: &RunConfig,
) -> Result<RunResult, EngineError> {
    require(synthesizer, Role::Subprogram, "single-step synthesis")?;
    if config.beam == 0 {
        return Err(EngineError::ZeroBeam);
    }
    let mut run = Run::new(domain, spec, config);
    if let Some(stop) = run.should_stop() {
        return Ok(run.finish(stop, None));
    }
    let candidates = match synthesizer.subprograms(&run.request()) {
        Ok(c) => c,
        Err(e) => return Ok(run.finish(StopReason::BackendError, Some(e.to_string()))),
    };
    let executable: Vec<Applied> = candidates
        .iter()
        .take(config.beam)
        .filter_map(|c| run.try_step(c))
        .collect();
    let Some(index) = executable
        .iter()
        .position(|a| solves(domain, spec, a))
        .or((!executable.is_empty()).then_some(0))
    else {
        return Ok(run.finish(StopReason::NoExecutableCandidate, None));
    };
    let applied = executable.into_iter().nth(index).expect("index in range");
    run.commit(applied, None);
    let stop = if run.solved {
        StopReason::Solved
    } else {
        StopReason::StepLimit
    };
    Ok(run.finish(stop, None))
}

/// Re-executes an assembled program from the original specification and
/// returns its final per-example values.
pub fn replay(domain: Domain, spec: &TaskSpec, program: &Program, limits: &Limits) -> Result<Vec<Value>, UpdateError> {
    let mut current = spec.clone();
    let mut produced: Vec<String> = vec![String::new(); spec.len()];
    let mut last = Vec::new();
    for sub in program.steps() {
        if sub.domain() != domain {
            return Err(UpdateError::Domain {
                expected: domain,
                found: sub.domain(),
            });
        }
        let applied = apply_step(&current, &sub, limits)?;
        if domain == Domain::RobustFill {
            for (acc, v) in produced.iter_mut().zip(&applied.values) {
                acc.push_str(v.as_str().expect("string steps produce strings"));
            }
        }
        last = applied.values;
        current = applied.spec;
    }
    Ok(match domain {
        Domain::DeepCoder => last,
        Domain::RobustFill => produced.into_iter().map(Value::Str).collect(),
    })
}
