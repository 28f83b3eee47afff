use std::collections::VecDeque;

use exedec_core::engine::{
    apply_step, replay, run_exedec, run_regism, run_single_step, update_spec, BackendError, Capabilities, EngineError,
    OracleBackend, PredictionBackend, Request, Role, RunConfig, StopReason, TeacherBackend, UpdateError,
};
use exedec_core::metrics::{score_run, StateSource};
use exedec_core::taskgen::{build_corpus, Category, CorpusRequest, GenConfig, Split};
use exedec_core::{parse_program, Domain, Example, Limits, Subprogram, TaskSpec, Value};

fn list(xs: &[i64]) -> Value {
    Value::List(xs.to_vec())
}

fn dc_spec(pairs: &[(&[i64], &[i64])]) -> TaskSpec {
    TaskSpec::new(
        pairs
            .iter()
            .map(|(i, o)| Example::new([("x0", list(i))], list(o)))
            .collect(),
    )
    .unwrap()
}

fn rf_spec(pairs: &[(&str, &str)]) -> TaskSpec {
    TaskSpec::new(
        pairs
            .iter()
            .map(|(i, o)| Example::new([("x", Value::from(*i))], Value::from(*o)))
            .collect(),
    )
    .unwrap()
}

/// Answers from fixed queues, recording what it was asked.
#[derive(Default)]
struct Scripted {
    subgoals: VecDeque<Vec<Vec<Value>>>,
    subprograms: VecDeque<Vec<&'static str>>,
    domain: Option<Domain>,
    asked: Vec<(Role, usize, Vec<Value>)>,
}

impl Scripted {
    fn dc() -> Self {
        Scripted {
            domain: Some(Domain::DeepCoder),
            ..Default::default()
        }
    }
}

impl PredictionBackend for Scripted {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            subgoal: true,
            subprogram: true,
        }
    }

    fn subgoals(&mut self, req: &Request<'_>) -> Result<Vec<Vec<Value>>, BackendError> {
        self.asked
            .push((Role::Subgoal, req.step, req.spec.outputs().cloned().collect()));
        self.subgoals
            .pop_front()
            .ok_or(BackendError::Remote("out of subgoals".into()))
    }

    fn subprograms(&mut self, req: &Request<'_>) -> Result<Vec<Subprogram>, BackendError> {
        self.asked
            .push((Role::Subprogram, req.step, req.spec.outputs().cloned().collect()));
        let texts = self
            .subprograms
            .pop_front()
            .ok_or(BackendError::Remote("out of subprograms".into()))?;
        Ok(texts
            .into_iter()
            .map(|t| Subprogram::parse(t, self.domain.unwrap()).unwrap())
            .collect())
    }
}

#[test]
fn misleading_subgoals_still_reach_the_output() {
    let spec = dc_spec(&[(&[42, -48], &[42, 42])]);
    let mut b = Scripted::dc();
    b.subgoals = VecDeque::from([vec![vec![list(&[-48, 42])]], vec![vec![list(&[48, 42])]]]);
    b.subprograms = VecDeque::from([vec!["x1 = Sort x0"], vec!["x9 = Zip (max) x0 x1"]]);
    let cell = std::cell::RefCell::new(b);
    let run = run_exedec(
        Domain::DeepCoder,
        &spec,
        &mut exedec_core::engine::Shared(&cell),
        &mut exedec_core::engine::Shared(&cell),
        &RunConfig::new(5, 10),
    )
    .unwrap();
    assert!(run.solved);
    assert_eq!(run.stop, StopReason::Solved);
    assert_eq!(run.steps_used, 2);
    assert_eq!(run.program.unwrap().to_string(), "x1 = Sort x0\nx2 = Zip (max) x0 x1");
    assert_eq!(run.traces[0].values, [list(&[-48, 42])]);
    assert_eq!(run.traces[1].values, [list(&[42, 42])]);
    assert_eq!(run.traces[1].subgoal, Some(vec![list(&[48, 42])]));
    // The synthesizer saw each subgoal as its target.
    let b = cell.into_inner();
    assert_eq!(b.asked[1], (Role::Subprogram, 0, vec![list(&[-48, 42])]));
    assert_eq!(b.asked[3], (Role::Subprogram, 1, vec![list(&[48, 42])]));

    let gt = parse_program("x1 = Scanl1 (max) x0", Domain::DeepCoder).unwrap();
    let run = {
        let mut b = Scripted::dc();
        b.subgoals = VecDeque::from([vec![vec![list(&[-48, 42])]], vec![vec![list(&[48, 42])]]]);
        b.subprograms = VecDeque::from([vec!["x1 = Sort x0"], vec!["x2 = Zip (max) x0 x1"]]);
        let cell = std::cell::RefCell::new(b);
        let mut s = exedec_core::engine::Shared(&cell);
        let mut t = exedec_core::engine::Shared(&cell);
        run_exedec(Domain::DeepCoder, &spec, &mut s, &mut t, &RunConfig::new(5, 10)).unwrap()
    };
    let executed = score_run(&run, &gt, &spec, StateSource::Executed).unwrap();
    let predicted = score_run(&run, &gt, &spec, StateSource::Predicted).unwrap();
    assert_eq!(
        (executed.subtask_accuracy(), executed.subprogram_accuracy()),
        (1.0, 0.0)
    );
    assert_eq!(predicted.subtask_accuracy(), 0.0);
}

#[test]
fn list_update_binds_a_fresh_variable() {
    let spec = dc_spec(&[(&[3, 1, 2], &[1]), (&[5, 4], &[4])]);
    let sub = Subprogram::parse("x7 = Sort x0", Domain::DeepCoder).unwrap();
    let next = update_spec(&spec, &sub, Domain::DeepCoder).unwrap();
    let ex = &next.examples()[0];
    assert_eq!(ex.inputs.keys().collect::<Vec<_>>(), ["x0", "x1"]);
    assert_eq!(ex.inputs["x1"], list(&[1, 2, 3]));
    assert_eq!(ex.output, list(&[1]));
    let applied = apply_step(&spec, &sub, &Limits::DEFAULT).unwrap();
    assert_eq!(applied.subprogram.to_string(), "x1 = Sort x0");
}

#[test]
fn string_update_strips_the_produced_prefix() {
    let spec = rf_spec(&[("hello world", "hello!"), ("ab cd", "ab!")]);
    let sub = Subprogram::parse("GetToken(WORD, 1)", Domain::RobustFill).unwrap();
    let next = update_spec(&spec, &sub, Domain::RobustFill).unwrap();
    assert_eq!(
        next.outputs().cloned().collect::<Vec<_>>(),
        [Value::from("!"), Value::from("!")]
    );
    assert_eq!(next.examples()[0].inputs["x"], Value::from("hello world"));

    let wrong = Subprogram::parse("GetToken(WORD, -1)", Domain::RobustFill).unwrap();
    assert!(matches!(
        update_spec(&spec, &wrong, Domain::RobustFill),
        Err(UpdateError::Prefix { example: 0, .. })
    ));
    assert!(matches!(
        update_spec(&spec, &sub, Domain::DeepCoder),
        Err(UpdateError::Domain { .. })
    ));
}

#[test]
fn zero_step_budget_stops_immediately() {
    let spec = dc_spec(&[(&[1, 2], &[2, 1])]);
    let run = run_regism(
        Domain::DeepCoder,
        &spec,
        &mut OracleBackend::new(),
        &RunConfig::new(0, 10),
    )
    .unwrap();
    assert_eq!(
        (run.solved, run.steps_used, run.stop),
        (false, 0, StopReason::StepLimit)
    );
    assert!(run.program.is_none());
}

#[test]
fn empty_string_targets_are_solved_without_steps() {
    let spec = rf_spec(&[("abc", ""), ("de", "")]);
    let run = run_regism(
        Domain::RobustFill,
        &spec,
        &mut OracleBackend::new(),
        &RunConfig::new(5, 10),
    )
    .unwrap();
    assert!(run.solved);
    assert_eq!(run.steps_used, 0);
}

#[test]
fn capabilities_and_beam_are_checked() {
    let spec = dc_spec(&[(&[1, 2], &[2, 1])]);
    let gt = parse_program("x1 = Reverse x0", Domain::DeepCoder).unwrap();
    let config = RunConfig::new(5, 10);
    let err = run_regism(Domain::DeepCoder, &spec, &mut TeacherBackend::new(gt.clone()), &config).unwrap_err();
    assert!(matches!(
        err,
        EngineError::Capability {
            role: Role::Subprogram,
            ..
        }
    ));
    let err = run_exedec(
        Domain::DeepCoder,
        &spec,
        &mut OracleBackend::new(),
        &mut OracleBackend::new(),
        &config,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        EngineError::Capability {
            role: Role::Subgoal,
            ..
        }
    ));
    let err = run_regism(
        Domain::DeepCoder,
        &spec,
        &mut OracleBackend::new(),
        &RunConfig::new(5, 0),
    )
    .unwrap_err();
    assert_eq!(err, EngineError::ZeroBeam);
}

#[test]
fn repeated_states_and_out_of_beam_candidates_are_rejected() {
    let spec = dc_spec(&[(&[1, 2], &[9])]);
    let mut b = Scripted::dc();
    // Sorting a sorted list reproduces x0; Reverse is outside a beam of 1.
    b.subprograms = VecDeque::from([vec!["x1 = Sort x0", "x1 = Reverse x0"]]);
    let run = run_regism(Domain::DeepCoder, &spec, &mut b, &RunConfig::new(5, 1)).unwrap();
    assert_eq!((run.steps_used, run.stop), (0, StopReason::NoExecutableCandidate));

    let mut b = Scripted::dc();
    b.subprograms = VecDeque::from([vec!["x1 = Sort x0", "x1 = Reverse x0"]]);
    let run = run_regism(Domain::DeepCoder, &spec, &mut b, &RunConfig::new(1, 2)).unwrap();
    assert_eq!(run.traces[0].subprogram.to_string(), "x1 = Reverse x0");
    assert_eq!(run.stop, StopReason::StepLimit);
}

#[test]
fn backend_failures_end_the_run_with_the_error() {
    let spec = dc_spec(&[(&[1, 2], &[9])]);
    let run = run_regism(Domain::DeepCoder, &spec, &mut Scripted::dc(), &RunConfig::new(5, 10)).unwrap();
    assert_eq!(run.stop, StopReason::BackendError);
    assert!(run.error.unwrap().contains("out of subprograms"));

    let mut b = Scripted::dc();
    b.subgoals = VecDeque::from([vec![vec![list(&[1]), list(&[2])]]]);
    let cell = std::cell::RefCell::new(b);
    let run = run_exedec(
        Domain::DeepCoder,
        &spec,
        &mut exedec_core::engine::Shared(&cell),
        &mut exedec_core::engine::Shared(&cell),
        &RunConfig::new(5, 10),
    )
    .unwrap();
    assert_eq!(run.stop, StopReason::BackendError);
    assert!(run.error.unwrap().contains("subgoal candidate 0"));
}

#[test]
fn single_step_prefers_a_solving_candidate() {
    let spec = dc_spec(&[(&[1, 3, 2], &[2, 3, 1])]);
    let mut b = Scripted::dc();
    b.subprograms = VecDeque::from([vec!["x1 = Sort x0", "x1 = Reverse x0"]]);
    let run = run_single_step(Domain::DeepCoder, &spec, &mut b, &RunConfig::new(5, 10)).unwrap();
    assert!(run.solved);
    assert_eq!(run.program.unwrap().to_string(), "x1 = Reverse x0");

    let mut b = Scripted::dc();
    b.subprograms = VecDeque::from([vec!["x1 = Sort x0"]]);
    let run = run_single_step(Domain::DeepCoder, &spec, &mut b, &RunConfig::new(5, 10)).unwrap();
    assert_eq!(
        (run.solved, run.steps_used, run.stop),
        (false, 1, StopReason::StepLimit)
    );
}

#[test]
fn traces_replay_to_the_same_states() {
    for domain in [Domain::DeepCoder, Domain::RobustFill] {
        let req = CorpusRequest {
            domain,
            category: Category::TrainDistribution,
            split: Split::Train,
            count: 40,
            seed: 8,
        };
        for task in build_corpus(&req, &GenConfig::default()).unwrap() {
            let config = RunConfig::new(6, 10);
            let run = run_regism(domain, &task.spec, &mut OracleBackend::new(), &config).unwrap();
            let mut spec = task.spec.clone();
            for step in &run.traces {
                spec = update_spec(&spec, &step.subprogram, domain).unwrap();
                assert_eq!(spec, step.spec);
            }
            if let Some(program) = &run.program {
                let last = replay(domain, &task.spec, program, &Limits::DEFAULT).unwrap();
                let outputs: Vec<Value> = task.spec.outputs().cloned().collect();
                assert_eq!(last == outputs, run.solved, "{program}");
            }
        }
    }
}

#[test]
fn teacher_runs_match_ground_truth_in_both_domains() {
    for domain in [Domain::DeepCoder, Domain::RobustFill] {
        let req = CorpusRequest {
            domain,
            category: Category::TrainDistribution,
            split: Split::Test,
            count: 30,
            seed: 4,
        };
        for task in build_corpus(&req, &GenConfig::default()).unwrap() {
            let mut teacher = TeacherBackend::new(task.ground_truth.clone());
            let config = RunConfig::new(10, 10);
            let run = run_exedec(domain, &task.spec, &mut teacher, &mut OracleBackend::new(), &config).unwrap();
            assert!(run.solved, "{}", task.ground_truth);
            assert_eq!(run.steps_used, task.ground_truth.len());
            let score = score_run(&run, &task.ground_truth, &task.spec, StateSource::Predicted).unwrap();
            assert_eq!((score.subtask_accuracy(), score.subprogram_accuracy()), (1.0, 1.0));
        }
    }
}

#[test]
fn teacher_refuses_steps_past_the_ground_truth() {
    let spec = dc_spec(&[(&[1, 2], &[2, 1])]);
    let gt = parse_program("x1 = Reverse x0", Domain::DeepCoder).unwrap();
    let mut teacher = TeacherBackend::new(gt);
    let req = Request {
        domain: Domain::DeepCoder,
        spec: &spec,
        beam: 10,
        step: 1,
    };
    assert!(matches!(
        teacher.subgoals(&req),
        Err(BackendError::BeyondGroundTruth { step: 1, len: 1 })
    ));
}
