//! Python bindings: task generation, the synthesis loops with the built-in
//! backends, scoring, and the DSL parsers and interpreters.

use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};

use exedec_core::deepcoder::eval_program as dc_eval;
use exedec_core::engine::{
    default_max_steps, run_exedec, run_regism, run_single_step, update_spec as core_update_spec, OracleBackend,
    RunConfig, RunResult, TeacherBackend, DEFAULT_BEAM,
};
use exedec_core::metrics::{score_run, StateSource};
use exedec_core::robustfill::eval_expr;
use exedec_core::taskgen::{build_corpus, Category, CorpusRequest, GenConfig, Split};
use exedec_core::{parse_program, Domain, Limits, Program, Subprogram, TaskSpec, Value};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn domain_of(s: &str) -> PyResult<Domain> {
    s.parse().map_err(PyValueError::new_err)
}

fn to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if obj.is_instance_of::<PyBool>() {
        Ok(Value::Bool(obj.extract()?))
    } else if obj.is_instance_of::<PyString>() {
        Ok(Value::Str(obj.extract()?))
    } else if obj.is_instance_of::<PyList>() {
        Ok(Value::List(obj.extract()?))
    } else if let Ok(i) = obj.extract::<i64>() {
        Ok(Value::Int(i))
    } else {
        Err(PyTypeError::new_err("values are int, bool, str, or list of int"))
    }
}

fn from_value<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Int(i) => i.into_pyobject(py)?.into_any(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::List(xs) => PyList::new(py, xs)?.into_any(),
        Value::Str(s) => PyString::new(py, s).into_any(),
    })
}

/// One generated task.
#[pyclass(module = "exedec_lab", frozen)]
struct Task {
    inner: exedec_core::taskgen::Task,
}

#[pymethods]
impl Task {
    #[getter]
    fn id(&self) -> &str {
        &self.inner.id
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.domain.to_string()
    }

    #[getter]
    fn category(&self) -> String {
        self.inner.category.to_string()
    }

    #[getter]
    fn split(&self) -> String {
        self.inner.split.to_string()
    }

    #[getter]
    fn index(&self) -> u64 {
        self.inner.index
    }

    /// Canonical text of the ground-truth program.
    #[getter]
    fn program(&self) -> String {
        self.inner.ground_truth.to_string()
    }

    #[getter]
    fn gt_steps(&self) -> usize {
        self.inner.ground_truth.len()
    }

    /// `[(inputs, output), ...]` with inputs as a dict by variable name.
    #[getter]
    fn examples<'py>(&self, py: Python<'py>) -> PyResult<Vec<(Bound<'py, PyDict>, Bound<'py, PyAny>)>> {
        self.inner
            .spec
            .examples()
            .iter()
            .map(|ex| {
                let inputs = PyDict::new(py);
                for (k, v) in &ex.inputs {
                    inputs.set_item(k, from_value(py, v)?)?;
                }
                Ok((inputs, from_value(py, &ex.output)?))
            })
            .collect()
    }

    /// The corpus line for this task.
    fn to_json(&self) -> String {
        serde_json::to_string(&exedec_core::records::TaskRecord::from(&self.inner)).expect("records serialize")
    }

    fn __repr__(&self) -> String {
        format!(
            "Task({} {} {} #{})",
            self.inner.domain, self.inner.category, self.inner.split, self.inner.index
        )
    }
}

/// The outcome of one synthesis run.
#[pyclass(module = "exedec_lab", frozen)]
struct Run {
    inner: RunResult,
}

#[pymethods]
impl Run {
    #[getter]
    fn solved(&self) -> bool {
        self.inner.solved
    }

    #[getter]
    fn steps_used(&self) -> usize {
        self.inner.steps_used
    }

    #[getter]
    fn stop(&self) -> String {
        serde_json::to_value(self.inner.stop)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }

    #[getter]
    fn error(&self) -> Option<String> {
        self.inner.error.clone()
    }

    #[getter]
    fn program(&self) -> Option<String> {
        self.inner.program.as_ref().map(ToString::to_string)
    }

    /// Accepted steps, in order.
    #[getter]
    fn steps(&self) -> Vec<String> {
        self.inner.traces.iter().map(|t| t.subprogram.to_string()).collect()
    }

    /// Per-step executed values, one per example.
    #[getter]
    fn values<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        self.inner
            .traces
            .iter()
            .map(|t| t.values.iter().map(|v| from_value(py, v)).collect())
            .collect()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("results serialize")
    }

    fn __repr__(&self) -> String {
        format!(
            "Run(solved={}, steps_used={})",
            self.inner.solved, self.inner.steps_used
        )
    }
}

#[pyfunction]
#[pyo3(signature = (domain, category, split, count, seed=0, lengths=None, examples=3))]
fn generate(
    domain: &str,
    category: &str,
    split: &str,
    count: u64,
    seed: u64,
    lengths: Option<(usize, usize)>,
    examples: usize,
) -> PyResult<Vec<Task>> {
    let req = CorpusRequest {
        domain: domain_of(domain)?,
        category: category.parse::<Category>().map_err(value_err)?,
        split: split.parse::<Split>().map_err(value_err)?,
        count,
        seed,
    };
    let config = GenConfig {
        n_examples: examples,
        lengths: lengths.map(|(a, b)| a..=b),
        ..GenConfig::default()
    };
    let tasks = build_corpus(&req, &config).map_err(value_err)?;
    Ok(tasks.into_iter().map(|inner| Task { inner }).collect())
}

/// Runs a loop with the built-in backends: `regism` and `single-step` use
/// the exhaustive oracle, `exedec` adds ground-truth subgoals.
#[pyfunction]
#[pyo3(signature = (task, mode="regism", beam=DEFAULT_BEAM, max_steps=None))]
fn run(task: &Task, mode: &str, beam: usize, max_steps: Option<usize>) -> PyResult<Run> {
    let t = &task.inner;
    let config = RunConfig::new(
        max_steps.unwrap_or_else(|| default_max_steps(t.ground_truth.len())),
        beam,
    );
    let mut oracle = OracleBackend::new();
    let result = match mode {
        "regism" => run_regism(t.domain, &t.spec, &mut oracle, &config),
        "single-step" => run_single_step(t.domain, &t.spec, &mut oracle, &config),
        "exedec" => {
            let mut teacher = TeacherBackend::new(t.ground_truth.clone());
            run_exedec(t.domain, &t.spec, &mut teacher, &mut oracle, &config)
        }
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    }
    .map_err(value_err)?;
    Ok(Run { inner: result })
}

/// `(subtask accuracy, subprogram accuracy)` of a run on its task.
#[pyfunction]
#[pyo3(signature = (task, run, predicted_states=false))]
fn score(task: &Task, run: &Run, predicted_states: bool) -> PyResult<(f64, f64)> {
    let source = if predicted_states {
        StateSource::Predicted
    } else {
        StateSource::Executed
    };
    let s = score_run(&run.inner, &task.inner.ground_truth, &task.inner.spec, source).map_err(value_err)?;
    Ok((s.subtask_accuracy(), s.subprogram_accuracy()))
}

/// Parses a program and renders it canonically.
#[pyfunction]
fn canonical(text: &str, domain: &str) -> PyResult<String> {
    Ok(parse_program(text, domain_of(domain)?).map_err(value_err)?.to_string())
}

/// Per-step values of a program on one input: a list of input values for
/// the list domain, a string for the string domain.
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    text: &str,
    domain: &str,
    inputs: &Bound<'py, PyAny>,
) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let values = match parse_program(text, domain_of(domain)?).map_err(value_err)? {
        Program::DeepCoder(p) => {
            let inputs: Vec<Value> = inputs.try_iter()?.map(|x| to_value(&x?)).collect::<PyResult<_>>()?;
            dc_eval(&p, &inputs, &Limits::DEFAULT).map_err(value_err)?
        }
        Program::RobustFill(p) => {
            let x: String = inputs.extract()?;
            p.exprs()
                .iter()
                .map(|e| eval_expr(e, &x).map(Value::Str))
                .collect::<Result<_, _>>()
                .map_err(value_err)?
        }
    };
    values.iter().map(|v| from_value(py, v)).collect()
}

/// Applies one step to a task's examples and returns the updated examples
/// as a task.
#[pyfunction]
fn update_spec(task: &Task, step: &str) -> PyResult<Task> {
    let t = &task.inner;
    let sub = Subprogram::parse(step, t.domain).map_err(value_err)?;
    let spec: TaskSpec = core_update_spec(&t.spec, &sub, t.domain).map_err(value_err)?;
    Ok(Task {
        inner: exedec_core::taskgen::Task { spec, ..t.clone() },
    })
}

#[pymodule]
fn exedec_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Task>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(update_spec, m)?)?;
    Ok(())
}
