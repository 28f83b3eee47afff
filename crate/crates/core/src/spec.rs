//! Input/output example specifications.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("a specification needs at least one example")]
    Empty,
    #[error("example {index} binds {found:?}, expected {expected:?}")]
    InputNames {
        index: usize,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("variable {var} is {found:?} in example {index} but {expected:?} in example 0")]
    InputKind {
        var: String,
        index: usize,
        expected: ValueKind,
        found: ValueKind,
    },
    #[error("got {found} values for {expected} examples")]
    LengthMismatch { expected: usize, found: usize },
}

/// One input/output pair. Inputs are named and ordered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub inputs: IndexMap<String, Value>,
    pub output: Value,
}

impl Example {
    pub fn new<I, S>(inputs: I, output: Value) -> Self
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        Example {
            inputs: inputs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            output,
        }
    }
}

/// A programming-by-example task: a non-empty list of examples that all bind
/// the same input variables, with one value variant per variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaskSpec {
    examples: Vec<Example>,
}

impl TaskSpec {
    pub fn new(examples: Vec<Example>) -> Result<Self, SpecError> {
        let first = examples.first().ok_or(SpecError::Empty)?;
        for (index, example) in examples.iter().enumerate().skip(1) {
            if !example.inputs.keys().eq(first.inputs.keys()) {
                return Err(SpecError::InputNames {
                    index,
                    expected: first.inputs.keys().cloned().collect(),
                    found: example.inputs.keys().cloned().collect(),
                });
            }
            for ((var, expected), found) in first.inputs.iter().zip(example.inputs.values()) {
                if expected.kind() != found.kind() {
                    return Err(SpecError::InputKind {
                        var: var.clone(),
                        index,
                        expected: expected.kind(),
                        found: found.kind(),
                    });
                }
            }
        }
        Ok(TaskSpec { examples })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Value> {
        self.examples.iter().map(|e| &e.output)
    }

    /// Input variable names, in binding order.
    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.examples[0].inputs.keys().map(String::as_str)
    }

    pub fn input_kinds(&self) -> Vec<ValueKind> {
        self.examples[0].inputs.values().map(Value::kind).collect()
    }

    /// Same inputs, new outputs (one per example).
    pub fn with_outputs(&self, outputs: Vec<Value>) -> Result<TaskSpec, SpecError> {
        if outputs.len() != self.examples.len() {
            return Err(SpecError::LengthMismatch {
                expected: self.examples.len(),
                found: outputs.len(),
            });
        }
        let examples = self
            .examples
            .iter()
            .zip(outputs)
            .map(|(e, output)| Example {
                inputs: e.inputs.clone(),
                output,
            })
            .collect();
        Ok(TaskSpec { examples })
    }

    pub fn into_examples(self) -> Vec<Example> {
        self.examples
    }
}

impl<'de> Deserialize<'de> for TaskSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            examples: Vec<Example>,
        }
        let raw = Raw::deserialize(deserializer)?;
        TaskSpec::new(raw.examples).map_err(serde::de::Error::custom)
    }
}

/// True iff `values[i]` equals the output of example `i` for every example.
pub fn spec_satisfied(spec: &TaskSpec, values: &[Value]) -> Result<bool, SpecError> {
    if values.len() != spec.len() {
        return Err(SpecError::LengthMismatch {
            expected: spec.len(),
            found: values.len(),
        });
    }
    Ok(spec.outputs().zip(values).all(|(want, got)| want == got))
}
