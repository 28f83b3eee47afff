use thiserror::Error;

use super::{DcOp, DcProgram, DcStep, Var};
use crate::value::{Limits, Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("{0} is unbound")]
    Unbound(Var),
    #[error("{var} holds {found:?}, expected {expected:?}")]
    Type {
        var: Var,
        expected: ValueKind,
        found: ValueKind,
    },
    #[error("empty list")]
    EmptyList,
    #[error("index {index} out of range for a list of length {len}")]
    Index { index: i64, len: usize },
    #[error("result outside the configured value range")]
    ValueRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("a program needs at least one step")]
    Empty,
    #[error("expected {expected} inputs, got {found}")]
    Inputs { expected: usize, found: usize },
    #[error("step {step}: {error}")]
    Step { step: usize, error: StepError },
}

fn list(env: &[Value], var: Var) -> Result<&[i64], StepError> {
    match env.get(var.index()) {
        None => Err(StepError::Unbound(var)),
        Some(Value::List(xs)) => Ok(xs),
        Some(other) => Err(StepError::Type {
            var,
            expected: ValueKind::List,
            found: other.kind(),
        }),
    }
}

fn int(env: &[Value], var: Var) -> Result<i64, StepError> {
    match env.get(var.index()) {
        None => Err(StepError::Unbound(var)),
        Some(Value::Int(n)) => Ok(*n),
        Some(other) => Err(StepError::Type {
            var,
            expected: ValueKind::Int,
            found: other.kind(),
        }),
    }
}

fn clamp_count(n: i64, len: usize) -> usize {
    n.clamp(0, len as i64) as usize
}

/// Evaluates one operation against an environment indexed by variable.
/// The environment is not modified; the caller binds the result.
pub fn eval_step(op: &DcOp, env: &[Value], limits: &Limits) -> Result<Value, StepError> {
    let value = match *op {
        DcOp::Head(l) => Value::Int(*list(env, l)?.first().ok_or(StepError::EmptyList)?),
        DcOp::Last(l) => Value::Int(*list(env, l)?.last().ok_or(StepError::EmptyList)?),
        DcOp::Access(n, l) => {
            let (n, xs) = (int(env, n)?, list(env, l)?);
            let item = usize::try_from(n).ok().and_then(|i| xs.get(i));
            Value::Int(*item.ok_or(StepError::Index {
                index: n,
                len: xs.len(),
            })?)
        }
        DcOp::Minimum(l) => Value::Int(*list(env, l)?.iter().min().ok_or(StepError::EmptyList)?),
        DcOp::Maximum(l) => Value::Int(*list(env, l)?.iter().max().ok_or(StepError::EmptyList)?),
        DcOp::Sum(l) => Value::Int(
            list(env, l)?
                .iter()
                .try_fold(0i64, |acc, &x| acc.checked_add(x))
                .ok_or(StepError::ValueRange)?,
        ),
        DcOp::Take(n, l) => {
            let (n, xs) = (int(env, n)?, list(env, l)?);
            Value::List(xs[..clamp_count(n, xs.len())].to_vec())
        }
        DcOp::Drop(n, l) => {
            let (n, xs) = (int(env, n)?, list(env, l)?);
            Value::List(xs[clamp_count(n, xs.len())..].to_vec())
        }
        DcOp::Reverse(l) => Value::List(list(env, l)?.iter().rev().copied().collect()),
        DcOp::Sort(l) => {
            let mut xs = list(env, l)?.to_vec();
            xs.sort_unstable();
            Value::List(xs)
        }
        DcOp::Map(f, l) => Value::List(
            list(env, l)?
                .iter()
                .map(|&x| f.apply(x))
                .collect::<Option<_>>()
                .ok_or(StepError::ValueRange)?,
        ),
        DcOp::Filter(p, l) => Value::List(list(env, l)?.iter().copied().filter(|&x| p.test(x)).collect()),
        DcOp::Count(p, l) => Value::Int(list(env, l)?.iter().filter(|&&x| p.test(x)).count() as i64),
        DcOp::Zip(c, a, b) => {
            let (xs, ys) = (list(env, a)?, list(env, b)?);
            Value::List(
                xs.iter()
                    .zip(ys)
                    .map(|(&x, &y)| c.apply(x, y))
                    .collect::<Option<_>>()
                    .ok_or(StepError::ValueRange)?,
            )
        }
        DcOp::Scanl1(c, l) => {
            let xs = list(env, l)?;
            let mut out = Vec::with_capacity(xs.len());
            for &x in xs {
                let next = match out.last() {
                    None => x,
                    Some(&acc) => c.apply(acc, x).ok_or(StepError::ValueRange)?,
                };
                if !limits.int_in_range(next) {
                    return Err(StepError::ValueRange);
                }
                out.push(next);
            }
            Value::List(out)
        }
    };
    if limits.admits(&value) {
        Ok(value)
    } else {
        Err(StepError::ValueRange)
    }
}

/// Runs a program on its inputs and returns the value of every assigned
/// variable in order; the last one is the program output.
pub fn eval_program(program: &DcProgram, inputs: &[Value], limits: &Limits) -> Result<Vec<Value>, ProgramError> {
    if program.is_empty() {
        return Err(ProgramError::Empty);
    }
    if inputs.len() != program.num_inputs() {
        return Err(ProgramError::Inputs {
            expected: program.num_inputs(),
            found: inputs.len(),
        });
    }
    let mut env = inputs.to_vec();
    for (step, DcStep { op, .. }) in program.steps().iter().enumerate() {
        let value = eval_step(op, &env, limits).map_err(|error| ProgramError::Step { step, error })?;
        env.push(value);
    }
    Ok(env.split_off(inputs.len()))
}
