//! List-domain tasks.
//!
//! Programs are grown one step at a time against the sampled example
//! inputs. At each step every candidate is executed, candidates are grouped
//! by the value tuple they produce, and only the first candidate of each
//! group in enumeration order may be chosen, so each ground-truth step is the
//! canonical way to reach its intermediate state. Steps must produce a new
//! state, and every intermediate variable must be read by a later step.

use indexmap::IndexMap;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{clip, Category, GenConfig, GenError, Split};
use crate::deepcoder::{enumerate_steps, eval_step, Combiner, DcOperation, DcProgram, DcStep, Lambda, OpVariant, Var};
use crate::spec::{Example, TaskSpec};
use crate::value::{Value, ValueKind};

/// First-order operations and `Map`.
pub fn concept_a() -> Vec<DcOperation> {
    DcOperation::ALL
        .into_iter()
        .filter(|op| !op.is_higher_order() || *op == DcOperation::Map)
        .collect()
}

/// Higher-order operations.
pub fn concept_b() -> Vec<DcOperation> {
    DcOperation::ALL.into_iter().filter(|op| op.is_higher_order()).collect()
}

const TRAIN_SCANL1: [Combiner; 2] = [Combiner::Sub, Combiner::Min];
const TEST_SCANL1: [Combiner; 3] = [Combiner::Add, Combiner::Mul, Combiner::Max];

fn is_scanl1_with(v: OpVariant, lambdas: &[Combiner]) -> bool {
    v.op == DcOperation::Scanl1 && matches!(v.lambda, Some(Lambda::Combiner(c)) if lambdas.contains(&c))
}

fn halves(len: usize) -> usize {
    len / 2
}

pub fn dc_category_holds(category: Category, split: Split, p: &DcProgram) -> bool {
    let ops: Vec<DcOperation> = p.steps().iter().map(|s| s.op.operation()).collect();
    let variants: Vec<OpVariant> = p.steps().iter().map(|s| s.op.variant()).collect();
    let (a, b) = (concept_a(), concept_b());
    let len = ops.len();
    let all_in = |ops: &[DcOperation], set: &[DcOperation]| ops.iter().all(|o| set.contains(o));
    let has_scanl1 = ops.contains(&DcOperation::Scanl1);
    match (category, split) {
        (Category::TrainDistribution, _) | (Category::LengthGeneralization, Split::Train) => (1..=4).contains(&len),
        (Category::LengthGeneralization, Split::Test) => len == 5,
        (Category::ComposeDifferentConcepts, Split::Train) => {
            (1..=4).contains(&len) && (all_in(&ops, &a) || all_in(&ops, &b))
        }
        (Category::ComposeDifferentConcepts, Split::Test) => {
            (1..=4).contains(&len) && ops.iter().any(|o| !b.contains(o)) && ops.iter().any(|o| !a.contains(o))
        }
        (Category::SwitchConceptOrder, split) => {
            let (first, second) = ops.split_at(halves(len));
            let (x, y) = match split {
                Split::Train => (&a, &b),
                Split::Test => (&b, &a),
            };
            (1..=4).contains(&len) && all_in(first, x) && all_in(second, y)
        }
        (Category::ComposeNewOperation, Split::Train) => {
            (len == 1 && ops[0] == DcOperation::Scanl1) || ((2..=4).contains(&len) && !has_scanl1)
        }
        (Category::ComposeNewOperation, Split::Test) => (2..=4).contains(&len) && has_scanl1,
        (Category::AddOperationFunctionality, Split::Train) => {
            let mut scans = variants.iter().filter(|v| v.op == DcOperation::Scanl1);
            (1..=4).contains(&len) && scans.all(|v| is_scanl1_with(*v, &TRAIN_SCANL1))
        }
        (Category::AddOperationFunctionality, Split::Test) => {
            (1..=4).contains(&len) && variants.iter().any(|v| is_scanl1_with(*v, &TEST_SCANL1))
        }
    }
}

/// Allowed operation variants for each step of one program.
fn plan(
    category: Category,
    split: Split,
    stratum: bool,
    config: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<OpVariant>>, GenError> {
    let all = OpVariant::all();
    let only = |ops: &[DcOperation]| OpVariant::of(ops);
    let without = |pred: &dyn Fn(OpVariant) -> bool| all.iter().copied().filter(|v| !pred(*v)).collect::<Vec<_>>();
    let length = |range, rng: &mut ChaCha8Rng| -> Result<usize, GenError> {
        let r = clip(range, config, category)?;
        Ok(rng.random_range(r))
    };
    let a = only(&concept_a());
    let b = only(&concept_b());
    Ok(match (category, split) {
        (Category::TrainDistribution, _) | (Category::LengthGeneralization, Split::Train) => {
            vec![all.clone(); length(1..=4, rng)?]
        }
        (Category::LengthGeneralization, Split::Test) => vec![all.clone(); length(5..=5, rng)?],
        (Category::ComposeDifferentConcepts, Split::Train) => {
            let concept = if rng.random_bool(0.5) { a } else { b };
            vec![concept; length(1..=4, rng)?]
        }
        (Category::ComposeDifferentConcepts, Split::Test) => {
            let len = length(2..=4, rng)?;
            let mut positions = vec![all.clone(); len];
            let p = rng.random_range(0..len);
            let q = (p + rng.random_range(1..len)) % len;
            positions[p] = only(
                &DcOperation::ALL
                    .into_iter()
                    .filter(|o| !o.is_higher_order())
                    .collect::<Vec<_>>(),
            );
            positions[q] = only(
                &concept_b()
                    .into_iter()
                    .filter(|o| *o != DcOperation::Map)
                    .collect::<Vec<_>>(),
            );
            positions
        }
        (Category::SwitchConceptOrder, split) => {
            let len = length(1..=4, rng)?;
            let (x, y) = match split {
                Split::Train => (a, b),
                Split::Test => (b, a),
            };
            (0..len)
                .map(|i| if i < halves(len) { x.clone() } else { y.clone() })
                .collect()
        }
        (Category::ComposeNewOperation, Split::Train) if stratum => {
            vec![only(&[DcOperation::Scanl1]); length(1..=1, rng)?]
        }
        (Category::ComposeNewOperation, Split::Train) => {
            vec![without(&|v| v.op == DcOperation::Scanl1); length(2..=4, rng)?]
        }
        (Category::ComposeNewOperation, Split::Test) => {
            let len = length(2..=4, rng)?;
            let mut positions = vec![all.clone(); len];
            positions[rng.random_range(0..len)] = only(&[DcOperation::Scanl1]);
            positions
        }
        (Category::AddOperationFunctionality, Split::Train) => {
            let banned = |v: OpVariant| v.op == DcOperation::Scanl1 && !is_scanl1_with(v, &TRAIN_SCANL1);
            vec![without(&banned); length(1..=4, rng)?]
        }
        (Category::AddOperationFunctionality, Split::Test) => {
            let len = length(1..=4, rng)?;
            let mut positions = vec![all.clone(); len];
            positions[rng.random_range(0..len)] = all
                .iter()
                .copied()
                .filter(|v| is_scanl1_with(*v, &TEST_SCANL1))
                .collect();
            positions
        }
    })
}

/// One to two inputs, at least one a list; lists of length 1 to 8 with
/// elements in [-50, 50], integers in [0, 5].
fn sample_inputs(rng: &mut ChaCha8Rng, n_examples: usize) -> Vec<Vec<Value>> {
    let kinds: Vec<ValueKind> = match rng.random_range(0..4) {
        0 | 1 => vec![ValueKind::List],
        2 => vec![ValueKind::List, ValueKind::List],
        _ => vec![ValueKind::Int, ValueKind::List],
    };
    (0..n_examples)
        .map(|_| {
            kinds
                .iter()
                .map(|k| match k {
                    ValueKind::Int => Value::Int(rng.random_range(0..=5)),
                    _ => {
                        let len = rng.random_range(1..=8);
                        Value::List((0..len).map(|_| rng.random_range(-50..=50)).collect())
                    }
                })
                .collect()
        })
        .collect()
}

fn distinct_count(values: &[Value]) -> usize {
    let mut v: Vec<&Value> = values.iter().collect();
    v.sort();
    v.dedup();
    v.len()
}

/// Every executable step over the environment, keyed by the value tuple it
/// produces; each key maps to the first step in enumeration order.
pub(crate) fn canonical_steps(env: &[Vec<Value>], limits: &crate::value::Limits) -> IndexMap<Vec<Value>, DcStep> {
    let kinds: Vec<ValueKind> = env[0].iter().map(Value::kind).collect();
    let mut table: IndexMap<Vec<Value>, DcStep> = IndexMap::new();
    for step in enumerate_steps(&kinds, &OpVariant::all()) {
        let values: Option<Vec<Value>> = env.iter().map(|vals| eval_step(&step.op, vals, limits).ok()).collect();
        if let Some(values) = values {
            table.entry(values).or_insert(step);
        }
    }
    table
}

fn grow(
    positions: &[Vec<OpVariant>],
    inputs: Vec<Vec<Value>>,
    config: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Option<(DcProgram, Vec<Vec<Value>>)> {
    let num_inputs = inputs[0].len();
    let mut env = inputs;
    let mut program = DcProgram::new(num_inputs, Vec::new()).expect("empty program is well scoped");
    // Assigned variables not yet read by a later step.
    let mut pending: Vec<Var> = Vec::new();
    for (pos, allowed) in positions.iter().enumerate() {
        let remaining = positions.len() - pos - 1;
        let states: Vec<Vec<Value>> = (0..env[0].len())
            .map(|v| env.iter().map(|vals| vals[v].clone()).collect())
            .collect();
        let options: Vec<(DcStep, Vec<Value>)> = canonical_steps(&env, &config.limits)
            .into_iter()
            .filter(|(values, step)| {
                if !allowed.contains(&step.op.variant()) || states.contains(values) {
                    return false;
                }
                let args = step.op.args();
                let left = pending.iter().filter(|v| !args.contains(v)).count() + 1;
                if remaining == 0 {
                    left == 1 && distinct_count(values) >= 2
                } else {
                    left <= 1 + remaining
                }
            })
            .map(|(values, step)| (step, values))
            .collect();
        let mut variants: Vec<OpVariant> = options.iter().map(|(s, _)| s.op.variant()).collect();
        variants.sort();
        variants.dedup();
        let variant = *variants.choose(rng)?;
        let of_variant: Vec<&(DcStep, Vec<Value>)> =
            options.iter().filter(|(s, _)| s.op.variant() == variant).collect();
        let (step, values) = (*of_variant.choose(rng)?).clone();
        let args = step.op.args();
        pending.retain(|v| !args.contains(v));
        pending.push(step.target);
        program.push(step).ok()?;
        for (vals, value) in env.iter_mut().zip(values) {
            vals.push(value);
        }
    }
    Some((program, env))
}

pub(super) fn sample(
    category: Category,
    split: Split,
    stratum: bool,
    config: &GenConfig,
    rng: &mut ChaCha8Rng,
    index: u64,
) -> Result<(TaskSpec, crate::program::Program), GenError> {
    for _ in 0..config.max_attempts {
        let positions = plan(category, split, stratum, config, rng)?;
        let inputs = sample_inputs(rng, config.n_examples);
        let num_inputs = inputs[0].len();
        let Some((program, env)) = grow(&positions, inputs, config, rng) else {
            continue;
        };
        if !dc_category_holds(category, split, &program) {
            continue;
        }
        let examples = env
            .into_iter()
            .map(|mut vals| {
                let output = vals.last().cloned().expect("at least one step");
                vals.truncate(num_inputs);
                Example::new(
                    vals.into_iter()
                        .enumerate()
                        .map(|(i, v)| (Var(i as u16).to_string(), v)),
                    output,
                )
            })
            .collect();
        let spec = TaskSpec::new(examples).expect("examples share one signature");
        return Ok((spec, crate::program::Program::DeepCoder(program)));
    }
    Err(GenError::Exhausted {
        index,
        attempts: config.max_attempts,
    })
}
