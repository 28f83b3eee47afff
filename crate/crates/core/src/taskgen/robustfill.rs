//! String-domain tasks.
//!
//! The examples of one task instantiate a shared input format (a few tokens
//! of fixed classes joined by fixed delimiters), so that token-based
//! expressions generalize across them. Expressions are sampled with
//! parameters that resolve on every input, then replaced by the search
//! representative of their outputs; a step whose representative falls
//! outside the step's allowed kinds is resampled.

use std::ops::RangeInclusive;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{clip, Category, GenConfig, GenError, Split};
use crate::program::Program;
use crate::robustfill::search::representative;
use crate::robustfill::{
    eval_expr, find_matches, Boundary, Case, ComposeInner, Index, Modification, Position, RfChar, RfExpr, RfOpKind,
    RfProgram, RfRegex, Substring, DELIMITERS, INPUT_VAR,
};
use crate::spec::{Example, TaskSpec};
use crate::value::Value;

const MAX_INPUT_LEN: usize = 20;
/// Expression draws per step before the whole task is restarted.
const STEP_TRIES: usize = 60;

fn kinds_in(p: &RfProgram) -> Vec<RfOpKind> {
    p.exprs().iter().map(RfExpr::kind).collect()
}

pub fn rf_category_holds(category: Category, split: Split, p: &RfProgram) -> bool {
    let kinds = kinds_in(p);
    let len = kinds.len();
    let substring = |k: &RfOpKind| RfOpKind::SUBSTRING.contains(k);
    let non_substring = |k: &RfOpKind| RfOpKind::MODIFICATION.contains(k) || *k == RfOpKind::ConstStr;
    let compose = |k: &RfOpKind| RfOpKind::COMPOSE.contains(k);
    let half = len / 2;
    match (category, split) {
        (Category::TrainDistribution, _) | (Category::LengthGeneralization, Split::Train) => (1..=6).contains(&len),
        (Category::LengthGeneralization, Split::Test) => (7..=10).contains(&len),
        (Category::ComposeDifferentConcepts, Split::Train) => {
            (2..=6).contains(&len) && (kinds.iter().all(substring) || kinds.iter().all(non_substring))
        }
        (Category::ComposeDifferentConcepts, Split::Test) => {
            (2..=6).contains(&len)
                && kinds.iter().all(|k| !compose(k))
                && kinds.iter().any(substring)
                && kinds.iter().any(non_substring)
        }
        (Category::SwitchConceptOrder, split) => {
            let (first, second) = kinds.split_at(half);
            let ordered = match split {
                Split::Train => first.iter().all(substring) && second.iter().all(non_substring),
                Split::Test => first.iter().all(non_substring) && second.iter().all(substring),
            };
            (2..=6).contains(&len) && ordered
        }
        (Category::ComposeNewOperation, Split::Train) => {
            (len == 1 && compose(&kinds[0])) || ((2..=6).contains(&len) && !kinds.iter().any(compose))
        }
        (Category::ComposeNewOperation, Split::Test) => (2..=6).contains(&len) && kinds.iter().any(compose),
        (Category::AddOperationFunctionality, Split::Train) => {
            (1..=6).contains(&len) && !kinds.contains(&RfOpKind::ComposeSubstring)
        }
        (Category::AddOperationFunctionality, Split::Test) => {
            (1..=6).contains(&len) && kinds.contains(&RfOpKind::ComposeSubstring)
        }
    }
}

fn plan(
    category: Category,
    split: Split,
    stratum: bool,
    config: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<RfOpKind>>, GenError> {
    let all = RfOpKind::ALL.to_vec();
    let substring = RfOpKind::SUBSTRING.to_vec();
    let mut non_substring = RfOpKind::MODIFICATION.to_vec();
    non_substring.push(RfOpKind::ConstStr);
    let no_compose: Vec<RfOpKind> = all.iter().copied().filter(|k| !RfOpKind::COMPOSE.contains(k)).collect();
    let length = |range, rng: &mut ChaCha8Rng| -> Result<usize, GenError> {
        let r = clip(range, config, category)?;
        Ok(rng.random_range(r))
    };
    Ok(match (category, split) {
        (Category::TrainDistribution, _) | (Category::LengthGeneralization, Split::Train) => {
            vec![all; length(1..=6, rng)?]
        }
        (Category::LengthGeneralization, Split::Test) => vec![all; length(7..=10, rng)?],
        (Category::ComposeDifferentConcepts, Split::Train) => {
            let concept = if rng.random_bool(0.5) { substring } else { non_substring };
            vec![concept; length(2..=6, rng)?]
        }
        (Category::ComposeDifferentConcepts, Split::Test) => {
            let len = length(2..=6, rng)?;
            let mut positions = vec![no_compose; len];
            let p = rng.random_range(0..len);
            let q = (p + rng.random_range(1..len)) % len;
            positions[p] = substring;
            positions[q] = non_substring;
            positions
        }
        (Category::SwitchConceptOrder, split) => {
            let len = length(2..=6, rng)?;
            let (x, y) = match split {
                Split::Train => (substring, non_substring),
                Split::Test => (non_substring, substring),
            };
            (0..len)
                .map(|i| if i < len / 2 { x.clone() } else { y.clone() })
                .collect()
        }
        (Category::ComposeNewOperation, Split::Train) if stratum => {
            vec![RfOpKind::COMPOSE.to_vec(); length(1..=1, rng)?]
        }
        (Category::ComposeNewOperation, Split::Train) => vec![no_compose; length(2..=6, rng)?],
        (Category::ComposeNewOperation, Split::Test) => {
            let len = length(2..=6, rng)?;
            let mut positions = vec![all; len];
            positions[rng.random_range(0..len)] = RfOpKind::COMPOSE.to_vec();
            positions
        }
        (Category::AddOperationFunctionality, Split::Train) => {
            let kinds = all.into_iter().filter(|k| *k != RfOpKind::ComposeSubstring).collect();
            vec![kinds; length(1..=6, rng)?]
        }
        (Category::AddOperationFunctionality, Split::Test) => {
            let len = length(1..=6, rng)?;
            let mut positions = vec![all; len];
            positions[rng.random_range(0..len)] = vec![RfOpKind::ComposeSubstring];
            positions
        }
    })
}

#[derive(Clone, Copy)]
enum Token {
    Lower,
    Proper,
    Caps,
    Number,
    Alnum,
}

/// A shared shape for the inputs of one task.
struct Format {
    tokens: Vec<Token>,
    separators: Vec<char>,
    lead: Option<char>,
    trail: Option<char>,
}

fn delimiter(rng: &mut ChaCha8Rng) -> char {
    if rng.random_bool(0.5) {
        ' '
    } else {
        // Inputs stay ASCII, so the acute accent is left out.
        *DELIMITERS
            .iter()
            .copied()
            .filter(char::is_ascii)
            .collect::<Vec<_>>()
            .choose(rng)
            .expect("non-empty")
    }
}

fn sample_format(rng: &mut ChaCha8Rng) -> Format {
    let n = rng.random_range(1..=4);
    let tokens = (0..n)
        .map(|_| {
            *[Token::Lower, Token::Proper, Token::Caps, Token::Number, Token::Alnum]
                .choose(rng)
                .expect("non-empty")
        })
        .collect();
    let separators = (1..n).map(|_| delimiter(rng)).collect();
    let edge = |rng: &mut ChaCha8Rng| {
        rng.random_bool(0.15)
            .then(|| *['(', '[', ' ', '"', '#', '$'].choose(rng).expect("non-empty"))
    };
    let lead = edge(rng);
    let trail = edge(rng);
    Format {
        tokens,
        separators,
        lead,
        trail,
    }
}

fn letters(rng: &mut ChaCha8Rng, base: u8, n: RangeInclusive<usize>) -> String {
    let n = rng.random_range(n);
    (0..n).map(|_| (base + rng.random_range(0..26u8)) as char).collect()
}

fn instantiate(format: &Format, rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    s.extend(format.lead);
    for (i, t) in format.tokens.iter().enumerate() {
        if i > 0 {
            s.push(format.separators[i - 1]);
        }
        match t {
            Token::Lower => s.push_str(&letters(rng, b'a', 2..=6)),
            Token::Proper => {
                s.push_str(&letters(rng, b'A', 1..=1));
                s.push_str(&letters(rng, b'a', 1..=5));
            }
            Token::Caps => s.push_str(&letters(rng, b'A', 2..=4)),
            Token::Number => {
                s.extend((0..rng.random_range(1..=4)).map(|_| char::from(b'0' + rng.random_range(0..10u8))))
            }
            Token::Alnum => s.extend((0..rng.random_range(2..=5)).map(|_| {
                let c = rng.random_range(0..36u8);
                if c < 10 {
                    char::from(b'0' + c)
                } else {
                    char::from(b'a' + c - 10)
                }
            })),
        }
    }
    s.extend(format.trail);
    s.chars().take(MAX_INPUT_LEN).collect()
}

/// Draws expressions whose token references resolve on every input.
struct Sampler<'a> {
    inputs: &'a [Vec<char>],
}

impl Sampler<'_> {
    fn regex(&self, rng: &mut ChaCha8Rng) -> RfRegex {
        // Named classes are far more useful than single delimiters.
        if rng.random_bool(0.6) {
            *RfRegex::NAMED.choose(rng).expect("non-empty")
        } else {
            RfRegex::Delim(RfChar::from_char(delimiter(rng)).expect("delimiters are in the alphabet"))
        }
    }

    fn min_matches(&self, r: RfRegex) -> usize {
        self.inputs.iter().map(|x| find_matches(r, x).len()).min().unwrap_or(0)
    }

    /// A regex with at least one match everywhere and an index valid for all.
    fn regex_index(&self, rng: &mut ChaCha8Rng) -> Option<(RfRegex, Index)> {
        for _ in 0..8 {
            let r = self.regex(rng);
            let n = self.min_matches(r).min(5) as i64;
            if n == 0 {
                continue;
            }
            let k = rng.random_range(1..=n);
            let i = if rng.random_bool(0.7) { k } else { -k };
            return Some((r, Index::new(i).expect("within range")));
        }
        None
    }

    fn char(&self, rng: &mut ChaCha8Rng) -> RfChar {
        if rng.random_bool(0.5) {
            RfChar::from_char(delimiter(rng)).expect("delimiters are in the alphabet")
        } else {
            *RfChar::all().collect::<Vec<_>>().choose(rng).expect("non-empty")
        }
    }

    fn present_char(&self, rng: &mut ChaCha8Rng) -> RfChar {
        let x = &self.inputs[rng.random_range(0..self.inputs.len())];
        x.choose(rng)
            .copied()
            .and_then(RfChar::from_char)
            .unwrap_or_else(|| self.char(rng))
    }

    fn position(&self, rng: &mut ChaCha8Rng) -> Position {
        let max = self.inputs.iter().map(Vec::len).min().unwrap_or(1).max(1) as i64;
        let k = rng.random_range(1..=max);
        Position::new(if rng.random_bool(0.7) { k } else { -k }).expect("within range")
    }

    fn substring(&self, kind: RfOpKind, rng: &mut ChaCha8Rng) -> Option<Substring> {
        Some(match kind {
            RfOpKind::GetToken => {
                let (r, i) = self.regex_index(rng)?;
                Substring::GetToken(r, i)
            }
            RfOpKind::GetUpto => {
                let (r, i) = self.regex_index(rng)?;
                Substring::GetUpto(r, i)
            }
            RfOpKind::GetFrom => {
                let (r, i) = self.regex_index(rng)?;
                Substring::GetFrom(r, i)
            }
            RfOpKind::SubStr => {
                let (a, b) = (self.position(rng), self.position(rng));
                Substring::SubStr(a, b)
            }
            RfOpKind::GetSpan => {
                let (r1, i1) = self.regex_index(rng)?;
                let (r2, i2) = self.regex_index(rng)?;
                let b1 = *Boundary::ALL.choose(rng).expect("non-empty");
                let b2 = *Boundary::ALL.choose(rng).expect("non-empty");
                Substring::GetSpan(r1, i1, b1, r2, i2, b2)
            }
            _ => return None,
        })
    }

    fn modification(&self, kind: RfOpKind, rng: &mut ChaCha8Rng) -> Option<Modification> {
        Some(match kind {
            RfOpKind::ToCase => Modification::ToCase(*Case::ALL.choose(rng).expect("non-empty")),
            RfOpKind::Replace => Modification::Replace(self.present_char(rng), self.char(rng)),
            RfOpKind::Trim => Modification::Trim,
            RfOpKind::GetFirst => {
                let (r, i) = self.regex_index(rng)?;
                Modification::GetFirst(r, i)
            }
            RfOpKind::GetAll => Modification::GetAll(self.regex(rng)),
            RfOpKind::Substitute => {
                let (r, i) = self.regex_index(rng)?;
                Modification::Substitute(r, i, self.char(rng))
            }
            RfOpKind::SubstituteAll => Modification::SubstituteAll(self.regex(rng), self.char(rng)),
            RfOpKind::Remove => {
                let (r, i) = self.regex_index(rng)?;
                Modification::Remove(r, i)
            }
            RfOpKind::RemoveAll => Modification::RemoveAll(self.regex(rng)),
            _ => return None,
        })
    }

    fn expr(&self, kind: RfOpKind, rng: &mut ChaCha8Rng) -> Option<RfExpr> {
        let modification_kinds = RfOpKind::MODIFICATION;
        let substring_kinds = RfOpKind::SUBSTRING;
        Some(match kind {
            RfOpKind::ConstStr => RfExpr::ConstStr(self.char(rng)),
            RfOpKind::ComposeModification | RfOpKind::ComposeSubstring => {
                // Outer parameters are drawn against the inputs, which only
                // approximates the intermediate string; failures resample.
                let outer = self.modification(*modification_kinds.choose(rng).expect("non-empty"), rng)?;
                let inner = if kind == RfOpKind::ComposeSubstring {
                    ComposeInner::Substring(self.substring(*substring_kinds.choose(rng).expect("non-empty"), rng)?)
                } else {
                    ComposeInner::Modification(
                        self.modification(*modification_kinds.choose(rng).expect("non-empty"), rng)?,
                    )
                };
                RfExpr::Compose(outer, inner)
            }
            k if substring_kinds.contains(&k) => RfExpr::Substring(self.substring(k, rng)?),
            k => RfExpr::Modification(self.modification(k, rng)?),
        })
    }
}

fn grow(positions: &[Vec<RfOpKind>], inputs: &[String], rng: &mut ChaCha8Rng) -> Option<(RfProgram, Vec<String>)> {
    let chars: Vec<Vec<char>> = inputs.iter().map(|s| s.chars().collect()).collect();
    let sampler = Sampler { inputs: &chars };
    let input_refs: Vec<&str> = inputs.iter().map(String::as_str).collect();
    let mut program = RfProgram::new(Vec::new());
    let mut outputs = vec![String::new(); inputs.len()];
    for allowed in positions {
        let mut chosen = None;
        for _ in 0..STEP_TRIES {
            let kind = *allowed.choose(rng).expect("non-empty kind set");
            let Some(e) = sampler.expr(kind, rng) else { continue };
            let Ok(outs) = inputs
                .iter()
                .map(|x| eval_expr(&e, x))
                .collect::<Result<Vec<String>, _>>()
            else {
                continue;
            };
            if outs.iter().all(String::is_empty) {
                continue;
            }
            let out_refs: Vec<&str> = outs.iter().map(String::as_str).collect();
            let Some(rep) = representative(&input_refs, &out_refs, &e) else {
                continue;
            };
            if allowed.contains(&rep.kind()) {
                chosen = Some((rep, outs));
                break;
            }
        }
        let (e, outs) = chosen?;
        program.push(e);
        for (acc, o) in outputs.iter_mut().zip(outs) {
            acc.push_str(&o);
        }
    }
    Some((program, outputs))
}

pub(super) fn sample(
    category: Category,
    split: Split,
    stratum: bool,
    config: &GenConfig,
    rng: &mut ChaCha8Rng,
    index: u64,
) -> Result<(TaskSpec, Program), GenError> {
    for _ in 0..config.max_attempts {
        let positions = plan(category, split, stratum, config, rng)?;
        let format = sample_format(rng);
        let inputs: Vec<String> = (0..config.n_examples).map(|_| instantiate(&format, rng)).collect();
        let Some((program, outputs)) = grow(&positions, &inputs, rng) else {
            continue;
        };
        let constant = program.exprs().iter().all(|e| matches!(e, RfExpr::ConstStr(_)));
        let distinct = outputs.iter().any(|o| *o != outputs[0]);
        if !(distinct || constant) || !rf_category_holds(category, split, &program) {
            continue;
        }
        let examples = inputs
            .into_iter()
            .zip(outputs)
            .map(|(x, y)| Example::new([(INPUT_VAR, Value::Str(x))], Value::Str(y)))
            .collect();
        let spec = TaskSpec::new(examples).expect("examples share one signature");
        return Ok((spec, Program::RobustFill(program)));
    }
    Err(GenError::Exhausted {
        index,
        attempts: config.max_attempts,
    })
}
