use thiserror::Error;

use super::regex::{find_matches, Span};
use super::{Boundary, Case, ComposeInner, Index, Modification, RfExpr, RfProgram, RfRegex, Substring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("no occurrence {index} of {regex} ({found} matches)")]
    NoMatch { regex: RfRegex, index: i64, found: usize },
    #[error("position on an empty string")]
    EmptyInput,
    #[error("span ends before it starts")]
    EmptySpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RfProgramError {
    #[error("a program needs at least one expression")]
    Empty,
    #[error("expression {step}: {error}")]
    Step { step: usize, error: MatchError },
}

fn nth_match(regex: RfRegex, index: Index, s: &[char]) -> Result<(Vec<Span>, usize), MatchError> {
    let matches = find_matches(regex, s);
    match index.resolve(matches.len()) {
        Some(j) => Ok((matches, j)),
        None => Err(MatchError::NoMatch {
            regex,
            index: index.get(),
            found: matches.len(),
        }),
    }
}

fn boundary(regex: RfRegex, index: Index, b: Boundary, s: &[char]) -> Result<usize, MatchError> {
    let (matches, j) = nth_match(regex, index, s)?;
    Ok(match b {
        Boundary::Start => matches[j].start,
        Boundary::End => matches[j].end,
    })
}

/// The range of `s` a substring expression selects.
pub fn substring_span(sub: &Substring, s: &[char]) -> Result<Span, MatchError> {
    match *sub {
        Substring::SubStr(k1, k2) => {
            if s.is_empty() {
                return Err(MatchError::EmptyInput);
            }
            let (p1, p2) = (k1.resolve(s.len()), k2.resolve(s.len()));
            if p1 > p2 {
                return Err(MatchError::EmptySpan);
            }
            Ok(Span { start: p1, end: p2 + 1 })
        }
        Substring::GetSpan(r1, i1, b1, r2, i2, b2) => {
            let start = boundary(r1, i1, b1, s)?;
            let end = boundary(r2, i2, b2, s)?;
            if start > end {
                return Err(MatchError::EmptySpan);
            }
            Ok(Span { start, end })
        }
        Substring::GetUpto(r, i) => {
            let (m, j) = nth_match(r, i, s)?;
            Ok(Span {
                start: 0,
                end: m[j].end,
            })
        }
        Substring::GetFrom(r, i) => {
            let (m, j) = nth_match(r, i, s)?;
            Ok(Span {
                start: m[j].end,
                end: s.len(),
            })
        }
        Substring::GetToken(r, i) => {
            let (m, j) = nth_match(r, i, s)?;
            Ok(m[j])
        }
    }
}

pub(crate) fn to_case(case: Case, s: &[char]) -> Vec<char> {
    match case {
        Case::AllCaps => s.iter().map(char::to_ascii_uppercase).collect(),
        Case::Lower => s.iter().map(char::to_ascii_lowercase).collect(),
        Case::ProperCase => {
            let mut prev_alpha = false;
            s.iter()
                .map(|&c| {
                    let alpha = c.is_ascii_alphabetic();
                    let out = match (alpha, prev_alpha) {
                        (true, false) => c.to_ascii_uppercase(),
                        (true, true) => c.to_ascii_lowercase(),
                        _ => c,
                    };
                    prev_alpha = alpha;
                    out
                })
                .collect()
        }
    }
}

fn splice(s: &[char], matches: &[Span], keep: impl Fn(usize) -> bool, with: Option<char>) -> Vec<char> {
    let mut out = Vec::with_capacity(s.len());
    let mut at = 0;
    for (j, m) in matches.iter().enumerate() {
        if keep(j) {
            continue;
        }
        out.extend_from_slice(&s[at..m.start]);
        out.extend(with);
        at = m.end;
    }
    out.extend_from_slice(&s[at..]);
    out
}

/// Applies a modification to a string.
pub fn apply_modification(m: &Modification, s: &[char]) -> Result<Vec<char>, MatchError> {
    Ok(match *m {
        Modification::ToCase(a) => to_case(a, s),
        Modification::Replace(c1, c2) => {
            let (c1, c2) = (c1.as_char(), c2.as_char());
            s.iter().map(|&c| if c == c1 { c2 } else { c }).collect()
        }
        Modification::Trim => {
            let start = s.iter().position(|&c| c != ' ').unwrap_or(s.len());
            let end = s.iter().rposition(|&c| c != ' ').map_or(start, |e| e + 1);
            s[start..end].to_vec()
        }
        Modification::GetFirst(r, i) => {
            let (matches, j) = nth_match(r, i, s)?;
            matches[..=j]
                .iter()
                .flat_map(|m| s[m.start..m.end].iter().copied())
                .collect()
        }
        Modification::GetAll(r) => {
            let mut out = Vec::new();
            for (j, m) in find_matches(r, s).iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                out.extend_from_slice(&s[m.start..m.end]);
            }
            out
        }
        Modification::Substitute(r, i, c) => {
            let (matches, j) = nth_match(r, i, s)?;
            splice(s, &matches, |k| k != j, Some(c.as_char()))
        }
        Modification::SubstituteAll(r, c) => splice(s, &find_matches(r, s), |_| false, Some(c.as_char())),
        Modification::Remove(r, i) => {
            let (matches, j) = nth_match(r, i, s)?;
            splice(s, &matches, |k| k != j, None)
        }
        Modification::RemoveAll(r) => splice(s, &find_matches(r, s), |_| false, None),
    })
}

pub fn eval_expr_chars(e: &RfExpr, s: &[char]) -> Result<Vec<char>, MatchError> {
    match e {
        RfExpr::Substring(sub) => {
            let span = substring_span(sub, s)?;
            Ok(s[span.start..span.end].to_vec())
        }
        RfExpr::Modification(m) => apply_modification(m, s),
        RfExpr::Compose(outer, inner) => {
            let mid = match inner {
                ComposeInner::Modification(m) => apply_modification(m, s)?,
                ComposeInner::Substring(sub) => {
                    let span = substring_span(sub, s)?;
                    s[span.start..span.end].to_vec()
                }
            };
            apply_modification(outer, &mid)
        }
        RfExpr::ConstStr(c) => Ok(vec![c.as_char()]),
    }
}

/// Evaluates one expression on the input string.
pub fn eval_expr(e: &RfExpr, input: &str) -> Result<String, MatchError> {
    let chars: Vec<char> = input.chars().collect();
    eval_expr_chars(e, &chars).map(|out| out.into_iter().collect())
}

/// Concatenates the results of every expression.
pub fn eval_program(p: &RfProgram, input: &str) -> Result<String, RfProgramError> {
    if p.is_empty() {
        return Err(RfProgramError::Empty);
    }
    let chars: Vec<char> = input.chars().collect();
    let mut out = String::new();
    for (step, e) in p.exprs().iter().enumerate() {
        let part = eval_expr_chars(e, &chars).map_err(|error| RfProgramError::Step { step, error })?;
        out.extend(part);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robustfill::{parse_expr, parse_program, RfChar};

    fn run(expr: &str, input: &str) -> Result<String, MatchError> {
        eval_expr(&parse_expr(expr).unwrap(), input)
    }

    #[test]
    fn constants_and_case() {
        assert_eq!(run("ConstStr('a')", "whatever").unwrap(), "a");
        assert_eq!(run("ToCase(ALL_CAPS)", "abc").unwrap(), "ABC");
        assert_eq!(run("ToCase(LOWER)", "AbC 1").unwrap(), "abc 1");
        assert_eq!(
            run("ToCase(PROPER_CASE)", "hELLO wORLD x2y").unwrap(),
            "Hello World X2Y"
        );
    }

    #[test]
    fn tokens_from_both_ends() {
        assert_eq!(run("GetToken(WORD, 1)", "hello world").unwrap(), "hello");
        assert_eq!(run("GetToken(WORD, -1)", "hello world").unwrap(), "world");
        assert_eq!(
            run("GetToken(WORD, 3)", "hello world"),
            Err(MatchError::NoMatch {
                regex: RfRegex::Word,
                index: 3,
                found: 2
            })
        );
    }

    #[test]
    fn upto_and_from_split_at_the_match_end() {
        assert_eq!(run("GetUpto(NUMBER, 1)", "ab12cd34").unwrap(), "ab12");
        assert_eq!(run("GetFrom(NUMBER, 1)", "ab12cd34").unwrap(), "cd34");
        assert_eq!(run("GetFrom(NUMBER, -1)", "ab12cd34").unwrap(), "");
    }

    #[test]
    fn spans() {
        let s = "Mr. John Smith, 42";
        assert_eq!(
            run("GetSpan(PROPER_CASE, 2, START, PROPER_CASE, 3, END)", s).unwrap(),
            "John Smith"
        );
        assert_eq!(run("GetSpan(' ', 1, END, ',', 1, START)", s).unwrap(), "John Smith");
        assert_eq!(
            run("GetSpan(NUMBER, 1, START, WORD, 1, END)", s),
            Err(MatchError::EmptySpan)
        );
    }

    #[test]
    fn substr_positions() {
        assert_eq!(run("SubStr(1, 3)", "abcdef").unwrap(), "abc");
        assert_eq!(run("SubStr(-3, -1)", "abcdef").unwrap(), "def");
        assert_eq!(run("SubStr(2, 100)", "abcdef").unwrap(), "bcdef");
        assert_eq!(run("SubStr(-100, 1)", "abcdef").unwrap(), "a");
        assert_eq!(run("SubStr(4, 2)", "abcdef"), Err(MatchError::EmptySpan));
        assert_eq!(run("SubStr(1, 1)", ""), Err(MatchError::EmptyInput));
    }

    #[test]
    fn modifications() {
        assert_eq!(run("Replace('.', ' ')", "a.b.c").unwrap(), "a b c");
        assert_eq!(run("Trim()", "  a b  ").unwrap(), "a b");
        assert_eq!(run("Trim()", "   ").unwrap(), "");
        assert_eq!(run("GetFirst(WORD, 2)", "ab cd ef").unwrap(), "abcd");
        assert_eq!(run("GetFirst(WORD, -1)", "ab cd ef").unwrap(), "abcdef");
        assert_eq!(run("GetAll(NUMBER)", "a1b22c333").unwrap(), "1 22 333");
        assert_eq!(run("GetAll(NUMBER)", "abc").unwrap(), "");
        assert_eq!(run("Substitute(NUMBER, 2, '#')", "a1b22c333").unwrap(), "a1b#c333");
        assert_eq!(run("SubstituteAll(NUMBER, '#')", "a1b22c333").unwrap(), "a#b#c#");
        assert_eq!(run("Remove(WORD, -1)", "ab cd ef").unwrap(), "ab cd ");
        assert_eq!(run("RemoveAll(' ')", "ab cd ef").unwrap(), "abcdef");
        assert!(run("Remove(DIGIT, 1)", "abc").is_err());
    }

    #[test]
    fn compose_applies_inner_first() {
        let composed = run("Replace('.', ' ')(GetFrom(DIGIT, 1))", "v1.2.3").unwrap();
        let inner = run("GetFrom(DIGIT, 1)", "v1.2.3").unwrap();
        assert_eq!(inner, ".2.3");
        assert_eq!(composed, run("Replace('.', ' ')", &inner).unwrap());
        assert_eq!(composed, " 2 3");
    }

    #[test]
    fn program_concatenates() {
        let p = parse_program("Concat(ConstStr('a'), ConstStr('b'))").unwrap();
        assert_eq!(eval_program(&p, "").unwrap(), "ab");
        let p = parse_program("Concat(GetToken(WORD, 1), GetToken(NUMBER, 1))").unwrap();
        assert_eq!(
            eval_program(&p, "abc"),
            Err(RfProgramError::Step {
                step: 1,
                error: MatchError::NoMatch {
                    regex: RfRegex::Number,
                    index: 1,
                    found: 0
                }
            })
        );
        assert_eq!(eval_program(&RfProgram::new(vec![]), "x"), Err(RfProgramError::Empty));
    }

    #[test]
    fn non_ascii_delimiter() {
        let acute = RfChar::from_char('´').unwrap();
        assert_eq!(eval_expr(&RfExpr::ConstStr(acute), "").unwrap(), "´");
        assert_eq!(run("GetFrom('´', 1)", "it´s").unwrap(), "s");
    }
}
