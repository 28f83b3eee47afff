use super::{arity, DcOp, DcOperation, DcProgram, DcStep, Lambda, Var};
use crate::program::{ParseError, ParseErrorKind};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

fn parse_var(token: &Token<'_>, line: usize) -> Result<Var, ParseError> {
    token
        .text
        .strip_prefix('x')
        .filter(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|digits| digits.parse::<u16>().ok())
        .map(Var)
        .ok_or_else(|| {
            ParseError::new(
                line,
                token.column,
                ParseErrorKind::Syntax(format!("expected a variable, found `{}`", token.text)),
            )
        })
}

fn parse_line(text: &str, line: usize) -> Result<(DcStep, Vec<usize>), ParseError> {
    let toks = tokens(text);
    let end = text.chars().count() + 1;
    let at = |i: usize| toks.get(i).map_or(end, |t| t.column);
    let syntax = |col, msg: &str| ParseError::new(line, col, ParseErrorKind::Syntax(msg.to_owned()));

    let target = parse_var(toks.first().ok_or_else(|| syntax(1, "expected an assignment"))?, line)?;
    if toks.get(1).map(|t| t.text) != Some("=") {
        return Err(syntax(at(1), "expected `=`"));
    }
    let op_tok = toks.get(2).ok_or_else(|| syntax(at(2), "expected an operation"))?;
    let op = DcOperation::from_name(op_tok.text).ok_or_else(|| {
        ParseError::new(
            line,
            op_tok.column,
            ParseErrorKind::UnknownIdentifier(op_tok.text.to_owned()),
        )
    })?;
    let mut next = 3;
    let lambda = match op.lambda_kind() {
        None => None,
        Some(kind) => {
            let tok = toks.get(next).ok_or_else(|| syntax(at(next), "expected a lambda"))?;
            let lambda = Lambda::from_token(tok.text).ok_or_else(|| {
                ParseError::new(line, tok.column, ParseErrorKind::UnknownIdentifier(tok.text.to_owned()))
            })?;
            if lambda.kind() != kind {
                return Err(ParseError::new(
                    line,
                    tok.column,
                    ParseErrorKind::LambdaMismatch {
                        op: op.name().to_owned(),
                        lambda: tok.text.to_owned(),
                    },
                ));
            }
            next += 1;
            Some(lambda)
        }
    };
    let arg_toks = &toks[next.min(toks.len())..];
    if arg_toks.len() != arity(op) {
        return Err(ParseError::new(
            line,
            at(next),
            ParseErrorKind::Arity {
                op: op.name().to_owned(),
                expected: arity(op),
                found: arg_toks.len(),
            },
        ));
    }
    let args = arg_toks
        .iter()
        .map(|t| parse_var(t, line))
        .collect::<Result<Vec<_>, _>>()?;
    let op = DcOp::build(op, lambda, &args).expect("arity and lambda kind checked");
    let columns = arg_toks.iter().map(|t| t.column).collect();
    Ok((DcStep { target, op }, columns))
}

/// Parses a single assignment line. Arguments must precede the target.
pub fn parse_step(text: &str) -> Result<DcStep, ParseError> {
    let (step, columns) = parse_line(text.trim_end(), 1)?;
    check_scope(&step, &columns, 1)?;
    Ok(step)
}

fn check_scope(step: &DcStep, columns: &[usize], line: usize) -> Result<(), ParseError> {
    for (var, &column) in step.op.args().into_iter().zip(columns) {
        if var >= step.target {
            return Err(ParseError::new(
                line,
                column,
                ParseErrorKind::UnboundVariable(var.to_string()),
            ));
        }
    }
    Ok(())
}

/// Parses a program, one assignment per line. The first target fixes the
/// number of inputs: `x2 = ...` on the first line means inputs `x0` and `x1`.
pub fn parse_program(text: &str) -> Result<DcProgram, ParseError> {
    let mut steps = Vec::new();
    let mut num_inputs = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (step, columns) = parse_line(raw.trim_end(), line)?;
        let inputs = *num_inputs.get_or_insert(step.target.index());
        let expected = Var((inputs + steps.len()) as u16);
        if step.target != expected {
            return Err(ParseError::new(
                line,
                1,
                ParseErrorKind::NotFresh {
                    expected: expected.to_string(),
                    found: step.target.to_string(),
                },
            ));
        }
        check_scope(&step, &columns, line)?;
        steps.push(step);
    }
    let num_inputs = num_inputs.ok_or_else(|| ParseError::new(1, 1, ParseErrorKind::Empty))?;
    Ok(DcProgram::new(num_inputs, steps).expect("scoping checked while parsing"))
}
