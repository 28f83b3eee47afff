use super::{
    Boundary, Case, ComposeInner, Index, Modification, Position, RfChar, RfExpr, RfProgram, RfRegex, Substring,
};
use crate::program::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Char(char),
    Open,
    Close,
    Comma,
    End,
}

#[derive(Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

fn err(pos: Pos, kind: ParseErrorKind) -> ParseError {
    ParseError::new(pos.line, pos.column, kind)
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    err(pos, ParseErrorKind::Syntax(msg.into()))
}

impl Lexer {
    fn new(text: &str) -> Result<Lexer, ParseError> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let (mut line, mut column) = (1, 1);
        let mut i = 0;
        while i < chars.len() {
            let pos = Pos { line, column };
            let c = chars[i];
            let width = match c {
                '\n' => {
                    line += 1;
                    column = 1;
                    i += 1;
                    continue;
                }
                c if c.is_whitespace() => 1,
                '(' => {
                    toks.push((Tok::Open, pos));
                    1
                }
                ')' => {
                    toks.push((Tok::Close, pos));
                    1
                }
                ',' => {
                    toks.push((Tok::Comma, pos));
                    1
                }
                '\'' => {
                    if i + 2 >= chars.len() || chars[i + 2] != '\'' {
                        return Err(syntax(pos, "unterminated character literal"));
                    }
                    toks.push((Tok::Char(chars[i + 1]), pos));
                    3
                }
                '-' | '0'..='9' => {
                    let start = i;
                    let mut j = i + 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let digits: String = chars[start..j].iter().collect();
                    let n = digits
                        .parse::<i64>()
                        .map_err(|_| syntax(pos, format!("invalid integer `{digits}`")))?;
                    toks.push((Tok::Int(n), pos));
                    j - start
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    let mut j = i;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    toks.push((Tok::Ident(chars[start..j].iter().collect()), pos));
                    j - start
                }
                other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
            };
            i += width;
            column += width;
        }
        toks.push((Tok::End, Pos { line, column }));
        Ok(Lexer { toks, at: 0 })
    }

    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, ParseError> {
        let (t, pos) = self.next();
        if t == tok {
            Ok(pos)
        } else {
            Err(syntax(pos, format!("expected {what}")))
        }
    }
}

enum Arg {
    Ident(String),
    Int(i64),
    Char(char),
}

struct Call {
    name: String,
    pos: Pos,
    args: Vec<(Arg, Pos)>,
}

fn parse_call(lx: &mut Lexer) -> Result<Call, ParseError> {
    let (tok, pos) = lx.next();
    let Tok::Ident(name) = tok else {
        return Err(syntax(pos, "expected an expression"));
    };
    lx.expect(Tok::Open, "`(`")?;
    let mut args = Vec::new();
    if lx.peek().0 == Tok::Close {
        lx.next();
        return Ok(Call { name, pos, args });
    }
    loop {
        let (tok, apos) = lx.next();
        let arg = match tok {
            Tok::Ident(s) => Arg::Ident(s),
            Tok::Int(n) => Arg::Int(n),
            Tok::Char(c) => Arg::Char(c),
            _ => return Err(syntax(apos, "expected an argument")),
        };
        args.push((arg, apos));
        match lx.next() {
            (Tok::Comma, _) => continue,
            (Tok::Close, _) => break,
            (_, p) => return Err(syntax(p, "expected `,` or `)`")),
        }
    }
    Ok(Call { name, pos, args })
}

const SUBSTRINGS: [(&str, usize); 5] = [
    ("SubStr", 2),
    ("GetSpan", 6),
    ("GetUpto", 2),
    ("GetFrom", 2),
    ("GetToken", 2),
];

const MODIFICATIONS: [(&str, usize); 9] = [
    ("ToCase", 1),
    ("Replace", 2),
    ("Trim", 0),
    ("GetFirst", 2),
    ("GetAll", 1),
    ("Substitute", 3),
    ("SubstituteAll", 2),
    ("Remove", 2),
    ("RemoveAll", 1),
];

struct Args<'a> {
    call: &'a Call,
}

impl Args<'_> {
    fn get(&self, i: usize) -> (&Arg, Pos) {
        let (a, p) = &self.call.args[i];
        (a, *p)
    }

    fn regex(&self, i: usize) -> Result<RfRegex, ParseError> {
        match self.get(i) {
            (Arg::Ident(name), pos) => {
                RfRegex::from_name(name).ok_or_else(|| err(pos, ParseErrorKind::UnknownIdentifier(name.clone())))
            }
            (Arg::Char(c), pos) => match RfChar::from_char(*c) {
                Some(d) if d.is_delimiter() => Ok(RfRegex::Delim(d)),
                _ => Err(err(
                    pos,
                    ParseErrorKind::InvalidValue(format!("'{c}' is not a delimiter")),
                )),
            },
            (_, pos) => Err(syntax(pos, "expected a regex")),
        }
    }

    fn index(&self, i: usize) -> Result<Index, ParseError> {
        match self.get(i) {
            (Arg::Int(n), pos) => {
                Index::new(*n).ok_or_else(|| err(pos, ParseErrorKind::InvalidValue(format!("index {n} outside ±1..5"))))
            }
            (_, pos) => Err(syntax(pos, "expected an index")),
        }
    }

    fn position(&self, i: usize) -> Result<Position, ParseError> {
        match self.get(i) {
            (Arg::Int(n), pos) => Position::new(*n).ok_or_else(|| {
                err(
                    pos,
                    ParseErrorKind::InvalidValue(format!("position {n} outside ±1..100")),
                )
            }),
            (_, pos) => Err(syntax(pos, "expected a position")),
        }
    }

    fn boundary(&self, i: usize) -> Result<Boundary, ParseError> {
        match self.get(i) {
            (Arg::Ident(name), pos) => Boundary::ALL
                .into_iter()
                .find(|b| b.name() == name)
                .ok_or_else(|| err(pos, ParseErrorKind::UnknownIdentifier(name.clone()))),
            (_, pos) => Err(syntax(pos, "expected START or END")),
        }
    }

    fn case(&self, i: usize) -> Result<Case, ParseError> {
        match self.get(i) {
            (Arg::Ident(name), pos) => Case::ALL
                .into_iter()
                .find(|c| c.name() == name)
                .ok_or_else(|| err(pos, ParseErrorKind::UnknownIdentifier(name.clone()))),
            (_, pos) => Err(syntax(pos, "expected a case")),
        }
    }

    fn character(&self, i: usize) -> Result<RfChar, ParseError> {
        match self.get(i) {
            (Arg::Char(c), pos) => RfChar::from_char(*c).ok_or_else(|| {
                err(
                    pos,
                    ParseErrorKind::InvalidValue(format!("'{c}' is not in the alphabet")),
                )
            }),
            (_, pos) => Err(syntax(pos, "expected a quoted character")),
        }
    }
}

fn check_arity(call: &Call, expected: usize) -> Result<(), ParseError> {
    if call.args.len() == expected {
        Ok(())
    } else {
        Err(err(
            call.pos,
            ParseErrorKind::Arity {
                op: call.name.clone(),
                expected,
                found: call.args.len(),
            },
        ))
    }
}

enum Built {
    Substring(Substring),
    Modification(Modification),
    Const(RfChar),
}

fn build(call: &Call) -> Result<Built, ParseError> {
    let a = Args { call };
    if call.name == "ConstStr" {
        check_arity(call, 1)?;
        return Ok(Built::Const(a.character(0)?));
    }
    if let Some(&(_, n)) = SUBSTRINGS.iter().find(|(name, _)| *name == call.name) {
        check_arity(call, n)?;
        let s = match call.name.as_str() {
            "SubStr" => Substring::SubStr(a.position(0)?, a.position(1)?),
            "GetSpan" => Substring::GetSpan(
                a.regex(0)?,
                a.index(1)?,
                a.boundary(2)?,
                a.regex(3)?,
                a.index(4)?,
                a.boundary(5)?,
            ),
            "GetUpto" => Substring::GetUpto(a.regex(0)?, a.index(1)?),
            "GetFrom" => Substring::GetFrom(a.regex(0)?, a.index(1)?),
            _ => Substring::GetToken(a.regex(0)?, a.index(1)?),
        };
        return Ok(Built::Substring(s));
    }
    if let Some(&(_, n)) = MODIFICATIONS.iter().find(|(name, _)| *name == call.name) {
        check_arity(call, n)?;
        let m = match call.name.as_str() {
            "ToCase" => Modification::ToCase(a.case(0)?),
            "Replace" => Modification::Replace(a.character(0)?, a.character(1)?),
            "Trim" => Modification::Trim,
            "GetFirst" => Modification::GetFirst(a.regex(0)?, a.index(1)?),
            "GetAll" => Modification::GetAll(a.regex(0)?),
            "Substitute" => Modification::Substitute(a.regex(0)?, a.index(1)?, a.character(2)?),
            "SubstituteAll" => Modification::SubstituteAll(a.regex(0)?, a.character(1)?),
            "Remove" => Modification::Remove(a.regex(0)?, a.index(1)?),
            _ => Modification::RemoveAll(a.regex(0)?),
        };
        return Ok(Built::Modification(m));
    }
    Err(err(call.pos, ParseErrorKind::UnknownIdentifier(call.name.clone())))
}

fn parse_expr_at(lx: &mut Lexer) -> Result<RfExpr, ParseError> {
    let call = parse_call(lx)?;
    let built = build(&call)?;
    if lx.peek().0 != Tok::Open {
        return Ok(match built {
            Built::Substring(s) => RfExpr::Substring(s),
            Built::Modification(m) => RfExpr::Modification(m),
            Built::Const(c) => RfExpr::ConstStr(c),
        });
    }
    let Built::Modification(outer) = built else {
        return Err(syntax(lx.peek().1, "only a modification can be composed"));
    };
    lx.next();
    let inner_call = parse_call(lx)?;
    let inner = match build(&inner_call)? {
        Built::Substring(s) => ComposeInner::Substring(s),
        Built::Modification(m) => ComposeInner::Modification(m),
        Built::Const(_) => return Err(syntax(inner_call.pos, "a constant cannot be composed")),
    };
    if lx.peek().0 == Tok::Open {
        return Err(syntax(lx.peek().1, "compositions nest only one level"));
    }
    lx.expect(Tok::Close, "`)`")?;
    Ok(RfExpr::Compose(outer, inner))
}

fn expect_end(lx: &mut Lexer) -> Result<(), ParseError> {
    match lx.next() {
        (Tok::End, _) => Ok(()),
        (_, pos) => Err(syntax(pos, "unexpected trailing input")),
    }
}

/// Parses a single expression, e.g. `ToCase(LOWER)(GetToken(WORD, 1))`.
pub fn parse_expr(text: &str) -> Result<RfExpr, ParseError> {
    let mut lx = Lexer::new(text)?;
    let e = parse_expr_at(&mut lx)?;
    expect_end(&mut lx)?;
    Ok(e)
}

/// Parses `Concat(e1, e2, ...)`.
pub fn parse_program(text: &str) -> Result<RfProgram, ParseError> {
    let mut lx = Lexer::new(text)?;
    match lx.next() {
        (Tok::Ident(name), _) if name == "Concat" => {}
        (Tok::End, pos) => return Err(err(pos, ParseErrorKind::Empty)),
        (Tok::Ident(name), pos) => return Err(err(pos, ParseErrorKind::UnknownIdentifier(name))),
        (_, pos) => return Err(syntax(pos, "expected `Concat(`")),
    }
    lx.expect(Tok::Open, "`(`")?;
    let mut exprs = Vec::new();
    if lx.peek().0 == Tok::Close {
        lx.next();
    } else {
        loop {
            exprs.push(parse_expr_at(&mut lx)?);
            match lx.next() {
                (Tok::Comma, _) => continue,
                (Tok::Close, _) => break,
                (_, pos) => return Err(syntax(pos, "expected `,` or `)`")),
            }
        }
    }
    expect_end(&mut lx)?;
    Ok(RfProgram::new(exprs))
}
