//! The string-transformation DSL: a program concatenates independent
//! expressions, each computed from the single input string.
//!
//! ```text
//! Concat(GetToken(WORD, 1), ConstStr(' '), ToCase(ALL_CAPS)(GetToken(WORD, -1)))
//! ```
//!
//! Derived orderings on every syntax type double as the enumeration order.
//! They follow the grammar's listing order, except that token-based
//! substrings come before raw positions and spans, compositions over a
//! substring come before compositions over a modification, and indices and
//! positions order by magnitude, positive before negative.

mod enumerate;
mod eval;
mod outer;
mod regex;
pub mod search;
mod text;

use std::cmp::Ordering;
use std::fmt;

pub use enumerate::{all_modifications, all_substrings, enumerate_expressions, EnumerateError};
pub use eval::{eval_expr, eval_expr_chars, eval_program, MatchError, RfProgramError};
pub use regex::{find_matches, Span};
pub use text::{parse_expr, parse_program};

/// Name of the single input variable in string-domain task specs.
pub const INPUT_VAR: &str = "x";

/// Delimiters, in grammar order, followed by space.
pub const DELIMITERS: [char; 16] = [
    '&', ',', '.', '?', '!', '@', '(', ')', '[', ']', '%', '#', '$', '"', '´', ' ',
];

const ALPHABET_LEN: usize = 62 + DELIMITERS.len();

/// A character from the DSL alphabet: `A-Z`, `a-z`, `0-9`, then the
/// delimiters. The index is the enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RfChar(u8);

impl RfChar {
    pub const COUNT: usize = ALPHABET_LEN;

    pub fn all() -> impl Iterator<Item = RfChar> + Clone {
        (0..ALPHABET_LEN as u8).map(RfChar)
    }

    pub fn delimiters() -> impl Iterator<Item = RfChar> + Clone {
        (62..ALPHABET_LEN as u8).map(RfChar)
    }

    pub fn from_char(c: char) -> Option<RfChar> {
        let i = match c {
            'A'..='Z' => c as u8 - b'A',
            'a'..='z' => 26 + (c as u8 - b'a'),
            '0'..='9' => 52 + (c as u8 - b'0'),
            _ => 62 + DELIMITERS.iter().position(|&d| d == c)? as u8,
        };
        Some(RfChar(i))
    }

    pub fn as_char(self) -> char {
        match self.0 {
            i @ 0..=25 => (b'A' + i) as char,
            i @ 26..=51 => (b'a' + i - 26) as char,
            i @ 52..=61 => (b'0' + i - 52) as char,
            i => DELIMITERS[(i - 62) as usize],
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_delimiter(self) -> bool {
        self.0 >= 62
    }
}

impl fmt::Display for RfChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}'", self.as_char())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RfRegex {
    Number,
    Word,
    Alphanum,
    AllCaps,
    ProperCase,
    Lower,
    Digit,
    Char,
    /// A literal delimiter; always holds a delimiter character.
    Delim(RfChar),
}

impl RfRegex {
    pub const COUNT: usize = 8 + DELIMITERS.len();

    pub const NAMED: [RfRegex; 8] = [
        RfRegex::Number,
        RfRegex::Word,
        RfRegex::Alphanum,
        RfRegex::AllCaps,
        RfRegex::ProperCase,
        RfRegex::Lower,
        RfRegex::Digit,
        RfRegex::Char,
    ];

    /// All regexes in enumeration order.
    pub fn all() -> impl Iterator<Item = RfRegex> + Clone {
        RfRegex::NAMED
            .into_iter()
            .chain(RfChar::delimiters().map(RfRegex::Delim))
    }

    /// Dense index in `0..COUNT`, matching [`RfRegex::all`].
    pub fn index(self) -> usize {
        match self {
            RfRegex::Delim(c) => 8 + c.index() - 62,
            named => RfRegex::NAMED.iter().position(|r| *r == named).expect("named regex"),
        }
    }

    pub fn name(self) -> Option<&'static str> {
        Some(match self {
            RfRegex::Number => "NUMBER",
            RfRegex::Word => "WORD",
            RfRegex::Alphanum => "ALPHANUM",
            RfRegex::AllCaps => "ALL_CAPS",
            RfRegex::ProperCase => "PROPER_CASE",
            RfRegex::Lower => "LOWER",
            RfRegex::Digit => "DIGIT",
            RfRegex::Char => "CHAR",
            RfRegex::Delim(_) => return None,
        })
    }

    pub fn from_name(name: &str) -> Option<RfRegex> {
        RfRegex::NAMED.into_iter().find(|r| r.name() == Some(name))
    }
}

impl fmt::Display for RfRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RfRegex::Delim(c) => c.fmt(f),
            named => f.write_str(named.name().expect("named regex")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    AllCaps,
    ProperCase,
    Lower,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::AllCaps, Case::ProperCase, Case::Lower];

    pub fn name(self) -> &'static str {
        match self {
            Case::AllCaps => "ALL_CAPS",
            Case::ProperCase => "PROPER_CASE",
            Case::Lower => "LOWER",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boundary {
    Start,
    End,
}

impl Boundary {
    pub const ALL: [Boundary; 2] = [Boundary::Start, Boundary::End];

    pub fn name(self) -> &'static str {
        match self {
            Boundary::Start => "START",
            Boundary::End => "END",
        }
    }
}

fn magnitude_order(a: i8, b: i8) -> Ordering {
    (a < 0, a.unsigned_abs()).cmp(&(b < 0, b.unsigned_abs()))
}

/// Occurrence index: `1..=5` counts from the first match, `-5..=-1` from
/// the last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Index(i8);

impl Index {
    pub fn new(i: i64) -> Option<Index> {
        matches!(i, -5..=-1 | 1..=5).then_some(Index(i as i8))
    }

    pub fn get(self) -> i64 {
        self.0 as i64
    }

    /// All ten indices in enumeration order: 1..5, then -1..-5.
    pub fn all() -> impl Iterator<Item = Index> + Clone {
        (1..=5).chain((1..=5).map(|i| -i)).map(Index)
    }

    /// The 0-based match this index selects among `count` matches.
    pub fn resolve(self, count: usize) -> Option<usize> {
        let i = self.0 as i64;
        let j = if i > 0 { i - 1 } else { count as i64 + i };
        (0..count as i64).contains(&j).then_some(j as usize)
    }
}

impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        magnitude_order(self.0, other.0)
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Character position for `SubStr`: `1..=100` from the left, `-100..=-1`
/// from the right (both 1-based). Zero is not a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Position(i8);

impl Position {
    pub fn new(k: i64) -> Option<Position> {
        matches!(k, -100..=-1 | 1..=100).then_some(Position(k as i8))
    }

    pub fn get(self) -> i64 {
        self.0 as i64
    }

    /// All 200 positions in enumeration order: 1..100, then -1..-100.
    pub fn all() -> impl Iterator<Item = Position> + Clone {
        (1..=100).chain((1..=100).map(|i| -i)).map(Position)
    }

    /// 0-based character index in a string of length `len > 0`, clamped.
    pub fn resolve(self, len: usize) -> usize {
        let k = self.0 as i64;
        let p = if k > 0 { k - 1 } else { len as i64 + k };
        p.clamp(0, len as i64 - 1) as usize
    }
}

impl Ord for Position {
    fn cmp(&self, other: &Self) -> Ordering {
        magnitude_order(self.0, other.0)
    }
}

impl PartialOrd for Position {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Substring {
    GetToken(RfRegex, Index),
    GetUpto(RfRegex, Index),
    GetFrom(RfRegex, Index),
    SubStr(Position, Position),
    GetSpan(RfRegex, Index, Boundary, RfRegex, Index, Boundary),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modification {
    ToCase(Case),
    Replace(RfChar, RfChar),
    Trim,
    GetFirst(RfRegex, Index),
    GetAll(RfRegex),
    Substitute(RfRegex, Index, RfChar),
    SubstituteAll(RfRegex, RfChar),
    Remove(RfRegex, Index),
    RemoveAll(RfRegex),
}

/// The argument of a composed modification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComposeInner {
    Substring(Substring),
    Modification(Modification),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RfExpr {
    Substring(Substring),
    Modification(Modification),
    /// `outer(inner)`: the modification applied to the inner result.
    Compose(Modification, ComposeInner),
    ConstStr(RfChar),
}

/// Operation kinds, the unit of the allowed-concept sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RfOpKind {
    SubStr,
    GetSpan,
    GetUpto,
    GetFrom,
    GetToken,
    ToCase,
    Replace,
    Trim,
    GetFirst,
    GetAll,
    Substitute,
    SubstituteAll,
    Remove,
    RemoveAll,
    /// `m1(m2)`
    ComposeModification,
    /// `m(s)`
    ComposeSubstring,
    ConstStr,
}

impl RfOpKind {
    pub const ALL: [RfOpKind; 17] = [
        RfOpKind::SubStr,
        RfOpKind::GetSpan,
        RfOpKind::GetUpto,
        RfOpKind::GetFrom,
        RfOpKind::GetToken,
        RfOpKind::ToCase,
        RfOpKind::Replace,
        RfOpKind::Trim,
        RfOpKind::GetFirst,
        RfOpKind::GetAll,
        RfOpKind::Substitute,
        RfOpKind::SubstituteAll,
        RfOpKind::Remove,
        RfOpKind::RemoveAll,
        RfOpKind::ComposeModification,
        RfOpKind::ComposeSubstring,
        RfOpKind::ConstStr,
    ];

    pub const SUBSTRING: [RfOpKind; 5] = [
        RfOpKind::SubStr,
        RfOpKind::GetSpan,
        RfOpKind::GetUpto,
        RfOpKind::GetFrom,
        RfOpKind::GetToken,
    ];

    pub const MODIFICATION: [RfOpKind; 9] = [
        RfOpKind::ToCase,
        RfOpKind::Replace,
        RfOpKind::Trim,
        RfOpKind::GetFirst,
        RfOpKind::GetAll,
        RfOpKind::Substitute,
        RfOpKind::SubstituteAll,
        RfOpKind::Remove,
        RfOpKind::RemoveAll,
    ];

    pub const COMPOSE: [RfOpKind; 2] = [RfOpKind::ComposeModification, RfOpKind::ComposeSubstring];
}

impl Substring {
    pub fn kind(&self) -> RfOpKind {
        match self {
            Substring::SubStr(..) => RfOpKind::SubStr,
            Substring::GetSpan(..) => RfOpKind::GetSpan,
            Substring::GetUpto(..) => RfOpKind::GetUpto,
            Substring::GetFrom(..) => RfOpKind::GetFrom,
            Substring::GetToken(..) => RfOpKind::GetToken,
        }
    }
}

impl Modification {
    pub fn kind(&self) -> RfOpKind {
        match self {
            Modification::ToCase(_) => RfOpKind::ToCase,
            Modification::Replace(..) => RfOpKind::Replace,
            Modification::Trim => RfOpKind::Trim,
            Modification::GetFirst(..) => RfOpKind::GetFirst,
            Modification::GetAll(_) => RfOpKind::GetAll,
            Modification::Substitute(..) => RfOpKind::Substitute,
            Modification::SubstituteAll(..) => RfOpKind::SubstituteAll,
            Modification::Remove(..) => RfOpKind::Remove,
            Modification::RemoveAll(_) => RfOpKind::RemoveAll,
        }
    }
}

impl RfExpr {
    pub fn kind(&self) -> RfOpKind {
        match self {
            RfExpr::Substring(s) => s.kind(),
            RfExpr::Modification(m) => m.kind(),
            RfExpr::Compose(_, ComposeInner::Modification(_)) => RfOpKind::ComposeModification,
            RfExpr::Compose(_, ComposeInner::Substring(_)) => RfOpKind::ComposeSubstring,
            RfExpr::ConstStr(_) => RfOpKind::ConstStr,
        }
    }

    pub fn is_substring(&self) -> bool {
        matches!(self, RfExpr::Substring(_))
    }

    pub fn is_compose(&self) -> bool {
        matches!(self, RfExpr::Compose(..))
    }

    /// Modifications and constants; Compose belongs to neither concept.
    pub fn is_non_substring(&self) -> bool {
        matches!(self, RfExpr::Modification(_) | RfExpr::ConstStr(_))
    }
}

impl fmt::Display for Substring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Substring::SubStr(k1, k2) => write!(f, "SubStr({}, {})", k1.get(), k2.get()),
            Substring::GetSpan(r1, i1, b1, r2, i2, b2) => write!(
                f,
                "GetSpan({r1}, {}, {}, {r2}, {}, {})",
                i1.get(),
                b1.name(),
                i2.get(),
                b2.name()
            ),
            Substring::GetUpto(r, i) => write!(f, "GetUpto({r}, {})", i.get()),
            Substring::GetFrom(r, i) => write!(f, "GetFrom({r}, {})", i.get()),
            Substring::GetToken(r, i) => write!(f, "GetToken({r}, {})", i.get()),
        }
    }
}

impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modification::ToCase(a) => write!(f, "ToCase({})", a.name()),
            Modification::Replace(c1, c2) => write!(f, "Replace({c1}, {c2})"),
            Modification::Trim => f.write_str("Trim()"),
            Modification::GetFirst(r, i) => write!(f, "GetFirst({r}, {})", i.get()),
            Modification::GetAll(r) => write!(f, "GetAll({r})"),
            Modification::Substitute(r, i, c) => write!(f, "Substitute({r}, {}, {c})", i.get()),
            Modification::SubstituteAll(r, c) => write!(f, "SubstituteAll({r}, {c})"),
            Modification::Remove(r, i) => write!(f, "Remove({r}, {})", i.get()),
            Modification::RemoveAll(r) => write!(f, "RemoveAll({r})"),
        }
    }
}

impl fmt::Display for ComposeInner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComposeInner::Modification(m) => m.fmt(f),
            ComposeInner::Substring(s) => s.fmt(f),
        }
    }
}

impl fmt::Display for RfExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RfExpr::Substring(s) => s.fmt(f),
            RfExpr::Modification(m) => m.fmt(f),
            RfExpr::Compose(outer, inner) => write!(f, "{outer}({inner})"),
            RfExpr::ConstStr(c) => write!(f, "ConstStr({c})"),
        }
    }
}

/// `Concat(e1, e2, ...)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RfProgram {
    exprs: Vec<RfExpr>,
}

impl RfProgram {
    pub fn new(exprs: Vec<RfExpr>) -> Self {
        RfProgram { exprs }
    }

    pub fn exprs(&self) -> &[RfExpr] {
        &self.exprs
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    pub fn push(&mut self, expr: RfExpr) {
        self.exprs.push(expr);
    }
}

impl fmt::Display for RfProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Concat(")?;
        for (i, e) in self.exprs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}
