//! Domain-tagged programs and single-step subprograms, with their canonical
//! text form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deepcoder::{self, DcProgram, DcStep};
use crate::robustfill::{self, RfExpr, RfProgram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    DeepCoder,
    RobustFill,
}

impl Domain {
    pub const ALL: [Domain; 2] = [Domain::DeepCoder, Domain::RobustFill];

    pub fn name(self) -> &'static str {
        match self {
            Domain::DeepCoder => "deepcoder",
            Domain::RobustFill => "robustfill",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "deepcoder" | "dc" => Ok(Domain::DeepCoder),
            "robustfill" | "rf" => Ok(Domain::RobustFill),
            _ => Err(format!("unknown domain `{s}` (expected deepcoder or robustfill)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("{op} takes {expected} arguments, found {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("{op} cannot take the lambda {lambda}")]
    LambdaMismatch { op: String, lambda: String },
    #[error("expected fresh variable {expected}, found {found}")]
    NotFresh { expected: String, found: String },
    #[error("{0}")]
    InvalidValue(String),
    #[error("empty program")]
    Empty,
}

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }
}

/// One step of a program: a list-DSL assignment or one string expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subprogram {
    DeepCoder(DcStep),
    RobustFill(RfExpr),
}

impl Subprogram {
    pub fn domain(&self) -> Domain {
        match self {
            Subprogram::DeepCoder(_) => Domain::DeepCoder,
            Subprogram::RobustFill(_) => Domain::RobustFill,
        }
    }

    pub fn parse(text: &str, domain: Domain) -> Result<Subprogram, ParseError> {
        match domain {
            Domain::DeepCoder => deepcoder::parse_step(text).map(Subprogram::DeepCoder),
            Domain::RobustFill => robustfill::parse_expr(text).map(Subprogram::RobustFill),
        }
    }
}

impl fmt::Display for Subprogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subprogram::DeepCoder(s) => s.fmt(f),
            Subprogram::RobustFill(e) => e.fmt(f),
        }
    }
}

impl Serialize for Subprogram {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Tagged<'a> {
            domain: Domain,
            text: &'a str,
        }
        Tagged {
            domain: self.domain(),
            text: &self.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subprogram {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Tagged {
            domain: Domain,
            text: String,
        }
        let t = Tagged::deserialize(deserializer)?;
        Subprogram::parse(&t.text, t.domain).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    DeepCoder(DcProgram),
    RobustFill(RfProgram),
}

impl Program {
    pub fn domain(&self) -> Domain {
        match self {
            Program::DeepCoder(_) => Domain::DeepCoder,
            Program::RobustFill(_) => Domain::RobustFill,
        }
    }

    /// Number of steps: non-input lines, or concatenated expressions.
    pub fn len(&self) -> usize {
        match self {
            Program::DeepCoder(p) => p.len(),
            Program::RobustFill(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn steps(&self) -> Vec<Subprogram> {
        match self {
            Program::DeepCoder(p) => p.steps().iter().copied().map(Subprogram::DeepCoder).collect(),
            Program::RobustFill(p) => p.exprs().iter().cloned().map(Subprogram::RobustFill).collect(),
        }
    }

    pub fn as_deepcoder(&self) -> Option<&DcProgram> {
        match self {
            Program::DeepCoder(p) => Some(p),
            Program::RobustFill(_) => None,
        }
    }

    pub fn as_robustfill(&self) -> Option<&RfProgram> {
        match self {
            Program::RobustFill(p) => Some(p),
            Program::DeepCoder(_) => None,
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::DeepCoder(p) => p.fmt(f),
            Program::RobustFill(p) => p.fmt(f),
        }
    }
}

impl Serialize for Program {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Tagged<'a> {
            domain: Domain,
            text: &'a str,
        }
        Tagged {
            domain: self.domain(),
            text: &self.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Tagged {
            domain: Domain,
            text: String,
        }
        let t = Tagged::deserialize(deserializer)?;
        parse_program(&t.text, t.domain).map_err(serde::de::Error::custom)
    }
}

/// Canonical text: one assignment per line for the list DSL,
/// `Concat(e1, e2, ...)` on one line for the string DSL.
pub fn render_program(program: &Program) -> String {
    program.to_string()
}

pub fn parse_program(text: &str, domain: Domain) -> Result<Program, ParseError> {
    match domain {
        Domain::DeepCoder => deepcoder::parse_program(text).map(Program::DeepCoder),
        Domain::RobustFill => robustfill::parse_program(text).map(Program::RobustFill),
    }
}
