//! Runtime values shared by both DSLs.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A runtime datum of either domain.
///
/// Serialized as a single-key object: `{"int":n}`, `{"bool":b}`,
/// `{"list":[...]}` or `{"str":s}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Int(i64),
    Bool(bool),
    List(Vec<i64>),
    Str(String),
}

/// The variant of a [`Value`], used as the type of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Int,
    Bool,
    List,
    Str,
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Bool(_) => ValueKind::Bool,
            Value::List(_) => ValueKind::List,
            Value::Str(_) => ValueKind::Str,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[i64]> {
        match self {
            Value::List(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<Vec<i64>> for Value {
    fn from(xs: Vec<i64>) -> Self {
        Value::List(xs)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

/// Bounds every integer and list produced by the list DSL must respect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub min_int: i64,
    pub max_int: i64,
    pub max_len: usize,
}

impl Limits {
    pub const DEFAULT: Limits = Limits {
        min_int: -256,
        max_int: 256,
        max_len: 12,
    };

    pub fn int_in_range(&self, n: i64) -> bool {
        (self.min_int..=self.max_int).contains(&n)
    }

    pub fn admits(&self, value: &Value) -> bool {
        match value {
            Value::Int(n) => self.int_in_range(*n),
            Value::List(xs) => xs.len() <= self.max_len && xs.iter().all(|&x| self.int_in_range(x)),
            Value::Bool(_) | Value::Str(_) => true,
        }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits::DEFAULT
    }
}
