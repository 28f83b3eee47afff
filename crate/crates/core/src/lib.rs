//! Execution-guided programming-by-example workbench: two program DSLs with
//! interpreters and enumerators, benchmark task generation, the
//! decomposition synthesis loops, and decomposition-quality metrics.

pub mod deepcoder;
pub mod engine;
pub mod metrics;
pub mod program;
pub mod records;
pub mod robustfill;
pub mod spec;
pub mod taskgen;
pub mod value;

pub use program::{parse_program, render_program, Domain, ParseError, ParseErrorKind, Program, Subprogram};
pub use spec::{spec_satisfied, Example, SpecError, TaskSpec};
pub use value::{Limits, Value, ValueKind};
