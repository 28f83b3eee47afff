//! The integer-list DSL: straight-line programs of first- and higher-order
//! list operations, one assignment per line.
//!
//! ```text
//! x1 = Sort x0
//! x2 = Zip (max) x0 x1
//! ```
//!
//! Inputs occupy the lowest variable indices (`x0`, `x1`, ...); every step
//! binds the next fresh index.

mod enumerate;
mod eval;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use enumerate::{enumerate_steps, StepCandidates};
pub use eval::{eval_program, eval_step, ProgramError, StepError};
pub use text::{parse_program, parse_step};

/// A variable `x<k>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var(pub u16);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DcOperation {
    Head,
    Last,
    Access,
    Minimum,
    Maximum,
    Sum,
    Take,
    Drop,
    Reverse,
    Sort,
    Map,
    Filter,
    Count,
    Zip,
    Scanl1,
}

impl DcOperation {
    pub const ALL: [DcOperation; 15] = [
        DcOperation::Head,
        DcOperation::Last,
        DcOperation::Access,
        DcOperation::Minimum,
        DcOperation::Maximum,
        DcOperation::Sum,
        DcOperation::Take,
        DcOperation::Drop,
        DcOperation::Reverse,
        DcOperation::Sort,
        DcOperation::Map,
        DcOperation::Filter,
        DcOperation::Count,
        DcOperation::Zip,
        DcOperation::Scanl1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DcOperation::Head => "Head",
            DcOperation::Last => "Last",
            DcOperation::Access => "Access",
            DcOperation::Minimum => "Minimum",
            DcOperation::Maximum => "Maximum",
            DcOperation::Sum => "Sum",
            DcOperation::Take => "Take",
            DcOperation::Drop => "Drop",
            DcOperation::Reverse => "Reverse",
            DcOperation::Sort => "Sort",
            DcOperation::Map => "Map",
            DcOperation::Filter => "Filter",
            DcOperation::Count => "Count",
            DcOperation::Zip => "Zip",
            DcOperation::Scanl1 => "Scanl1",
        }
    }

    pub fn from_name(name: &str) -> Option<DcOperation> {
        DcOperation::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn is_higher_order(self) -> bool {
        matches!(
            self,
            DcOperation::Map | DcOperation::Filter | DcOperation::Count | DcOperation::Zip | DcOperation::Scanl1
        )
    }

    /// Which lambda family the operation takes, if any.
    pub fn lambda_kind(self) -> Option<LambdaKind> {
        match self {
            DcOperation::Map => Some(LambdaKind::IntFn),
            DcOperation::Filter | DcOperation::Count => Some(LambdaKind::Predicate),
            DcOperation::Zip | DcOperation::Scanl1 => Some(LambdaKind::Combiner),
            _ => None,
        }
    }

    /// Every lambda this operation can take; empty for first-order operations.
    pub fn lambdas(self) -> Vec<Lambda> {
        match self.lambda_kind() {
            None => Vec::new(),
            Some(LambdaKind::IntFn) => IntFn::ALL.into_iter().map(Lambda::IntFn).collect(),
            Some(LambdaKind::Predicate) => Predicate::ALL.into_iter().map(Lambda::Predicate).collect(),
            Some(LambdaKind::Combiner) => Combiner::ALL.into_iter().map(Lambda::Combiner).collect(),
        }
    }
}

impl fmt::Display for DcOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LambdaKind {
    IntFn,
    Predicate,
    Combiner,
}

/// `int -> int` lambdas taken by `Map`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntFn {
    PlusOne,
    MinusOne,
    TimesTwo,
    DivTwo,
    Negate,
    Square,
    TimesThree,
    DivThree,
    TimesFour,
    DivFour,
}

impl IntFn {
    pub const ALL: [IntFn; 10] = [
        IntFn::PlusOne,
        IntFn::MinusOne,
        IntFn::TimesTwo,
        IntFn::DivTwo,
        IntFn::Negate,
        IntFn::Square,
        IntFn::TimesThree,
        IntFn::DivThree,
        IntFn::TimesFour,
        IntFn::DivFour,
    ];

    pub fn token(self) -> &'static str {
        match self {
            IntFn::PlusOne => "(+1)",
            IntFn::MinusOne => "(-1)",
            IntFn::TimesTwo => "(*2)",
            IntFn::DivTwo => "(/2)",
            IntFn::Negate => "(*(-1))",
            IntFn::Square => "(**2)",
            IntFn::TimesThree => "(*3)",
            IntFn::DivThree => "(/3)",
            IntFn::TimesFour => "(*4)",
            IntFn::DivFour => "(/4)",
        }
    }

    /// Division truncates toward zero. `None` on overflow.
    pub fn apply(self, x: i64) -> Option<i64> {
        match self {
            IntFn::PlusOne => x.checked_add(1),
            IntFn::MinusOne => x.checked_sub(1),
            IntFn::TimesTwo => x.checked_mul(2),
            IntFn::DivTwo => Some(x / 2),
            IntFn::Negate => x.checked_neg(),
            IntFn::Square => x.checked_mul(x),
            IntFn::TimesThree => x.checked_mul(3),
            IntFn::DivThree => Some(x / 3),
            IntFn::TimesFour => x.checked_mul(4),
            IntFn::DivFour => Some(x / 4),
        }
    }
}

/// `int -> bool` lambdas taken by `Filter` and `Count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Predicate {
    Positive,
    Negative,
    Even,
    Odd,
}

impl Predicate {
    pub const ALL: [Predicate; 4] = [
        Predicate::Positive,
        Predicate::Negative,
        Predicate::Even,
        Predicate::Odd,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Predicate::Positive => "(>0)",
            Predicate::Negative => "(<0)",
            Predicate::Even => "(%2==0)",
            Predicate::Odd => "(%2==1)",
        }
    }

    /// Parity uses the non-negative remainder, so `-3` is odd.
    pub fn test(self, x: i64) -> bool {
        match self {
            Predicate::Positive => x > 0,
            Predicate::Negative => x < 0,
            Predicate::Even => x.rem_euclid(2) == 0,
            Predicate::Odd => x.rem_euclid(2) == 1,
        }
    }
}

/// `(int, int) -> int` lambdas taken by `Zip` and `Scanl1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Combiner {
    Add,
    Sub,
    Mul,
    Min,
    Max,
}

impl Combiner {
    pub const ALL: [Combiner; 5] = [
        Combiner::Add,
        Combiner::Sub,
        Combiner::Mul,
        Combiner::Min,
        Combiner::Max,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Combiner::Add => "(+)",
            Combiner::Sub => "(-)",
            Combiner::Mul => "(*)",
            Combiner::Min => "(min)",
            Combiner::Max => "(max)",
        }
    }

    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            Combiner::Add => a.checked_add(b),
            Combiner::Sub => a.checked_sub(b),
            Combiner::Mul => a.checked_mul(b),
            Combiner::Min => Some(a.min(b)),
            Combiner::Max => Some(a.max(b)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lambda {
    IntFn(IntFn),
    Predicate(Predicate),
    Combiner(Combiner),
}

impl Lambda {
    pub fn token(self) -> &'static str {
        match self {
            Lambda::IntFn(f) => f.token(),
            Lambda::Predicate(p) => p.token(),
            Lambda::Combiner(c) => c.token(),
        }
    }

    pub fn kind(self) -> LambdaKind {
        match self {
            Lambda::IntFn(_) => LambdaKind::IntFn,
            Lambda::Predicate(_) => LambdaKind::Predicate,
            Lambda::Combiner(_) => LambdaKind::Combiner,
        }
    }

    pub fn from_token(token: &str) -> Option<Lambda> {
        IntFn::ALL
            .into_iter()
            .map(Lambda::IntFn)
            .chain(Predicate::ALL.into_iter().map(Lambda::Predicate))
            .chain(Combiner::ALL.into_iter().map(Lambda::Combiner))
            .find(|l| l.token() == token)
    }
}

/// An operation together with its lambda, e.g. `Scanl1 (max)`. The unit of
/// the allowed-operation sets used by the enumerator and task generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpVariant {
    pub op: DcOperation,
    pub lambda: Option<Lambda>,
}

impl OpVariant {
    /// All 38 variants in enumeration order.
    pub fn all() -> Vec<OpVariant> {
        DcOperation::ALL
            .into_iter()
            .flat_map(|op| {
                let lambdas = op.lambdas();
                if lambdas.is_empty() {
                    vec![OpVariant { op, lambda: None }]
                } else {
                    lambdas.into_iter().map(|l| OpVariant { op, lambda: Some(l) }).collect()
                }
            })
            .collect()
    }

    /// Every variant of the given operations.
    pub fn of(ops: &[DcOperation]) -> Vec<OpVariant> {
        OpVariant::all().into_iter().filter(|v| ops.contains(&v.op)).collect()
    }
}

impl fmt::Display for OpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lambda {
            Some(l) => write!(f, "{} {}", self.op, l.token()),
            None => write!(f, "{}", self.op),
        }
    }
}

/// The right-hand side of one assignment. Variant order is the enumeration
/// order; arguments follow the grammar's order (`Access n l`, `Take n l`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DcOp {
    Head(Var),
    Last(Var),
    Access(Var, Var),
    Minimum(Var),
    Maximum(Var),
    Sum(Var),
    Take(Var, Var),
    Drop(Var, Var),
    Reverse(Var),
    Sort(Var),
    Map(IntFn, Var),
    Filter(Predicate, Var),
    Count(Predicate, Var),
    Zip(Combiner, Var, Var),
    Scanl1(Combiner, Var),
}

impl DcOp {
    pub fn operation(&self) -> DcOperation {
        match self {
            DcOp::Head(_) => DcOperation::Head,
            DcOp::Last(_) => DcOperation::Last,
            DcOp::Access(..) => DcOperation::Access,
            DcOp::Minimum(_) => DcOperation::Minimum,
            DcOp::Maximum(_) => DcOperation::Maximum,
            DcOp::Sum(_) => DcOperation::Sum,
            DcOp::Take(..) => DcOperation::Take,
            DcOp::Drop(..) => DcOperation::Drop,
            DcOp::Reverse(_) => DcOperation::Reverse,
            DcOp::Sort(_) => DcOperation::Sort,
            DcOp::Map(..) => DcOperation::Map,
            DcOp::Filter(..) => DcOperation::Filter,
            DcOp::Count(..) => DcOperation::Count,
            DcOp::Zip(..) => DcOperation::Zip,
            DcOp::Scanl1(..) => DcOperation::Scanl1,
        }
    }

    pub fn lambda(&self) -> Option<Lambda> {
        match *self {
            DcOp::Map(f, _) => Some(Lambda::IntFn(f)),
            DcOp::Filter(p, _) | DcOp::Count(p, _) => Some(Lambda::Predicate(p)),
            DcOp::Zip(c, ..) | DcOp::Scanl1(c, _) => Some(Lambda::Combiner(c)),
            _ => None,
        }
    }

    pub fn variant(&self) -> OpVariant {
        OpVariant {
            op: self.operation(),
            lambda: self.lambda(),
        }
    }

    /// Argument variables in textual order.
    pub fn args(&self) -> Vec<Var> {
        match *self {
            DcOp::Head(l)
            | DcOp::Last(l)
            | DcOp::Minimum(l)
            | DcOp::Maximum(l)
            | DcOp::Sum(l)
            | DcOp::Reverse(l)
            | DcOp::Sort(l)
            | DcOp::Map(_, l)
            | DcOp::Filter(_, l)
            | DcOp::Count(_, l)
            | DcOp::Scanl1(_, l) => vec![l],
            DcOp::Access(n, l) | DcOp::Take(n, l) | DcOp::Drop(n, l) => vec![n, l],
            DcOp::Zip(_, a, b) => vec![a, b],
        }
    }

    /// Rebuilds the op with each argument mapped through `f`.
    pub fn map_args(&self, mut f: impl FnMut(Var) -> Var) -> DcOp {
        match *self {
            DcOp::Head(l) => DcOp::Head(f(l)),
            DcOp::Last(l) => DcOp::Last(f(l)),
            DcOp::Access(n, l) => DcOp::Access(f(n), f(l)),
            DcOp::Minimum(l) => DcOp::Minimum(f(l)),
            DcOp::Maximum(l) => DcOp::Maximum(f(l)),
            DcOp::Sum(l) => DcOp::Sum(f(l)),
            DcOp::Take(n, l) => DcOp::Take(f(n), f(l)),
            DcOp::Drop(n, l) => DcOp::Drop(f(n), f(l)),
            DcOp::Reverse(l) => DcOp::Reverse(f(l)),
            DcOp::Sort(l) => DcOp::Sort(f(l)),
            DcOp::Map(g, l) => DcOp::Map(g, f(l)),
            DcOp::Filter(p, l) => DcOp::Filter(p, f(l)),
            DcOp::Count(p, l) => DcOp::Count(p, f(l)),
            DcOp::Zip(c, a, b) => {
                let a = f(a);
                DcOp::Zip(c, a, f(b))
            }
            DcOp::Scanl1(c, l) => DcOp::Scanl1(c, f(l)),
        }
    }

    /// Builds an op from its parts; `None` when lambda or arity do not fit.
    pub fn build(op: DcOperation, lambda: Option<Lambda>, args: &[Var]) -> Option<DcOp> {
        use DcOperation as O;
        let built = match (op, lambda, args) {
            (O::Head, None, &[l]) => DcOp::Head(l),
            (O::Last, None, &[l]) => DcOp::Last(l),
            (O::Access, None, &[n, l]) => DcOp::Access(n, l),
            (O::Minimum, None, &[l]) => DcOp::Minimum(l),
            (O::Maximum, None, &[l]) => DcOp::Maximum(l),
            (O::Sum, None, &[l]) => DcOp::Sum(l),
            (O::Take, None, &[n, l]) => DcOp::Take(n, l),
            (O::Drop, None, &[n, l]) => DcOp::Drop(n, l),
            (O::Reverse, None, &[l]) => DcOp::Reverse(l),
            (O::Sort, None, &[l]) => DcOp::Sort(l),
            (O::Map, Some(Lambda::IntFn(f)), &[l]) => DcOp::Map(f, l),
            (O::Filter, Some(Lambda::Predicate(p)), &[l]) => DcOp::Filter(p, l),
            (O::Count, Some(Lambda::Predicate(p)), &[l]) => DcOp::Count(p, l),
            (O::Zip, Some(Lambda::Combiner(c)), &[a, b]) => DcOp::Zip(c, a, b),
            (O::Scanl1, Some(Lambda::Combiner(c)), &[l]) => DcOp::Scanl1(c, l),
            _ => return None,
        };
        Some(built)
    }
}

/// Number of variable arguments each operation takes.
pub fn arity(op: DcOperation) -> usize {
    match op {
        DcOperation::Access | DcOperation::Take | DcOperation::Drop | DcOperation::Zip => 2,
        _ => 1,
    }
}

impl fmt::Display for DcOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.operation().name())?;
        if let Some(l) = self.lambda() {
            write!(f, " {}", l.token())?;
        }
        for arg in self.args() {
            write!(f, " {arg}")?;
        }
        Ok(())
    }
}

/// One assignment line: `target = op`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DcStep {
    pub target: Var,
    pub op: DcOp,
}

impl fmt::Display for DcStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.target, self.op)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScopeError {
    #[error("step {step} assigns {found}, expected the fresh variable {expected}")]
    NotFresh { step: usize, expected: Var, found: Var },
    #[error("step {step} reads unbound variable {var}")]
    Unbound { step: usize, var: Var },
}

/// A well-scoped list program over `num_inputs` inputs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DcProgram {
    num_inputs: usize,
    steps: Vec<DcStep>,
}

impl DcProgram {
    pub fn new(num_inputs: usize, steps: Vec<DcStep>) -> Result<Self, ScopeError> {
        for (step, s) in steps.iter().enumerate() {
            let expected = Var((num_inputs + step) as u16);
            if s.target != expected {
                return Err(ScopeError::NotFresh {
                    step,
                    expected,
                    found: s.target,
                });
            }
            if let Some(var) = s.op.args().into_iter().find(|v| *v >= expected) {
                return Err(ScopeError::Unbound { step, var });
            }
        }
        Ok(DcProgram { num_inputs, steps })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn steps(&self) -> &[DcStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends a step; its target must be the next fresh variable.
    pub fn push(&mut self, step: DcStep) -> Result<(), ScopeError> {
        let index = self.steps.len();
        let expected = Var((self.num_inputs + index) as u16);
        if step.target != expected {
            return Err(ScopeError::NotFresh {
                step: index,
                expected,
                found: step.target,
            });
        }
        if let Some(var) = step.op.args().into_iter().find(|v| *v >= expected) {
            return Err(ScopeError::Unbound { step: index, var });
        }
        self.steps.push(step);
        Ok(())
    }
}

impl fmt::Display for DcProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}
