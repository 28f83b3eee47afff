use super::{arity, DcOp, DcOperation, DcStep, OpVariant, Var};
use crate::value::ValueKind;

/// Every well-typed single step over an environment, in enumeration order:
/// operation, then lambda, then arguments lexicographically.
///
/// `allowed` need not be sorted; duplicates are ignored.
pub fn enumerate_steps(env: &[ValueKind], allowed: &[OpVariant]) -> StepCandidates {
    let mut variants = allowed.to_vec();
    variants.sort();
    variants.dedup();
    let target = Var(env.len() as u16);
    let vars_of = |kind| {
        env.iter()
            .enumerate()
            .filter(|(_, k)| **k == kind)
            .map(|(i, _)| Var(i as u16))
            .collect::<Vec<_>>()
    };
    let lists = vars_of(ValueKind::List);
    let ints = vars_of(ValueKind::Int);

    let mut steps = Vec::new();
    for variant in variants {
        let arg_lists: Vec<Vec<Var>> = match (variant.op, arity(variant.op)) {
            (DcOperation::Access | DcOperation::Take | DcOperation::Drop, _) => ints
                .iter()
                .flat_map(|&n| lists.iter().map(move |&l| vec![n, l]))
                .collect(),
            (_, 2) => lists
                .iter()
                .flat_map(|&a| lists.iter().map(move |&b| vec![a, b]))
                .collect(),
            _ => lists.iter().map(|&l| vec![l]).collect(),
        };
        steps.extend(
            arg_lists
                .iter()
                .filter_map(|args| DcOp::build(variant.op, variant.lambda, args))
                .map(|op| DcStep { target, op }),
        );
    }
    StepCandidates {
        inner: steps.into_iter(),
    }
}

/// Iterator returned by [`enumerate_steps`].
#[derive(Debug, Clone)]
pub struct StepCandidates {
    inner: std::vec::IntoIter<DcStep>,
}

impl Iterator for StepCandidates {
    type Item = DcStep;

    fn next(&mut self) -> Option<DcStep> {
        self.inner.next()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.inner.size_hint()
    }
}

impl ExactSizeIterator for StepCandidates {}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::deepcoder::{eval_step, Combiner, Lambda};
    use crate::value::{Limits, Value};

    use ValueKind::{Int, List};

    #[test]
    fn single_typing() {
        let got: Vec<_> = enumerate_steps(&[List], &OpVariant::of(&[DcOperation::Sort])).collect();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].to_string(), "x1 = Sort x0");
    }

    #[test]
    fn type_filter_excludes_scalars() {
        assert_eq!(enumerate_steps(&[Int], &OpVariant::of(&[DcOperation::Sort])).count(), 0);
    }

    /// Independent census: count the argument tuples each variant admits.
    fn census(env: &[ValueKind], allowed: &[OpVariant]) -> usize {
        let n_list = env.iter().filter(|k| **k == List).count();
        let n_int = env.iter().filter(|k| **k == Int).count();
        let mut distinct = allowed.to_vec();
        distinct.sort();
        distinct.dedup();
        distinct
            .iter()
            .map(|v| match v.op {
                DcOperation::Access | DcOperation::Take | DcOperation::Drop => n_int * n_list,
                DcOperation::Zip => n_list * n_list,
                _ => n_list,
            })
            .sum()
    }

    #[test]
    fn zip_over_two_lists() {
        let zip = OpVariant::of(&[DcOperation::Zip]);
        assert_eq!(census(&[List, List], &zip), 20);
        let got: Vec<String> = enumerate_steps(&[List, List], &zip).map(|s| s.op.to_string()).collect();
        assert_eq!(got.len(), 20);
        assert_eq!(
            &got[..4],
            ["Zip (+) x0 x0", "Zip (+) x0 x1", "Zip (+) x1 x0", "Zip (+) x1 x1"]
        );
        assert_eq!(got[19], "Zip (max) x1 x1");
    }

    fn arb_env() -> impl Strategy<Value = Vec<ValueKind>> {
        prop::collection::vec(prop_oneof![Just(List), Just(Int), Just(ValueKind::Bool)], 1..6)
    }

    fn arb_allowed() -> impl Strategy<Value = Vec<OpVariant>> {
        prop::sample::subsequence(OpVariant::all(), 0..=38)
    }

    proptest! {
        #[test]
        fn enumeration_is_complete_sorted_and_well_typed(env in arb_env(), allowed in arb_allowed()) {
            let steps: Vec<DcStep> = enumerate_steps(&env, &allowed).collect();
            prop_assert_eq!(steps.len(), census(&env, &allowed));
            prop_assert!(steps.windows(2).all(|w| w[0] < w[1]), "strictly increasing order");
            // A witness environment with non-empty lists and a zero index
            // evaluates every well-typed step without a type error.
            let witness: Vec<Value> = env.iter().map(|k| match k {
                List => Value::List(vec![1, 2]),
                Int => Value::Int(0),
                _ => Value::Bool(true),
            }).collect();
            for step in &steps {
                prop_assert!(allowed.contains(&step.op.variant()));
                prop_assert!(eval_step(&step.op, &witness, &Limits::DEFAULT).is_ok(), "{}", step);
            }
        }
    }

    #[test]
    fn lambda_order_follows_grammar() {
        let scan = OpVariant::of(&[DcOperation::Scanl1]);
        let lambdas: Vec<_> = enumerate_steps(&[List], &scan)
            .map(|s| s.op.lambda().unwrap())
            .collect();
        assert_eq!(lambdas, Combiner::ALL.map(Lambda::Combiner));
    }
}
