//! The goal-directed search against brute-force enumeration.

use std::collections::{BTreeMap, BTreeSet};

use exedec_core::robustfill::search::{prefix_candidates, representative};
use exedec_core::robustfill::{
    all_modifications, all_substrings, eval_expr, parse_expr, ComposeInner, RfChar, RfExpr, RfOpKind,
};
use proptest::prelude::*;

const INPUTS: [&str; 2] = ["ab Cd.12 x", "Q 7.ef GH"];

fn non_compose_kinds() -> Vec<RfOpKind> {
    RfOpKind::ALL
        .into_iter()
        .filter(|k| !RfOpKind::COMPOSE.contains(k))
        .collect()
}

fn outputs(e: &RfExpr, inputs: &[&str]) -> Option<Vec<String>> {
    inputs.iter().map(|x| eval_expr(e, x).ok()).collect()
}

fn is_candidate(outs: &[String], targets: &[&str]) -> bool {
    outs.iter().zip(targets).all(|(o, t)| t.starts_with(o.as_str())) && outs.iter().any(|o| !o.is_empty())
}

/// Every non-composed expression, in enumeration order.
fn brute_force(inputs: &[&str], targets: &[&str]) -> BTreeMap<Vec<String>, RfExpr> {
    let mut best = BTreeMap::new();
    let exprs = all_substrings()
        .map(RfExpr::Substring)
        .chain(all_modifications().map(RfExpr::Modification))
        .chain(RfChar::all().map(RfExpr::ConstStr));
    for e in exprs {
        if let Some(outs) = outputs(&e, inputs) {
            if is_candidate(&outs, targets) {
                best.entry(outs).or_insert(e);
            }
        }
    }
    best
}

#[test]
fn lossless_with_minimal_representatives_outside_composition() {
    let target_sets: [[&str; 2]; 3] = [["Cd.12", "7.ef"], ["AB CD", "Q 7"], ["x#", "H#"]];
    for targets in target_sets {
        let expected = brute_force(&INPUTS, &targets);
        let got = prefix_candidates(&INPUTS, &targets, &non_compose_kinds(), None);
        assert!(!got.truncated);
        let got: BTreeMap<Vec<String>, RfExpr> = got.found.into_iter().map(|f| (f.outputs, f.expr)).collect();
        assert_eq!(got.len(), expected.len(), "targets {targets:?}");
        for (outs, e) in &expected {
            assert_eq!(got.get(outs), Some(e), "outputs {outs:?}");
        }
    }
}

#[test]
fn representatives_reproduce_their_outputs() {
    let inputs = ["Jan 2024, NY", "Feb 1999, LA"];
    for text in [
        "GetToken(NUMBER, 1)",
        "ToCase(LOWER)(GetToken(ALL_CAPS, -1))",
        "Substitute(',', 1, '.')",
        "ConstStr('$')",
    ] {
        let e = parse_expr(text).unwrap();
        let outs: Vec<String> = outputs(&e, &inputs).unwrap();
        let outs: Vec<&str> = outs.iter().map(String::as_str).collect();
        let rep = representative(&inputs, &outs, &e).unwrap();
        assert!(rep <= e, "{rep} after {e}");
        assert_eq!(outputs(&rep, &inputs).unwrap(), outs, "{rep} for {e}");
    }
}

fn string_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop::sample::select(vec!['a', 'B', 'c', '1', '2', ' ', '.', 'X']),
        1..10,
    )
    .prop_map(|cs| cs.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Targets come from one composition; every composition sharing its inner
    /// expression that yields prefixes must be among the found tuples.
    #[test]
    fn lossless_over_composed_outputs(
        sub in 0usize..all_substrings().count(),
        modi in 0usize..all_modifications().count(),
        outer in 0usize..all_modifications().count(),
        use_sub in any::<bool>(),
    ) {
        let inner = if use_sub {
            ComposeInner::Substring(all_substrings().nth(sub).unwrap())
        } else {
            ComposeInner::Modification(all_modifications().nth(modi).unwrap())
        };
        // The first outer modification from `outer` on that applies.
        let Some(seed_outs) = all_modifications()
            .cycle()
            .skip(outer)
            .take(all_modifications().count())
            .find_map(|m| outputs(&RfExpr::Compose(m, inner), &INPUTS))
        else {
            return Ok(());
        };
        let targets: Vec<String> = seed_outs.iter().map(|o| format!("{o}!")).collect();
        let targets: Vec<&str> = targets.iter().map(String::as_str).collect();
        let found: BTreeSet<Vec<String>> = prefix_candidates(&INPUTS, &targets, &RfOpKind::ALL, None)
            .found
            .into_iter()
            .map(|f| f.outputs)
            .collect();
        for m in all_modifications() {
            let e = RfExpr::Compose(m, inner);
            if let Some(outs) = outputs(&e, &INPUTS) {
                if is_candidate(&outs, &targets) {
                    prop_assert!(found.contains(&outs), "{} gives {:?}", e, outs);
                }
            }
        }
    }

    #[test]
    fn found_outputs_are_prefixes_and_evaluate(
        xs in proptest::collection::vec(string_strategy(), 1..3),
        cut in 0usize..8,
    ) {
        let targets: Vec<String> = xs.iter().map(|x| {
            let up: String = x.to_ascii_uppercase();
            up.chars().skip(cut % (up.len() + 1)).collect::<String>() + "#"
        }).collect();
        let inputs: Vec<&str> = xs.iter().map(String::as_str).collect();
        let targets: Vec<&str> = targets.iter().map(String::as_str).collect();
        let out = prefix_candidates(&inputs, &targets, &RfOpKind::ALL, None);
        let mut seen = BTreeSet::new();
        for f in &out.found {
            prop_assert!(seen.insert(f.outputs.clone()), "duplicate tuple {:?}", f.outputs);
            prop_assert_eq!(&outputs(&f.expr, &inputs).unwrap(), &f.outputs, "{}", f.expr);
            prop_assert!(is_candidate(&f.outputs, &targets));
        }
    }
}
