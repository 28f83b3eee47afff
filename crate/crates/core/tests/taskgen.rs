use std::collections::HashSet;

use exedec_core::engine::replay;
use exedec_core::records::TaskRecord;
use exedec_core::taskgen::{build_corpus, category_holds, Category, CorpusRequest, GenConfig, GenError, Split, Task};
use exedec_core::{Domain, Limits, Value};

fn request(domain: Domain, category: Category, split: Split, count: u64, seed: u64) -> CorpusRequest {
    CorpusRequest {
        domain,
        category,
        split,
        count,
        seed,
    }
}

fn solves(t: &Task) -> bool {
    let outputs: Vec<Value> = t.spec.outputs().cloned().collect();
    replay(t.domain, &t.spec, &t.ground_truth, &Limits::DEFAULT).is_ok_and(|v| v == outputs)
}

#[test]
fn every_category_yields_sound_tasks() {
    for domain in [Domain::DeepCoder, Domain::RobustFill] {
        for category in Category::ALL {
            for split in Split::ALL {
                let tasks = build_corpus(&request(domain, category, split, 40, 1), &GenConfig::default()).unwrap();
                assert_eq!(tasks.len(), 40);
                for t in &tasks {
                    assert!(solves(t), "{domain} {category} {split}: {}", t.ground_truth);
                    assert!(
                        category_holds(domain, category, split, &t.ground_truth),
                        "{}",
                        t.ground_truth
                    );
                    assert_eq!(t.spec.len(), 3);
                }
            }
        }
    }
}

#[test]
fn corpora_are_deterministic_per_seed() {
    for domain in [Domain::DeepCoder, Domain::RobustFill] {
        let req = request(domain, Category::SwitchConceptOrder, Split::Test, 25, 3);
        let a = build_corpus(&req, &GenConfig::default()).unwrap();
        let b = build_corpus(&req, &GenConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = build_corpus(&CorpusRequest { seed: 4, ..req }, &GenConfig::default()).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn ids_are_unique_and_tasks_distinct() {
    let req = request(Domain::DeepCoder, Category::ComposeNewOperation, Split::Train, 400, 0);
    let tasks = build_corpus(&req, &GenConfig::default()).unwrap();
    let ids: HashSet<_> = tasks.iter().map(|t| t.id.clone()).collect();
    assert_eq!(ids.len(), tasks.len());
    let keys: HashSet<_> = tasks
        .iter()
        .map(|t| (t.ground_truth.to_string(), serde_json::to_string(&t.spec).unwrap()))
        .collect();
    assert_eq!(keys.len(), tasks.len());
    // The first quarter are single Scanl1 steps.
    for t in &tasks[..100] {
        assert_eq!(t.ground_truth.len(), 1);
        assert!(t.ground_truth.to_string().contains("Scanl1"));
    }
    assert!(tasks[100..].iter().all(|t| t.ground_truth.len() >= 2));
}

#[test]
fn length_restriction_is_applied_and_checked() {
    let config = GenConfig {
        lengths: Some(2..=3),
        ..GenConfig::default()
    };
    let req = request(Domain::RobustFill, Category::TrainDistribution, Split::Train, 30, 2);
    let tasks = build_corpus(&req, &config).unwrap();
    assert!(tasks.iter().all(|t| (2..=3).contains(&t.ground_truth.len())));

    let req = request(Domain::DeepCoder, Category::LengthGeneralization, Split::Test, 5, 2);
    assert!(matches!(build_corpus(&req, &config), Err(GenError::NoLengths { .. })));
    assert!(matches!(
        build_corpus(&CorpusRequest { count: 0, ..req }, &GenConfig::default()),
        Err(GenError::ZeroCount)
    ));
}

#[test]
fn string_inputs_are_short_printable_ascii() {
    let req = request(Domain::RobustFill, Category::LengthGeneralization, Split::Test, 50, 6);
    for t in build_corpus(&req, &GenConfig::default()).unwrap() {
        for ex in t.spec.examples() {
            let x = ex.inputs["x"].as_str().unwrap();
            assert!((1..=20).contains(&x.chars().count()), "{x:?}");
            assert!(x.chars().all(|c| c.is_ascii_graphic() || c == ' '), "{x:?}");
        }
    }
}

#[test]
fn records_round_trip() {
    let req = request(
        Domain::RobustFill,
        Category::AddOperationFunctionality,
        Split::Test,
        10,
        0,
    );
    for t in build_corpus(&req, &GenConfig::default()).unwrap() {
        let line = serde_json::to_string(&TaskRecord::from(&t)).unwrap();
        let back: TaskRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.into_task().unwrap(), t);
    }
}
