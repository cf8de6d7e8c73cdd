use escape_core::corpus::falsification_corpus;
use escape_core::invariants::check_all;
use escape_core::io::config::RunConfig;
use escape_core::run;

const BASE: &str = r#"{
    "eps": 0.5,
    "man_start": [0, 0],
    "lions": [
        {"start": [1, 0], "controller": {"kind": "pure_pursuit"}},
        {"start": [0, 1], "controller": {"kind": "pure_pursuit"}},
        {"start": [-1, 0], "controller": {"kind": "pure_pursuit"}}
    ],
    "level": 2,
    "horizon": {"intervals": 1}
}"#;

#[test]
fn every_checker_catches_its_violation_at_the_planted_sample() {
    let base = run(&RunConfig::parse(BASE).unwrap().game::<f64>().unwrap()).unwrap();
    assert!(
        check_all(&base).iter().all(|v| v.pass),
        "base trace must be clean"
    );
    let corpus = falsification_corpus(&base);
    assert_eq!(corpus.len(), 10);
    for case in &corpus {
        let v = case.run();
        assert!(!v.pass, "{} did not fail", case.checker);
        assert_eq!(
            v.first_violation_index,
            Some(case.index),
            "{}: {}",
            case.checker,
            v.details
        );
        assert_eq!(
            v.first_violation_time,
            Some(case.time()),
            "{}",
            case.checker
        );
    }
}
