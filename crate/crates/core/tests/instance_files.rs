use conedual::gallery::{self, example_adapted};
use conedual::instance::{instance_json, parse_str, program_json, to_string};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gallery_instances_round_trip(seed in 0u64..100_000, profile in 0usize..6) {
        let inst = gallery::random_program(gallery::PROFILES[profile].0, seed).unwrap();
        let text = to_string(&instance_json(&inst));
        let back = parse_str(&text).unwrap();
        prop_assert_eq!(&back.program, &inst.program);
        prop_assert_eq!(to_string(&back.to_json()), text);
    }
}

#[test]
fn dual_instances_keep_their_sense() {
    let p = example_adapted(4).unwrap().program.dualize();
    let text = to_string(&program_json(&p, None));
    assert!(text.contains("\"sense\": \"inf\""));
    assert_eq!(parse_str(&text).unwrap().program, p);
}

#[test]
fn errors_name_the_field() {
    let good = to_string(&program_json(&example_adapted(3).unwrap().program, None));
    let bad = good.replace("\"b\": [", "\"b\": [\"oops\", ");
    let e = parse_str(&bad).unwrap_err();
    assert!(e.path.starts_with('b'), "{e}");
    assert!(parse_str("{").is_err());
}
