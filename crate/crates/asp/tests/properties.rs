use asploop_asp::*;
use proptest::prelude::*;

/// Random statements over a tiny vocabulary: `d/1` domain facts, choice
/// atoms `p/1`, `q/1`, derived atoms `r/1`, `s/0`.
fn statement() -> impl Strategy<Value = String> {
    let pred = prop_oneof![Just("p"), Just("q")];
    let any_pred = prop_oneof![Just("p"), Just("q"), Just("r")];
    let neg = prop_oneof![Just(""), Just("not ")];
    prop_oneof![
        (pred.clone(), 0u32..2, 1u32..3).prop_map(|(p, lo, hi)| format!("{lo} {{ {p}(X) : d(X) }} {hi}.")),
        (pred.clone(), any_pred.clone(), neg.clone()).prop_map(|(p, b, n)| format!("{{ {p}(X) }} :- d(X), {n}{b}(X).")),
        (any_pred.clone(), neg.clone(), any_pred.clone()).prop_map(|(a, n, b)| format!("r(X) :- {a}(X), {n}{b}(X).")),
        (any_pred.clone(), neg.clone(), any_pred.clone()).prop_map(|(a, n, b)| format!(":- {a}(X), {n}{b}(X).")),
        (any_pred.clone(), 1i64..3).prop_map(|(a, k)| format!("s :- {a}({k}), not r({k}).")),
        (any_pred.clone(), any_pred.clone()).prop_map(|(a, b)| format!(":- {a}(X), {b}(Y), X != Y + 1.")),
        (pred, 1i64..3).prop_map(|(p, k)| format!("{{ X = 1; Y = {k} }} = 1 :- {p}(X), d(Y).")),
        Just("s :- not s2. s2 :- not s.".to_string()),
        Just(":- s.".to_string()),
    ]
}

fn program() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(statement(), 1..7).prop_map(|mut v| {
        v.insert(0, "d(1;2).".to_string());
        v
    })
}

fn models(src: &str) -> Vec<AnswerSet> {
    let prog = ground(&parse_program(src).unwrap()).unwrap();
    enumerate_models(&prog, 100_000).unwrap().models
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn enumerator_agrees_with_brute_force(stmts in program()) {
        let src = stmts.join("\n");
        let prog = ground(&parse_program(&src).unwrap()).unwrap();
        let fast = enumerate_models(&prog, 100_000).unwrap();
        prop_assert!(fast.exhausted);
        let slow = brute_force_models(&prog).unwrap();
        prop_assert_eq!(&fast.models, &slow, "program:\n{}", src);
        for m in &fast.models {
            prop_assert!(is_stable_model(&prog, m));
        }
    }

    #[test]
    fn statement_order_does_not_matter(stmts in program(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut shuffled = stmts.clone();
        shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        prop_assert_eq!(models(&stmts.join("\n")), models(&shuffled.join("\n")));
    }

    #[test]
    fn constraints_only_remove_models(stmts in program(), extra in prop_oneof![
        Just(":- p(1)."), Just(":- q(X), not p(X)."), Just(":- r(2)."), Just(":- s.")
    ]) {
        let base = models(&stmts.join("\n"));
        let narrowed = models(&format!("{}\n{extra}", stmts.join("\n")));
        for m in &narrowed {
            prop_assert!(base.contains(m));
        }
    }

    #[test]
    fn printing_is_a_parse_fixed_point(stmts in program()) {
        let parsed = parse_program(&stmts.join("\n")).unwrap();
        let printed = print_program(&parsed);
        let reparsed = parse_program(&printed).unwrap();
        prop_assert_eq!(&parsed, &reparsed);
        prop_assert_eq!(printed.clone(), print_program(&reparsed));
    }
}

#[test]
fn four_by_four_bijections() {
    // Four attributes each bijective with the key: (4!)^3 assignments.
    let src = "k(1;2;3;4). a(1;2;3;4). b(1;2;3;4). c(1;2;3;4).
        1 { t(K, A, B, C) : a(A), b(B), c(C) } 1 :- k(K).
        { K1 = K2; A1 = A2; B1 = B2; C1 = C2 } = 0 :- t(K1, A1, B1, C1), t(K2, A2, B2, C2), (K1, A1, B1, C1) != (K2, A2, B2, C2).";
    let prog = ground(&parse_program(src).unwrap()).unwrap();
    let e = enumerate_models(&prog, 1_000_000).unwrap();
    assert!(e.exhausted);
    assert_eq!(e.models.len(), 13824);
}

#[test]
fn cap_plus_one() {
    let prog = ground(&parse_program("{ p(1;2;3;4;5;6) }.").unwrap()).unwrap();
    let e = enumerate_models(&prog, 10).unwrap();
    assert_eq!(e.models.len(), 11);
    assert!(!e.exhausted);
}
