mod common;

use proptest::prelude::*;
use proptest::test_runner::{RngSeed, TestCaseError};

use fsq::verify::{self, VerifyConfig};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(verify::DEFAULT_SEED),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn lift<T>(r: Result<T, String>) -> Result<T, TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn transform_round_trip(seed in any::<u64>()) {
        lift(common::round_trip(seed))?;
    }

    #[test]
    fn balance_is_transported(seed in any::<u64>()) {
        lift(common::balance_transport(seed))?;
    }

    #[test]
    fn diagonal_counts_sum_to_n(seed in any::<u64>()) {
        lift(common::counts_total(seed))?;
    }

    #[test]
    fn validate_matches_recount(seed in any::<u64>()) {
        lift(common::validate_matches_recount(seed))?;
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn merge_lemma(seed in any::<u64>()) {
        lift(common::merge_lemma(seed))?;
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn blow_up_validates(seed in any::<u64>()) {
        lift(common::blow_up_valid(seed))?;
    }

    #[test]
    fn find_exact_matches_naive(seed in any::<u64>()) {
        lift(common::exact_matches_naive(seed))?;
    }

    #[test]
    fn finders_are_sound(seed in any::<u64>()) {
        lift(common::finders_sound(seed))?;
    }

    #[test]
    fn constructive_two_symbol(seed in any::<u64>()) {
        lift(common::m2_constructive(seed))?;
    }

    #[test]
    fn equivalence_is_an_equivalence(seed in any::<u64>()) {
        lift(common::equivalence_triple(seed))?;
    }

    #[test]
    fn existence_is_a_class_invariant(seed in any::<u64>()) {
        lift(common::existence_invariant(seed))?;
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn plex_construction_is_balanced(seed in any::<u64>()) {
        lift(common::plex_construction(seed))?;
    }

    #[test]
    fn plex_decomposition(seed in any::<u64>()) {
        lift(common::decomposition(seed))?;
    }

    // 100 x 100 moves.
    #[test]
    fn descent_bookkeeping(seed in any::<u64>()) {
        lift(common::descent_bookkeeping(seed, 100))?;
    }
}

#[test]
fn a_parity() {
    common::a_parity().unwrap();
}

#[test]
fn delta_vanishes_mod_n() {
    common::delta_cells().unwrap();
}

#[test]
fn labeled_count_oracle_matches_known_values() {
    assert_eq!(common::labeled_count(1, 3), 1);
    assert_eq!(common::labeled_count(3, 1), 12);
    assert_eq!(common::labeled_count(4, 1), 576);
    assert_eq!(common::labeled_count(2, 2), 90);
    // Squares equivalent to A: choose the class of row 0, then the column class.
    assert_eq!(common::binomial(5, 2) * common::binomial(6, 3), 200);
}

#[test]
fn exhaustive_totals_match_independent_count() {
    let cfg = VerifyConfig::default();
    let m2 = verify::check_theorem_m2(2, &cfg).unwrap();
    assert_eq!(m2.total_checked, common::labeled_count(2, 2));
    let m3 = verify::check_theorem_m3(1, 0, 0, &cfg).unwrap();
    assert_eq!(m3.mode, verify::Mode::Exhaustive);
    assert_eq!(m3.total_checked, common::labeled_count(3, 1));
    let c = verify::check_conjecture(5, 1, 0, 0, &cfg).unwrap();
    assert_eq!(c.mode, verify::Mode::Exhaustive);
    assert_eq!(c.total_checked, common::labeled_count(5, 1));
    assert!(m2.held() && m3.held() && c.held());
}

#[test]
fn reports_are_reproducible() {
    let cfg = VerifyConfig::default();
    let run = || {
        let a = verify::check_theorem_m3(3, 40, 7, &cfg).unwrap();
        let b = verify::check_conjecture(3, 3, 40, 7, &cfg).unwrap();
        (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap())
    };
    assert_eq!(run(), run());
    let other = verify::check_theorem_m3(3, 40, 8, &cfg).unwrap();
    assert_eq!(other.seed, Some(8));
}

#[test]
fn reported_violations_revalidate() {
    // Existence reports only list squares that have no balanced diagonal.
    let cfg = VerifyConfig::default();
    let reports = [
        verify::check_theorem_m2(2, &cfg).unwrap(),
        verify::check_theorem_m3(3, 30, 1, &cfg).unwrap(),
        verify::check_conjecture(4, 2, 30, 1, &cfg).unwrap(),
    ];
    for r in &reports {
        for v in &r.violations {
            let text = v.square.to_text();
            let back = fsq::FrequencySquare::parse(&text).unwrap();
            assert_eq!(back, v.square);
            assert!(common::naive_balanced(&back).is_none());
        }
    }
}
