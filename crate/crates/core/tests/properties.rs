mod support;

use support::CASES;

#[test]
fn vectors_stay_normalized_every_iteration() {
    support::normalization(CASES).unwrap();
}

#[test]
fn journal_limited_support_is_preserved() {
    support::jl_support(CASES).unwrap();
}

#[test]
fn prune_is_monotone_in_threshold() {
    support::prune_monotonicity(CASES).unwrap();
}

#[test]
fn prune_is_idempotent() {
    support::prune_idempotence(CASES).unwrap();
}

#[test]
fn fractional_weighting_ignores_repeated_reference_lists() {
    support::fractional_duplication(CASES).unwrap();
}

#[test]
fn ingestion_builds_the_transpose() {
    support::transpose_identity(CASES).unwrap();
}

#[test]
fn journal_fractionalization() {
    support::fractionalize_properties(CASES).unwrap();
}

#[test]
fn corpus_cache_is_deterministic() {
    support::cache_round_trip(200).unwrap();
}
