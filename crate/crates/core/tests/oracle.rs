mod support;

use citeprop::engine::{self, Convergence, EngineConfig};
use citeprop::scheme::{CodeKind, SchemeRow};
use citeprop::{CategoryScheme, CorpusBuilder};
use citeprop_oracle::{max_abs_diff, solve};

fn three_categories() -> CategoryScheme {
    CategoryScheme::from_rows(&[
        SchemeRow::new(1101, 1100, CodeKind::Misc),
        SchemeRow::new(1102, 1100, CodeKind::Regular),
        SchemeRow::new(1103, 1100, CodeKind::Regular),
        SchemeRow::new(1202, 1200, CodeKind::Regular),
    ])
    .unwrap()
}

/// Five papers over three categories, with a misc journal and a dual one.
fn five_papers() -> citeprop::Corpus {
    let mut b = CorpusBuilder::new();
    b.journal("A", &[1102]).journal("B", &[1103, 1202]).journal("M", &[1101]);
    b.journal_code("C", 1102, 2.0).journal_code("C", 1202, 1.0);
    b.paper("p1", "A").paper("p2", "B").paper("p3", "M").paper("p4", "C").paper("p5", "B");
    for (p, refs) in [
        ("p1", &["r1", "r2", "r3"][..]),
        ("p2", &["r2", "r4", "r5"]),
        ("p3", &["r1", "r4", "r5", "r5"]),
        ("p4", &["r3", "r1", "r6"]),
        ("p5", &["r6", "r4"]),
    ] {
        for r in refs {
            b.reference(p, r);
        }
    }
    b.build(&three_categories()).unwrap()
}

#[test]
fn hand_built_corpus_matches_dense_solver() {
    let corpus = five_papers();
    assert_eq!(corpus.eligible_count(), 4);
    for fractional in [false, true] {
        let config = EngineConfig {
            fractional,
            convergence: Convergence::Absolute(1e-10),
            ..EngineConfig::default()
        };
        let out = engine::run(&corpus, config).unwrap();
        let dense = solve(&support::dense_problem(&corpus, &config));
        assert!(out.converged && dense.converged);
        assert!(max_abs_diff(&support::dense_of(&corpus, &out.jl), &dense.jl) <= 1e-12);
        assert!(max_abs_diff(&support::dense_of(&corpus, &out.u1), &dense.u1) <= 1e-12);
        assert_eq!(out.jl.run.unwrap().residual_trace, dense.residuals);
        assert!(out.jl.unreclassified.contains("p5"));
    }
}

#[test]
fn random_corpora_match_dense_solver() {
    support::oracle_equivalence(support::CASES).unwrap();
}
