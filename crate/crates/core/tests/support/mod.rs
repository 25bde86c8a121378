//! Random corpora and invariant checks shared by the integration tests and
//! the acceptance suite. Every check runs on a deterministic proptest runner
//! so failures reproduce.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::Cursor;

use citeprop::assign::{prune, PruneConfig};
use citeprop::engine::{self, Convergence, EngineConfig, Propagator};
use citeprop::scheme::{CodeKind, SchemeRow, MULTIDISCIPLINARY_CODE};
use citeprop::{fractionalize_journal, CategoryScheme, Classification, Corpus, CorpusBuilder, JournalAssignment, WeightVector};
use citeprop_oracle::{max_abs_diff, prune_bruteforce, solve, DenseProblem};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 1000;
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RandomCorpus {
    pub areas: u32,
    pub per_area: u32,
    /// (code, degree) per journal.
    pub journals: Vec<Vec<(u32, f64)>>,
    /// (journal index, reference indices) per paper.
    pub papers: Vec<(usize, Vec<usize>)>,
    pub min_refs: usize,
}

pub fn area_code(a: u32) -> u32 {
    1100 + 100 * a
}

impl RandomCorpus {
    pub fn scheme_rows(&self) -> Vec<SchemeRow> {
        let mut rows = vec![SchemeRow::new(MULTIDISCIPLINARY_CODE, MULTIDISCIPLINARY_CODE, CodeKind::Multidisciplinary)];
        for a in 0..self.areas {
            let area = area_code(a);
            rows.push(SchemeRow::new(area + 1, area, CodeKind::Misc));
            for j in 0..self.per_area {
                rows.push(SchemeRow::new(area + 2 + j, area, CodeKind::Regular));
            }
        }
        rows
    }

    pub fn scheme(&self) -> CategoryScheme {
        CategoryScheme::from_rows(&self.scheme_rows()).unwrap()
    }

    /// Regular codes, then misc codes, then the multidisciplinary code.
    pub fn all_codes(areas: u32, per_area: u32) -> Vec<u32> {
        let mut codes: Vec<u32> = (0..areas)
            .flat_map(|a| (0..per_area).map(move |j| area_code(a) + 2 + j))
            .collect();
        codes.extend((0..areas).map(|a| area_code(a) + 1));
        codes.push(MULTIDISCIPLINARY_CODE);
        codes
    }

    pub fn paper_id(i: usize) -> String {
        format!("p{i:03}")
    }

    pub fn reference_id(r: usize) -> String {
        format!("r{r:03}")
    }

    pub fn journal_id(j: usize) -> String {
        format!("j{j}")
    }

    pub fn builder(&self) -> CorpusBuilder {
        let mut b = CorpusBuilder::new();
        for (j, codes) in self.journals.iter().enumerate() {
            for &(code, degree) in codes {
                b.journal_code(&Self::journal_id(j), code, degree);
            }
        }
        for (i, (j, refs)) in self.papers.iter().enumerate() {
            b.paper(&Self::paper_id(i), &Self::journal_id(*j));
            for &r in refs {
                b.reference(&Self::paper_id(i), &Self::reference_id(r));
            }
        }
        b.min_refs(self.min_refs);
        b
    }

    pub fn corpus(&self) -> Corpus {
        self.builder().build(&self.scheme()).unwrap()
    }

    /// The three input tables with rows emitted in the given orders.
    pub fn tables(&self, paper_order: &[usize], slot_order: &[usize]) -> (String, String, String) {
        let mut journals = String::from("journal_id\tcode\tdegree\n");
        for (j, codes) in self.journals.iter().enumerate().rev() {
            for &(code, degree) in codes {
                journals.push_str(&format!("{}\t{}\t{:?}\n", Self::journal_id(j), code, degree));
            }
        }
        let mut papers = String::from("paper_id,journal_id\n");
        for &i in paper_order {
            papers.push_str(&format!("{},{}\n", Self::paper_id(i), Self::journal_id(self.papers[i].0)));
        }
        let slots: Vec<(usize, usize)> = self
            .papers
            .iter()
            .enumerate()
            .flat_map(|(i, (_, refs))| refs.iter().map(move |&r| (i, r)))
            .collect();
        let mut references = String::from("paper_id\treference_id\n");
        for &s in slot_order {
            let (i, r) = slots[s];
            references.push_str(&format!("{}\t{}\n", Self::paper_id(i), Self::reference_id(r)));
        }
        (papers, journals, references)
    }

    pub fn slot_count(&self) -> usize {
        self.papers.iter().map(|(_, r)| r.len()).sum()
    }
}

pub fn arb_corpus(max_papers: usize, max_areas: u32, max_per_area: u32) -> impl Strategy<Value = RandomCorpus> {
    (1..=max_areas, 1..=max_per_area, 1usize..=6, 1..=max_papers, 1usize..=40, 0usize..=3)
        .prop_flat_map(|(areas, per_area, journals, papers, refs, min_refs)| {
            let codes = RandomCorpus::all_codes(areas, per_area).len();
            let degree = prop_oneof![2 => Just(1.0), 1 => 0.1f64..3.0];
            let journal = prop::collection::vec((0..codes, degree), 1..=3);
            let paper = (0..journals, prop::collection::vec(0..refs, 0..=8));
            (
                Just(areas),
                Just(per_area),
                prop::collection::vec(journal, journals),
                prop::collection::vec(paper, papers),
                Just(min_refs),
            )
        })
        .prop_map(|(areas, per_area, journals, papers, min_refs)| {
            let all = RandomCorpus::all_codes(areas, per_area);
            let journals = journals
                .into_iter()
                .map(|picks| {
                    let mut seen = BTreeSet::new();
                    picks
                        .into_iter()
                        .filter(|(c, _)| seen.insert(*c))
                        .map(|(c, d)| (all[c], d))
                        .collect()
                })
                .collect();
            RandomCorpus {
                areas,
                per_area,
                journals,
                papers,
                min_refs,
            }
        })
}

pub fn dense_problem(corpus: &Corpus, config: &EngineConfig) -> DenseProblem {
    DenseProblem {
        initial: corpus.dense_initial(),
        paper_refs: corpus.reference_slots(),
        num_refs: corpus.reference_count(),
        eligible: corpus.eligibility().to_vec(),
        include_ineligible_citers: config.include_ineligible_citers,
        fractional: config.fractional,
        threshold: config.convergence.total(corpus.eligible_count()),
        max_iterations: config.max_iterations,
    }
}

/// Classification as a dense matrix in corpus order; unreclassified papers
/// keep their initial vector.
pub fn dense_of(corpus: &Corpus, c: &Classification) -> Vec<Vec<f64>> {
    corpus
        .papers()
        .iter()
        .map(|p| {
            let mut row = vec![0.0; corpus.category_count()];
            match c.get(&p.id) {
                Some(v) => v.add_into(&mut row),
                None => p.initial.add_into(&mut row),
            }
            row
        })
        .collect()
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn assert_unit(v: &WeightVector, what: &str) -> Result<(), TestCaseError> {
    prop_assert!((v.sum() - 1.0).abs() <= SUM_TOLERANCE, "{} sums to {}", what, v.sum());
    Ok(())
}

fn arb_config() -> impl Strategy<Value = EngineConfig> {
    (any::<bool>(), any::<bool>(), prop_oneof![Just(1e-3), Just(0.05), Just(f64::MIN_POSITIVE)], 1usize..=12).prop_map(
        |(fractional, include_ineligible_citers, t, max_iterations)| EngineConfig {
            fractional,
            convergence: Convergence::Absolute(t),
            max_iterations,
            include_ineligible_citers,
            unlimited_passes: 1,
        },
    )
}

/// Every paper and non-empty reference vector sums to 1 after every
/// iteration, and after the unlimited pass.
pub fn normalization(cases: u32) -> Result<(), String> {
    check(cases, (arb_corpus(40, 3, 4), arb_config()), |(rc, config)| {
        let corpus = rc.corpus();
        let mut p = Propagator::new(&corpus, config).unwrap();
        for _ in 0..config.max_iterations {
            p.step();
            for (i, v) in p.paper_vectors().iter().enumerate() {
                assert_unit(v, &format!("paper {i}"))?;
            }
            for (r, v) in p.reference_vectors().iter().enumerate() {
                if !v.is_empty() {
                    assert_unit(v, &format!("reference {r}"))?;
                }
            }
        }
        for (i, v) in p.unlimited().0.iter().enumerate() {
            assert_unit(v, &format!("unlimited paper {i}"))?;
        }
        Ok(())
    })
}

/// Journal-limited vectors never leave the journal's initial support.
pub fn jl_support(cases: u32) -> Result<(), String> {
    check(cases, (arb_corpus(40, 3, 4), arb_config()), |(rc, config)| {
        let corpus = rc.corpus();
        let mut p = Propagator::new(&corpus, config).unwrap();
        for _ in 0..config.max_iterations {
            p.step();
            for (paper, v) in corpus.papers().iter().zip(p.paper_vectors()) {
                prop_assert!(v.is_subset_of(&paper.initial), "{} left its support", paper.id);
            }
        }
        let out = engine::run(&corpus, config).unwrap();
        for paper in corpus.papers() {
            if let Some(v) = out.jl.get(&paper.id) {
                prop_assert!(v.is_subset_of(&paper.initial));
            }
        }
        Ok(())
    })
}

/// Sparse positive vectors with frequent exact ties.
pub fn arb_vector() -> impl Strategy<Value = WeightVector> {
    let weight = prop_oneof![
        1 => prop::sample::select(vec![0.1, 0.2, 0.25, 0.5, 1.0]),
        3 => 0.001f64..1.0,
    ];
    prop::collection::vec((0u32..20, weight), 1..=12).prop_map(|pairs| WeightVector::from_pairs(pairs).normalized())
}

fn dense(v: &WeightVector, k: usize) -> Vec<f64> {
    let mut row = vec![0.0; k];
    v.add_into(&mut row);
    row
}

/// A higher threshold keeps a subset of what a lower one keeps; both agree
/// with exhaustive search.
pub fn prune_monotonicity(cases: u32) -> Result<(), String> {
    check(cases, (arb_vector(), 0.01f64..=1.0, 0.01f64..=1.0), |(v, a, b)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let plo = prune(&v, &PruneConfig::new(lo).unwrap()).unwrap();
        let phi = prune(&v, &PruneConfig::new(hi).unwrap()).unwrap();
        prop_assert!(phi.is_subset_of(&plo), "t={hi}: {phi:?} not within t={lo}: {plo:?}");
        for (t, p) in [(lo, &plo), (hi, &phi)] {
            prop_assert!(p.len() <= 5);
            assert_unit(p, "pruned")?;
            let brute = prune_bruteforce(&dense(&v, 20), t, 5);
            prop_assert!(max_abs_diff(&[dense(p, 20)], &[brute]) <= 1e-15);
        }
        Ok(())
    })
}

pub fn prune_idempotence(cases: u32) -> Result<(), String> {
    check(cases, (arb_vector(), 0.01f64..=1.0), |(v, t)| {
        let cfg = PruneConfig::new(t).unwrap();
        let once = prune(&v, &cfg).unwrap();
        let twice = prune(&once, &cfg).unwrap();
        prop_assert!(once.support().eq(twice.support()));
        for ((_, a), (_, b)) in once.iter().zip(twice.iter()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        Ok(())
    })
}

/// Repeating a paper's whole reference list leaves fractional results
/// unchanged.
pub fn fractional_duplication(cases: u32) -> Result<(), String> {
    let strategy = arb_corpus(30, 3, 3).prop_flat_map(|rc| {
        let n = rc.papers.len();
        (Just(rc), prop::collection::vec(1usize..=3, n), 1usize..=8, any::<bool>())
    });
    check(cases, strategy, |(mut rc, copies, max_iterations, include)| {
        rc.min_refs = 0;
        let config = EngineConfig {
            fractional: true,
            convergence: Convergence::Absolute(f64::MIN_POSITIVE),
            max_iterations,
            include_ineligible_citers: include,
            unlimited_passes: 1,
        };
        let base = engine::run(&rc.corpus(), config).unwrap();
        let mut dup = rc.clone();
        for ((_, refs), &m) in dup.papers.iter_mut().zip(&copies) {
            *refs = refs.repeat(m);
        }
        let corpus = dup.corpus();
        let again = engine::run(&corpus, config).unwrap();
        let d_jl = max_abs_diff(&dense_of(&corpus, &base.jl), &dense_of(&corpus, &again.jl));
        let d_u1 = max_abs_diff(&dense_of(&corpus, &base.u1), &dense_of(&corpus, &again.u1));
        prop_assert!(d_jl <= 1e-12 && d_u1 <= 1e-12, "JL {d_jl:e}, U1 {d_u1:e}");
        Ok(())
    })
}

/// Ingesting tables in any row order gives the same corpus, and the citer
/// index is the exact transpose of the reference lists.
pub fn transpose_identity(cases: u32) -> Result<(), String> {
    let strategy = arb_corpus(40, 2, 4).prop_flat_map(|rc| {
        let papers: Vec<usize> = (0..rc.papers.len()).collect();
        let slots: Vec<usize> = (0..rc.slot_count()).collect();
        (Just(rc), Just(papers).prop_shuffle(), Just(slots).prop_shuffle())
    });
    check(cases, strategy, |(rc, paper_order, slot_order)| {
        let scheme = rc.scheme();
        let (p, j, r) = rc.tables(&paper_order, &slot_order);
        let read = Corpus::read(Cursor::new(p), Cursor::new(j), Cursor::new(r), &scheme)
            .unwrap()
            .with_min_refs(rc.min_refs);
        let built = rc.corpus();
        prop_assert!(read == built, "row order changed the corpus");
        let mut slots = 0;
        for r in 0..read.reference_count() {
            let id = read.reference_id(r as u32);
            let mut expected = Vec::new();
            for (pi, paper) in read.papers().iter().enumerate() {
                for &slot in &paper.references {
                    if read.reference_id(slot) == id {
                        expected.push(pi as u32);
                    }
                }
            }
            prop_assert_eq!(read.citers(r as u32), expected.as_slice());
            slots += expected.len();
        }
        prop_assert_eq!(slots, rc.slot_count());
        prop_assert_eq!(read.slot_count(), rc.slot_count());
        // Slot multisets per paper survive ingestion.
        for (i, (_, refs)) in rc.papers.iter().enumerate() {
            let paper = &read.papers()[i];
            let mut got: Vec<String> = paper.references.iter().map(|&s| read.reference_id(s).to_string()).collect();
            let mut want: Vec<String> = refs.iter().map(|&r| RandomCorpus::reference_id(r)).collect();
            got.sort();
            want.sort();
            prop_assert_eq!(got, want);
        }
        Ok(())
    })
}

/// Engine output equals the dense solver within 1e-12, iteration for
/// iteration.
pub fn oracle_equivalence(cases: u32) -> Result<(), String> {
    check(cases, (arb_corpus(40, 3, 4), arb_config()), |(rc, config)| {
        let corpus = rc.corpus();
        let out = engine::run(&corpus, config).unwrap();
        let dense = solve(&dense_problem(&corpus, &config));
        let d_jl = max_abs_diff(&dense_of(&corpus, &out.jl), &dense.jl);
        let d_u1 = max_abs_diff(&dense_of(&corpus, &out.u1), &dense.u1);
        prop_assert!(d_jl <= 1e-12 && d_u1 <= 1e-12, "JL {d_jl:e}, U1 {d_u1:e}");
        prop_assert_eq!(out.jl.run.as_ref().unwrap().iterations, dense.residuals.len());
        prop_assert_eq!(out.converged, dense.converged);
        Ok(())
    })
}

/// Unit sum, regular-only support, exact support for regular journals and
/// homogeneity in the degrees.
pub fn fractionalize_properties(cases: u32) -> Result<(), String> {
    let strategy = (1u32..=4, 1u32..=5).prop_flat_map(|(areas, per_area)| {
        let n = RandomCorpus::all_codes(areas, per_area).len();
        (
            Just(areas),
            Just(per_area),
            prop::collection::btree_map(0..n, 0.01f64..5.0, 1..=4),
            0.01f64..100.0,
            -20i32..20,
        )
    });
    check(cases, strategy, |(areas, per_area, picks, scale, exp)| {
        let rc = RandomCorpus {
            areas,
            per_area,
            journals: Vec::new(),
            papers: Vec::new(),
            min_refs: 0,
        };
        let scheme = rc.scheme();
        let all = RandomCorpus::all_codes(areas, per_area);
        let raw: Vec<(u32, f64)> = picks.iter().map(|(&c, &d)| (all[c], d)).collect();
        let v = fractionalize_journal(&JournalAssignment::new("j", raw.clone()), &scheme).unwrap();
        assert_unit(&v, "journal")?;
        prop_assert!((v.sum() - 1.0).abs() <= 1e-12);
        if raw.iter().all(|(c, _)| scheme.index_of(*c).is_some()) {
            let want: Vec<u32> = raw.iter().map(|(c, _)| scheme.index_of(*c).unwrap()).collect::<BTreeSet<_>>().into_iter().collect();
            prop_assert_eq!(v.support().collect::<Vec<_>>(), want);
        }
        let scaled: Vec<(u32, f64)> = raw.iter().map(|&(c, d)| (c, d * scale)).collect();
        let w = fractionalize_journal(&JournalAssignment::new("j", scaled), &scheme).unwrap();
        prop_assert!(v.support().eq(w.support()));
        for ((_, a), (_, b)) in v.iter().zip(w.iter()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        let pow2 = 2f64.powi(exp);
        let exact: Vec<(u32, f64)> = raw.iter().map(|&(c, d)| (c, d * pow2)).collect();
        let e = fractionalize_journal(&JournalAssignment::new("j", exact), &scheme).unwrap();
        prop_assert_eq!(&v, &e);
        Ok(())
    })
}

/// The serialized corpus depends only on the inputs.
pub fn cache_round_trip(cases: u32) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("corpus.json");
    check(cases, arb_corpus(30, 2, 3), |rc| {
        let corpus = rc.corpus();
        corpus.write_cache(&path).unwrap();
        let first = std::fs::read(&path).unwrap();
        let back = Corpus::read_cache(&path).unwrap();
        prop_assert!(back == corpus);
        rc.corpus().write_cache(&path).unwrap();
        prop_assert_eq!(first, std::fs::read(&path).unwrap());
        Ok(())
    })
}
