//! Cross-check of the sparse engine against the dense reference solver.

use anyhow::{bail, Result};
use citeprop::engine::{self, EngineConfig};
use citeprop::{Classification, Corpus};
use citeprop_oracle::{max_abs_diff, solve, DenseProblem, DenseResult};
use serde::Serialize;

/// Largest corpus the dense solver is run on.
pub const MAX_PAPERS: usize = 200;
pub const MAX_CATEGORIES: usize = 300;
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ModeCheck {
    pub fractional: bool,
    pub jl_max_diff: f64,
    pub u1_max_diff: f64,
    pub engine_iterations: usize,
    pub oracle_iterations: usize,
    pub engine_converged: bool,
    pub oracle_converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub papers: usize,
    pub categories: usize,
    pub tolerance: f64,
    pub modes: Vec<ModeCheck>,
    pub max_diff: f64,
    pub pass: bool,
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

/// Dense matrix of a classification in corpus paper order. Unreclassified
/// papers contribute their frozen initial vector, as in the dense solver.
pub fn dense_of(corpus: &Corpus, c: &Classification) -> Vec<Vec<f64>> {
    corpus
        .papers()
        .iter()
        .map(|p| {
            let mut row = vec![0.0; corpus.category_count()];
            match c.get(&p.id) {
                Some(v) => v.add_into(&mut row),
                None if c.unreclassified.contains(&p.id) => p.initial.add_into(&mut row),
                None => {}
            }
            row
        })
        .collect()
}

pub fn compare_mode(corpus: &Corpus, out: &engine::EngineOutput, dense: &DenseResult, fractional: bool) -> ModeCheck {
    let info = out.jl.run.as_ref();
    ModeCheck {
        fractional,
        jl_max_diff: max_abs_diff(&dense_of(corpus, &out.jl), &dense.jl),
        u1_max_diff: max_abs_diff(&dense_of(corpus, &out.u1), &dense.u1),
        engine_iterations: info.map_or(0, |r| r.iterations),
        oracle_iterations: dense.residuals.len(),
        engine_converged: out.converged,
        oracle_converged: dense.converged,
    }
}

/// Runs both weightings through the engine and the dense solver.
pub fn check(corpus: &Corpus, base: &EngineConfig) -> Result<OracleReport> {
    if corpus.len() > MAX_PAPERS || corpus.category_count() > MAX_CATEGORIES {
        bail!(
            "corpus too large for the dense oracle ({} papers, {} categories; limit {} and {})",
            corpus.len(),
            corpus.category_count(),
            MAX_PAPERS,
            MAX_CATEGORIES
        );
    }
    if base.unlimited_passes != 1 {
        bail!("the dense oracle only implements a single unlimited pass");
    }
    let mut modes = Vec::new();
    for fractional in [false, true] {
        let config = EngineConfig { fractional, ..*base };
        let out = engine::run(corpus, config)?;
        let dense = solve(&dense_problem(corpus, &config));
        modes.push(compare_mode(corpus, &out, &dense, fractional));
    }
    let max_diff = modes
        .iter()
        .map(|m| m.jl_max_diff.max(m.u1_max_diff))
        .fold(0.0, f64::max);
    let pass = max_diff <= TOLERANCE && modes.iter().all(|m| m.engine_iterations == m.oracle_iterations);
    Ok(OracleReport {
        papers: corpus.len(),
        categories: corpus.category_count(),
        tolerance: TOLERANCE,
        modes,
        max_diff,
        pass,
    })
}
