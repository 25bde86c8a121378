//! Iterative propagation of category weights between papers and the
//! references they cite.
//!
//! One iteration accumulates each reference's vector from its citing papers,
//! normalizes it, then rebuilds every eligible paper's vector from its
//! references, restricted to the paper's current support, and normalizes
//! again. The loop stops once the summed squared change over all papers drops
//! below the convergence threshold; that snapshot is the journal-limited (JL)
//! result. One further accumulation followed by an unmasked rebuild yields the
//! unlimited (U1) result.
//!
//! Every reduction runs in a fixed order (citing papers by index and slot for
//! a reference, slots in reference order for a paper, papers by index for the
//! residual), so results are bit-identical for any worker count.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classification::{Classification, Method, RunInfo, Variant};
use crate::corpus::{Corpus, PaperIndex};
use crate::error::{Error, Result};
use crate::sparse::{Layout, Rows};
use crate::vector::WeightVector;

/// Absolute stopping threshold used on the 3,246,022-paper dataset.
pub const PAPER_SCALE_THRESHOLD: f64 = 3000.0;
/// Number of papers the absolute threshold was calibrated on.
pub const PAPER_SCALE_CORPUS: f64 = 3_246_022.0;
/// Per-paper equivalent of [`PAPER_SCALE_THRESHOLD`].
pub const DEFAULT_PER_PAPER_THRESHOLD: f64 = PAPER_SCALE_THRESHOLD / PAPER_SCALE_CORPUS;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum Convergence {
    /// Stop when the total squared difference is below this value.
    Absolute(f64),
    /// Threshold per eligible paper; the total is this times the number of
    /// eligible papers.
    PerPaper(f64),
}

impl Convergence {
    pub fn total(self, eligible: usize) -> f64 {
        match self {
            Convergence::Absolute(t) => t,
            Convergence::PerPaper(t) => t * eligible as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Divide each citing paper's contribution by its reference count.
    pub fractional: bool,
    pub convergence: Convergence,
    pub max_iterations: usize,
    /// Let papers below the eligibility bound contribute their (frozen)
    /// journal vectors when accumulating reference vectors.
    pub include_ineligible_citers: bool,
    /// Unmasked passes applied after the limited loop. Only 1 is standard.
    pub unlimited_passes: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            fractional: false,
            convergence: Convergence::PerPaper(DEFAULT_PER_PAPER_THRESHOLD),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            include_ineligible_citers: true,
            unlimited_passes: 1,
        }
    }
}

impl EngineConfig {
    pub fn fractional(fractional: bool) -> Self {
        EngineConfig {
            fractional,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = match self.convergence {
            Convergence::Absolute(t) | Convergence::PerPaper(t) => t,
        };
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "convergence threshold must be positive, got {t}"
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.unlimited_passes == 0 {
            return Err(Error::InvalidConfig("unlimited_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Reference vectors indexed by reference; an empty vector means the
/// reference had no citing paper in scope.
pub type ReferenceVectors = Vec<WeightVector>;

/// Which papers act as citing papers during accumulation.
fn citer_scope(corpus: &Corpus, include_ineligible: bool) -> Vec<bool> {
    if include_ineligible {
        vec![true; corpus.len()]
    } else {
        corpus.eligibility().to_vec()
    }
}

/// Builds each reference's vector as the (optionally fractional) sum of the
/// vectors of its in-scope citing papers, normalized to unit sum.
pub fn accumulate_reference_vectors(
    corpus: &Corpus,
    current: &[WeightVector],
    fractional: bool,
    include_ineligible_citers: bool,
) -> ReferenceVectors {
    let scope = citer_scope(corpus, include_ineligible_citers);
    accumulate_in_scope(corpus, current, fractional, &scope)
}

fn accumulate_in_scope(
    corpus: &Corpus,
    current: &[WeightVector],
    fractional: bool,
    scope: &[bool],
) -> ReferenceVectors {
    let layout = Layout::new(corpus);
    let rows = layout.accumulate(
        &layout.paper_rows(current),
        fractional,
        &layout.scope_by_position(scope),
    );
    layout.reference_vectors(&rows)
}

/// Result of a paper-side propagation step.
#[derive(Debug, Clone)]
pub struct PaperUpdate {
    pub vectors: Vec<WeightVector>,
    /// Eligible papers whose new sum vanished and kept their previous vector.
    pub stalled: usize,
}

/// Rebuilds every eligible paper's vector from its references, keeping only
/// the components where the previous vector was non-zero.
pub fn propagate_limited(
    corpus: &Corpus,
    references: &[WeightVector],
    previous: &[WeightVector],
) -> PaperUpdate {
    propagate(corpus, references, previous, true)
}

/// Rebuilds every eligible paper's vector from its references without any
/// support restriction.
pub fn propagate_unlimited(
    corpus: &Corpus,
    references: &[WeightVector],
    previous: &[WeightVector],
) -> PaperUpdate {
    propagate(corpus, references, previous, false)
}

fn propagate(
    corpus: &Corpus,
    references: &[WeightVector],
    previous: &[WeightVector],
    limited: bool,
) -> PaperUpdate {
    let layout = Layout::new(corpus);
    let (rows, stalled) = layout.propagate(
        &layout.reference_rows(references),
        &layout.paper_rows(previous),
        limited,
    );
    PaperUpdate {
        vectors: layout.paper_vectors(&rows),
        stalled,
    }
}

/// Σ over papers and components of the squared change, absent entries read
/// as zero. Papers are summed in index order.
pub fn squared_difference(current: &[WeightVector], previous: &[WeightVector]) -> Result<f64> {
    if current.len() != previous.len() {
        return Err(Error::MismatchedPapers(format!(
            "{} vs {} papers",
            current.len(),
            previous.len()
        )));
    }
    let per_paper: Vec<f64> = current
        .par_iter()
        .zip(previous.par_iter())
        .map(|(a, b)| a.squared_distance(b))
        .collect();
    Ok(per_paper.into_iter().fold(0.0, |acc, d| acc + d))
}

/// Same as [`squared_difference`] over two classifications keyed by paper id.
pub fn squared_difference_by_id(current: &Classification, previous: &Classification) -> Result<f64> {
    let mut acc = 0.0;
    for (id, a) in &current.vectors {
        let b = previous
            .vectors
            .get(id)
            .ok_or_else(|| Error::MismatchedPapers(id.clone()))?;
        acc += a.squared_distance(b);
    }
    if let Some(id) = previous.vectors.keys().find(|id| !current.vectors.contains_key(*id)) {
        return Err(Error::MismatchedPapers(id.clone()));
    }
    Ok(acc)
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    pub residual: f64,
    pub stalled: usize,
}

/// Stepwise driver of the limited loop. Holds the paper vectors of the
/// current iteration and the reference vectors that produced them.
pub struct Propagator<'a> {
    corpus: &'a Corpus,
    config: EngineConfig,
    layout: Layout,
    scope: Vec<bool>,
    papers: Rows,
    references: Rows,
    trace: Vec<f64>,
    stalled: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(corpus: &'a Corpus, config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(corpus);
        let initial: Vec<WeightVector> = corpus.papers().iter().map(|p| p.initial.clone()).collect();
        Ok(Propagator {
            corpus,
            config,
            scope: layout.scope_by_position(&citer_scope(corpus, config.include_ineligible_citers)),
            papers: layout.paper_rows(&initial),
            references: Rows::default(),
            layout,
            trace: Vec::new(),
            stalled: 0,
        })
    }

    /// Total squared-difference threshold for this corpus.
    pub fn threshold(&self) -> f64 {
        self.config.convergence.total(self.corpus.eligible_count())
    }

    /// Current paper vectors in paper-index order.
    pub fn paper_vectors(&self) -> Vec<WeightVector> {
        self.layout.paper_vectors(&self.papers)
    }

    /// Reference vectors of the latest accumulation (empty before the first
    /// step).
    pub fn reference_vectors(&self) -> Vec<WeightVector> {
        if self.trace.is_empty() {
            return Vec::new();
        }
        self.layout.reference_vectors(&self.references)
    }

    pub fn residual_trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// One accumulate + limited-propagate round.
    pub fn step(&mut self) -> IterationReport {
        self.references = self
            .layout
            .accumulate(&self.papers, self.config.fractional, &self.scope);
        let (papers, stalled) = self.layout.propagate(&self.references, &self.papers, true);
        let residual = self.layout.squared_difference(&papers, &self.papers);
        self.papers = papers;
        self.trace.push(residual);
        self.stalled += stalled;
        IterationReport {
            iteration: self.trace.len(),
            residual,
            stalled,
        }
    }

    fn converged(&self) -> bool {
        match self.trace.last() {
            Some(&r) => r < self.threshold() || r == 0.0,
            None => false,
        }
    }

    /// Steps until converged or the iteration cap is reached. Returns whether
    /// the loop converged.
    pub fn run_limited(&mut self) -> bool {
        while !self.converged() && self.iterations() < self.config.max_iterations {
            self.step();
        }
        self.converged()
    }

    /// Unmasked passes starting from the current paper vectors; does not
    /// modify the propagator.
    pub fn unlimited(&self) -> (Vec<WeightVector>, usize) {
        let mut papers = self.papers.clone();
        let mut stalled = 0;
        for _ in 0..self.config.unlimited_passes {
            let references = self
                .layout
                .accumulate(&papers, self.config.fractional, &self.scope);
            let (next, s) = self.layout.propagate(&references, &papers, false);
            papers = next;
            stalled += s;
        }
        (self.layout.paper_vectors(&papers), stalled)
    }

    fn classification(&self, method: Method, vectors: &[WeightVector], stalled: usize, converged: bool) -> Classification {
        let mut map = BTreeMap::new();
        let mut unreclassified = BTreeSet::new();
        for (i, p) in self.corpus.papers().iter().enumerate() {
            if self.corpus.is_eligible(i as PaperIndex) {
                map.insert(p.id.clone(), vectors[i].clone());
            } else {
                unreclassified.insert(p.id.clone());
            }
        }
        Classification {
            label: Variant::new(method, self.config.fractional, None).to_string(),
            vectors: map,
            unreclassified,
            run: Some(RunInfo {
                fractional: self.config.fractional,
                iterations: self.iterations(),
                residual_trace: self.trace.clone(),
                threshold: self.threshold(),
                converged,
                stalled,
                min_refs: self.corpus.min_refs(),
            }),
        }
    }
}

/// Both classifications of one engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutput {
    pub jl: Classification,
    pub u1: Classification,
    pub converged: bool,
}

/// Runs the limited loop to convergence, snapshots JL, then applies the
/// unmasked pass for U1. Hitting `max_iterations` is reported through
/// `converged`, not as an error.
pub fn run(corpus: &Corpus, config: EngineConfig) -> Result<EngineOutput> {
    let mut propagator = Propagator::new(corpus, config)?;
    let converged = propagator.run_limited();
    let jl = propagator.classification(
        Method::JournalLimited,
        &propagator.paper_vectors(),
        propagator.stalled,
        converged,
    );
    let (u1_vectors, u1_stalled) = propagator.unlimited();
    let u1 = propagator.classification(
        Method::Unlimited,
        &u1_vectors,
        propagator.stalled + u1_stalled,
        converged,
    );
    Ok(EngineOutput { jl, u1, converged })
}
