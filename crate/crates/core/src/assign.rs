//! Bounded multi-assignment: keeps at most `max_categories` dominant
//! categories per paper.
//!
//! Entries are ranked by descending weight (ties to the lower category
//! index). The first is always kept; each following entry is kept while its
//! weight is at least `threshold` times the previously kept one. The kept
//! weights are renormalized.

use serde::{Deserialize, Serialize};

use crate::classification::Classification;
use crate::error::{Error, Result};
use crate::vector::WeightVector;

pub const DEFAULT_MAX_CATEGORIES: usize = 5;

/// Relative slack in the ratio test, so that a ratio equal to the threshold
/// in exact arithmetic passes regardless of rounding.
pub const RATIO_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub threshold: f64,
    pub max_categories: usize,
}

impl PruneConfig {
    pub fn new(threshold: f64) -> Result<Self> {
        let config = PruneConfig {
            threshold,
            max_categories: DEFAULT_MAX_CATEGORIES,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidPrune(format!(
                "threshold must be in (0, 1], got {}",
                self.threshold
            )));
        }
        if self.max_categories == 0 {
            return Err(Error::InvalidPrune("max_categories must be positive".into()));
        }
        Ok(())
    }
}

/// Number of leading ranked entries the rule keeps.
fn kept_prefix(ranked: &[(u32, f64)], config: &PruneConfig) -> usize {
    let mut kept = 1;
    while kept < ranked.len() && kept < config.max_categories {
        let prev = ranked[kept - 1].1;
        let next = ranked[kept].1;
        if next < config.threshold * prev * (1.0 - RATIO_EPSILON) {
            break;
        }
        kept += 1;
    }
    kept
}

pub fn prune(vector: &WeightVector, config: &PruneConfig) -> Result<WeightVector> {
    config.validate()?;
    if vector.is_empty() {
        return Err(Error::EmptyVector);
    }
    let ranked = vector.ranked();
    let kept = kept_prefix(&ranked, config);
    Ok(WeightVector::from_pairs(ranked[..kept].iter().copied()).normalized())
}

/// Prunes every vector and appends the threshold to the label.
pub fn prune_classification(c: &Classification, config: &PruneConfig) -> Result<Classification> {
    config.validate()?;
    let mut vectors = c.vectors.clone();
    for v in vectors.values_mut() {
        if !v.is_empty() {
            *v = prune(v, config)?;
        }
    }
    Ok(Classification {
        label: format!("{}-{}", c.label, config.threshold),
        vectors,
        unreclassified: c.unreclassified.clone(),
        run: c.run.clone(),
    })
}
