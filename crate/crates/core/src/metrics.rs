//! Indicators used to evaluate and compare classifications.
//!
//! All functions are pure and iterate papers in id order and categories in
//! index order, so results are reproducible to the last bit.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Serialize;

use crate::classification::Classification;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scheme::CategoryScheme;
use crate::table::Table;
use crate::vector::WeightVector;

/// Identifiers of the formula choices made where several definitions are
/// in use. Emitted with every report.
pub const FORMULA_VERSIONS: &[(&str, &str)] = &[
    ("coincidence", "mean-min-overlap/v1"),
    ("rank", "winner-rank-excluding-missing/v1"),
    ("area_flow", "origin-result-product/v1"),
    ("correlation", "population-pearson-zero-filled/v1"),
    ("prune", "consecutive-ratio-max5/v1"),
    ("acv", "membership-weighted-cv-mean/v1"),
];

/// Σ over papers of each category's weight, indexed by category.
pub fn category_sizes(c: &Classification, categories: usize) -> Vec<f64> {
    let mut sizes = vec![0.0; categories];
    for v in c.vectors.values() {
        v.add_into(&mut sizes);
    }
    sizes
}

fn non_empty(sizes: &[f64]) -> impl Iterator<Item = f64> + Clone + '_ {
    sizes.iter().copied().filter(|&s| s > 0.0)
}

/// Number of papers divided by the sum of squared category sizes.
pub fn granularity(c: &Classification, categories: usize) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::EmptyClassification(c.label.clone()));
    }
    let sizes = category_sizes(c, categories);
    let squares = sizes.iter().fold(0.0, |acc, s| acc + s * s);
    Ok(c.len() as f64 / squares)
}

/// Population coefficient of variation of the non-empty category sizes.
pub fn size_cv(c: &Classification, categories: usize) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::EmptyClassification(c.label.clone()));
    }
    let sizes = category_sizes(c, categories);
    Ok(coefficient_of_variation(non_empty(&sizes)))
}

fn coefficient_of_variation(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().fold(0.0, |a, x| a + x) / n;
    let var = values.fold(0.0, |a, x| a + (x - mean) * (x - mean)) / n;
    var.sqrt() / mean
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Structure {
    pub non_empty_categories: usize,
    pub max_size: f64,
    pub min_size: f64,
    pub cv: f64,
    pub granularity: f64,
}

/// Category count, extreme sizes (over non-empty categories), CV and
/// granularity.
pub fn structure(c: &Classification, categories: usize) -> Result<Structure> {
    let sizes = category_sizes(c, categories);
    let filled: Vec<f64> = non_empty(&sizes).collect();
    if filled.is_empty() {
        return Err(Error::EmptyClassification(c.label.clone()));
    }
    Ok(Structure {
        non_empty_categories: filled.len(),
        max_size: filled.iter().copied().fold(f64::MIN, f64::max),
        min_size: filled.iter().copied().fold(f64::MAX, f64::min),
        cv: size_cv(c, categories)?,
        granularity: granularity(c, categories)?,
    })
}

/// Per-reference attributes used to filter reference counts.
#[derive(Debug, Clone, Default)]
pub struct ReferenceAttributes {
    entries: HashMap<String, (bool, Option<i32>)>,
}

impl ReferenceAttributes {
    pub fn insert(&mut self, reference: &str, indexed: bool, year: Option<i32>) {
        self.entries.insert(reference.to_string(), (indexed, year));
    }

    pub fn get(&self, reference: &str) -> Option<(bool, Option<i32>)> {
        self.entries.get(reference).copied()
    }

    /// Reads `reference_id, indexed, year` rows; `indexed` accepts
    /// 1/0/true/false/yes/no and `year` may be empty.
    pub fn load(path: &Path) -> Result<Self> {
        let mut table = Table::open(path)?;
        let id = table.column("reference_id")?;
        let indexed = table.column("indexed")?;
        let year = table.optional_column("year");
        let name = table.name().to_string();
        let mut out = ReferenceAttributes::default();
        for row in table.rows() {
            let row = row?;
            let flag = match row.get(indexed).to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "y" => true,
                "0" | "false" | "no" | "n" | "" => false,
                other => {
                    return Err(Error::Malformed {
                        path: name.clone(),
                        line: row.line,
                        message: format!("bad indexed flag `{other}`"),
                    })
                }
            };
            let y = match year {
                Some(col) if !row.get(col).is_empty() => Some(row.parse(&name, col, "year")?),
                _ => None,
            };
            out.insert(row.get(id), flag, y);
        }
        Ok(out)
    }
}

/// Which reference slots count towards a paper's reference count.
#[derive(Debug, Clone, Copy)]
pub enum RefFilter<'a> {
    All,
    Matching {
        attributes: &'a ReferenceAttributes,
        indexed_only: bool,
        min_year: Option<i32>,
        max_year: Option<i32>,
    },
}

impl RefFilter<'_> {
    fn accepts(&self, reference: &str) -> bool {
        match *self {
            RefFilter::All => true,
            RefFilter::Matching {
                attributes,
                indexed_only,
                min_year,
                max_year,
            } => match attributes.get(reference) {
                None => false,
                Some((indexed, year)) => {
                    if indexed_only && !indexed {
                        return false;
                    }
                    let in_window = |y: Option<i32>| match y {
                        Some(y) => min_year.is_none_or(|m| y >= m) && max_year.is_none_or(|m| y <= m),
                        None => min_year.is_none() && max_year.is_none(),
                    };
                    in_window(year)
                }
            },
        }
    }
}

/// Number of reference slots of each paper accepted by `filter`.
pub fn filtered_ref_counts(corpus: &Corpus, filter: &RefFilter) -> HashMap<String, usize> {
    corpus
        .papers()
        .iter()
        .map(|p| {
            let n = p
                .references
                .iter()
                .filter(|&&r| filter.accepts(corpus.reference_id(r)))
                .count();
            (p.id.clone(), n)
        })
        .collect()
}

/// Average over non-empty categories of the membership-weighted coefficient
/// of variation of references per paper. Papers absent from the corpus are
/// ignored; categories with zero total weight or zero mean count are skipped.
pub fn refs_per_paper_acv(c: &Classification, corpus: &Corpus, filter: &RefFilter) -> Option<f64> {
    let counts = filtered_ref_counts(corpus, filter);
    acv_from_counts(c, corpus.category_count(), &counts)
}

pub fn acv_from_counts(c: &Classification, categories: usize, counts: &HashMap<String, usize>) -> Option<f64> {
    let mut weight = vec![0.0; categories];
    let mut weighted = vec![0.0; categories];
    let members: Vec<(&WeightVector, f64)> = c
        .vectors
        .iter()
        .filter_map(|(id, v)| counts.get(id).map(|&n| (v, n as f64)))
        .collect();
    for &(v, n) in &members {
        for (i, w) in v.iter() {
            weight[i as usize] += w;
            weighted[i as usize] += w * n;
        }
    }
    let mean: Vec<f64> = (0..categories)
        .map(|i| if weight[i] > 0.0 { weighted[i] / weight[i] } else { 0.0 })
        .collect();
    let mut dev = vec![0.0; categories];
    for &(v, n) in &members {
        for (i, w) in v.iter() {
            let d = n - mean[i as usize];
            dev[i as usize] += w * d * d;
        }
    }
    let cvs: Vec<f64> = (0..categories)
        .filter(|&i| weight[i] > 0.0 && mean[i] > 0.0)
        .map(|i| (dev[i] / weight[i]).sqrt() / mean[i])
        .collect();
    if cvs.is_empty() {
        None
    } else {
        Some(cvs.iter().sum::<f64>() / cvs.len() as f64)
    }
}

fn common<'a>(a: &'a Classification, b: &'a Classification) -> Vec<(&'a String, &'a WeightVector, &'a WeightVector)> {
    a.vectors
        .iter()
        .filter_map(|(id, va)| b.vectors.get(id).map(|vb| (id, va, vb)))
        .collect()
}

/// Mean over common papers of 100 × Σ min(a, b).
pub fn coincidence_percentage(a: &Classification, b: &Classification) -> Result<f64> {
    let pairs = common(a, b);
    if pairs.is_empty() {
        return Err(Error::EmptyClassification(format!("{} ∩ {}", a.label, b.label)));
    }
    let total = pairs.iter().fold(0.0, |acc, (_, x, y)| acc + x.overlap(y));
    Ok(100.0 * total / pairs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankSide {
    /// Mean 1-based rank of the source winner in the target ranking, over
    /// papers where it is present.
    pub avg_rank: Option<f64>,
    /// Papers whose source winner has no weight in the target.
    pub missing: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankMetrics {
    pub common: usize,
    /// Winners of `a` located in `b`.
    pub a_in_b: RankSide,
    /// Winners of `b` located in `a`.
    pub b_in_a: RankSide,
}

fn rank_side<'a>(pairs: impl Iterator<Item = (&'a WeightVector, &'a WeightVector)>) -> RankSide {
    let mut sum = 0.0;
    let mut found = 0usize;
    let mut missing = 0usize;
    for (source, target) in pairs {
        let Some(winner) = source.winner() else { continue };
        match target.ranked().iter().position(|&(i, _)| i == winner) {
            Some(pos) => {
                sum += (pos + 1) as f64;
                found += 1;
            }
            None => missing += 1,
        }
    }
    RankSide {
        avg_rank: (found > 0).then(|| sum / found as f64),
        missing,
    }
}

pub fn rank_metrics(a: &Classification, b: &Classification) -> RankMetrics {
    let pairs = common(a, b);
    RankMetrics {
        common: pairs.len(),
        a_in_b: rank_side(pairs.iter().map(|(_, x, y)| (*x, *y))),
        b_in_a: rank_side(pairs.iter().map(|(_, x, y)| (*y, *x))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssignmentHistogram {
    pub papers: usize,
    pub total_assignments: usize,
    pub average: f64,
    /// Counts of papers with 1, 2, 3, 4 and 5+ categories.
    pub counts: [usize; 5],
    pub percent: [f64; 5],
}

pub fn assignment_histogram(c: &Classification) -> Result<AssignmentHistogram> {
    if c.is_empty() {
        return Err(Error::EmptyClassification(c.label.clone()));
    }
    let mut counts = [0usize; 5];
    let mut total = 0usize;
    for v in c.vectors.values() {
        total += v.len();
        if !v.is_empty() {
            counts[v.len().min(5) - 1] += 1;
        }
    }
    let n = c.len();
    Ok(AssignmentHistogram {
        papers: n,
        total_assignments: total,
        average: total as f64 / n as f64,
        counts,
        percent: counts.map(|k| 100.0 * k as f64 / n as f64),
    })
}

/// Population Pearson correlation; `None` when either side is constant up
/// to round-off.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let flat = |s: f64, v: &[f64]| {
        let scale = v.iter().fold(0.0f64, |m, a| m.max(a.abs())) * 1e-12;
        s <= n * scale * scale
    };
    if flat(sxx, x) || flat(syy, y) {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Correlation of the per-category sizes of two classifications, empty
/// categories included as zeros.
pub fn category_correlation(a: &Classification, b: &Classification, categories: usize) -> Option<f64> {
    pearson(&category_sizes(a, categories), &category_sizes(b, categories))
}

/// Share of the total weight falling in each area, in percent.
pub fn area_aggregate(c: &Classification, scheme: &CategoryScheme) -> BTreeMap<u32, f64> {
    let sizes = category_sizes(c, scheme.len());
    let mut per_area: BTreeMap<u32, f64> = scheme.area_codes().map(|a| (a, 0.0)).collect();
    for (i, s) in sizes.iter().enumerate() {
        *per_area.get_mut(&scheme.area_of(i as u32)).unwrap() += s;
    }
    let total: f64 = per_area.values().sum();
    if total > 0.0 {
        for v in per_area.values_mut() {
            *v *= 100.0 / total;
        }
    }
    per_area
}

/// Area × area transfer of weight between two classifications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowMatrix {
    pub areas: Vec<u32>,
    /// `flow[a][b]`: weight moving from area `areas[a]` in the origin to area
    /// `areas[b]` in the result.
    pub flow: Vec<Vec<f64>>,
    pub papers: usize,
}

impl FlowMatrix {
    pub fn row_sums(&self) -> Vec<f64> {
        self.flow.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.row_sums().iter().sum()
    }
}

/// Σ over common papers of the outer product of origin and result area
/// vectors.
pub fn area_flow(origin: &Classification, result: &Classification, scheme: &CategoryScheme) -> FlowMatrix {
    let k = scheme.area_count();
    let mut flow = vec![vec![0.0; k]; k];
    let pairs = common(origin, result);
    for (_, o, r) in &pairs {
        let oa = scheme.area_weights(o);
        let ra = scheme.area_weights(r);
        for (a, &wa) in oa.iter().enumerate() {
            if wa == 0.0 {
                continue;
            }
            for (b, &wb) in ra.iter().enumerate() {
                flow[a][b] += wa * wb;
            }
        }
    }
    FlowMatrix {
        areas: scheme.area_codes().collect(),
        flow,
        papers: pairs.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Retention {
    /// area → (papers, percent of their result weight inside the area)
    pub per_area: BTreeMap<u32, (usize, f64)>,
    pub total: (usize, f64),
}

/// For papers originally in a single-miscellaneous-code journal, the
/// percentage of their result weight that stays in that code's area.
pub fn same_area_retention(
    origin_misc_papers: &BTreeMap<String, u32>,
    result: &Classification,
    scheme: &CategoryScheme,
) -> Retention {
    let mut per_area: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
    let mut all = (0usize, 0.0);
    for (paper, &area) in origin_misc_papers {
        let Some(v) = result.get(paper) else { continue };
        let inside: f64 = v
            .iter()
            .filter(|&(i, _)| scheme.area_of(i) == area)
            .fold(0.0, |acc, (_, w)| acc + w);
        let total = v.sum();
        let share = if total > 0.0 { inside / total } else { 0.0 };
        let e = per_area.entry(area).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += share;
        all.0 += 1;
        all.1 += share;
    }
    for e in per_area.values_mut() {
        e.1 = 100.0 * e.1 / e.0 as f64;
    }
    let total = if all.0 > 0 { (all.0, 100.0 * all.1 / all.0 as f64) } else { (0, 0.0) };
    Retention { per_area, total }
}
