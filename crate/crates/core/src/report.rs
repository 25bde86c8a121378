//! Assembles the indicator tables for a set of classifications and writes
//! them as tab-separated files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use crate::classification::Classification;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::{
    acv_from_counts, area_aggregate, area_flow, assignment_histogram, category_correlation,
    coincidence_percentage, filtered_ref_counts, rank_metrics, same_area_retention, structure,
    AssignmentHistogram, FlowMatrix, RankMetrics, RefFilter, Retention, Structure, FORMULA_VERSIONS,
};
use crate::scheme::CategoryScheme;

/// What to compute a report from.
pub struct ReportInput<'a> {
    pub scheme: &'a CategoryScheme,
    pub classifications: Vec<&'a Classification>,
    /// Baseline that every classification is compared against. When set,
    /// the distribution tables are restricted to its papers.
    pub reference: Option<&'a Classification>,
    pub corpus: Option<&'a Corpus>,
    /// Named reference-count filters for the ACV table.
    pub acv_filters: Vec<(String, RefFilter<'a>)>,
    /// (origin, result) pair for the area flow matrix.
    pub flow: Option<(&'a Classification, &'a Classification)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label: String,
    pub coincidence: Option<f64>,
    pub ranks: RankMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaTable {
    pub labels: Vec<String>,
    pub papers: usize,
    /// area → percentages in label order
    pub rows: BTreeMap<u32, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub structure: Vec<(String, Structure)>,
    pub acv_columns: Vec<String>,
    pub acv: Vec<(String, Vec<Option<f64>>)>,
    pub reference_label: Option<String>,
    pub comparisons: Vec<Comparison>,
    pub assignments: Vec<(String, AssignmentHistogram)>,
    pub correlation: CorrelationTable,
    pub areas: AreaTable,
    pub multidisciplinary_areas: Option<AreaTable>,
    pub multidisciplinary_correlation: Option<CorrelationTable>,
    pub misc_retention: Option<Vec<(String, Retention)>>,
    pub flow: Option<(String, String, FlowMatrix)>,
}

fn correlation_table(list: &[Classification], categories: usize) -> CorrelationTable {
    let matrix = list
        .iter()
        .map(|a| list.iter().map(|b| category_correlation(a, b, categories)).collect())
        .collect();
    CorrelationTable {
        labels: list.iter().map(|c| c.label.clone()).collect(),
        matrix,
    }
}

fn area_table(list: &[Classification], scheme: &CategoryScheme) -> AreaTable {
    let per: Vec<BTreeMap<u32, f64>> = list.iter().map(|c| area_aggregate(c, scheme)).collect();
    let rows = scheme
        .area_codes()
        .map(|a| (a, per.iter().map(|m| m[&a]).collect()))
        .collect();
    AreaTable {
        labels: list.iter().map(|c| c.label.clone()).collect(),
        papers: list.first().map_or(0, |c| c.len()),
        rows,
    }
}

impl MetricsReport {
    pub fn compute(input: &ReportInput) -> Result<MetricsReport> {
        let k = input.scheme.len();
        let mut structure_rows = Vec::new();
        let mut assignments = Vec::new();
        for c in &input.classifications {
            structure_rows.push((c.label.clone(), structure(c, k)?));
            assignments.push((c.label.clone(), assignment_histogram(c)?));
        }
        if let Some(r) = input.reference {
            assignments.insert(0, (r.label.clone(), assignment_histogram(r)?));
        }

        let mut acv_columns = Vec::new();
        let mut acv: Vec<(String, Vec<Option<f64>>)> =
            input.classifications.iter().map(|c| (c.label.clone(), Vec::new())).collect();
        if let Some(corpus) = input.corpus {
            for (name, filter) in &input.acv_filters {
                acv_columns.push(name.clone());
                let counts = filtered_ref_counts(corpus, filter);
                for (row, c) in acv.iter_mut().zip(&input.classifications) {
                    row.1.push(acv_from_counts(c, k, &counts));
                }
            }
        }

        let comparisons = match input.reference {
            Some(r) => input
                .classifications
                .iter()
                .map(|c| Comparison {
                    label: c.label.clone(),
                    coincidence: coincidence_percentage(r, c).ok(),
                    ranks: rank_metrics(r, c),
                })
                .collect(),
            None => Vec::new(),
        };

        // Distribution tables: reference first, restricted to its papers.
        let scope: Option<BTreeSet<String>> = input.reference.map(|r| r.vectors.keys().cloned().collect());
        let restrict = |c: &Classification, extra: Option<&BTreeSet<String>>| -> Classification {
            let ids: Vec<&String> = c
                .vectors
                .keys()
                .filter(|id| scope.as_ref().is_none_or(|s| s.contains(*id)))
                .filter(|id| extra.is_none_or(|s| s.contains(*id)))
                .collect();
            c.restrict(ids)
        };
        let mut listed: Vec<&Classification> = Vec::new();
        if let Some(r) = input.reference {
            listed.push(r);
        }
        listed.extend(input.classifications.iter().copied());
        let scoped: Vec<Classification> = listed.iter().map(|c| restrict(c, None)).collect();
        let correlation = correlation_table(&scoped, k);
        let areas = area_table(&scoped, input.scheme);

        let mut multidisciplinary_areas = None;
        let mut multidisciplinary_correlation = None;
        let mut misc_retention = None;
        if let Some(corpus) = input.corpus {
            let multi = corpus.multidisciplinary_papers(input.scheme);
            if !multi.is_empty() {
                let subset: Vec<Classification> = listed.iter().map(|c| restrict(c, Some(&multi))).collect();
                multidisciplinary_areas = Some(area_table(&subset, input.scheme));
                multidisciplinary_correlation = Some(correlation_table(&subset, k));
            }
            let misc: BTreeMap<String, u32> = corpus
                .misc_exclusive_papers(input.scheme)
                .into_iter()
                .filter(|(id, _)| scope.as_ref().is_none_or(|s| s.contains(id)))
                .collect();
            if !misc.is_empty() {
                misc_retention = Some(
                    listed
                        .iter()
                        .map(|c| (c.label.clone(), same_area_retention(&misc, c, input.scheme)))
                        .collect(),
                );
            }
        }

        let flow = input
            .flow
            .map(|(o, r)| (o.label.clone(), r.label.clone(), area_flow(o, r, input.scheme)));

        Ok(MetricsReport {
            structure: structure_rows,
            acv_columns,
            acv,
            reference_label: input.reference.map(|r| r.label.clone()),
            comparisons,
            assignments,
            correlation,
            areas,
            multidisciplinary_areas,
            multidisciplinary_correlation,
            misc_retention,
            flow,
        })
    }

    /// Writes every table plus `report_meta.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(path, e))
        };
        let mut files = Vec::new();

        let mut t = String::from("classification\tcategories\tmax_size\tmin_size\tcv\tgranularity\n");
        for (label, s) in &self.structure {
            writeln!(
                t,
                "{label}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.6e}",
                s.non_empty_categories, s.max_size, s.min_size, s.cv, s.granularity
            )
            .unwrap();
        }
        put("structure.tsv", t)?;
        files.push("structure.tsv");

        if !self.acv_columns.is_empty() {
            let mut t = format!("classification\t{}\n", self.acv_columns.join("\t"));
            for (label, values) in &self.acv {
                let cells: Vec<String> = values.iter().map(|v| opt(*v, 4)).collect();
                writeln!(t, "{label}\t{}", cells.join("\t")).unwrap();
            }
            put("refs_acv.tsv", t)?;
            files.push("refs_acv.tsv");
        }

        if let Some(reference) = &self.reference_label {
            let mut t = format!(
                "classification\tcommon\tcoincidence_pct\t{r}_winner_rank\t{r}_winner_missing\twinner_rank_in_{r}\twinner_missing_in_{r}\n",
                r = reference
            );
            for c in &self.comparisons {
                writeln!(
                    t,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    c.label,
                    c.ranks.common,
                    opt(c.coincidence, 4),
                    opt(c.ranks.a_in_b.avg_rank, 4),
                    c.ranks.a_in_b.missing,
                    opt(c.ranks.b_in_a.avg_rank, 4),
                    c.ranks.b_in_a.missing
                )
                .unwrap();
            }
            put("coincidence.tsv", t)?;
            files.push("coincidence.tsv");
        }

        let mut t = String::from("classification\tassignments\taverage\tpct_1\tpct_2\tpct_3\tpct_4\tpct_5plus\n");
        for (label, h) in &self.assignments {
            let pct: Vec<String> = h.percent.iter().map(|p| format!("{p:.4}")).collect();
            writeln!(t, "{label}\t{}\t{:.4}\t{}", h.total_assignments, h.average, pct.join("\t")).unwrap();
        }
        put("assignments.tsv", t)?;
        files.push("assignments.tsv");

        put("correlation.tsv", correlation_text(&self.correlation))?;
        files.push("correlation.tsv");
        put("areas.tsv", area_text(&self.areas))?;
        files.push("areas.tsv");

        if let Some(a) = &self.multidisciplinary_areas {
            put("multidisciplinary_areas.tsv", area_text(a))?;
            files.push("multidisciplinary_areas.tsv");
        }
        if let Some(c) = &self.multidisciplinary_correlation {
            put("multidisciplinary_correlation.tsv", correlation_text(c))?;
            files.push("multidisciplinary_correlation.tsv");
        }

        if let Some(list) = &self.misc_retention {
            let labels: Vec<&str> = list.iter().map(|(l, _)| l.as_str()).collect();
            let mut t = format!("area\tpapers\t{}\n", labels.join("\t"));
            let areas: BTreeSet<u32> = list.iter().flat_map(|(_, r)| r.per_area.keys().copied()).collect();
            for a in areas {
                let n = list.iter().find_map(|(_, r)| r.per_area.get(&a).map(|e| e.0)).unwrap_or(0);
                let cells: Vec<String> = list
                    .iter()
                    .map(|(_, r)| opt(r.per_area.get(&a).map(|e| e.1), 2))
                    .collect();
                writeln!(t, "{a}\t{n}\t{}", cells.join("\t")).unwrap();
            }
            let n = list.first().map_or(0, |(_, r)| r.total.0);
            let cells: Vec<String> = list.iter().map(|(_, r)| format!("{:.2}", r.total.1)).collect();
            writeln!(t, "total\t{n}\t{}", cells.join("\t")).unwrap();
            put("misc_retention.tsv", t)?;
            files.push("misc_retention.tsv");
        }

        if let Some((_, _, m)) = &self.flow {
            let mut t = String::from("from_area\tto_area\tweight\n");
            for (i, a) in m.areas.iter().enumerate() {
                for (j, b) in m.areas.iter().enumerate() {
                    if m.flow[i][j] > 0.0 {
                        writeln!(t, "{a}\t{b}\t{:.6}", m.flow[i][j]).unwrap();
                    }
                }
            }
            put("area_flow.tsv", t)?;
            files.push("area_flow.tsv");
        }

        let formulas: BTreeMap<&str, &str> = FORMULA_VERSIONS.iter().copied().collect();
        let meta = json!({
            "formulas": formulas,
            "classifications": self.structure.iter().map(|(l, _)| l).collect::<Vec<_>>(),
            "reference": self.reference_label,
            "flow": self.flow.as_ref().map(|(o, r, m)| json!({"origin": o, "result": r, "papers": m.papers})),
            "tables": files,
        });
        put("report_meta.json", serde_json::to_string_pretty(&meta)? + "\n")
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) => format!("{x:.digits$}"),
        None => "NA".to_string(),
    }
}

fn correlation_text(c: &CorrelationTable) -> String {
    let mut t = format!("\t{}\n", c.labels.join("\t"));
    for (label, row) in c.labels.iter().zip(&c.matrix) {
        let cells: Vec<String> = row.iter().map(|v| opt(*v, 4)).collect();
        writeln!(t, "{label}\t{}", cells.join("\t")).unwrap();
    }
    t
}

fn area_text(a: &AreaTable) -> String {
    let mut t = format!("area\t{}\n", a.labels.join("\t"));
    for (area, values) in &a.rows {
        let cells: Vec<String> = values.iter().map(|v| format!("{v:.2}")).collect();
        writeln!(t, "{area}\t{}", cells.join("\t")).unwrap();
    }
    t
}
