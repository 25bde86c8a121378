//! Per-paper classifications, variant labels and their tabular form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scheme::CategoryScheme;
use crate::table::Table;
use crate::vector::WeightVector;

/// Pruning thresholds used for the standard variant sweep.
pub const STANDARD_THRESHOLDS: [f64; 3] = [0.5, 0.67, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Converged result of the support-limited loop.
    JournalLimited,
    /// One unmasked pass on top of the journal-limited result.
    Unlimited,
}

/// A classification variant such as `JL-NF`, `U1-F` or `U1-F-0.8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub method: Method,
    pub fractional: bool,
    pub threshold: Option<f64>,
}

impl Variant {
    pub fn new(method: Method, fractional: bool, threshold: Option<f64>) -> Self {
        Variant {
            method,
            fractional,
            threshold,
        }
    }

    /// The twelve pruned variants: {JL, U1} × {NF, F} × {0.5, 0.67, 0.8}.
    pub fn standard() -> Vec<Variant> {
        let mut out = Vec::with_capacity(12);
        for method in [Method::JournalLimited, Method::Unlimited] {
            for fractional in [false, true] {
                for t in STANDARD_THRESHOLDS {
                    out.push(Variant::new(method, fractional, Some(t)));
                }
            }
        }
        out
    }

    pub fn raw(self) -> Variant {
        Variant {
            threshold: None,
            ..self
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let method = match self.method {
            Method::JournalLimited => "JL",
            Method::Unlimited => "U1",
        };
        let weighting = if self.fractional { "F" } else { "NF" };
        match self.threshold {
            Some(t) => write!(f, "{method}-{weighting}-{t}"),
            None => write!(f, "{method}-{weighting}"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut parts = s.trim().splitn(3, '-');
        let method = match parts.next().map(str::to_ascii_uppercase).as_deref() {
            Some("JL") => Method::JournalLimited,
            Some("U1") => Method::Unlimited,
            _ => return Err(format!("variant `{s}`: method must be JL or U1")),
        };
        let fractional = match parts.next().map(str::to_ascii_uppercase).as_deref() {
            Some("F") => true,
            Some("NF") => false,
            _ => return Err(format!("variant `{s}`: weighting must be F or NF")),
        };
        let threshold = match parts.next() {
            None => None,
            Some(t) => {
                let t: f64 = t
                    .parse()
                    .map_err(|_| format!("variant `{s}`: bad threshold `{t}`"))?;
                if !(t > 0.0 && t <= 1.0) {
                    return Err(format!("variant `{s}`: threshold must be in (0, 1]"));
                }
                Some(t)
            }
        };
        Ok(Variant::new(method, fractional, threshold))
    }
}

/// Diagnostics of the engine run that produced a classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub fractional: bool,
    pub iterations: usize,
    pub residual_trace: Vec<f64>,
    pub threshold: f64,
    pub converged: bool,
    /// Papers whose masked sum vanished and kept their previous vector,
    /// summed over iterations.
    pub stalled: usize,
    pub min_refs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: String,
    pub vectors: BTreeMap<String, WeightVector>,
    pub unreclassified: BTreeSet<String>,
    pub run: Option<RunInfo>,
}

impl Classification {
    pub fn new(label: impl Into<String>, vectors: BTreeMap<String, WeightVector>) -> Self {
        Classification {
            label: label.into(),
            vectors,
            unreclassified: BTreeSet::new(),
            run: None,
        }
    }

    /// The journal-inherited starting classification of every paper.
    pub fn initial(corpus: &Corpus, label: &str) -> Self {
        let vectors = corpus
            .papers()
            .iter()
            .map(|p| (p.id.clone(), p.initial.clone()))
            .collect();
        Classification::new(label, vectors)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, paper: &str) -> Option<&WeightVector> {
        self.vectors.get(paper)
    }

    /// Keeps only the papers in `ids`.
    pub fn restrict<'a, I>(&self, ids: I) -> Classification
    where
        I: IntoIterator<Item = &'a String>,
    {
        let vectors = ids
            .into_iter()
            .filter_map(|id| self.vectors.get(id).map(|v| (id.clone(), v.clone())))
            .collect();
        Classification {
            label: self.label.clone(),
            vectors,
            unreclassified: BTreeSet::new(),
            run: None,
        }
    }

    /// Writes `paper_id, category_code, weight` rows sorted by paper id,
    /// descending weight, ascending code.
    pub fn write_table<W: Write>(&self, scheme: &CategoryScheme, mut out: W) -> std::io::Result<()> {
        writeln!(out, "paper_id\tcategory_code\tweight")?;
        for (paper, vector) in &self.vectors {
            for (idx, w) in vector.ranked() {
                writeln!(out, "{paper}\t{}\t{w}", scheme.code_of(idx))?;
            }
        }
        Ok(())
    }

    pub fn save(&self, scheme: &CategoryScheme, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_table(scheme, &mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, scheme: &CategoryScheme, label: &str) -> Result<Self> {
        Self::read_table(Table::open(path)?, scheme, label)
    }

    /// Reads a classification table. Weights of each paper are normalized to
    /// sum 1; papers whose weights are all zero are dropped. Without a
    /// `weight` column every listed category gets equal weight.
    pub fn read<R: Read + 'static>(reader: R, scheme: &CategoryScheme, label: &str) -> Result<Self> {
        Self::read_table(Table::from_reader(label.to_string(), reader)?, scheme, label)
    }

    fn read_table(mut table: Table, scheme: &CategoryScheme, label: &str) -> Result<Self> {
        let paper_col = table.column("paper_id")?;
        let code_col = table.column("category_code")?;
        let weight_col = table.optional_column("weight");
        let name = table.name().to_string();
        let mut raw: BTreeMap<String, Vec<(u32, f64)>> = BTreeMap::new();
        for row in table.rows() {
            let row = row?;
            let code: u32 = row.parse(&name, code_col, "category_code")?;
            let weight: f64 = match weight_col {
                Some(col) => row.parse(&name, col, "weight")?,
                None => 1.0,
            };
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::Malformed {
                    path: name.clone(),
                    line: row.line,
                    message: format!("invalid weight {weight}"),
                });
            }
            let idx = scheme.index_of(code).ok_or_else(|| Error::Malformed {
                path: name.clone(),
                line: row.line,
                message: format!("category code {code} is not a regular category"),
            })?;
            raw.entry(row.get(paper_col).to_string())
                .or_default()
                .push((idx, weight));
        }
        let vectors = raw
            .into_iter()
            .filter_map(|(paper, pairs)| {
                let v = WeightVector::from_pairs(pairs).normalized();
                (!v.is_empty()).then_some((paper, v))
            })
            .collect();
        Ok(Classification::new(label, vectors))
    }

    /// JSON sidecar describing the run.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "variant": self.label,
            "papers": self.vectors.len(),
            "unreclassified": self.unreclassified.len(),
            "run": self.run,
        })
    }

    pub fn save_metadata(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.metadata())?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{CodeKind, SchemeRow};

    #[test]
    fn variant_labels_round_trip() {
        let all = Variant::standard();
        assert_eq!(all.len(), 12);
        let labels: Vec<String> = all.iter().map(|v| v.to_string()).collect();
        assert!(labels.contains(&"U1-F-0.8".to_string()));
        assert!(labels.contains(&"JL-NF-0.67".to_string()));
        for v in all {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("jl-f".parse::<Variant>().unwrap().to_string(), "JL-F");
        assert!("XX-F".parse::<Variant>().is_err());
        assert!("JL-F-1.5".parse::<Variant>().is_err());
    }

    #[test]
    fn table_sort_order_and_reload() {
        let scheme = CategoryScheme::from_rows(&[
            SchemeRow::new(10, 1, CodeKind::Regular),
            SchemeRow::new(20, 1, CodeKind::Regular),
            SchemeRow::new(30, 1, CodeKind::Regular),
        ])
        .unwrap();
        let mut vectors = BTreeMap::new();
        vectors.insert("b".to_string(), WeightVector::unit(0));
        vectors.insert(
            "a".to_string(),
            WeightVector::from_pairs([(0, 0.25), (1, 0.5), (2, 0.25)]),
        );
        let c = Classification::new("x", vectors);
        let mut buf = Vec::new();
        c.write_table(&scheme, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "paper_id\tcategory_code\tweight\na\t20\t0.5\na\t10\t0.25\na\t30\t0.25\nb\t10\t1\n"
        );
        let back = Classification::read(std::io::Cursor::new(buf), &scheme, "x").unwrap();
        assert_eq!(back.vectors, c.vectors);
    }

    #[test]
    fn reading_normalizes_and_rejects_unknown_codes() {
        let scheme = CategoryScheme::from_rows(&[
            SchemeRow::new(10, 1, CodeKind::Regular),
            SchemeRow::new(20, 1, CodeKind::Regular),
        ])
        .unwrap();
        let text = "paper_id,category_code,weight\np,10,3\np,20,1\n";
        let c = Classification::read(std::io::Cursor::new(text.to_string()), &scheme, "ext").unwrap();
        assert_eq!(c.get("p").unwrap().entries(), &[(0, 0.75), (1, 0.25)]);
        let bad = "paper_id,category_code,weight\np,99,1\n";
        assert!(Classification::read(std::io::Cursor::new(bad.to_string()), &scheme, "ext").is_err());
    }

    #[test]
    fn missing_weight_column_means_equal_weights() {
        let scheme = CategoryScheme::from_rows(&[
            SchemeRow::new(10, 1, CodeKind::Regular),
            SchemeRow::new(20, 1, CodeKind::Regular),
        ])
        .unwrap();
        let text = "paper_id\tcategory_code\np\t10\np\t20\nq\t20\n";
        let c = Classification::read(std::io::Cursor::new(text.to_string()), &scheme, "aac").unwrap();
        assert_eq!(c.get("p").unwrap().entries(), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(c.get("q").unwrap().entries(), &[(1, 1.0)]);
    }
}
