//! Seeded generator of corpora with planted category structure.
//!
//! Every paper gets a planted category. It cites mostly references from its
//! category's pool, so the references end up co-cited by papers of the same
//! category. Journals are derived from the planted labels, with optional
//! label noise, two-category journals, area-miscellaneous journals and a
//! multidisciplinary journal.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusBuilder};
use crate::error::{Error, Result};
use crate::scheme::{CategoryScheme, CodeKind, SchemeRow};

/// Identifier of the pseudo-random generator, recorded in the metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3), seed_from_u64";

const FIRST_AREA: u32 = 1100;
const MULTIDISCIPLINARY: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub papers: usize,
    pub areas: usize,
    pub categories_per_area: usize,
    pub refs_min: usize,
    pub refs_max: usize,
    /// Probability that a reference is drawn from a random category's pool
    /// instead of the planted one.
    pub cross_citation: f64,
    /// Average number of citations each pooled reference receives; sets the
    /// pool size per category.
    pub citations_per_reference: f64,
    pub journals_per_category: usize,
    /// Fraction of journals that carry a second category of the same area.
    pub dual_fraction: f64,
    /// Probability that a paper is published in a journal of a different
    /// category than its planted one.
    pub noise: f64,
    /// Fraction of papers published in their area's miscellaneous journal.
    pub misc_fraction: f64,
    /// Fraction of papers published in the multidisciplinary journal.
    pub multidisciplinary_fraction: f64,
    /// Exact fraction (rounded to whole papers) of papers given 0–2 references.
    pub low_ref_fraction: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            papers: 1000,
            areas: 4,
            categories_per_area: 4,
            refs_min: 5,
            refs_max: 25,
            cross_citation: 0.1,
            citations_per_reference: 5.0,
            journals_per_category: 3,
            dual_fraction: 0.3,
            noise: 0.0,
            misc_fraction: 0.05,
            multidisciplinary_fraction: 0.02,
            low_ref_fraction: 0.0,
            seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("synthetic corpus: {m}")));
        if self.papers == 0 {
            return bad("papers must be positive");
        }
        if self.areas == 0 || self.areas > 89 {
            return bad("areas must be in 1..=89");
        }
        if self.categories_per_area == 0 || self.categories_per_area > 97 {
            return bad("categories_per_area must be in 1..=97");
        }
        if self.refs_min < 3 || self.refs_max < self.refs_min {
            return bad("need 3 <= refs_min <= refs_max");
        }
        if self.journals_per_category == 0 {
            return bad("journals_per_category must be positive");
        }
        if !(self.citations_per_reference >= 1.0) {
            return bad("citations_per_reference must be at least 1");
        }
        for (name, p) in [
            ("cross_citation", self.cross_citation),
            ("dual_fraction", self.dual_fraction),
            ("noise", self.noise),
            ("misc_fraction", self.misc_fraction),
            ("multidisciplinary_fraction", self.multidisciplinary_fraction),
            ("low_ref_fraction", self.low_ref_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must be in [0, 1]"));
            }
        }
        if self.misc_fraction + self.multidisciplinary_fraction > 1.0 {
            return bad("misc_fraction + multidisciplinary_fraction exceeds 1");
        }
        Ok(())
    }

    pub fn categories(&self) -> usize {
        self.areas * self.categories_per_area
    }

    /// Number of papers generated with fewer than three references.
    pub fn low_ref_papers(&self) -> usize {
        (self.low_ref_fraction * self.papers as f64).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub params: SynthParams,
    pub scheme: CategoryScheme,
    /// Journal id → assigned codes (equal degrees).
    pub journals: BTreeMap<String, Vec<u32>>,
    /// (paper id, journal id), in paper id order.
    pub papers: Vec<(String, String)>,
    /// (paper id, reference id) slots.
    pub references: Vec<(String, String)>,
    /// Paper id → planted category code.
    pub planted: BTreeMap<String, u32>,
}

fn area_code(a: usize) -> u32 {
    FIRST_AREA + 100 * a as u32
}

fn category_code(a: usize, j: usize) -> u32 {
    area_code(a) + 2 + j as u32
}

pub fn generate(params: &SynthParams) -> Result<SyntheticCorpus> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let per_area = params.categories_per_area;
    let k = params.categories();

    let mut rows = Vec::with_capacity(k + params.areas + 1);
    for a in 0..params.areas {
        rows.push(SchemeRow::new(area_code(a) + 1, area_code(a), CodeKind::Misc));
        for j in 0..per_area {
            rows.push(SchemeRow::new(category_code(a, j), area_code(a), CodeKind::Regular));
        }
    }
    rows.push(SchemeRow::new(MULTIDISCIPLINARY, MULTIDISCIPLINARY, CodeKind::Multidisciplinary));
    let scheme = CategoryScheme::from_rows(&rows)?;
    let code = |c: usize| category_code(c / per_area, c % per_area);

    // Journals: per category, optionally with a same-area partner.
    let mut journals: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut by_category: Vec<Vec<String>> = vec![Vec::new(); k];
    for c in 0..k {
        for j in 0..params.journals_per_category {
            let id = format!("J{}-{j}", code(c));
            let mut codes = vec![code(c)];
            if rng.gen_bool(params.dual_fraction) {
                let partner = if per_area > 1 {
                    let area = c / per_area;
                    let mut other = rng.gen_range(0..per_area - 1);
                    if other >= c % per_area {
                        other += 1;
                    }
                    area * per_area + other
                } else {
                    (c + 1 + rng.gen_range(0..k.max(2) - 1)) % k
                };
                if partner != c {
                    codes.push(code(partner));
                }
            }
            journals.insert(id.clone(), codes);
            by_category[c].push(id);
        }
    }
    for a in 0..params.areas {
        journals.insert(format!("M{}", area_code(a)), vec![area_code(a) + 1]);
    }
    journals.insert("MULTI".to_string(), vec![MULTIDISCIPLINARY]);

    let width = params.papers.to_string().len();
    let planted: Vec<usize> = (0..params.papers).map(|_| rng.gen_range(0..k)).collect();
    let mut papers = Vec::with_capacity(params.papers);
    for (i, &c) in planted.iter().enumerate() {
        let id = format!("P{i:0width$}");
        let journal = if rng.gen_bool(params.multidisciplinary_fraction) {
            "MULTI".to_string()
        } else if rng.gen_bool(params.misc_fraction / (1.0 - params.multidisciplinary_fraction).max(f64::MIN_POSITIVE)) {
            format!("M{}", area_code(c / per_area))
        } else {
            let category = if k > 1 && rng.gen_bool(params.noise) {
                let other = rng.gen_range(0..k - 1);
                if other >= c {
                    other + 1
                } else {
                    other
                }
            } else {
                c
            };
            by_category[category].choose(&mut rng).unwrap().clone()
        };
        papers.push((id, journal));
    }

    let mut per_category = vec![0usize; k];
    for &c in &planted {
        per_category[c] += 1;
    }
    let mean_refs = (params.refs_min + params.refs_max) as f64 / 2.0;
    let pool: Vec<usize> = per_category
        .iter()
        .map(|&n| ((n as f64 * mean_refs / params.citations_per_reference).ceil() as usize).max(params.refs_max))
        .collect();

    let mut order: Vec<usize> = (0..params.papers).collect();
    order.shuffle(&mut rng);
    let mut low = vec![false; params.papers];
    for &i in order.iter().take(params.low_ref_papers()) {
        low[i] = true;
    }

    let mut references = Vec::with_capacity(params.papers * params.refs_max);
    for (i, &c) in planted.iter().enumerate() {
        let n = if low[i] {
            rng.gen_range(0..3)
        } else {
            rng.gen_range(params.refs_min..=params.refs_max)
        };
        for _ in 0..n {
            let target = if rng.gen_bool(params.cross_citation) {
                rng.gen_range(0..k)
            } else {
                c
            };
            let j = rng.gen_range(0..pool[target]);
            references.push((papers[i].0.clone(), format!("R{}-{j}", code(target))));
        }
    }

    let planted = papers
        .iter()
        .zip(&planted)
        .map(|((id, _), &c)| (id.clone(), code(c)))
        .collect();

    Ok(SyntheticCorpus {
        params: params.clone(),
        scheme,
        journals,
        papers,
        references,
        planted,
    })
}

impl SyntheticCorpus {
    pub fn build(&self, min_refs: usize) -> Result<Corpus> {
        let mut b = CorpusBuilder::new();
        for (id, codes) in &self.journals {
            b.journal(id, codes);
        }
        for (p, j) in &self.papers {
            b.paper(p, j);
        }
        for (p, r) in &self.references {
            b.reference(p, r);
        }
        b.min_refs(min_refs);
        b.build(&self.scheme)
    }

    /// Writes scheme, journals, papers, references, planted labels and a
    /// metadata sidecar into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let open = |name: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            Ok(BufWriter::new(File::create(&path).map_err(|e| Error::io(path, e))?))
        };
        let io = |name: &str| {
            let path = dir.join(name);
            move |e| Error::io(path, e)
        };

        let mut f = open("scheme.tsv")?;
        self.scheme.write(&mut f).and_then(|_| f.flush()).map_err(io("scheme.tsv"))?;

        let mut f = open("journals.tsv")?;
        (|| {
            writeln!(f, "journal_id\tcode\tdegree")?;
            for (id, codes) in &self.journals {
                for c in codes {
                    writeln!(f, "{id}\t{c}\t1")?;
                }
            }
            f.flush()
        })()
        .map_err(io("journals.tsv"))?;

        let mut f = open("papers.tsv")?;
        (|| {
            writeln!(f, "paper_id\tjournal_id")?;
            for (p, j) in &self.papers {
                writeln!(f, "{p}\t{j}")?;
            }
            f.flush()
        })()
        .map_err(io("papers.tsv"))?;

        let mut f = open("references.tsv")?;
        (|| {
            writeln!(f, "paper_id\treference_id")?;
            for (p, r) in &self.references {
                writeln!(f, "{p}\t{r}")?;
            }
            f.flush()
        })()
        .map_err(io("references.tsv"))?;

        let mut f = open("planted.tsv")?;
        (|| {
            writeln!(f, "paper_id\tcategory_code")?;
            for (p, c) in &self.planted {
                writeln!(f, "{p}\t{c}")?;
            }
            f.flush()
        })()
        .map_err(io("planted.tsv"))?;

        let meta = serde_json::json!({
            "rng": RNG_ALGORITHM,
            "params": self.params,
            "papers": self.papers.len(),
            "journals": self.journals.len(),
            "reference_slots": self.references.len(),
            "low_ref_papers": self.params.low_ref_papers(),
        });
        let path = dir.join("synth.json");
        std::fs::write(&path, serde_json::to_string_pretty(&meta)? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_corpus() {
        let p = SynthParams {
            papers: 200,
            ..Default::default()
        };
        let a = generate(&p).unwrap();
        let b = generate(&p).unwrap();
        assert_eq!(a.references, b.references);
        assert_eq!(a.papers, b.papers);
        let c = generate(&SynthParams { seed: 2, ..p }).unwrap();
        assert_ne!(a.references, c.references);
    }

    #[test]
    fn low_ref_fraction_is_exact() {
        let p = SynthParams {
            papers: 400,
            low_ref_fraction: 0.0432,
            ..Default::default()
        };
        let s = generate(&p).unwrap();
        let corpus = s.build(3).unwrap();
        assert_eq!(p.low_ref_papers(), 17);
        assert_eq!(corpus.len() - corpus.eligible_count(), 17);
    }

    #[test]
    fn scheme_shape() {
        let s = generate(&SynthParams {
            papers: 10,
            areas: 3,
            categories_per_area: 5,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.scheme.len(), 15);
        assert_eq!(s.scheme.area_count(), 3);
        assert_eq!(s.scheme.multidisciplinary_code(), Some(1000));
        assert_eq!(s.scheme.misc_code(1200), Some(1201));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate(&SynthParams {
            papers: 0,
            ..Default::default()
        })
        .is_err());
        assert!(generate(&SynthParams {
            noise: 1.5,
            ..Default::default()
        })
        .is_err());
        assert!(generate(&SynthParams {
            refs_min: 2,
            ..Default::default()
        })
        .is_err());
    }
}
