//! Papers, journals and reference lists, plus the reference→citing-papers
//! inverted index.
//!
//! References are opaque strings. They are interned in ascending id order so
//! that index order doubles as the canonical reduction order. Papers are
//! likewise stored in ascending id order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::{fractionalize_journal, CategoryScheme, JournalAssignment, JournalProfile};
use crate::table::Table;
use crate::vector::WeightVector;

/// Default minimum number of references for a paper to be reclassified.
pub const DEFAULT_MIN_REFS: usize = 3;

pub type PaperIndex = u32;
pub type ReferenceIndex = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paper {
    pub id: String,
    pub journal_id: String,
    pub initial: WeightVector,
    /// One entry per reference slot, sorted by reference index. Repeated
    /// citations of the same reference appear repeatedly.
    pub references: Vec<ReferenceIndex>,
}

impl Paper {
    pub fn ref_count(&self) -> usize {
        self.references.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    papers: Vec<Paper>,
    journals: BTreeMap<String, JournalAssignment>,
    reference_ids: Vec<String>,
    // CSR layout: citers of reference r are citers[offsets[r]..offsets[r + 1]],
    // one entry per slot, ordered by (paper index, slot).
    offsets: Vec<usize>,
    citers: Vec<PaperIndex>,
    categories: usize,
    min_refs: usize,
    eligible: Vec<bool>,
}

impl Corpus {
    /// Loads the three input tables and fractionalizes every journal.
    pub fn load(
        papers: &Path,
        journals: &Path,
        references: &Path,
        scheme: &CategoryScheme,
    ) -> Result<Corpus> {
        let mut builder = CorpusBuilder::new();
        read_journals(&mut builder, Table::open(journals)?)?;
        read_papers(&mut builder, Table::open(papers)?)?;
        read_references(&mut builder, Table::open(references)?)?;
        builder.build(scheme)
    }

    /// Same as [`Corpus::load`] but from in-memory readers.
    pub fn read<P, J, R>(papers: P, journals: J, references: R, scheme: &CategoryScheme) -> Result<Corpus>
    where
        P: Read + 'static,
        J: Read + 'static,
        R: Read + 'static,
    {
        let mut builder = CorpusBuilder::new();
        read_journals(&mut builder, Table::from_reader("journals".into(), journals)?)?;
        read_papers(&mut builder, Table::from_reader("papers".into(), papers)?)?;
        read_references(&mut builder, Table::from_reader("references".into(), references)?)?;
        builder.build(scheme)
    }

    pub fn papers(&self) -> &[Paper] {
        &self.papers
    }

    pub fn paper(&self, index: PaperIndex) -> &Paper {
        &self.papers[index as usize]
    }

    pub fn paper_index(&self, id: &str) -> Option<PaperIndex> {
        self.papers
            .binary_search_by(|p| p.id.as_str().cmp(id))
            .ok()
            .map(|i| i as PaperIndex)
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn journals(&self) -> &BTreeMap<String, JournalAssignment> {
        &self.journals
    }

    pub fn reference_count(&self) -> usize {
        self.reference_ids.len()
    }

    pub fn reference_id(&self, index: ReferenceIndex) -> &str {
        &self.reference_ids[index as usize]
    }

    pub fn reference_ids(&self) -> &[String] {
        &self.reference_ids
    }

    /// Citing paper of every slot pointing at `reference`, ordered by
    /// (paper index, slot).
    pub fn citers(&self, reference: ReferenceIndex) -> &[PaperIndex] {
        let r = reference as usize;
        &self.citers[self.offsets[r]..self.offsets[r + 1]]
    }

    /// Total number of reference slots.
    pub fn slot_count(&self) -> usize {
        self.citers.len()
    }

    /// Dimension of the weight vectors.
    pub fn category_count(&self) -> usize {
        self.categories
    }

    pub fn min_refs(&self) -> usize {
        self.min_refs
    }

    /// Recomputes eligibility for a new minimum reference count.
    pub fn with_min_refs(mut self, min_refs: usize) -> Corpus {
        self.min_refs = min_refs;
        self.eligible = self.papers.iter().map(|p| p.ref_count() >= min_refs).collect();
        self
    }

    pub fn is_eligible(&self, index: PaperIndex) -> bool {
        self.eligible[index as usize]
    }

    pub fn eligibility(&self) -> &[bool] {
        &self.eligible
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible.iter().filter(|&&e| e).count()
    }

    /// Percentage of papers left out of reclassification.
    pub fn unreclassified_percentage(&self) -> f64 {
        let n = self.papers.len();
        100.0 * (n - self.eligible_count()) as f64 / n as f64
    }

    /// Papers whose journal is assigned exclusively to one miscellaneous
    /// code, with that code's area.
    pub fn misc_exclusive_papers(&self, scheme: &CategoryScheme) -> BTreeMap<String, u32> {
        let mut out = BTreeMap::new();
        for p in &self.papers {
            if let JournalProfile::MiscOnly { area } = self.journals[&p.journal_id].profile(scheme) {
                out.insert(p.id.clone(), area);
            }
        }
        out
    }

    /// Papers whose journal is assigned exclusively to the multidisciplinary
    /// code.
    pub fn multidisciplinary_papers(&self, scheme: &CategoryScheme) -> BTreeSet<String> {
        self.papers
            .iter()
            .filter(|p| {
                self.journals[&p.journal_id].profile(scheme) == JournalProfile::MultidisciplinaryOnly
            })
            .map(|p| p.id.clone())
            .collect()
    }

    /// Initial vectors as a dense papers × categories matrix.
    pub fn dense_initial(&self) -> Vec<Vec<f64>> {
        self.papers
            .iter()
            .map(|p| {
                let mut row = vec![0.0; self.categories];
                p.initial.add_into(&mut row);
                row
            })
            .collect()
    }

    /// Reference slots of every paper as plain indices.
    pub fn reference_slots(&self) -> Vec<Vec<usize>> {
        self.papers
            .iter()
            .map(|p| p.references.iter().map(|&r| r as usize).collect())
            .collect()
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Corpus> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}

/// Ids of the papers with at least `min_refs` reference slots.
pub fn eligible_papers(corpus: &Corpus, min_refs: usize) -> BTreeSet<String> {
    corpus
        .papers()
        .iter()
        .filter(|p| p.ref_count() >= min_refs)
        .map(|p| p.id.clone())
        .collect()
}

/// Incremental, in-memory corpus construction.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    journals: BTreeMap<String, Vec<(u32, f64)>>,
    papers: Vec<(String, String)>,
    references: Vec<(String, String)>,
    min_refs: Option<usize>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one `(code, degree)` assignment to a journal.
    pub fn journal_code(&mut self, journal: &str, code: u32, degree: f64) -> &mut Self {
        self.journals
            .entry(journal.to_string())
            .or_default()
            .push((code, degree));
        self
    }

    /// Assigns a journal to `codes` with equal degree.
    pub fn journal(&mut self, journal: &str, codes: &[u32]) -> &mut Self {
        for &c in codes {
            self.journal_code(journal, c, 1.0);
        }
        self
    }

    pub fn paper(&mut self, paper: &str, journal: &str) -> &mut Self {
        self.papers.push((paper.to_string(), journal.to_string()));
        self
    }

    pub fn reference(&mut self, paper: &str, reference: &str) -> &mut Self {
        self.references.push((paper.to_string(), reference.to_string()));
        self
    }

    pub fn min_refs(&mut self, min_refs: usize) -> &mut Self {
        self.min_refs = Some(min_refs);
        self
    }

    pub fn build(&self, scheme: &CategoryScheme) -> Result<Corpus> {
        if self.papers.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let mut journals = BTreeMap::new();
        let mut journal_vectors = HashMap::new();
        for (id, raw) in &self.journals {
            // Row order of the input must not matter.
            let mut raw = raw.clone();
            raw.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let assignment = JournalAssignment::new(id.clone(), raw);
            journal_vectors.insert(id.as_str(), fractionalize_journal(&assignment, scheme)?);
            journals.insert(id.clone(), assignment);
        }

        let mut order: Vec<usize> = (0..self.papers.len()).collect();
        order.sort_by(|&a, &b| self.papers[a].0.cmp(&self.papers[b].0));
        let mut papers: Vec<Paper> = Vec::with_capacity(order.len());
        for i in order {
            let (id, journal) = &self.papers[i];
            if papers.last().is_some_and(|p| &p.id == id) {
                return Err(Error::DuplicatePaper(id.clone()));
            }
            let initial = journal_vectors
                .get(journal.as_str())
                .ok_or_else(|| Error::UnknownJournal {
                    paper: id.clone(),
                    journal: journal.clone(),
                })?
                .clone();
            papers.push(Paper {
                id: id.clone(),
                journal_id: journal.clone(),
                initial,
                references: Vec::new(),
            });
        }
        let paper_pos: HashMap<String, usize> =
            papers.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect();

        let distinct: BTreeSet<&str> = self.references.iter().map(|(_, r)| r.as_str()).collect();
        let reference_ids: Vec<String> = distinct.iter().map(|s| s.to_string()).collect();
        let ref_pos: HashMap<&str, ReferenceIndex> = distinct
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, i as ReferenceIndex))
            .collect();

        for (paper, reference) in &self.references {
            let &p = paper_pos
                .get(paper.as_str())
                .ok_or_else(|| Error::UnknownPaper(paper.clone()))?;
            papers[p].references.push(ref_pos[reference.as_str()]);
        }
        for p in &mut papers {
            p.references.sort_unstable();
        }

        // Counting sort of slots by reference; iterating papers in index
        // order keeps each bucket ordered by (paper, slot).
        let mut offsets = vec![0usize; reference_ids.len() + 1];
        for p in &papers {
            for &r in &p.references {
                offsets[r as usize + 1] += 1;
            }
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut fill = offsets.clone();
        let mut citers = vec![0 as PaperIndex; offsets[reference_ids.len()]];
        for (pi, p) in papers.iter().enumerate() {
            for &r in &p.references {
                citers[fill[r as usize]] = pi as PaperIndex;
                fill[r as usize] += 1;
            }
        }

        let corpus = Corpus {
            papers,
            journals,
            reference_ids,
            offsets,
            citers,
            categories: scheme.len(),
            min_refs: 0,
            eligible: Vec::new(),
        };
        Ok(corpus.with_min_refs(self.min_refs.unwrap_or(DEFAULT_MIN_REFS)))
    }
}

fn read_journals(builder: &mut CorpusBuilder, mut table: Table) -> Result<()> {
    let id = table.column("journal_id")?;
    let code = table.column("code")?;
    let degree = table.optional_column("degree");
    let name = table.name().to_string();
    for row in table.rows() {
        let row = row?;
        let journal = row.get(id);
        if journal.is_empty() {
            return Err(malformed(&name, row.line, "empty journal_id"));
        }
        let c: u32 = row.parse(&name, code, "code")?;
        let d: f64 = match degree {
            Some(col) if !row.get(col).is_empty() => row.parse(&name, col, "degree")?,
            _ => 1.0,
        };
        builder.journal_code(journal, c, d);
    }
    Ok(())
}

fn read_papers(builder: &mut CorpusBuilder, mut table: Table) -> Result<()> {
    let id = table.column("paper_id")?;
    let journal = table.column("journal_id")?;
    let name = table.name().to_string();
    let mut rows = Vec::new();
    for row in table.rows() {
        let row = row?;
        if row.get(id).is_empty() || row.get(journal).is_empty() {
            return Err(malformed(&name, row.line, "empty paper_id or journal_id"));
        }
        rows.push((row.get(id).to_string(), row.get(journal).to_string()));
    }
    for (p, j) in rows {
        builder.paper(&p, &j);
    }
    Ok(())
}

fn read_references(builder: &mut CorpusBuilder, mut table: Table) -> Result<()> {
    let paper = table.column("paper_id")?;
    let reference = table.column("reference_id")?;
    let name = table.name().to_string();
    let mut rows = Vec::new();
    for row in table.rows() {
        let row = row?;
        if row.get(paper).is_empty() || row.get(reference).is_empty() {
            return Err(malformed(&name, row.line, "empty paper_id or reference_id"));
        }
        rows.push((row.get(paper).to_string(), row.get(reference).to_string()));
    }
    for (p, r) in rows {
        builder.reference(&p, &r);
    }
    Ok(())
}

fn malformed(path: &str, line: u64, message: &str) -> Error {
    Error::Malformed {
        path: path.to_string(),
        line,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{CodeKind, SchemeRow};
    use std::io::Cursor;

    fn scheme() -> CategoryScheme {
        CategoryScheme::from_rows(&[
            SchemeRow::new(11, 1, CodeKind::Regular),
            SchemeRow::new(12, 1, CodeKind::Regular),
            SchemeRow::new(21, 2, CodeKind::Regular),
        ])
        .unwrap()
    }

    fn cursor(s: &str) -> Cursor<String> {
        Cursor::new(s.to_string())
    }

    #[test]
    fn loads_three_tables() {
        let c = Corpus::read(
            cursor("paper_id,journal_id\np3,j2\np1,j1\np2,j1\n"),
            cursor("journal_id,code,degree\nj1,11,\nj1,12,\nj2,21,2\n"),
            cursor("paper_id,reference_id\np1,r1\np1,r2\np2,r2\np3,r3\np3,r1\n"),
            &scheme(),
        )
        .unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.reference_count() <= 5);
        assert_eq!(c.reference_count(), 3);
        let ids: Vec<&str> = c.papers().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["p1", "p2", "p3"]);
        assert_eq!(c.paper(0).initial.entries(), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(c.paper(2).initial.entries(), &[(2, 1.0)]);
        // r1 is cited by p1 and p3
        assert_eq!(c.citers(0), &[0, 2]);
        assert_eq!(c.citers(1), &[0, 1]);
    }

    #[test]
    fn duplicate_pairs_are_distinct_slots() {
        let mut b = CorpusBuilder::new();
        b.journal("j", &[11]).paper("p1", "j").reference("p1", "r1").reference("p1", "r1");
        let c = b.build(&scheme()).unwrap();
        assert_eq!(c.paper(0).ref_count(), 2);
        assert_eq!(c.citers(0), &[0, 0]);
        assert_eq!(c.reference_count(), 1);
    }

    #[test]
    fn eligibility_filter() {
        let mut b = CorpusBuilder::new();
        b.journal("j", &[11]);
        for (p, n) in [("a", 0), ("b", 2), ("c", 3), ("d", 7)] {
            b.paper(p, "j");
            for k in 0..n {
                b.reference(p, &format!("r{k}"));
            }
        }
        let c = b.build(&scheme()).unwrap();
        let e = eligible_papers(&c, 3);
        assert_eq!(e.into_iter().collect::<Vec<_>>(), ["c", "d"]);
        assert_eq!(c.unreclassified_percentage(), 50.0);
        assert_eq!(eligible_papers(&c, 0).len(), 4);
        assert_eq!(c.clone().with_min_refs(0).eligible_count(), 4);
    }

    #[test]
    fn errors() {
        let s = scheme();
        let mut b = CorpusBuilder::new();
        b.journal("j", &[11]).paper("p", "missing");
        assert!(matches!(b.build(&s), Err(Error::UnknownJournal { .. })));
        assert!(matches!(CorpusBuilder::new().build(&s), Err(Error::EmptyCorpus)));
        let mut b = CorpusBuilder::new();
        b.journal("j", &[11]).paper("p", "j").reference("q", "r");
        assert!(matches!(b.build(&s), Err(Error::UnknownPaper(_))));
        let mut b = CorpusBuilder::new();
        b.journal("j", &[11]).paper("p", "j").paper("p", "j");
        assert!(matches!(b.build(&s), Err(Error::DuplicatePaper(_))));
        let bad = Corpus::read(
            cursor("paper_id,journal_id\np,j\n"),
            cursor("journal_id,code\nj,eleven\n"),
            cursor("paper_id,reference_id\n"),
            &s,
        );
        assert!(matches!(bad, Err(Error::Malformed { .. })));
    }

    #[test]
    fn cache_round_trip() {
        let mut b = CorpusBuilder::new();
        b.journal("j", &[11, 12, 21]).paper("p", "j").reference("p", "r");
        let c = b.build(&scheme()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.json");
        c.write_cache(&path).unwrap();
        assert_eq!(Corpus::read_cache(&path).unwrap(), c);
    }
}
