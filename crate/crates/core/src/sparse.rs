//! Contiguous storage for the engine's paper and reference vectors, and the
//! order in which they are laid out.
//!
//! Papers are stored grouped by the category of their journal vector and
//! references by their first citer in that order, so the rows touched while
//! processing one stretch of papers sit close together in memory. The
//! layout only changes where rows live, never the order of any floating
//! point sum: citers are still visited in paper-index order and slots in
//! slot order.

use rayon::prelude::*;

use crate::corpus::{Corpus, PaperIndex};
use crate::vector::{CategoryIndex, WeightVector};

/// Rows handled per parallel task. Fixed so that results do not depend on
/// the worker count.
const CHUNK: usize = 256;

/// Many sparse vectors in one buffer; row `i` is `start[i]..start[i + 1]`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Rows {
    start: Vec<usize>,
    idx: Vec<CategoryIndex>,
    w: Vec<f64>,
}

impl Rows {
    pub fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a WeightVector>) -> Rows {
        let mut rows = Rows {
            start: vec![0],
            ..Rows::default()
        };
        for v in vectors {
            rows.push(v.iter());
        }
        rows
    }

    fn push(&mut self, entries: impl Iterator<Item = (CategoryIndex, f64)>) {
        for (i, w) in entries {
            self.idx.push(i);
            self.w.push(w);
        }
        self.start.push(self.idx.len());
    }

    pub fn len(&self) -> usize {
        self.start.len().saturating_sub(1)
    }

    pub fn row(&self, i: usize) -> (&[CategoryIndex], &[f64]) {
        let (a, b) = (self.start[i], self.start[i + 1]);
        (&self.idx[a..b], &self.w[a..b])
    }

    pub fn vector(&self, i: usize) -> WeightVector {
        let (idx, w) = self.row(i);
        WeightVector::from_sorted(idx.iter().copied().zip(w.iter().copied()).collect())
    }

    /// Concatenates per-chunk results in chunk order.
    fn concat(parts: Vec<Rows>) -> Rows {
        let mut out = Rows {
            start: Vec::with_capacity(parts.iter().map(Rows::len).sum::<usize>() + 1),
            idx: Vec::with_capacity(parts.iter().map(|p| p.idx.len()).sum()),
            w: Vec::with_capacity(parts.iter().map(|p| p.w.len()).sum()),
        };
        out.start.push(0);
        for part in parts {
            let base = out.idx.len();
            out.start.extend(part.start[1..].iter().map(|s| s + base));
            out.idx.extend_from_slice(&part.idx);
            out.w.extend_from_slice(&part.w);
        }
        out
    }
}

/// Dense accumulator that remembers which components it touched.
struct Scratch {
    dense: Vec<f64>,
    touched: Vec<CategoryIndex>,
}

impl Scratch {
    fn new(categories: usize) -> Self {
        Scratch {
            dense: vec![0.0; categories],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, idx: &[CategoryIndex], w: &[f64], divisor: Option<f64>) {
        for (&i, &x) in idx.iter().zip(w) {
            let slot = &mut self.dense[i as usize];
            if *slot == 0.0 {
                self.touched.push(i);
            }
            *slot += match divisor {
                Some(d) => x / d,
                None => x,
            };
        }
    }

    #[inline]
    fn add_masked(&mut self, idx: &[CategoryIndex], w: &[f64], mask: &[bool]) {
        for (&i, &x) in idx.iter().zip(w) {
            if mask[i as usize] {
                let slot = &mut self.dense[i as usize];
                if *slot == 0.0 {
                    self.touched.push(i);
                }
                *slot += x;
            }
        }
    }

    /// Appends the accumulated vector, normalized, as a new row of `out`
    /// and clears the scratch. Returns `false` (appending nothing) when the
    /// sum is zero.
    fn drain_normalized_into(&mut self, out: &mut Rows) -> bool {
        self.touched.sort_unstable();
        let first = out.idx.len();
        let mut total = 0.0;
        for &i in &self.touched {
            let x = std::mem::take(&mut self.dense[i as usize]);
            if x > 0.0 {
                out.idx.push(i);
                out.w.push(x);
                total += x;
            }
        }
        self.touched.clear();
        if total <= 0.0 {
            out.idx.truncate(first);
            out.w.truncate(first);
            return false;
        }
        for x in &mut out.w[first..] {
            *x /= total;
        }
        out.start.push(out.idx.len());
        true
    }
}

/// Processing order and both adjacency lists expressed in row positions.
pub(crate) struct Layout {
    categories: usize,
    paper_order: Vec<PaperIndex>,
    paper_pos: Vec<u32>,
    ref_order: Vec<u32>,
    ref_pos: Vec<u32>,
    /// Per paper position: reference positions, in slot order.
    slot_start: Vec<usize>,
    slots: Vec<u32>,
    /// Per reference position: citer positions, in paper-index order.
    citer_start: Vec<usize>,
    citers: Vec<u32>,
    ref_count: Vec<f64>,
    eligible: Vec<bool>,
}

impl Layout {
    pub fn new(corpus: &Corpus) -> Layout {
        let papers = corpus.papers();
        let mut paper_order: Vec<PaperIndex> = (0..papers.len() as PaperIndex).collect();
        paper_order.sort_by_key(|&p| {
            let paper = &papers[p as usize];
            (paper.initial.winner(), paper.journal_id.as_str(), p)
        });
        let mut paper_pos = vec![0u32; papers.len()];
        for (pos, &p) in paper_order.iter().enumerate() {
            paper_pos[p as usize] = pos as u32;
        }

        let refs = corpus.reference_count();
        let first_citer: Vec<u32> = (0..refs as u32)
            .map(|r| corpus.citers(r).iter().map(|&p| paper_pos[p as usize]).min().unwrap_or(u32::MAX))
            .collect();
        let mut ref_order: Vec<u32> = (0..refs as u32).collect();
        ref_order.sort_by_key(|&r| (first_citer[r as usize], r));
        let mut ref_pos = vec![0u32; refs];
        for (pos, &r) in ref_order.iter().enumerate() {
            ref_pos[r as usize] = pos as u32;
        }

        let mut slot_start = Vec::with_capacity(papers.len() + 1);
        let mut slots = Vec::with_capacity(corpus.slot_count());
        slot_start.push(0);
        for &p in &paper_order {
            slots.extend(papers[p as usize].references.iter().map(|&r| ref_pos[r as usize]));
            slot_start.push(slots.len());
        }
        let mut citer_start = Vec::with_capacity(refs + 1);
        let mut citers = Vec::with_capacity(corpus.slot_count());
        citer_start.push(0);
        for &r in &ref_order {
            citers.extend(corpus.citers(r).iter().map(|&p| paper_pos[p as usize]));
            citer_start.push(citers.len());
        }

        Layout {
            categories: corpus.category_count(),
            ref_count: paper_order.iter().map(|&p| papers[p as usize].ref_count() as f64).collect(),
            eligible: paper_order.iter().map(|&p| corpus.is_eligible(p)).collect(),
            paper_order,
            paper_pos,
            ref_order,
            ref_pos,
            slot_start,
            slots,
            citer_start,
            citers,
        }
    }

    /// Paper vectors in index order → rows in layout order.
    pub fn paper_rows(&self, vectors: &[WeightVector]) -> Rows {
        Rows::from_vectors(self.paper_order.iter().map(|&p| &vectors[p as usize]))
    }

    pub fn reference_rows(&self, vectors: &[WeightVector]) -> Rows {
        Rows::from_vectors(self.ref_order.iter().map(|&r| &vectors[r as usize]))
    }

    /// Rows in layout order → paper vectors in index order.
    pub fn paper_vectors(&self, rows: &Rows) -> Vec<WeightVector> {
        self.paper_pos.iter().map(|&pos| rows.vector(pos as usize)).collect()
    }

    pub fn reference_vectors(&self, rows: &Rows) -> Vec<WeightVector> {
        self.ref_pos.iter().map(|&pos| rows.vector(pos as usize)).collect()
    }

    /// Scope flags (indexed by paper) → flags by position.
    pub fn scope_by_position(&self, scope: &[bool]) -> Vec<bool> {
        self.paper_order.iter().map(|&p| scope[p as usize]).collect()
    }

    /// Reference rows as the (optionally fractional) normalized sum of their
    /// in-scope citers' rows. A reference with no citer in scope gets an
    /// empty row.
    pub fn accumulate(&self, papers: &Rows, fractional: bool, scope: &[bool]) -> Rows {
        let parts: Vec<Rows> = (0..self.ref_order.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map_init(
                || Scratch::new(self.categories),
                |scratch, chunk| {
                    let mut out = Rows {
                        start: vec![0],
                        ..Rows::default()
                    };
                    for &r in chunk {
                        for &c in &self.citers[self.citer_start[r]..self.citer_start[r + 1]] {
                            let c = c as usize;
                            if !scope[c] {
                                continue;
                            }
                            let (idx, w) = papers.row(c);
                            scratch.add(idx, w, fractional.then(|| self.ref_count[c]));
                        }
                        if !scratch.drain_normalized_into(&mut out) {
                            out.start.push(out.idx.len());
                        }
                    }
                    out
                },
            )
            .collect();
        Rows::concat(parts)
    }

    /// New paper rows from reference rows; with `limited`, components
    /// outside the previous support are dropped. Ineligible papers keep
    /// their row, as do papers whose sum vanishes (counted as stalled).
    pub fn propagate(&self, references: &Rows, previous: &Rows, limited: bool) -> (Rows, usize) {
        let parts: Vec<(Rows, usize)> = (0..self.paper_order.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map_init(
                || (Scratch::new(self.categories), vec![false; self.categories]),
                |(scratch, mask), chunk| {
                    let mut out = Rows {
                        start: vec![0],
                        ..Rows::default()
                    };
                    let mut stalled = 0;
                    for &p in chunk {
                        let (pidx, pw) = previous.row(p);
                        if !self.eligible[p] {
                            out.push(pidx.iter().copied().zip(pw.iter().copied()));
                            continue;
                        }
                        if limited {
                            for &i in pidx {
                                mask[i as usize] = true;
                            }
                        }
                        for &r in &self.slots[self.slot_start[p]..self.slot_start[p + 1]] {
                            let (idx, w) = references.row(r as usize);
                            if limited {
                                scratch.add_masked(idx, w, mask);
                            } else {
                                scratch.add(idx, w, None);
                            }
                        }
                        if limited {
                            for &i in pidx {
                                mask[i as usize] = false;
                            }
                        }
                        if !scratch.drain_normalized_into(&mut out) {
                            out.push(pidx.iter().copied().zip(pw.iter().copied()));
                            stalled += 1;
                        }
                    }
                    (out, stalled)
                },
            )
            .collect();
        let stalled = parts.iter().map(|(_, s)| s).sum();
        (Rows::concat(parts.into_iter().map(|(r, _)| r).collect()), stalled)
    }

    /// Σ of per-paper squared differences, summed in paper-index order.
    pub fn squared_difference(&self, current: &Rows, previous: &Rows) -> f64 {
        let per_position: Vec<f64> = (0..current.len())
            .into_par_iter()
            .map(|p| {
                let (ai, aw) = current.row(p);
                let (bi, bw) = previous.row(p);
                squared_distance(ai, aw, bi, bw)
            })
            .collect();
        self.paper_pos.iter().fold(0.0, |acc, &pos| acc + per_position[pos as usize])
    }
}

/// Merge walk over two sorted sparse rows; absent entries read as zero.
fn squared_distance(ai: &[CategoryIndex], aw: &[f64], bi: &[CategoryIndex], bw: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < ai.len() || j < bi.len() {
        let d = if j == bi.len() || (i < ai.len() && ai[i] < bi[j]) {
            i += 1;
            aw[i - 1]
        } else if i == ai.len() || bi[j] < ai[i] {
            j += 1;
            -bw[j - 1]
        } else {
            i += 1;
            j += 1;
            aw[i - 1] - bw[j - 1]
        };
        acc += d * d;
    }
    acc
}
