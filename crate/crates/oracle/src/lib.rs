//! Dense, deliberately naive reference implementation of the propagation
//! classifier and of the pruning rule.
//!
//! Everything here works on plain `Vec<Vec<f64>>` matrices and linear
//! searches so that it shares no code path with the sparse engine it is used
//! to check. It is only meant for small corpora.

/// Relative slack applied to the pruning ratio test.
pub const RATIO_EPSILON: f64 = 1e-12;

/// Input of the dense solver.
#[derive(Debug, Clone)]
pub struct DenseProblem {
    /// papers × categories journal-inherited weights.
    pub initial: Vec<Vec<f64>>,
    /// Reference ids cited by each paper, one entry per slot.
    pub paper_refs: Vec<Vec<usize>>,
    /// Reference ids are `0..num_refs`.
    pub num_refs: usize,
    /// Papers that get reclassified.
    pub eligible: Vec<bool>,
    pub include_ineligible_citers: bool,
    pub fractional: bool,
    /// Absolute squared-difference threshold.
    pub threshold: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct DenseResult {
    pub jl: Vec<Vec<f64>>,
    pub u1: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

fn normalize(v: &mut [f64]) -> bool {
    let mut sum = 0.0;
    for x in v.iter() {
        sum += *x;
    }
    if sum <= 0.0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
    true
}

fn reference_weights(p: &DenseProblem, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = p.initial[0].len();
    let mut wrefs = vec![vec![0.0; k]; p.num_refs];
    for (nr, wref) in wrefs.iter_mut().enumerate() {
        for np in 0..p.initial.len() {
            if !p.eligible[np] && !p.include_ineligible_citers {
                continue;
            }
            let n = p.paper_refs[np].len() as f64;
            for npr in 0..p.paper_refs[np].len() {
                if p.paper_refs[np][npr] == nr {
                    for c in 0..k {
                        if p.fractional {
                            wref[c] += w[np][c] / n;
                        } else {
                            wref[c] += w[np][c];
                        }
                    }
                }
            }
        }
        normalize(wref);
    }
    wrefs
}

fn paper_weights(p: &DenseProblem, wrefs: &[Vec<f64>], prev: &[Vec<f64>], masked: bool) -> Vec<Vec<f64>> {
    let k = p.initial[0].len();
    let mut out = prev.to_vec();
    for np in 0..p.initial.len() {
        if !p.eligible[np] {
            continue;
        }
        let mut w = vec![0.0; k];
        for npr in 0..p.paper_refs[np].len() {
            for nr in 0..p.num_refs {
                if nr == p.paper_refs[np][npr] {
                    for c in 0..k {
                        if !masked || prev[np][c] > 0.0 {
                            w[c] += wrefs[nr][c];
                        }
                    }
                    break;
                }
            }
        }
        if normalize(&mut w) {
            out[np] = w;
        }
    }
    out
}

fn square_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for p in 0..a.len() {
        let mut d = 0.0;
        for c in 0..a[p].len() {
            d += (a[p][c] - b[p][c]) * (a[p][c] - b[p][c]);
        }
        total += d;
    }
    total
}

/// Runs the limited loop to convergence, then one unmasked pass.
pub fn solve(p: &DenseProblem) -> DenseResult {
    let mut w = p.initial.clone();
    let mut residuals = Vec::new();
    let mut converged = false;
    while residuals.len() < p.max_iterations {
        let prev = w.clone();
        let wrefs = reference_weights(p, &prev);
        w = paper_weights(p, &wrefs, &prev, true);
        let r = square_difference(&w, &prev);
        residuals.push(r);
        if r < p.threshold || r == 0.0 {
            converged = true;
            break;
        }
    }
    let jl = w.clone();
    let wrefs = reference_weights(p, &jl);
    let u1 = paper_weights(p, &wrefs, &jl, false);
    DenseResult {
        jl,
        u1,
        residuals,
        converged,
    }
}

/// Brute-force pruning: enumerates every subset of the non-zero components
/// of size at most `max_categories` and returns the one satisfying the rule,
/// renormalized. The rule: the kept set is the descending-weight prefix
/// (ties to the lower index) in which each kept weight is at least
/// `threshold` times the one before it, stopping at the first failure or
/// after `max_categories` entries.
pub fn prune_bruteforce(weights: &[f64], threshold: f64, max_categories: usize) -> Vec<f64> {
    let nz: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    assert!(nz.len() <= 20, "brute force limited to 20 non-zero components");
    // a before b in the ranking
    let before = |a: usize, b: usize| weights[a] > weights[b] || (weights[a] == weights[b] && a < b);
    let passes = |hi: usize, lo: usize| weights[lo] >= threshold * weights[hi] * (1.0 - RATIO_EPSILON);

    let mut found: Option<Vec<usize>> = None;
    for mask in 1u32..(1u32 << nz.len()) {
        let set: Vec<usize> = (0..nz.len()).filter(|b| mask & (1 << b) != 0).map(|b| nz[b]).collect();
        if set.len() > max_categories {
            continue;
        }
        let rest: Vec<usize> = nz.iter().copied().filter(|i| !set.contains(i)).collect();
        // prefix: every kept entry ranks before every dropped one
        if !set.iter().all(|&s| rest.iter().all(|&r| before(s, r))) {
            continue;
        }
        let mut ordered = set.clone();
        ordered.sort_by(|&a, &b| if before(a, b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
        if !ordered.windows(2).all(|w| passes(w[0], w[1])) {
            continue;
        }
        // maximal: either capped, exhausted, or the next one fails
        let next = rest.iter().copied().find(|&r| rest.iter().all(|&o| o == r || before(r, o)));
        let maximal = ordered.len() == max_categories
            || match next {
                None => true,
                Some(n) => !passes(*ordered.last().unwrap(), n),
            };
        if maximal {
            assert!(found.is_none(), "rule must select exactly one subset");
            found = Some(set);
        }
    }
    let set = found.expect("some subset satisfies the rule");
    let mut out = vec![0.0; weights.len()];
    let mut sum = 0.0;
    for &i in &set {
        sum += weights[i];
    }
    for &i in &set {
        out[i] = weights[i] / sum;
    }
    out
}

/// Largest absolute component difference between two matrices of equal
/// shape.
pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut m: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.len(), y.len());
        for (u, v) in x.iter().zip(y) {
            m = m.max((u - v).abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point() {
        let p = DenseProblem {
            initial: vec![vec![1.0, 0.0]],
            paper_refs: vec![vec![0, 1, 2]],
            num_refs: 3,
            eligible: vec![true],
            include_ineligible_citers: true,
            fractional: false,
            threshold: 1.0,
            max_iterations: 10,
        };
        let r = solve(&p);
        assert_eq!(r.residuals, vec![0.0]);
        assert_eq!(r.jl, vec![vec![1.0, 0.0]]);
        assert_eq!(r.u1, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn prune_examples() {
        let out = prune_bruteforce(&[0.6, 0.3, 0.1], 0.5, 5);
        assert!((out[0] - 2.0 / 3.0).abs() < 1e-15 && (out[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(out[2], 0.0);
        let out = prune_bruteforce(&[1.0 / 6.0; 6], 0.8, 5);
        assert_eq!(&out[..5], &[0.2; 5]);
        assert_eq!(out[5], 0.0);
    }
}
