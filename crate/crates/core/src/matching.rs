//! Best bijection between two images' pattern sets.

use crate::error::{Error, Result};
use crate::pattern::{ImageSignature, PatternSignature};

/// Exhaustive matching enumerates k! permutations; larger k is refused.
pub const MAX_PATTERNS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// `permutation[i]` is the pattern of B matched to pattern `i` of A.
    pub permutation: Vec<usize>,
    pub total_cost: f64,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "vector dimensions differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Euclidean distance between pattern mean vectors.
pub fn pattern_distance(a: &PatternSignature, b: &PatternSignature) -> Result<f64> {
    euclidean(&a.mean_vector, &b.mean_vector)
}

/// Rearrange into the next permutation in lexicographic order; false after the last.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Minimum-cost assignment over a square cost matrix by full enumeration.
/// Ties resolve to the lexicographically smallest permutation.
pub fn best_assignment(cost: &[Vec<f64>]) -> MatchResult {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = MatchResult {
        permutation: perm.clone(),
        total_cost: f64::INFINITY,
    };
    loop {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if total < best.total_cost {
            best.total_cost = total;
            best.permutation.copy_from_slice(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

pub fn cost_matrix(a: &ImageSignature, b: &ImageSignature) -> Result<Vec<Vec<f64>>> {
    a.patterns
        .iter()
        .map(|pa| {
            b.patterns
                .iter()
                .map(|pb| pattern_distance(pa, pb))
                .collect()
        })
        .collect()
}

pub fn match_signatures(a: &ImageSignature, b: &ImageSignature) -> Result<MatchResult> {
    let k = a.patterns.len();
    if k != b.patterns.len() {
        return Err(Error::validation(format!(
            "cannot match {k} patterns against {}",
            b.patterns.len()
        )));
    }
    if k == 0 || k > MAX_PATTERNS {
        return Err(Error::validation(format!(
            "pattern count {k} not in [1, {MAX_PATTERNS}]"
        )));
    }
    Ok(best_assignment(&cost_matrix(a, b)?))
}
