//! Kendall rank correlation, concordance matrices and monomial discordance:
//! the performance index scoring how close an estimated source is to the
//! true source up to permutation and monotone scaling of coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signature::PathEnsemble;

/// Kendall tau-a between two paired sequences: `(concordant - discordant)
/// divided by n(n-1)/2`, ties counting as neither. Discordant pairs are
/// counted as merge-sort inversions, so the cost is O(n log n).
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid("n", "need at least 2 observations"));
    }
    // sort indices by (a, b); equal-a runs are b-sorted so they contribute
    // no inversions, which is exactly tau-a's tie handling for a
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i].partial_cmp(&a[j])
            .unwrap()
            .then(b[i].partial_cmp(&b[j]).unwrap())
    });
    let mut seq: Vec<f64> = order.iter().map(|&i| b[i]).collect();
    let discordant = count_inversions(&mut seq);

    let pairs = n * (n - 1) / 2;
    let ties_a = count_tied_pairs(a);
    let ties_b = count_tied_pairs(b);
    let ties_both = count_tied_pairs_joint(a, b);
    let tied = ties_a + ties_b - ties_both;
    let concordant = pairs - tied - discordant;
    Ok((concordant as f64 - discordant as f64) / pairs as f64)
}

/// Strict inversions (`i < j` with `seq[i] > seq[j]`), by merge sort.
fn count_inversions(seq: &mut [f64]) -> usize {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mut buf = seq.to_vec();
    merge_count(seq, &mut buf)
}

fn merge_count(seq: &mut [f64], buf: &mut [f64]) -> usize {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (left, right) = seq.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    // merge; equal elements are taken from the left so they do not count
    let (mut i, mut j) = (0, mid);
    for slot in buf.iter_mut().take(n) {
        if i < mid && (j >= n || seq[i] <= seq[j]) {
            *slot = seq[i];
            i += 1;
        } else {
            inv += mid - i;
            *slot = seq[j];
            j += 1;
        }
    }
    seq.copy_from_slice(&buf[..n]);
    inv
}

fn count_tied_pairs(x: &[f64]) -> usize {
    let mut sorted = x.to_vec();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut total = 0;
    let mut run = 1;
    for k in 1..sorted.len() {
        if sorted[k] == sorted[k - 1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

fn count_tied_pairs_joint(a: &[f64], b: &[f64]) -> usize {
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut total = 0;
    let mut run = 1;
    for k in 1..pairs.len() {
        if pairs[k] == pairs[k - 1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// How entries of a concordance matrix are paired up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcordanceMode {
    /// Entry (i,j) averages, over times t, the absolute tau of the N sample
    /// values of X^i_t against Y^j_t (needs N >= 2).
    Ensemble,
    /// Entry (i,j) is the absolute tau of the time-indexed pairs
    /// (X^i_t, Y^j_t) along each path, averaged over paths.
    SinglePath,
}

/// A d×d matrix of time-averaged absolute Kendall correlations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcordanceMatrix {
    pub d: usize,
    /// Row-major entries in [0,1]; rows index X coordinates, columns Y.
    pub entries: Vec<f64>,
    pub mode: ConcordanceMode,
}

impl ConcordanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.d + j]
    }

    pub fn from_rows(rows: &[Vec<f64>], mode: ConcordanceMode) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::GridMismatch);
        }
        Ok(ConcordanceMatrix {
            d,
            entries: rows.iter().flatten().copied().collect(),
            mode,
        })
    }

    pub fn transposed(&self) -> ConcordanceMatrix {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.d {
            for j in 0..self.d {
                entries[j * self.d + i] = self.get(i, j);
            }
        }
        ConcordanceMatrix {
            d: self.d,
            entries,
            mode: self.mode,
        }
    }
}

/// Concordance matrix of two ensembles on matching grids.
///
/// `mode = None` follows the data shape: ensemble pairing when N >= 2,
/// time pairing for a single realization.
pub fn concordance_matrix(
    x: &PathEnsemble,
    y: &PathEnsemble,
    mode: Option<ConcordanceMode>,
) -> Result<ConcordanceMatrix> {
    if x.dimension() != y.dimension() {
        return Err(Error::DimensionMismatch {
            left: x.dimension(),
            right: y.dimension(),
        });
    }
    if x.len() != y.len() || x.paths()[0].n_points() != y.paths()[0].n_points() {
        return Err(Error::GridMismatch);
    }
    let mode = mode.unwrap_or(if x.len() >= 2 {
        ConcordanceMode::Ensemble
    } else {
        ConcordanceMode::SinglePath
    });
    let d = x.dimension();
    let n_times = x.paths()[0].n_points();
    let n_paths = x.len();
    let mut entries = vec![0.0; d * d];
    match mode {
        ConcordanceMode::Ensemble => {
            if n_paths < 2 {
                return Err(Error::invalid("mode", "ensemble pairing needs N >= 2"));
            }
            let mut xs = vec![0.0; n_paths];
            let mut ys = vec![0.0; n_paths];
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for t in 0..n_times {
                        for (p, (px, py)) in x.paths().iter().zip(y.paths()).enumerate() {
                            xs[p] = px.point(t)[i];
                            ys[p] = py.point(t)[j];
                        }
                        acc += kendall_tau(&xs, &ys)?.abs();
                    }
                    entries[i * d + j] = acc / n_times as f64;
                }
            }
        }
        ConcordanceMode::SinglePath => {
            if n_times < 2 {
                return Err(Error::invalid("mode", "time pairing needs >= 2 points"));
            }
            let mut xs = vec![0.0; n_times];
            let mut ys = vec![0.0; n_times];
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for (px, py) in x.paths().iter().zip(y.paths()) {
                        for t in 0..n_times {
                            xs[t] = px.point(t)[i];
                            ys[t] = py.point(t)[j];
                        }
                        acc += kendall_tau(&xs, &ys)?.abs();
                    }
                    entries[i * d + j] = acc / n_paths as f64;
                }
            }
        }
    }
    Ok(ConcordanceMatrix { d, entries, mode })
}

/// Minimum Frobenius distance from `C` to a permutation matrix, normalized
/// by `sqrt(d(d-1))` so the all-ones matrix scores exactly 1. Exhaustive
/// over all d! permutations (d <= 10); ties break to the lexicographically
/// smallest permutation.
pub fn monomial_discordance(c: &ConcordanceMatrix) -> Result<(f64, Vec<usize>)> {
    let d = c.d;
    if d > 10 {
        return Err(Error::invalid("d", "exhaustive permutation search capped at d = 10"));
    }
    if d < 2 {
        return Err(Error::invalid("d", "discordance needs d >= 2"));
    }
    // squared Frobenius distance to permutation sigma (row i has its 1 in
    // column sigma[i]): ||C||^2 + d - 2 * sum_i C[i, sigma[i]]
    let norm_sq: f64 = c.entries.iter().map(|e| e * e).sum();
    let mut best_assign = f64::NEG_INFINITY;
    let mut best_perm: Vec<usize> = Vec::new();
    let mut perm: Vec<usize> = (0..d).collect();
    // lexicographic enumeration keeps the tie-break deterministic
    loop {
        let assign: f64 = perm.iter().enumerate().map(|(i, &j)| c.get(i, j)).sum();
        if assign > best_assign + 1e-15 {
            best_assign = assign;
            best_perm = perm.clone();
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let dist_sq = (norm_sq + d as f64 - 2.0 * best_assign).max(0.0);
    let value = (dist_sq / (d * (d - 1)) as f64).sqrt();
    Ok((value, best_perm))
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
