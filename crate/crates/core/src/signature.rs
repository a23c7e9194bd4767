//! Path signatures and signature cumulants of piecewise-linear paths.
//!
//! A sample path is read as the piecewise-linear interpolant of its grid
//! points, so its signature is the Chen product of one segment exponential
//! per grid interval. Monte-Carlo (or exact weighted) averaging over an
//! ensemble gives the expected signature `𝔖`, its tensor logarithm the
//! signature cumulant `κ`, and the sum of squared standardized cross
//! cumulants the independence contrast: the contrast vanishes exactly iff
//! the coordinate processes are mutually independent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{TensorSeries, Word};
use crate::error::{Error, Result};

/// A `d`-dimensional path sampled on a strictly increasing time grid,
/// interpreted piecewise-linearly. Times are affinely normalized to `[0,1]`
/// at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    d: usize,
    times: Vec<f64>,
    /// Row-major values: `values[k*d..(k+1)*d]` is the point at `times[k]`.
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(mut times: Vec<f64>, values: Vec<f64>, d: usize) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::PathTooShort(times.len()));
        }
        if values.len() != times.len() * d || d == 0 {
            return Err(Error::GridMismatch);
        }
        for k in 1..times.len() {
            if times[k] <= times[k - 1] {
                return Err(Error::invalid("times", "must be strictly increasing"));
            }
        }
        let t0 = times[0];
        let span = times[times.len() - 1] - t0;
        for t in times.iter_mut() {
            *t = (*t - t0) / span;
        }
        // pin the endpoints exactly
        let n = times.len();
        times[0] = 0.0;
        times[n - 1] = 1.0;
        Ok(SamplePath { d, times, values })
    }

    /// Builds a path from one point per time.
    pub fn from_points(times: Vec<f64>, points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map(|p| p.len()).unwrap_or(0);
        let mut values = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.len() != d {
                return Err(Error::GridMismatch);
            }
            values.extend_from_slice(p);
        }
        SamplePath::new(times, values, d)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn n_points(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The point at grid index `k`.
    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.d..(k + 1) * self.d]
    }

    /// Applies `f` to every grid point, keeping the grid.
    pub fn map_points<F>(&self, mut f: F) -> Result<SamplePath>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let mut values = vec![0.0; self.values.len()];
        for k in 0..self.n_points() {
            let (src, dst) = (self.point(k), &mut values[k * self.d..(k + 1) * self.d]);
            f(src, dst)?;
        }
        Ok(SamplePath {
            d: self.d,
            times: self.times.clone(),
            values,
        })
    }

    /// The time-reversed path on the mirrored grid.
    pub fn reversed(&self) -> SamplePath {
        let n = self.n_points();
        let times = self.times.iter().rev().map(|t| 1.0 - t).collect();
        let mut values = Vec::with_capacity(self.values.len());
        for k in (0..n).rev() {
            values.extend_from_slice(self.point(k));
        }
        SamplePath {
            d: self.d,
            times,
            values,
        }
    }

    /// Truncated signature via Chen's relation: the concatenation product of
    /// the segment exponentials.
    pub fn signature(&self, depth: usize) -> TensorSeries {
        let mut sig = TensorSeries::unit(self.d, depth);
        let mut increment = vec![0.0; self.d];
        for k in 1..self.n_points() {
            let prev = self.point(k - 1);
            let cur = self.point(k);
            let mut moved = false;
            for i in 0..self.d {
                increment[i] = cur[i] - prev[i];
                moved |= increment[i] != 0.0;
            }
            if !moved {
                continue;
            }
            let seg = TensorSeries::segment_exp(self.d, depth, &increment);
            sig = sig
                .concat_product(&seg)
                .expect("segment series shares d and depth");
        }
        sig
    }
}

/// Truncated signature of a sample path.
pub fn path_signature(path: &SamplePath, depth: usize) -> TensorSeries {
    path.signature(depth)
}

/// N sampled paths on a common grid; the data carrier for sources, mixtures
/// and estimates. Optional per-path probability weights turn Monte-Carlo
/// averaging into exact expectation over a finite-support law.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    d: usize,
    paths: Vec<SamplePath>,
    weights: Option<Vec<f64>>,
    pub label: String,
    pub seed: Option<u64>,
}

impl PathEnsemble {
    pub fn new(paths: Vec<SamplePath>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let d = paths[0].dimension();
        let n_points = paths[0].n_points();
        if paths
            .iter()
            .any(|p| p.dimension() != d || p.n_points() != n_points)
        {
            return Err(Error::GridMismatch);
        }
        Ok(PathEnsemble {
            d,
            paths,
            weights: None,
            label: String::new(),
            seed: None,
        })
    }

    /// Exact-enumeration mode: per-path probability weights.
    pub fn weighted(paths: Vec<SamplePath>, weights: Vec<f64>) -> Result<Self> {
        let mut e = PathEnsemble::new(paths)?;
        if weights.len() != e.paths.len() {
            return Err(Error::invalid("weights", "one weight per path"));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid("weights", "must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("weights", format!("must sum to 1, got {total}")));
        }
        e.weights = Some(weights);
        Ok(e)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[SamplePath] {
        &self.paths
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Applies `f` to every path, keeping weights and metadata.
    pub fn map_paths<F>(&self, f: F) -> Result<PathEnsemble>
    where
        F: Fn(usize, &SamplePath) -> Result<SamplePath>,
    {
        let paths = self
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| f(i, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(PathEnsemble {
            d: self.d,
            paths,
            weights: self.weights.clone(),
            label: self.label.clone(),
            seed: self.seed,
        })
    }

    /// Keeps only the paths at `indices` and drops weights (used for
    /// Monte-Carlo subsampling; weighted ensembles are never subsampled).
    pub fn subsample(&self, indices: &[usize]) -> Result<PathEnsemble> {
        let paths = indices
            .iter()
            .map(|&i| {
                self.paths
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid("indices", "path index out of range"))
            })
            .collect::<Result<Vec<_>>>()?;
        PathEnsemble::new(paths)
    }
}

/// Monte-Carlo (or exactly weighted) mean of the per-path signatures.
///
/// Per-path signatures are computed in parallel; the reduction runs in a
/// fixed path order so results are identical regardless of thread count.
pub fn expected_signature(ensemble: &PathEnsemble, depth: usize) -> Result<TensorSeries> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let sigs: Vec<TensorSeries> = ensemble
        .paths()
        .par_iter()
        .map(|p| p.signature(depth))
        .collect();
    let d = ensemble.dimension();
    let mut acc = TensorSeries::zeros(d, depth);
    let mut total_weight = 0.0;
    for (i, sig) in sigs.iter().enumerate() {
        let w = ensemble.weights().map_or(1.0, |ws| ws[i]);
        total_weight += w;
        acc = acc.add(&sig.scale(w))?;
    }
    Ok(acc.scale(1.0 / total_weight))
}

/// Signature cumulant `κ = log 𝔖` of the ensemble's law.
pub fn signature_cumulants(ensemble: &PathEnsemble, depth: usize) -> Result<TensorSeries> {
    expected_signature(ensemble, depth)?.log()
}

/// Divides every coefficient by `Π_ν κ_νν^{η_ν/2}`, where `η_ν` counts the
/// occurrences of letter `ν`; the diagonal second-level words normalize to 1.
///
/// Errors with [`Error::DegenerateNormalization`] when some `κ_νν <= eps`,
/// signalling a coordinate with vanishing increment variance.
pub fn standardized_cumulants(cumulants: &TensorSeries, eps: f64) -> Result<TensorSeries> {
    let d = cumulants.dimension();
    if cumulants.depth() < 2 {
        return Err(Error::invalid("depth", "standardization needs depth >= 2"));
    }
    let mut sqrt_diag = vec![0.0; d];
    for nu in 0..d {
        let l = (nu + 1) as u8;
        let value = cumulants.coeff(&Word::from_letters(&[l, l]));
        if !(value > eps) {
            return Err(Error::DegenerateNormalization {
                coord: nu + 1,
                value,
                eps,
            });
        }
        sqrt_diag[nu] = value.sqrt();
    }
    let mut out = cumulants.clone();
    for m in 1..=cumulants.depth() {
        let block = out.level_mut(m);
        for (i, c) in block.iter_mut().enumerate() {
            let word = Word::from_level_index(d, m, i);
            let mut divisor = 1.0;
            for &l in word.letters() {
                divisor *= sqrt_diag[l as usize - 1];
            }
            *c /= divisor;
        }
    }
    Ok(out)
}

/// The cross-index set `∪_{k=2}^d W_k` truncated to words of length `<= mu`:
/// shuffles of a nonempty word over `{1..k-1}` with a nonempty run of `k`s.
/// Equivalently, all words of length 2..=mu that use at least two distinct
/// letters. Returned sorted by (length, lexicographic), without duplicates.
pub fn cross_index_set(d: usize, mu: usize) -> Result<Vec<Word>> {
    if d < 2 {
        return Err(Error::invalid("d", "cross cumulants need d >= 2"));
    }
    if mu < 2 {
        return Err(Error::invalid("mu", "cross words have length >= 2"));
    }
    let mut out = Vec::new();
    for m in 2..=mu {
        for idx in 0..d.pow(m as u32) {
            let word = Word::from_level_index(d, m, idx);
            let first = word.letters()[0];
            if word.letters().iter().any(|&l| l != first) {
                out.push(word);
            }
        }
    }
    Ok(out)
}

/// Options for contrast evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContrastOptions {
    /// Center each coordinate and scale it to unit amplitude (over the whole
    /// ensemble) before computing signatures. Exactly neutral for the
    /// contrast value, but keeps coefficients well conditioned.
    pub normalize: bool,
    /// Threshold below which a diagonal cumulant counts as degenerate.
    pub eps_norm: f64,
}

impl Default for ContrastOptions {
    fn default() -> Self {
        ContrastOptions {
            normalize: true,
            eps_norm: 1e-12,
        }
    }
}

/// Centers each coordinate at its midrange and scales it to amplitude 1
/// across the whole ensemble. Coordinates with zero range are only centered.
pub fn normalize_unit_amplitude(ensemble: &PathEnsemble) -> PathEnsemble {
    let d = ensemble.dimension();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in ensemble.paths() {
        for k in 0..p.n_points() {
            for (i, &x) in p.point(k).iter().enumerate() {
                lo[i] = lo[i].min(x);
                hi[i] = hi[i].max(x);
            }
        }
    }
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let scale: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| {
            let half = 0.5 * (b - a);
            if half > 0.0 {
                1.0 / half
            } else {
                1.0
            }
        })
        .collect();
    ensemble
        .map_paths(|_, p| {
            p.map_points(|src, dst| {
                for i in 0..d {
                    dst[i] = (src[i] - center[i]) * scale[i];
                }
                Ok(())
            })
        })
        .expect("affine map cannot fail")
}

/// One evaluated contrast: the total and the squared cross term per pairing,
/// keyed by the canonical word `u·(k,...,k)` (the terms sum to the contrast).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContrastReport {
    pub depth: usize,
    pub mu: usize,
    pub contrast: f64,
    pub terms: Vec<(String, f64)>,
}

/// The cross pairings `(u, k, m)` behind the contrast: `u` a nonempty word
/// over `{1..k-1}`, paired against the run `(k,...,k)` of length `m`, with
/// `|u| + m <= mu`. Each pairing evaluates the standardized cumulant series
/// against the shuffle polynomial `u ⧢ (k,...,k)`.
fn cross_pairings(d: usize, mu: usize) -> Result<Vec<(Word, Word)>> {
    if d < 2 {
        return Err(Error::invalid("d", "cross cumulants need d >= 2"));
    }
    if mu < 2 {
        return Err(Error::invalid("mu", "cross words have length >= 2"));
    }
    let mut out = Vec::new();
    for k in 2..=d {
        for len_u in 1..mu {
            for len_run in 1..=(mu - len_u) {
                let run = Word::from_letters(&vec![k as u8; len_run]);
                let base = k - 1;
                for code in 0..base.pow(len_u as u32) {
                    let mut letters = Vec::with_capacity(len_u);
                    let mut c = code;
                    for _ in 0..len_u {
                        letters.push((c % base + 1) as u8);
                        c /= base;
                    }
                    out.push((Word::from_letters(&letters), run.clone()));
                }
            }
        }
    }
    Ok(out)
}

/// Independence contrast: for every cross pairing of a nonempty word `u`
/// over `{1..k-1}` with a run of `k`s (total length `<= mu`, `k = 2..d`),
/// the standardized cumulant series is paired against the shuffle polynomial
/// `u ⧢ (k,...,k)` — i.e. the coefficients over all interleavings are summed
/// with multiplicity — and the squared pairings are added up.
///
/// Every pairing vanishes exactly when the coordinate processes are mutually
/// independent (the unshuffle coproduct is an algebra morphism for the
/// concatenation product, so it commutes with the tensor logarithm and the
/// expected signature of a product law splits the pairing into a product of
/// marginal terms, one of which is an empty-word cumulant, hence zero).
/// Note the pairing must be evaluated on the shuffle *sums*: individual
/// cross-word cumulants such as `κ_1122` do not vanish under independence.
pub fn contrast_ic(
    ensemble: &PathEnsemble,
    depth: usize,
    mu: usize,
    options: &ContrastOptions,
) -> Result<f64> {
    Ok(contrast_report(ensemble, depth, mu, options)?.contrast)
}

/// Like [`contrast_ic`], also returning the per-pairing contributions.
pub fn contrast_report(
    ensemble: &PathEnsemble,
    depth: usize,
    mu: usize,
    options: &ContrastOptions,
) -> Result<ContrastReport> {
    if mu > depth {
        return Err(Error::invalid("mu", "must satisfy mu <= depth"));
    }
    let d = ensemble.dimension();
    let pairings = cross_pairings(d, mu)?;
    let data;
    let source = if options.normalize {
        data = normalize_unit_amplitude(ensemble);
        &data
    } else {
        ensemble
    };
    let cumulants = signature_cumulants(source, depth)?;
    let standardized = standardized_cumulants(&cumulants, options.eps_norm)?;
    let mut contrast = 0.0;
    let mut terms = Vec::with_capacity(pairings.len());
    for (u, run) in &pairings {
        let mut paired = 0.0;
        for w in crate::algebra::shuffle(u, run) {
            paired += standardized.coeff(&w);
        }
        let sq = paired * paired;
        contrast += sq;
        terms.push((u.concat(run).dotted(), sq));
    }
    Ok(ContrastReport {
        depth,
        mu,
        contrast,
        terms,
    })
}

/// Joint cumulant of the coordinates `idx` (0-based, with repetition) of a
/// finite-support law, via the moment–cumulant recursion
/// `m(S) = Σ_{B ∋ s₀} κ(B)·m(S∖B)` over position subsets.
pub fn classical_cumulant(points: &[Vec<f64>], weights: &[f64], idx: &[usize]) -> f64 {
    let n = idx.len();
    assert!(n >= 1 && n <= 24, "cumulant order out of range");
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // moments of every position subset
    let mut moments = vec![0.0f64; (full as usize) + 1];
    for (a, w) in points.iter().zip(weights) {
        for mask in 1..=full {
            let mut prod = *w;
            let mut m = mask;
            while m != 0 {
                let p = m.trailing_zeros() as usize;
                prod *= a[idx[p]];
                m &= m - 1;
            }
            moments[mask as usize] += prod;
        }
    }
    let mut kappa = vec![0.0f64; (full as usize) + 1];
    for mask in 1..=full {
        let p0 = 1u32 << mask.trailing_zeros();
        let mut value = moments[mask as usize];
        // proper submasks containing the distinguished position p0
        let rest = mask & !p0;
        let mut sub = rest;
        loop {
            sub = sub.wrapping_sub(1) & rest;
            let b = sub | p0;
            if b != mask {
                value -= kappa[b as usize] * moments[(mask & !b) as usize];
            }
            if sub == 0 {
                break;
            }
        }
        kappa[mask as usize] = value;
    }
    kappa[full as usize]
}

/// Classical independence contrast of a finite-support law: the sum of
/// squared standardized cross-cumulants over index words `u·v` with `u` a
/// nonempty word over `{1..k-1}` and `v` a nonempty run of `k`s, for
/// `k = 2..d`, up to total order `r`.
pub fn classical_contrast(points: &[Vec<f64>], weights: &[f64], r: usize) -> Result<f64> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::invalid("atoms", "need matching points and weights"));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::invalid("weights", "must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("weights", format!("must sum to 1, got {total}")));
    }
    if r < 2 {
        return Err(Error::invalid("r", "cumulant order must be >= 2"));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("atoms", "points must share a dimension"));
    }
    let eps = 1e-12;
    let mut sqrt_var = vec![0.0; d];
    for nu in 0..d {
        let var = classical_cumulant(points, weights, &[nu, nu]);
        if !(var > eps) {
            return Err(Error::DegenerateNormalization {
                coord: nu + 1,
                value: var,
                eps,
            });
        }
        sqrt_var[nu] = var.sqrt();
    }
    let mut contrast = 0.0;
    for word in classical_cross_words(d, r) {
        let idx: Vec<usize> = word.iter().map(|&l| l - 1).collect();
        let kappa = classical_cumulant(points, weights, &idx);
        let mut divisor = 1.0;
        for &i in &idx {
            divisor *= sqrt_var[i];
        }
        let standardized = kappa / divisor;
        contrast += standardized * standardized;
    }
    Ok(contrast)
}

/// Index words `u·v`, `u ∈ {1..k-1}⁺`, `v = (k,...,k)`, `k = 2..d`,
/// of total length 2..=r (1-based letters).
fn classical_cross_words(d: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 2..=d {
        for len_u in 1..r {
            for len_v in 1..=(r - len_u) {
                let base = k - 1; // alphabet size of u
                for code in 0..base.pow(len_u as u32) {
                    let mut word = Vec::with_capacity(len_u + len_v);
                    let mut c = code;
                    for _ in 0..len_u {
                        word.push(c % base + 1);
                        c /= base;
                    }
                    word.extend(std::iter::repeat(k).take(len_v));
                    out.push(word);
                }
            }
        }
    }
    out
}
