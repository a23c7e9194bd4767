//! Truncated free algebra over the alphabet `{1, ..., d}`.
//!
//! A [`TensorSeries`] is a formal power series `Σ_w c_w · w` over words `w`
//! of length at most `depth`, stored as dense per-level coefficient blocks
//! (level `m` holds `d^m` reals in lexicographic word order). Signatures,
//! expected signatures and signature cumulants all live in this space; the
//! two products of interest are word concatenation (extended bilinearly)
//! and the shuffle product on words.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A word over the alphabet `{1, ..., d}`; the empty word has length 0.
///
/// Letters are stored 1-based. A `Word` does not carry the alphabet size;
/// operations that need it validate letters against their own `d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from 1-based letters.
    pub fn from_letters(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of occurrences of `letter` in the word.
    pub fn letter_count(&self, letter: u8) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    /// Word concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Position of the word within its level block for alphabet size `d`
    /// (lexicographic order).
    pub fn level_index(&self, d: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &l| acc * d + (l as usize - 1))
    }

    /// Inverse of [`Word::level_index`]: the `index`-th word of length `len`.
    pub fn from_level_index(d: usize, len: usize, mut index: usize) -> Word {
        let mut letters = vec![0u8; len];
        for k in (0..len).rev() {
            letters[k] = (index % d) as u8 + 1;
            index /= d;
        }
        Word(letters)
    }

    /// Parses the dotted key format used in JSON maps ("" is the empty word).
    pub fn parse_dotted(s: &str) -> Result<Word> {
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for part in s.split('.') {
            let l: u8 = part
                .parse()
                .map_err(|_| Error::invalid("word", format!("bad letter `{part}`")))?;
            if l == 0 {
                return Err(Error::invalid("word", "letters are 1-based"));
            }
            letters.push(l);
        }
        Ok(Word(letters))
    }

    /// Dotted key format: letters joined by dots, empty string for the empty word.
    pub fn dotted(&self) -> String {
        self.0
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.dotted())
    }
}

/// All order-preserving interleavings of `u` and `v`, with multiplicity.
///
/// The result has exactly `C(|u|+|v|, |u|)` entries counted as a multiset;
/// repeated words appear repeatedly.
pub fn shuffle(u: &Word, v: &Word) -> Vec<Word> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(u.len() + v.len());
    shuffle_rec(u.letters(), v.letters(), &mut prefix, &mut out);
    out
}

fn shuffle_rec(u: &[u8], v: &[u8], prefix: &mut Vec<u8>, out: &mut Vec<Word>) {
    if u.is_empty() && v.is_empty() {
        out.push(Word(prefix.clone()));
        return;
    }
    if let Some((&first, rest)) = u.split_first() {
        prefix.push(first);
        shuffle_rec(rest, v, prefix, out);
        prefix.pop();
    }
    if let Some((&first, rest)) = v.split_first() {
        prefix.push(first);
        shuffle_rec(u, rest, prefix, out);
        prefix.pop();
    }
}

/// A truncated formal power series over words of length `<= depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSeries {
    d: usize,
    depth: usize,
    /// `levels[m]` holds the `d^m` coefficients of the length-`m` words.
    levels: Vec<Vec<f64>>,
}

impl TensorSeries {
    /// The zero series.
    pub fn zeros(d: usize, depth: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        let levels = (0..=depth).map(|m| vec![0.0; d.pow(m as u32)]).collect();
        TensorSeries { d, depth, levels }
    }

    /// The unit element `ε` (empty-word coefficient 1).
    pub fn unit(d: usize, depth: usize) -> Self {
        let mut s = Self::zeros(d, depth);
        s.levels[0][0] = 1.0;
        s
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, m: usize) -> &[f64] {
        &self.levels[m]
    }

    pub fn level_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.levels[m]
    }

    /// Coefficient of `word`; words beyond the truncation depth read as 0.
    pub fn coeff(&self, word: &Word) -> f64 {
        if word.len() > self.depth {
            return 0.0;
        }
        self.levels[word.len()][word.level_index(self.d)]
    }

    pub fn set_coeff(&mut self, word: &Word, value: f64) {
        assert!(
            word.len() <= self.depth,
            "word length {} exceeds depth {}",
            word.len(),
            self.depth
        );
        let idx = word.level_index(self.d);
        self.levels[word.len()][idx] = value;
    }

    /// Iterates `(word, coefficient)` in level order, lexicographic within level.
    pub fn iter_coeffs(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        self.levels.iter().enumerate().flat_map(move |(m, block)| {
            block
                .iter()
                .enumerate()
                .map(move |(i, &c)| (Word::from_level_index(self.d, m, i), c))
        })
    }

    pub fn empty_coeff(&self) -> f64 {
        self.levels[0][0]
    }

    fn check_compatible(&self, other: &TensorSeries) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        if self.depth != other.depth {
            return Err(Error::DepthMismatch {
                left: self.depth,
                right: other.depth,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &TensorSeries) -> Result<TensorSeries> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (lo, lr) in out.levels.iter_mut().zip(other.levels.iter()) {
            for (a, b) in lo.iter_mut().zip(lr.iter()) {
                *a += b;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TensorSeries) -> Result<TensorSeries> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (lo, lr) in out.levels.iter_mut().zip(other.levels.iter()) {
            for (a, b) in lo.iter_mut().zip(lr.iter()) {
                *a -= b;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> TensorSeries {
        let mut out = self.clone();
        for block in out.levels.iter_mut() {
            for c in block.iter_mut() {
                *c *= factor;
            }
        }
        out
    }

    /// Largest absolute coefficient difference to `other`.
    pub fn max_abs_diff(&self, other: &TensorSeries) -> Result<f64> {
        self.check_compatible(other)?;
        let mut m: f64 = 0.0;
        for (lo, lr) in self.levels.iter().zip(other.levels.iter()) {
            for (a, b) in lo.iter().zip(lr.iter()) {
                m = m.max((a - b).abs());
            }
        }
        Ok(m)
    }

    /// Concatenation product, truncated at the common depth: the coefficient
    /// of `w` is the sum of `a(u)·b(v)` over all splittings `w = u·v`.
    pub fn concat_product(&self, other: &TensorSeries) -> Result<TensorSeries> {
        self.check_compatible(other)?;
        let d = self.d;
        let mut out = TensorSeries::zeros(d, self.depth);
        for m in 0..=self.depth {
            let target = &mut out.levels[m];
            for p in 0..=m {
                let q = m - p;
                let left = &self.levels[p];
                let right = &other.levels[q];
                let dq = d.pow(q as u32);
                for (i, &a) in left.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let base = i * dq;
                    for (j, &b) in right.iter().enumerate() {
                        target[base + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Σ_{m=0}^{depth} a^{∗m} / m!` for a series with zero empty-word
    /// coefficient; the result is group-like-normalized.
    pub fn exp(&self) -> Result<TensorSeries> {
        let c0 = self.empty_coeff();
        if c0 != 0.0 {
            return Err(Error::NonzeroConstantTerm(c0));
        }
        let mut result = TensorSeries::unit(self.d, self.depth);
        let mut term = TensorSeries::unit(self.d, self.depth);
        for m in 1..=self.depth {
            term = term.concat_product(self)?.scale(1.0 / m as f64);
            result = result.add(&term)?;
        }
        Ok(result)
    }

    /// `Σ_{m=1}^{depth} ((-1)^{m-1}/m) (a - ε)^{∗m}` for a series with
    /// empty-word coefficient 1; the result has empty-word coefficient 0.
    pub fn log(&self) -> Result<TensorSeries> {
        let c0 = self.empty_coeff();
        if c0 != 1.0 {
            return Err(Error::ConstantTermNotOne(c0));
        }
        let nilpotent = self.sub(&TensorSeries::unit(self.d, self.depth))?;
        let mut result = TensorSeries::zeros(self.d, self.depth);
        let mut power = TensorSeries::unit(self.d, self.depth);
        for m in 1..=self.depth {
            power = power.concat_product(&nilpotent)?;
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            result = result.add(&power.scale(sign / m as f64))?;
        }
        Ok(result)
    }

    /// Signature of a single linear segment with the given increment:
    /// the concatenation exponential of a level-1 series, computed directly
    /// (the coefficient of `(i_1, ..., i_m)` is `Δ_{i_1}···Δ_{i_m}/m!`).
    pub fn segment_exp(d: usize, depth: usize, increment: &[f64]) -> TensorSeries {
        assert_eq!(increment.len(), d);
        let mut out = TensorSeries::unit(d, depth);
        for m in 1..=depth {
            // level m = (level m-1) ⊗ Δ / m; the previous level already
            // carries 1/(m-1)!, so dividing by m yields 1/m!.
            let inv_m = 1.0 / m as f64;
            let (head, tail) = out.levels.split_at_mut(m);
            let prev = &head[m - 1];
            let cur = &mut tail[0];
            for (i, &p) in prev.iter().enumerate() {
                for (j, &dx) in increment.iter().enumerate() {
                    cur[i * d + j] = p * dx * inv_m;
                }
            }
        }
        out
    }

    /// Serializes to the interchange JSON object
    /// `{"d":…, "depth":…, "coeffs":{"1.2":…}}` with zero coefficients omitted.
    pub fn to_json(&self) -> serde_json::Value {
        let mut coeffs = BTreeMap::new();
        for (w, c) in self.iter_coeffs() {
            if c != 0.0 {
                coeffs.insert(w.dotted(), c);
            }
        }
        serde_json::json!({
            "d": self.d,
            "depth": self.depth,
            "coeffs": coeffs,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<TensorSeries> {
        #[derive(Deserialize)]
        struct Repr {
            d: usize,
            depth: usize,
            coeffs: BTreeMap<String, f64>,
        }
        let repr: Repr = serde_json::from_value(value.clone())
            .map_err(|e| Error::invalid("series", e.to_string()))?;
        if repr.d == 0 {
            return Err(Error::invalid("d", "must be positive"));
        }
        let mut s = TensorSeries::zeros(repr.d, repr.depth);
        for (key, c) in repr.coeffs {
            let w = Word::parse_dotted(&key)?;
            if w.len() > repr.depth {
                return Err(Error::invalid("coeffs", format!("word `{key}` exceeds depth")));
            }
            if w.letters().iter().any(|&l| l as usize > repr.d) {
                return Err(Error::invalid("coeffs", format!("word `{key}` uses letters beyond d")));
            }
            s.set_coeff(&w, c);
        }
        Ok(s)
    }
}

// Serialize via the interchange JSON object.
impl Serialize for TensorSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TensorSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        TensorSeries::from_json(&value).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[u8]) -> Word {
        Word::from_letters(letters)
    }

    #[test]
    fn shuffle_single_letters() {
        let out = shuffle(&w(&[1]), &w(&[2]));
        assert_eq!(out.len(), 2);
        assert!(out.contains(&w(&[1, 2])));
        assert!(out.contains(&w(&[2, 1])));
    }

    #[test]
    fn shuffle_with_multiplicity() {
        // (1,1) ⧢ (1) = 3 · (1,1,1)
        let out = shuffle(&w(&[1, 1]), &w(&[1]));
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|x| x == &w(&[1, 1, 1])));
    }

    #[test]
    fn shuffle_three_letters() {
        let out = shuffle(&w(&[1, 2]), &w(&[3]));
        let expected = [w(&[1, 2, 3]), w(&[1, 3, 2]), w(&[3, 1, 2])];
        assert_eq!(out.len(), 3);
        for e in &expected {
            assert!(out.contains(e), "missing {e}");
        }
    }

    #[test]
    fn concat_distributes() {
        // (ε + "1") ∗ (ε + "2") = ε + "1" + "2" + "12"
        let mut a = TensorSeries::unit(2, 2);
        a.set_coeff(&w(&[1]), 1.0);
        let mut b = TensorSeries::unit(2, 2);
        b.set_coeff(&w(&[2]), 1.0);
        let p = a.concat_product(&b).unwrap();
        assert_eq!(p.coeff(&Word::empty()), 1.0);
        assert_eq!(p.coeff(&w(&[1])), 1.0);
        assert_eq!(p.coeff(&w(&[2])), 1.0);
        assert_eq!(p.coeff(&w(&[1, 2])), 1.0);
        assert_eq!(p.coeff(&w(&[2, 1])), 0.0);
    }

    #[test]
    fn concat_unit_element() {
        let mut a = TensorSeries::zeros(2, 3);
        a.set_coeff(&w(&[1]), 0.5);
        a.set_coeff(&w(&[2, 1]), -1.25);
        a.set_coeff(&Word::empty(), 2.0);
        let unit = TensorSeries::unit(2, 3);
        assert_eq!(a.concat_product(&unit).unwrap(), a);
        assert_eq!(unit.concat_product(&a).unwrap(), a);
    }

    #[test]
    fn concat_single_letters() {
        let mut a = TensorSeries::zeros(1, 2);
        a.set_coeff(&w(&[1]), 1.0);
        let p = a.concat_product(&a).unwrap();
        assert_eq!(p.coeff(&w(&[1, 1])), 1.0);
        assert_eq!(p.coeff(&w(&[1])), 0.0);
    }

    #[test]
    fn concat_rejects_mismatch() {
        let a = TensorSeries::zeros(2, 3);
        let b = TensorSeries::zeros(3, 3);
        assert!(matches!(
            a.concat_product(&b),
            Err(Error::DimensionMismatch { .. })
        ));
        let c = TensorSeries::zeros(2, 4);
        assert!(matches!(a.concat_product(&c), Err(Error::DepthMismatch { .. })));
    }

    #[test]
    fn exp_of_zero_is_unit() {
        let z = TensorSeries::zeros(3, 4);
        assert_eq!(z.exp().unwrap(), TensorSeries::unit(3, 4));
    }

    #[test]
    fn exp_scalar_levels() {
        // exp(c·"1") = ε + c·"1" + c²/2·"11" + c³/6·"111" for d=1, M=3
        let c = 0.7;
        let mut a = TensorSeries::zeros(1, 3);
        a.set_coeff(&w(&[1]), c);
        let e = a.exp().unwrap();
        assert!((e.coeff(&Word::empty()) - 1.0).abs() < 1e-15);
        assert!((e.coeff(&w(&[1])) - c).abs() < 1e-15);
        assert!((e.coeff(&w(&[1, 1])) - c * c / 2.0).abs() < 1e-15);
        assert!((e.coeff(&w(&[1, 1, 1])) - c * c * c / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exp_level_two_cross_terms() {
        // exp(2·"1" + 3·"2") at level 2: Δ_iΔ_j/2 with Δ=(2,3)
        let mut a = TensorSeries::zeros(2, 2);
        a.set_coeff(&w(&[1]), 2.0);
        a.set_coeff(&w(&[2]), 3.0);
        let e = a.exp().unwrap();
        assert!((e.coeff(&w(&[1, 1])) - 2.0).abs() < 1e-15);
        assert!((e.coeff(&w(&[1, 2])) - 3.0).abs() < 1e-15);
        assert!((e.coeff(&w(&[2, 1])) - 3.0).abs() < 1e-15);
        assert!((e.coeff(&w(&[2, 2])) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn exp_rejects_nonzero_constant() {
        let a = TensorSeries::unit(2, 2);
        assert!(matches!(a.exp(), Err(Error::NonzeroConstantTerm(_))));
    }

    #[test]
    fn log_of_unit_is_zero() {
        let u = TensorSeries::unit(2, 4);
        assert_eq!(u.log().unwrap(), TensorSeries::zeros(2, 4));
    }

    #[test]
    fn log_rejects_bad_constant() {
        let a = TensorSeries::zeros(2, 2);
        assert!(matches!(a.log(), Err(Error::ConstantTermNotOne(_))));
    }

    #[test]
    fn log_exp_roundtrip_scalar() {
        let c = -1.3;
        let mut a = TensorSeries::zeros(1, 5);
        a.set_coeff(&w(&[1]), c);
        let back = a.exp().unwrap().log().unwrap();
        assert!(back.max_abs_diff(&a).unwrap() < 1e-12);
    }

    #[test]
    fn log_level_two_correction() {
        // series with σ_1 = 0, σ_11 = 1/2 → κ_1 = 0, κ_11 = 1/2
        let mut s = TensorSeries::unit(1, 2);
        s.set_coeff(&w(&[1, 1]), 0.5);
        let k = s.log().unwrap();
        assert_eq!(k.coeff(&w(&[1])), 0.0);
        assert!((k.coeff(&w(&[1, 1])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn segment_exp_matches_generic_exp() {
        let inc = [0.3, -1.1, 2.0];
        let mut lvl1 = TensorSeries::zeros(3, 5);
        for (i, &x) in inc.iter().enumerate() {
            lvl1.set_coeff(&w(&[(i + 1) as u8]), x);
        }
        let generic = lvl1.exp().unwrap();
        let direct = TensorSeries::segment_exp(3, 5, &inc);
        assert!(generic.max_abs_diff(&direct).unwrap() < 1e-14);
    }

    #[test]
    fn json_roundtrip() {
        let mut a = TensorSeries::zeros(2, 3);
        a.set_coeff(&Word::empty(), 1.0);
        a.set_coeff(&w(&[1, 2]), -0.25);
        a.set_coeff(&w(&[2, 1, 1]), 3.5);
        let j = a.to_json();
        let b = TensorSeries::from_json(&j).unwrap();
        assert_eq!(a, b);
        assert_eq!(j["coeffs"]["1.2"], serde_json::json!(-0.25));
        assert_eq!(j["coeffs"][""], serde_json::json!(1.0));
    }

    #[test]
    fn word_index_roundtrip() {
        let d: usize = 3;
        for len in 0..4 {
            for idx in 0..d.pow(len as u32) {
                let word = Word::from_level_index(d, len, idx);
                assert_eq!(word.level_index(d), idx);
                assert_eq!(word.len(), len);
            }
        }
    }
}
