//! Free monoid words, multiwords, comparability and the index set Λ.

use std::cmp::Ordering;
use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};

/// A word in the free monoid on `n` generators `g_1..g_n`; the empty word is `g_0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    n: usize,
    letters: Vec<usize>,
}

impl Word {
    pub fn new(n: usize, letters: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("alphabet size must be >= 1".into()));
        }
        if let Some(&bad) = letters.iter().find(|&&j| j == 0 || j > n) {
            return Err(Error::IndexOutOfRange(format!(
                "generator g{bad} outside g1..g{n}"
            )));
        }
        Ok(Word { n, letters })
    }

    pub fn identity(n: usize) -> Self {
        Word {
            n,
            letters: Vec::new(),
        }
    }

    pub fn generator(n: usize, j: usize) -> Result<Self> {
        Word::new(n, vec![j])
    }

    pub fn alphabet(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn reversed(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { n: self.n, letters }
    }

    pub fn concat(&self, other: &Word) -> Word {
        debug_assert_eq!(self.n, other.n);
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { n: self.n, letters }
    }

    /// `self = prefix · rest` → `Some(rest)`.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.letters.strip_prefix(prefix.letters.as_slice()).map(|r| Word {
            n: self.n,
            letters: r.to_vec(),
        })
    }

    /// `self = rest · suffix` → `Some(rest)`.
    pub fn strip_suffix(&self, suffix: &Word) -> Option<Word> {
        self.letters.strip_suffix(suffix.letters.as_slice()).map(|r| Word {
            n: self.n,
            letters: r.to_vec(),
        })
    }

    /// Rank among words of the same length in lexicographic order.
    pub fn lex_rank(&self) -> usize {
        self.letters.iter().fold(0, |acc, &j| acc * self.n + (j - 1))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.letters.len().cmp(&other.letters.len()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "g0");
        }
        for j in &self.letters {
            write!(f, "g{j}")?;
        }
        Ok(())
    }
}

/// All words of length ≤ `max_len`, graded then lexicographic.
pub fn enumerate_words(n: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity(n)];
    let mut layer = vec![Word::identity(n)];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * n);
        for w in &layer {
            for j in 1..=n {
                let mut letters = w.letters.clone();
                letters.push(j);
                next.push(Word { n, letters });
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// An element of F⁺_{n_1} × … × F⁺_{n_k}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiWord {
    parts: Vec<Word>,
}

impl MultiWord {
    pub fn new(parts: Vec<Word>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("a multiword needs k >= 1 parts".into()));
        }
        Ok(MultiWord { parts })
    }

    pub fn identity(n: &[usize]) -> Self {
        MultiWord {
            parts: n.iter().map(|&ni| Word::identity(ni)).collect(),
        }
    }

    pub fn from_letters(n: &[usize], letters: &[Vec<usize>]) -> Result<Self> {
        if n.len() != letters.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parts given for k = {}",
                letters.len(),
                n.len()
            )));
        }
        let parts = n
            .iter()
            .zip(letters)
            .map(|(&ni, l)| Word::new(ni, l.clone()))
            .collect::<Result<Vec<_>>>()?;
        MultiWord::new(parts)
    }

    /// The word with `w` in factor `i` (0-based) and `g_0` elsewhere.
    pub fn single(n: &[usize], i: usize, w: Word) -> Result<Self> {
        if i >= n.len() || w.alphabet() != n[i] {
            return Err(Error::ShapeMismatch(format!("factor {i} for shape {n:?}")));
        }
        let mut m = MultiWord::identity(n);
        m.parts[i] = w;
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Word] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &Word {
        &self.parts[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.parts.iter().map(Word::alphabet).collect()
    }

    pub fn total_len(&self) -> usize {
        self.parts.iter().map(Word::len).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.parts.iter().all(Word::is_identity)
    }

    pub fn reverse(&self) -> MultiWord {
        MultiWord {
            parts: self.parts.iter().map(Word::reversed).collect(),
        }
    }

    /// Coordinatewise concatenation `self · other`.
    pub fn concat(&self, other: &MultiWord) -> MultiWord {
        MultiWord {
            parts: self
                .parts
                .iter()
                .zip(&other.parts)
                .map(|(a, b)| a.concat(b))
                .collect(),
        }
    }

    /// Replaces factor `i` by `g_j · w_i`.
    pub fn prepend(&self, i: usize, j: usize) -> MultiWord {
        let mut m = self.clone();
        m.parts[i].letters.insert(0, j);
        m
    }

    /// Replaces factor `i` by `w_i · g_j`.
    pub fn append(&self, i: usize, j: usize) -> MultiWord {
        let mut m = self.clone();
        m.parts[i].letters.push(j);
        m
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.parts
                .iter()
                .map(|w| Value::Array(w.letters.iter().map(|&j| Value::from(j)).collect()))
                .collect(),
        )
    }

    pub fn from_json(n: &[usize], v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Json(format!("multiword must be an array, got {v}")))?;
        let letters = arr
            .iter()
            .map(|p| {
                p.as_array()
                    .ok_or_else(|| Error::Json(format!("word must be an array, got {p}")))?
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|u| u as usize)
                            .ok_or_else(|| Error::Json(format!("bad generator {x}")))
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MultiWord::from_letters(n, &letters)
    }
}

impl fmt::Display for MultiWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

/// All multiwords with `|w_i| ≤ caps[i]`, each factor graded-lex, row-major across factors.
pub fn enumerate_box(n: &[usize], caps: &[usize]) -> Vec<MultiWord> {
    let per: Vec<Vec<Word>> = n
        .iter()
        .zip(caps)
        .map(|(&ni, &d)| enumerate_words(ni, d))
        .collect();
    let mut out = vec![Vec::<Word>::new()];
    for words in &per {
        let mut next = Vec::with_capacity(out.len() * words.len());
        for prefix in &out {
            for w in words {
                let mut p = prefix.clone();
                p.push(w.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(|parts| MultiWord { parts }).collect()
}

/// All multiwords of total length ≤ `max_total`, sorted by total length then row-major.
pub fn enumerate_total(n: &[usize], max_total: usize) -> Vec<MultiWord> {
    let caps = vec![max_total; n.len()];
    let mut all: Vec<MultiWord> = enumerate_box(n, &caps)
        .into_iter()
        .filter(|w| w.total_len() <= max_total)
        .collect();
    all.sort_by_key(|w| w.total_len());
    all
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparabilityResult {
    pub comparable: bool,
    pub c_plus: MultiWord,
    pub c_minus: MultiWord,
}

fn check_same_shape(a: &MultiWord, b: &MultiWord) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "multiwords {a} and {b} have shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Per-coordinate quotients: `(c⁺, c⁻)` for a single pair of words, or `None`.
fn compare_word(side: Side, w: &Word, v: &Word) -> Option<(Word, Word)> {
    let id = Word::identity(w.alphabet());
    if w == v {
        return Some((id.clone(), id));
    }
    match side {
        Side::Right => {
            if let Some(s) = w.strip_suffix(v) {
                return Some((s, id));
            }
            v.strip_suffix(w).map(|s| (id, s))
        }
        Side::Left => {
            if let Some(s) = w.strip_prefix(v) {
                return Some((s, id));
            }
            v.strip_prefix(w).map(|s| (id, s))
        }
    }
}

/// Comparability of `w` (the ω slot) and `v` (the γ slot).
///
/// Right: `v <_r w` iff `w = σ v` with σ nonempty, and then `c⁺ = σ`. Left uses prefixes.
pub fn compare(side: Side, w: &MultiWord, v: &MultiWord) -> Result<ComparabilityResult> {
    check_same_shape(w, v)?;
    let n = w.shape();
    let mut plus = Vec::with_capacity(n.len());
    let mut minus = Vec::with_capacity(n.len());
    for (a, b) in w.parts.iter().zip(&v.parts) {
        match compare_word(side, a, b) {
            Some((p, m)) => {
                plus.push(p);
                minus.push(m);
            }
            None => {
                return Ok(ComparabilityResult {
                    comparable: false,
                    c_plus: MultiWord::identity(&n),
                    c_minus: MultiWord::identity(&n),
                })
            }
        }
    }
    Ok(ComparabilityResult {
        comparable: true,
        c_plus: MultiWord { parts: plus },
        c_minus: MultiWord { parts: minus },
    })
}

/// Quotient pair for comparable words, `None` otherwise.
pub fn quotients(side: Side, w: &MultiWord, v: &MultiWord) -> Option<(MultiWord, MultiWord)> {
    let n = w.parts.len();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for (a, b) in w.parts.iter().zip(&v.parts) {
        let (p, m) = compare_word(side, a, b)?;
        plus.push(p);
        minus.push(m);
    }
    Some((MultiWord { parts: plus }, MultiWord { parts: minus }))
}

pub fn lambda_membership(a: &MultiWord, b: &MultiWord) -> Result<bool> {
    check_same_shape(a, b)?;
    Ok(is_lambda(a, b))
}

pub(crate) fn is_lambda(a: &MultiWord, b: &MultiWord) -> bool {
    a.parts
        .iter()
        .zip(&b.parts)
        .all(|(x, y)| x.is_identity() || y.is_identity())
}

/// Λ-pairs `(α;β)` with `|α|+|β| ≤ max_total`, in a deterministic order.
pub fn lambda_pairs(n: &[usize], max_total: usize) -> Vec<(MultiWord, MultiWord)> {
    lambda_filtered(n, &vec![max_total; n.len()], max_total)
}

/// Λ-pairs with `|α_i|, |β_i| ≤ caps[i]` in every factor.
pub fn lambda_pairs_box(n: &[usize], caps: &[usize]) -> Vec<(MultiWord, MultiWord)> {
    lambda_filtered(n, caps, usize::MAX)
}

fn lambda_filtered(n: &[usize], caps: &[usize], max_total: usize) -> Vec<(MultiWord, MultiWord)> {
    // per factor: signed words, either (w, g0) or (g0, w)
    let mut per: Vec<Vec<(Word, Word)>> = Vec::with_capacity(n.len());
    for (&ni, &cap) in n.iter().zip(caps) {
        let mut v = Vec::new();
        for w in enumerate_words(ni, cap) {
            if w.is_identity() {
                v.push((w.clone(), w));
            } else {
                v.push((w.clone(), Word::identity(ni)));
                v.push((Word::identity(ni), w));
            }
        }
        per.push(v);
    }
    let mut acc: Vec<(Vec<Word>, Vec<Word>, usize)> = vec![(Vec::new(), Vec::new(), 0)];
    for choices in &per {
        let mut next = Vec::new();
        for (a, b, len) in &acc {
            for (x, y) in choices {
                let l = len + x.len() + y.len();
                if l <= max_total {
                    let mut a2 = a.clone();
                    let mut b2 = b.clone();
                    a2.push(x.clone());
                    b2.push(y.clone());
                    next.push((a2, b2, l));
                }
            }
        }
        acc = next;
    }
    acc.sort_by_key(|(_, _, l)| *l);
    acc.into_iter()
        .map(|(a, b, _)| (MultiWord { parts: a }, MultiWord { parts: b }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mw(n: &[usize], l: &[&[usize]]) -> MultiWord {
        MultiWord::from_letters(n, &l.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn reverse_examples() {
        let w = mw(&[3], &[&[1, 2, 3]]);
        assert_eq!(w.reverse(), mw(&[3], &[&[3, 2, 1]]));
        let id = MultiWord::identity(&[2]);
        assert_eq!(id.reverse(), id);
        let w = mw(&[2, 2], &[&[1, 2], &[2]]);
        assert_eq!(w.reverse(), mw(&[2, 2], &[&[2, 1], &[2]]));
    }

    #[test]
    fn compare_examples() {
        let n = [2, 2];
        let r = compare(Side::Right, &mw(&n, &[&[1, 2], &[]]), &mw(&n, &[&[2], &[]])).unwrap();
        assert!(r.comparable);
        assert_eq!(r.c_plus, mw(&n, &[&[1], &[]]));
        assert!(r.c_minus.is_identity());

        let r = compare(Side::Right, &mw(&n, &[&[1], &[]]), &mw(&n, &[&[2], &[]])).unwrap();
        assert!(!r.comparable);

        let r = compare(Side::Left, &mw(&n, &[&[1, 2], &[]]), &mw(&n, &[&[1], &[]])).unwrap();
        assert!(r.comparable);
        assert_eq!(r.c_plus, mw(&n, &[&[2], &[]]));
        assert!(r.c_minus.is_identity());
    }

    #[test]
    fn compare_rejects_shape_mismatch() {
        let a = MultiWord::identity(&[2]);
        let b = MultiWord::identity(&[2, 1]);
        assert!(compare(Side::Left, &a, &b).is_err());
        assert!(lambda_membership(&a, &b).is_err());
    }

    #[test]
    fn lambda_examples() {
        let n = [2, 2];
        assert!(lambda_membership(&mw(&n, &[&[1], &[]]), &mw(&n, &[&[], &[2]])).unwrap());
        assert!(!lambda_membership(&mw(&n, &[&[1], &[]]), &mw(&n, &[&[1], &[]])).unwrap());
        let id = MultiWord::identity(&n);
        assert!(lambda_membership(&id, &id).unwrap());
    }

    #[test]
    fn enumeration_is_graded_lex() {
        let w = enumerate_words(2, 2);
        let s: Vec<String> = w.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["g0", "g1", "g2", "g1g1", "g1g2", "g2g1", "g2g2"]);
        for (i, x) in w.iter().enumerate().skip(3) {
            assert_eq!(3 + x.lex_rank(), i);
        }
    }

    #[test]
    fn lambda_pairs_count_single_factor() {
        // words of length m on 2 letters appear twice except the empty word
        let p = lambda_pairs(&[2], 2);
        assert_eq!(p.len(), 1 + 2 * 2 + 2 * 4);
        assert!(p.iter().all(|(a, b)| is_lambda(a, b)));
    }

    #[test]
    fn json_roundtrip() {
        let w = mw(&[2, 2], &[&[1, 2], &[]]);
        let j = w.to_json();
        assert_eq!(j.to_string(), "[[1,2],[]]");
        assert_eq!(MultiWord::from_json(&[2, 2], &j).unwrap(), w);
        assert!(MultiWord::from_json(&[2, 2], &serde_json::json!([[3], []])).is_err());
    }
}
