//! Truncated tensor products of full Fock spaces and the creation operators on them.
//!
//! Truncated creations are compressions `P_{≤d} S P_{≤d}`: adjoints are exact everywhere,
//! creations are exact off the top degree of the factor they act on.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c64, kron, CMat, CVec, C64};
use crate::words::{enumerate_box, enumerate_words, MultiWord, Side, Word};

const NONE: usize = usize::MAX;

/// Largest basis size accepted by [`FockTruncation::new`].
pub const MAX_DIM: usize = 1 << 24;

/// Dimension above which operators should be assembled sparsely.
pub const SPARSE_THRESHOLD: usize = 4096;

#[derive(Clone, Debug)]
struct FactorTable {
    words: Vec<Word>,
    offsets: Vec<usize>,
    left_child: Vec<Vec<usize>>,
    right_child: Vec<Vec<usize>>,
    // (first letter, index of the rest); letter 0 marks the empty word
    left_parent: Vec<(usize, usize)>,
    right_parent: Vec<(usize, usize)>,
}

impl FactorTable {
    fn new(n: usize, d: usize) -> Self {
        let words = enumerate_words(n, d);
        let mut offsets = vec![0usize; d + 2];
        let mut p = 1usize;
        for len in 0..=d {
            offsets[len + 1] = offsets[len] + p;
            p *= n;
        }
        let index = |w: &Word| offsets[w.len()] + w.lex_rank();
        let size = words.len();
        let mut left_child = vec![vec![NONE; size]; n];
        let mut right_child = vec![vec![NONE; size]; n];
        let mut left_parent = vec![(0, NONE); size];
        let mut right_parent = vec![(0, NONE); size];
        for (idx, w) in words.iter().enumerate() {
            debug_assert_eq!(index(w), idx);
            let l = w.letters();
            if !l.is_empty() {
                let rest = Word::new(n, l[1..].to_vec()).expect("valid letters");
                left_parent[idx] = (l[0], index(&rest));
                let init = Word::new(n, l[..l.len() - 1].to_vec()).expect("valid letters");
                right_parent[idx] = (l[l.len() - 1], index(&init));
            }
            if w.len() < d {
                for j in 1..=n {
                    let mut lj = vec![j];
                    lj.extend_from_slice(l);
                    left_child[j - 1][idx] = index(&Word::new(n, lj).expect("valid letters"));
                    let mut rj = l.to_vec();
                    rj.push(j);
                    right_child[j - 1][idx] = index(&Word::new(n, rj).expect("valid letters"));
                }
            }
        }
        FactorTable {
            words,
            offsets,
            left_child,
            right_child,
            left_parent,
            right_parent,
        }
    }

    fn size(&self) -> usize {
        self.words.len()
    }

    fn index(&self, w: &Word) -> usize {
        self.offsets[w.len()] + w.lex_rank()
    }
}

/// Descriptor of `⊗_i F²_{≤d_i}(H_{n_i})` with a deterministic basis.
#[derive(Clone, Debug)]
pub struct FockTruncation {
    n: Vec<usize>,
    degrees: Vec<usize>,
    factors: Vec<FactorTable>,
    strides: Vec<usize>,
    dim: usize,
}

impl PartialEq for FockTruncation {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.degrees == other.degrees
    }
}

impl FockTruncation {
    pub fn new(n: &[usize], degrees: &[usize]) -> Result<Self> {
        if n.is_empty() || n.len() != degrees.len() {
            return Err(Error::ShapeMismatch(format!(
                "n = {n:?} and degrees = {degrees:?} must be nonempty and of equal length"
            )));
        }
        if n.contains(&0) {
            return Err(Error::InvalidArgument("every n_i must be >= 1".into()));
        }
        let mut dim = 1usize;
        for (&ni, &d) in n.iter().zip(degrees) {
            let mut s = 0usize;
            let mut p = 1usize;
            for _ in 0..=d {
                s = s.checked_add(p).ok_or_else(too_big)?;
                p = p.checked_mul(ni).ok_or_else(too_big)?;
            }
            dim = dim.checked_mul(s).ok_or_else(too_big)?;
        }
        if dim > MAX_DIM {
            return Err(too_big());
        }
        let factors: Vec<FactorTable> = n
            .iter()
            .zip(degrees)
            .map(|(&ni, &d)| FactorTable::new(ni, d))
            .collect();
        let mut strides = vec![1usize; n.len()];
        for i in (0..n.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].size();
        }
        Ok(FockTruncation {
            n: n.to_vec(),
            degrees: degrees.to_vec(),
            factors,
            strides,
            dim,
        })
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, w: &MultiWord) -> bool {
        w.shape() == self.n
            && w
                .parts()
                .iter()
                .zip(&self.degrees)
                .all(|(p, &d)| p.len() <= d)
    }

    pub fn basis_index(&self, w: &MultiWord) -> Result<usize> {
        if w.shape() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "word {w} has shape {:?}, truncation has {:?}",
                w.shape(),
                self.n
            )));
        }
        if !self.contains(w) {
            return Err(Error::WordOutOfRange {
                word: w.to_string(),
                degrees: self.degrees.clone(),
            });
        }
        Ok(w
            .parts()
            .iter()
            .zip(&self.factors)
            .zip(&self.strides)
            .map(|((p, f), s)| f.index(p) * s)
            .sum())
    }

    pub fn word_at(&self, idx: usize) -> Result<MultiWord> {
        if idx >= self.dim {
            return Err(Error::IndexOutOfRange(format!(
                "basis index {idx} >= dimension {}",
                self.dim
            )));
        }
        let parts = (0..self.k())
            .map(|i| self.factors[i].words[self.factor_index(idx, i)].clone())
            .collect();
        MultiWord::new(parts)
    }

    /// The whole basis in index order.
    pub fn basis(&self) -> Vec<MultiWord> {
        enumerate_box(&self.n, &self.degrees)
    }

    /// Length of the factor-`i` word of basis element `idx`.
    pub fn factor_len(&self, idx: usize, i: usize) -> usize {
        self.factors[i].words[self.factor_index(idx, i)].len()
    }

    fn factor_index(&self, idx: usize, i: usize) -> usize {
        (idx / self.strides[i]) % self.factors[i].size()
    }

    /// Same alphabet sizes, degrees increased by `extra`.
    pub fn enlarged(&self, extra: &[usize]) -> Result<FockTruncation> {
        if extra.len() != self.k() {
            return Err(Error::ShapeMismatch("enlargement length".into()));
        }
        let d: Vec<usize> = self.degrees.iter().zip(extra).map(|(a, b)| a + b).collect();
        FockTruncation::new(&self.n, &d)
    }

    /// Position of each basis element of `self` inside the larger truncation `big`.
    pub fn embedding_into(&self, big: &FockTruncation) -> Result<Vec<usize>> {
        if big.n != self.n || big.degrees.iter().zip(&self.degrees).any(|(b, s)| b < s) {
            return Err(Error::ShapeMismatch(format!(
                "truncation {:?}/{:?} does not contain {:?}/{:?}",
                big.n, big.degrees, self.n, self.degrees
            )));
        }
        self.basis().iter().map(|w| big.basis_index(w)).collect()
    }

    fn check_factor(&self, i: usize, j: usize) -> Result<()> {
        if i == 0 || i > self.k() {
            return Err(Error::IndexOutOfRange(format!("factor {i} outside 1..{}", self.k())));
        }
        if j == 0 || j > self.n[i - 1] {
            return Err(Error::IndexOutOfRange(format!(
                "generator {j} outside 1..{} in factor {i}",
                self.n[i - 1]
            )));
        }
        Ok(())
    }

    /// Image basis index of `idx` under the creation or annihilation, if nonzero.
    pub(crate) fn step(&self, side: Side, i0: usize, j: usize, adjoint: bool, idx: usize) -> Option<usize> {
        let f = &self.factors[i0];
        let fi = self.factor_index(idx, i0);
        let target = if adjoint {
            let (letter, rest) = match side {
                Side::Left => f.left_parent[fi],
                Side::Right => f.right_parent[fi],
            };
            if letter == j {
                rest
            } else {
                NONE
            }
        } else {
            match side {
                Side::Left => f.left_child[j - 1][fi],
                Side::Right => f.right_child[j - 1][fi],
            }
        };
        if target == NONE {
            None
        } else {
            Some(idx + target * self.strides[i0] - fi * self.strides[i0])
        }
    }

    /// Image of basis element `idx` under `Side_a Side_b*`, if nonzero.
    pub(crate) fn word_step(&self, side: Side, a: &MultiWord, b: &MultiWord, idx: usize) -> Option<usize> {
        let mut cur = idx;
        for (i0, w) in b.parts().iter().enumerate() {
            for &j in w.letters() {
                cur = self.step(side, i0, j, true, cur)?;
            }
        }
        for (i0, w) in a.parts().iter().enumerate().rev() {
            for &j in w.letters().iter().rev() {
                cur = self.step(side, i0, j, false, cur)?;
            }
        }
        Some(cur)
    }

    /// Image of basis element `idx` under `Side_a* Side_b`, if nonzero.
    pub(crate) fn co_word_step(&self, side: Side, a: &MultiWord, b: &MultiWord, idx: usize) -> Option<usize> {
        let mut cur = idx;
        for (i0, w) in b.parts().iter().enumerate().rev() {
            for &j in w.letters().iter().rev() {
                cur = self.step(side, i0, j, false, cur)?;
            }
        }
        for (i0, w) in a.parts().iter().enumerate() {
            for &j in w.letters() {
                cur = self.step(side, i0, j, true, cur)?;
            }
        }
        Some(cur)
    }

    /// Scalar matrix of a single truncated creation (or its adjoint).
    pub fn creation_matrix(&self, side: Side, i: usize, j: usize, adjoint: bool) -> Result<CMat> {
        self.check_factor(i, j)?;
        let mut m = CMat::zeros(self.dim, self.dim);
        for idx in 0..self.dim {
            if let Some(t) = self.step(side, i - 1, j, adjoint, idx) {
                m[(t, idx)] = c64(1.0, 0.0);
            }
        }
        Ok(m)
    }

    /// Scalar matrix of `Side_a Side_b*`.
    pub fn monomial_matrix(&self, side: Side, a: &MultiWord, b: &MultiWord) -> Result<CMat> {
        self.check_words(a, b)?;
        let mut m = CMat::zeros(self.dim, self.dim);
        for idx in 0..self.dim {
            if let Some(t) = self.word_step(side, a, b, idx) {
                m[(t, idx)] = c64(1.0, 0.0);
            }
        }
        Ok(m)
    }

    /// Scalar matrix of `Side_a* Side_b`.
    pub fn co_monomial_matrix(&self, side: Side, a: &MultiWord, b: &MultiWord) -> Result<CMat> {
        self.check_words(a, b)?;
        let mut m = CMat::zeros(self.dim, self.dim);
        for idx in 0..self.dim {
            if let Some(t) = self.co_word_step(side, a, b, idx) {
                m[(t, idx)] = c64(1.0, 0.0);
            }
        }
        Ok(m)
    }

    fn check_words(&self, a: &MultiWord, b: &MultiWord) -> Result<()> {
        for w in [a, b] {
            self.basis_index(w)?;
        }
        Ok(())
    }
}

fn too_big() -> Error {
    Error::InvalidArgument(format!("truncation dimension exceeds {MAX_DIM}"))
}

/// A vector in `truncation ⊗ C^coeff_dim`, stored basis-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub dim: usize,
    pub coeff_dim: usize,
    pub data: CVec,
}

impl FockVector {
    pub fn zeros(t: &FockTruncation, coeff_dim: usize) -> Self {
        FockVector {
            dim: t.dim(),
            coeff_dim,
            data: CVec::zeros(t.dim() * coeff_dim),
        }
    }

    /// `e_w ⊗ e_c`.
    pub fn basis(t: &FockTruncation, w: &MultiWord, coeff_dim: usize, c: usize) -> Result<Self> {
        if c >= coeff_dim {
            return Err(Error::IndexOutOfRange(format!("coefficient {c} >= {coeff_dim}")));
        }
        let mut v = FockVector::zeros(t, coeff_dim);
        v.data[t.basis_index(w)? * coeff_dim + c] = c64(1.0, 0.0);
        Ok(v)
    }

    pub fn from_data(t: &FockTruncation, coeff_dim: usize, data: CVec) -> Result<Self> {
        if data.len() != t.dim() * coeff_dim {
            return Err(Error::ShapeMismatch(format!(
                "vector length {} vs {} x {coeff_dim}",
                data.len(),
                t.dim()
            )));
        }
        Ok(FockVector {
            dim: t.dim(),
            coeff_dim,
            data,
        })
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    fn check(&self, t: &FockTruncation) -> Result<()> {
        if self.dim != t.dim() || self.data.len() != self.dim * self.coeff_dim {
            return Err(Error::ShapeMismatch(format!(
                "vector of dimension {} x {} for truncation of dimension {}",
                self.dim,
                self.coeff_dim,
                t.dim()
            )));
        }
        Ok(())
    }
}

/// Matrix-free action of a truncated creation `S_{i,j}`, `R_{i,j}` or adjoint (1-based `i`, `j`).
pub fn apply_creation(
    t: &FockTruncation,
    side: Side,
    i: usize,
    j: usize,
    adjoint: bool,
    v: &FockVector,
) -> Result<FockVector> {
    t.check_factor(i, j)?;
    v.check(t)?;
    let c = v.coeff_dim;
    let mut out = FockVector::zeros(t, c);
    for idx in 0..t.dim() {
        if let Some(target) = t.step(side, i - 1, j, adjoint, idx) {
            for e in 0..c {
                out.data[target * c + e] = v.data[idx * c + e];
            }
        }
    }
    Ok(out)
}

/// `Side_a Side_b* v`, matrix-free.
pub fn apply_word(
    t: &FockTruncation,
    side: Side,
    a: &MultiWord,
    b: &MultiWord,
    v: &FockVector,
) -> Result<FockVector> {
    t.check_words(a, b)?;
    v.check(t)?;
    let c = v.coeff_dim;
    let mut out = FockVector::zeros(t, c);
    for idx in 0..t.dim() {
        if let Some(target) = t.word_step(side, a, b, idx) {
            for e in 0..c {
                out.data[target * c + e] += v.data[idx * c + e];
            }
        }
    }
    Ok(out)
}

/// Restriction of the basis to words with `|w_i| ≤ d_i − budget_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    caps: Vec<usize>,
}

impl Window {
    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    pub fn contains(&self, w: &MultiWord) -> bool {
        w.k() == self.caps.len() && w.parts().iter().zip(&self.caps).all(|(p, &c)| p.len() <= c)
    }

    /// Basis indices of `t` inside the window, ascending.
    pub fn indices(&self, t: &FockTruncation) -> Vec<usize> {
        (0..t.dim())
            .filter(|&idx| (0..t.k()).all(|i| t.factor_len(idx, i) <= self.caps[i]))
            .collect()
    }
}

pub fn exact_window(t: &FockTruncation, raise_budget: &[usize]) -> Result<Window> {
    if raise_budget.len() != t.k() {
        return Err(Error::ShapeMismatch(format!(
            "budget of length {} for k = {}",
            raise_budget.len(),
            t.k()
        )));
    }
    let caps = t
        .degrees
        .iter()
        .zip(raise_budget)
        .map(|(&d, &b)| {
            d.checked_sub(b).ok_or_else(|| {
                Error::InvalidArgument(format!("raise budget {b} exceeds degree {d}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Window { caps })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OperatorFlags {
    pub self_adjoint: bool,
    pub positive: bool,
}

/// Dense operator on `truncation ⊗ C^coeff_dim`, basis-major.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub truncation: FockTruncation,
    pub coeff_dim: usize,
    pub matrix: CMat,
    pub flags: OperatorFlags,
}

impl FockOperator {
    pub fn new(truncation: FockTruncation, coeff_dim: usize, matrix: CMat) -> Result<Self> {
        let d = truncation.dim() * coeff_dim;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "matrix {}x{} for dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(FockOperator {
            truncation,
            coeff_dim,
            matrix,
            flags: OperatorFlags::default(),
        })
    }

    pub fn identity(t: &FockTruncation, coeff_dim: usize) -> Self {
        let d = t.dim() * coeff_dim;
        FockOperator {
            truncation: t.clone(),
            coeff_dim,
            matrix: CMat::identity(d, d),
            flags: OperatorFlags {
                self_adjoint: true,
                positive: true,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The `coeff_dim × coeff_dim` block at basis row `row`, column `col`.
    pub fn block(&self, row: usize, col: usize) -> CMat {
        let c = self.coeff_dim;
        self.matrix.view((row * c, col * c), (c, c)).into_owned()
    }

    /// Compression to a smaller truncation with the same alphabet sizes.
    pub fn compress_to(&self, small: &FockTruncation) -> Result<FockOperator> {
        let emb = small.embedding_into(&self.truncation)?;
        let c = self.coeff_dim;
        let idx: Vec<usize> = emb
            .iter()
            .flat_map(|&b| (0..c).map(move |e| b * c + e))
            .collect();
        let m = crate::linalg::submatrix(&self.matrix, &idx, &idx);
        FockOperator::new(small.clone(), c, m)
    }

    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                let z = self.matrix[(r, c)];
                if z != c64(0.0, 0.0) {
                    entries.push(json!([r, c, z.re, z.im]));
                }
            }
        }
        json!({
            "n": self.truncation.n(),
            "degrees": self.truncation.degrees(),
            "coeff_dim": self.coeff_dim,
            "entries": entries,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (t, coeff_dim, entries) = parse_operator_header(v)?;
        let d = t.dim() * coeff_dim;
        let mut m = CMat::zeros(d, d);
        for (r, c, z) in entries {
            if r >= d || c >= d {
                return Err(Error::Json(format!("entry ({r},{c}) outside dimension {d}")));
            }
            m[(r, c)] = z;
        }
        FockOperator::new(t, coeff_dim, m)
    }
}

type Entries = Vec<(usize, usize, C64)>;

fn parse_operator_header(v: &Value) -> Result<(FockTruncation, usize, Entries)> {
    let n = json_usizes(v, "n")?;
    let degrees = json_usizes(v, "degrees")?;
    let coeff_dim = v
        .get("coeff_dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Json("missing coeff_dim".into()))? as usize;
    let t = FockTruncation::new(&n, &degrees)?;
    let raw = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Json("missing entries".into()))?;
    let mut entries = Vec::with_capacity(raw.len());
    for e in raw {
        let a = e.as_array().filter(|a| a.len() == 4).ok_or_else(|| {
            Error::Json(format!("entry must be [row, col, re, im], got {e}"))
        })?;
        let r = a[0].as_u64().ok_or_else(|| Error::Json("bad row".into()))? as usize;
        let c = a[1].as_u64().ok_or_else(|| Error::Json("bad col".into()))? as usize;
        let re = a[2].as_f64().ok_or_else(|| Error::Json("bad re".into()))?;
        let im = a[3].as_f64().ok_or_else(|| Error::Json("bad im".into()))?;
        entries.push((r, c, c64(re, im)));
    }
    Ok((t, coeff_dim, entries))
}

pub(crate) fn json_usizes(v: &Value, key: &str) -> Result<Vec<usize>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Json(format!("missing array field {key}")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| Error::Json(format!("{key}: expected integers")))
        })
        .collect()
}

/// Sparse operator for large truncations, rows stored as (column, value) lists.
#[derive(Clone, Debug)]
pub struct SparseFockOperator {
    pub truncation: FockTruncation,
    pub coeff_dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseFockOperator {
    pub fn from_triplets(t: &FockTruncation, coeff_dim: usize, mut trip: Entries) -> Result<Self> {
        let d = t.dim() * coeff_dim;
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut rows = vec![Vec::new(); d];
        for (r, c, z) in trip {
            if r >= d || c >= d {
                return Err(Error::IndexOutOfRange(format!("entry ({r},{c}) outside {d}")));
            }
            match rows[r].last_mut() {
                Some((lc, lz)) if *lc == c => *lz += z,
                _ => rows[r].push((c, z)),
            }
        }
        Ok(SparseFockOperator {
            truncation: t.clone(),
            coeff_dim,
            rows,
        })
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> FockOperator {
        let d = self.rows.len();
        let mut m = CMat::zeros(d, d);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, z) in row {
                m[(r, c)] = z;
            }
        }
        FockOperator::new(self.truncation.clone(), self.coeff_dim, m).expect("consistent shape")
    }

    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, z) in row {
                entries.push(json!([r, c, z.re, z.im]));
            }
        }
        json!({
            "n": self.truncation.n(),
            "degrees": self.truncation.degrees(),
            "coeff_dim": self.coeff_dim,
            "entries": entries,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (t, coeff_dim, entries) = parse_operator_header(v)?;
        SparseFockOperator::from_triplets(&t, coeff_dim, entries)
    }
}

/// A scalar operator `g` on a truncation, acting as `g ⊗ I` on vectors with any coefficient dimension.
pub trait FockMap: Sync {
    fn truncation(&self) -> &FockTruncation;
    fn apply_to(&self, v: &FockVector) -> Result<FockVector>;
}

impl FockMap for FockOperator {
    fn truncation(&self) -> &FockTruncation {
        &self.truncation
    }

    fn apply_to(&self, v: &FockVector) -> Result<FockVector> {
        v.check(&self.truncation)?;
        if self.coeff_dim != 1 {
            return Err(Error::ShapeMismatch(
                "only scalar operators act as g ⊗ I; use the extended transform".into(),
            ));
        }
        let c = v.coeff_dim;
        let d = self.truncation.dim();
        // reshape: columns of the d x c matrix are the coefficient slices
        let x = CMat::from_fn(d, c, |r, e| v.data[r * c + e]);
        let y = &self.matrix * x;
        let data = CVec::from_fn(d * c, |k, _| y[(k / c, k % c)]);
        Ok(FockVector { dim: d, coeff_dim: c, data })
    }
}

impl FockMap for SparseFockOperator {
    fn truncation(&self) -> &FockTruncation {
        &self.truncation
    }

    fn apply_to(&self, v: &FockVector) -> Result<FockVector> {
        v.check(&self.truncation)?;
        if self.coeff_dim != 1 {
            return Err(Error::ShapeMismatch("only scalar operators act as g ⊗ I".into()));
        }
        let c = v.coeff_dim;
        let mut out = FockVector::zeros(&self.truncation, c);
        for (r, row) in self.rows.iter().enumerate() {
            for &(col, z) in row {
                for e in 0..c {
                    out.data[r * c + e] += z * v.data[col * c + e];
                }
            }
        }
        Ok(out)
    }
}

/// `coeff · Side_a Side_b*` applied without assembling a matrix.
#[derive(Clone, Debug)]
pub struct WordMap {
    pub truncation: FockTruncation,
    pub side: Side,
    pub a: MultiWord,
    pub b: MultiWord,
    pub coeff: C64,
}

impl FockMap for WordMap {
    fn truncation(&self) -> &FockTruncation {
        &self.truncation
    }

    fn apply_to(&self, v: &FockVector) -> Result<FockVector> {
        let mut out = apply_word(&self.truncation, self.side, &self.a, &self.b, v)?;
        out.data *= self.coeff;
        Ok(out)
    }
}

/// `Side_a Side_b* ⊗ coefficient` as a dense operator (coefficient is the minor factor).
pub fn word_operator_side(
    t: &FockTruncation,
    side: Side,
    a: &MultiWord,
    b: &MultiWord,
    coefficient: &CMat,
) -> Result<FockOperator> {
    if coefficient.nrows() != coefficient.ncols() {
        return Err(Error::ShapeMismatch("coefficient must be square".into()));
    }
    let m = t.monomial_matrix(side, a, b)?;
    FockOperator::new(t.clone(), coefficient.nrows(), kron(&m, coefficient))
}

/// `S_a S_b* ⊗ coefficient`.
pub fn word_operator(
    t: &FockTruncation,
    a: &MultiWord,
    b: &MultiWord,
    coefficient: &CMat,
) -> Result<FockOperator> {
    word_operator_side(t, Side::Left, a, b, coefficient)
}

/// Sparse form of [`word_operator_side`] for large truncations.
pub fn word_operator_sparse(
    t: &FockTruncation,
    side: Side,
    a: &MultiWord,
    b: &MultiWord,
    coefficient: &CMat,
) -> Result<SparseFockOperator> {
    t.check_words(a, b)?;
    let c = coefficient.nrows();
    let mut trip = Vec::new();
    for idx in 0..t.dim() {
        if let Some(target) = t.word_step(side, a, b, idx) {
            for r in 0..c {
                for s in 0..c {
                    let z = coefficient[(r, s)];
                    if z != c64(0.0, 0.0) {
                        trip.push((target * c + r, idx * c + s, z));
                    }
                }
            }
        }
    }
    SparseFockOperator::from_triplets(t, c, trip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_diff};

    fn mw(n: &[usize], l: &[&[usize]]) -> MultiWord {
        MultiWord::from_letters(n, &l.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn basis_index_examples() {
        let t = FockTruncation::new(&[2], &[2]).unwrap();
        assert_eq!(t.dim(), 7);
        assert_eq!(t.basis_index(&mw(&[2], &[&[]])).unwrap(), 0);
        assert_eq!(t.basis_index(&mw(&[2], &[&[1]])).unwrap(), 1);
        assert_eq!(t.basis_index(&mw(&[2], &[&[2]])).unwrap(), 2);
        assert_eq!(t.basis_index(&mw(&[2], &[&[1, 1]])).unwrap(), 3);
        assert!(t.basis_index(&mw(&[2], &[&[1, 1, 1]])).is_err());

        let t = FockTruncation::new(&[1, 1], &[1, 1]).unwrap();
        let n = [1, 1];
        assert_eq!(t.basis_index(&mw(&n, &[&[], &[]])).unwrap(), 0);
        assert_eq!(t.basis_index(&mw(&n, &[&[], &[1]])).unwrap(), 1);
        assert_eq!(t.basis_index(&mw(&n, &[&[1], &[]])).unwrap(), 2);
        assert_eq!(t.basis_index(&mw(&n, &[&[1], &[1]])).unwrap(), 3);
    }

    #[test]
    fn basis_roundtrip_and_order() {
        let t = FockTruncation::new(&[2, 1], &[2, 3]).unwrap();
        let b = t.basis();
        assert_eq!(b.len(), t.dim());
        for (i, w) in b.iter().enumerate() {
            assert_eq!(t.basis_index(w).unwrap(), i);
            assert_eq!(&t.word_at(i).unwrap(), w);
        }
    }

    #[test]
    fn creation_examples() {
        let t = FockTruncation::new(&[2], &[2]).unwrap();
        let n = [2];
        let vac = FockVector::basis(&t, &mw(&n, &[&[]]), 1, 0).unwrap();
        let v = apply_creation(&t, Side::Left, 1, 1, false, &vac).unwrap();
        assert_eq!(v, FockVector::basis(&t, &mw(&n, &[&[1]]), 1, 0).unwrap());

        let e12 = FockVector::basis(&t, &mw(&n, &[&[1, 2]]), 1, 0).unwrap();
        let v = apply_creation(&t, Side::Left, 1, 1, true, &e12).unwrap();
        assert_eq!(v, FockVector::basis(&t, &mw(&n, &[&[2]]), 1, 0).unwrap());
        let e21 = FockVector::basis(&t, &mw(&n, &[&[2, 1]]), 1, 0).unwrap();
        assert_eq!(apply_creation(&t, Side::Left, 1, 1, true, &e21).unwrap().norm(), 0.0);

        let e1 = FockVector::basis(&t, &mw(&n, &[&[1]]), 1, 0).unwrap();
        let v = apply_creation(&t, Side::Right, 1, 2, false, &e1).unwrap();
        assert_eq!(v, e12);
        assert_eq!(apply_creation(&t, Side::Right, 1, 2, false, &e12).unwrap().norm(), 0.0);

        assert!(apply_creation(&t, Side::Left, 2, 1, false, &vac).is_err());
        assert!(apply_creation(&t, Side::Left, 1, 3, false, &vac).is_err());
    }

    #[test]
    fn word_operator_examples() {
        let t = FockTruncation::new(&[1], &[2]).unwrap();
        let g = MultiWord::identity(&[1]);
        let id = word_operator(&t, &g, &g, &identity(1)).unwrap();
        assert!(max_diff(&id.matrix, &identity(3)) == 0.0);
        let s = word_operator(&t, &mw(&[1], &[&[1]]), &g, &identity(1)).unwrap();
        let mut expect = CMat::zeros(3, 3);
        expect[(1, 0)] = c64(1.0, 0.0);
        expect[(2, 1)] = c64(1.0, 0.0);
        assert_eq!(s.matrix, expect);
    }

    #[test]
    fn window_examples() {
        let t = FockTruncation::new(&[2, 2], &[3, 3]).unwrap();
        assert_eq!(exact_window(&t, &[0, 0]).unwrap().indices(&t).len(), t.dim());
        let w = exact_window(&t, &[1, 1]).unwrap();
        assert_eq!(w.indices(&t).len(), 49);
        assert!(exact_window(&t, &[4, 0]).is_err());
    }

    #[test]
    fn json_roundtrip_dense_and_sparse() {
        let t = FockTruncation::new(&[2], &[2]).unwrap();
        let a = mw(&[2], &[&[1]]);
        let b = mw(&[2], &[&[2]]);
        let coeff = CMat::from_fn(2, 2, |r, c| c64(r as f64, c as f64 + 1.0));
        let op = word_operator(&t, &a, &b, &coeff).unwrap();
        let back = FockOperator::from_json(&op.to_json()).unwrap();
        assert_eq!(back.matrix, op.matrix);
        let sp = word_operator_sparse(&t, Side::Left, &a, &b, &coeff).unwrap();
        assert_eq!(sp.to_json(), op.to_json());
        assert_eq!(sp.to_dense().matrix, op.matrix);
    }
}
