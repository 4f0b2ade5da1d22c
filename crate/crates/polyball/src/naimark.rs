//! Left and right k-multi-Toeplitz kernels and their Naimark dilations at finite word length.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fock::json_usizes;
use crate::linalg::{
    c64, column_basis, from_interleaved, hermitian_eig, identity, max_abs, op_norm, pinv, rank,
    to_interleaved, CMat,
};
use crate::words::{enumerate_total, is_lambda, lambda_pairs, quotients, MultiWord, Side};

/// Default relative eigenvalue cut for the Gram factorization.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-10;

pub type Generator = BTreeMap<(MultiWord, MultiWord), CMat>;

/// Λ-pairs `(α;β)` with `|α|, |β| ≤ max_len`; exactly the generator values a kernel of that
/// length reads.
pub fn generator_support(n: &[usize], max_len: usize) -> Vec<(MultiWord, MultiWord)> {
    lambda_pairs(n, 2 * max_len)
        .into_iter()
        .filter(|(a, b)| a.total_len() <= max_len && b.total_len() <= max_len)
        .collect()
}

/// A kernel `K(σ,ω)` on multiwords of total length `≤ max_len`, stored through its generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzKernel {
    side: Side,
    n: Vec<usize>,
    e_dim: usize,
    max_len: usize,
    generator: Generator,
}

/// Builds the kernel `K(σ,ω) = gen(c⁺(σ,ω); c⁻(σ,ω))`, zero on incomparable pairs.
pub fn kernel_from_generator(
    side: Side,
    n: &[usize],
    e_dim: usize,
    generator: Generator,
    max_len: usize,
) -> Result<ToeplitzKernel> {
    let k = unnormalized_kernel(side, n, e_dim, generator, max_len)?;
    let g = MultiWord::identity(n);
    let unit = &k.generator[&(g.clone(), g)];
    if max_abs(&(unit - identity(e_dim))) > HERMITIAN_TOL {
        return Err(Error::InvalidArgument("generator must equal I at the identity pair".into()));
    }
    Ok(k)
}

/// As [`kernel_from_generator`] but with any Hermitian value at the identity pair.
pub(crate) fn unnormalized_kernel(
    side: Side,
    n: &[usize],
    e_dim: usize,
    generator: Generator,
    max_len: usize,
) -> Result<ToeplitzKernel> {
    if n.is_empty() || n.contains(&0) || e_dim == 0 {
        return Err(Error::InvalidArgument(format!("bad kernel shape n = {n:?}, e_dim = {e_dim}")));
    }
    for ((a, b), m) in &generator {
        if a.shape() != n || b.shape() != n {
            return Err(Error::ShapeMismatch(format!("pair ({a}; {b}) for shape {n:?}")));
        }
        if !is_lambda(a, b) {
            return Err(Error::NotInLambda {
                alpha: a.to_string(),
                beta: b.to_string(),
            });
        }
        if m.nrows() != e_dim || m.ncols() != e_dim {
            return Err(Error::ShapeMismatch(format!("generator value at ({a}; {b}) is not {e_dim}x{e_dim}")));
        }
    }
    for (a, b) in generator_support(n, max_len) {
        let m = generator.get(&(a.clone(), b.clone())).ok_or_else(|| Error::MissingGenerator {
            alpha: a.to_string(),
            beta: b.to_string(),
        })?;
        let t = generator.get(&(b.clone(), a.clone())).ok_or_else(|| Error::MissingGenerator {
            alpha: b.to_string(),
            beta: a.to_string(),
        })?;
        let defect = max_abs(&(m - t.adjoint()));
        if defect > HERMITIAN_TOL {
            return Err(Error::NonHermitian {
                alpha: a.to_string(),
                beta: b.to_string(),
                defect,
            });
        }
    }
    Ok(ToeplitzKernel {
        side,
        n: n.to_vec(),
        e_dim,
        max_len,
        generator,
    })
}

/// Inserts zero matrices for every generator value a kernel of length `max_len` needs but `gen` lacks.
pub fn fill_missing_with_zero(gen: &mut Generator, n: &[usize], e_dim: usize, max_len: usize) {
    for pair in generator_support(n, max_len) {
        gen.entry(pair).or_insert_with(|| CMat::zeros(e_dim, e_dim));
    }
}

/// `gen(α,β) = emb* V_α* V_β emb` for a tuple `V[i][j]` and an embedding `emb : E → space`.
pub fn generator_from_tuple(
    v: &[Vec<CMat>],
    emb: &CMat,
    n: &[usize],
    max_len: usize,
) -> Result<Generator> {
    if v.len() != n.len() || v.iter().zip(n).any(|(row, &ni)| row.len() != ni) {
        return Err(Error::ShapeMismatch("operator tuple does not match the shape".into()));
    }
    let words = enumerate_total(n, max_len);
    let images = word_images(v, emb, &words);
    let index: HashMap<&MultiWord, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut gen = Generator::new();
    for (a, b) in generator_support(n, max_len) {
        let m = images[index[&a]].adjoint() * &images[index[&b]];
        gen.insert((a, b), m);
    }
    Ok(gen)
}

/// `V_ω emb` for each word, built from shorter words by one left multiplication.
fn word_images(v: &[Vec<CMat>], emb: &CMat, words: &[MultiWord]) -> Vec<CMat> {
    let mut index: HashMap<MultiWord, usize> = HashMap::with_capacity(words.len());
    let mut out: Vec<CMat> = Vec::with_capacity(words.len());
    for (idx, w) in words.iter().enumerate() {
        let img = match (0..w.k()).find(|&i| !w.part(i).is_empty()) {
            None => emb.clone(),
            Some(i) => {
                let j = w.part(i).letters()[0];
                let mut letters: Vec<Vec<usize>> = w.parts().iter().map(|p| p.letters().to_vec()).collect();
                letters[i].remove(0);
                let rest = MultiWord::from_letters(&w.shape(), &letters).expect("valid letters");
                &v[i][j - 1] * &out[index[&rest]]
            }
        };
        index.insert(w.clone(), idx);
        out.push(img);
    }
    out
}

impl ToeplitzKernel {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn e_dim(&self) -> usize {
        self.e_dim
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// `K(σ,ω)`.
    pub fn value(&self, s: &MultiWord, w: &MultiWord) -> CMat {
        match quotients(self.side, s, w) {
            Some(pair) => self.generator[&pair].clone(),
            None => CMat::zeros(self.e_dim, self.e_dim),
        }
    }

    /// All words of total length `≤ max_len`, the index set of the Gram matrix.
    pub fn words(&self) -> Vec<MultiWord> {
        enumerate_total(&self.n, self.max_len)
    }

    /// Block Gram matrix with `(σ,e),(ω,e')` entry `K(σ,ω)[e,e']`.
    pub fn gram(&self) -> CMat {
        let words = self.words();
        let e = self.e_dim;
        let n = words.len() * e;
        let rows: Vec<Vec<CMat>> = words
            .par_iter()
            .map(|s| words.iter().map(|w| self.value(s, w)).collect())
            .collect();
        let mut g = CMat::zeros(n, n);
        for (ri, row) in rows.iter().enumerate() {
            for (ci, blk) in row.iter().enumerate() {
                g.view_mut((ri * e, ci * e), (e, e)).copy_from(blk);
            }
        }
        g
    }

    /// The left kernel `(σ,ω) ↦ K(σ̃,ω̃)`, or the right one for a left input.
    pub fn reversed(&self) -> ToeplitzKernel {
        let side = match self.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        let generator = self
            .generator
            .iter()
            .map(|((a, b), m)| ((a.reverse(), b.reverse()), m.clone()))
            .collect();
        ToeplitzKernel {
            side,
            n: self.n.clone(),
            e_dim: self.e_dim,
            max_len: self.max_len,
            generator,
        }
    }

    pub fn to_json(&self) -> Value {
        let gen: Vec<Value> = self
            .generator
            .iter()
            .filter(|(_, m)| max_abs(m) > 0.0)
            .map(|((a, b), m)| json!({"alpha": a.to_json(), "beta": b.to_json(), "matrix": to_interleaved(m)}))
            .collect();
        json!({
            "side": self.side,
            "n": self.n,
            "e_dim": self.e_dim,
            "max_len": self.max_len,
            "generator": gen,
        })
    }

    /// Parses kernel JSON; generator values that are not listed are zero.
    pub fn from_json(v: &Value) -> Result<Self> {
        let side: Side = serde_json::from_value(v.get("side").cloned().unwrap_or(Value::Null))?;
        let n = json_usizes(v, "n")?;
        let get = |key: &str| {
            v.get(key)
                .and_then(Value::as_u64)
                .map(|u| u as usize)
                .ok_or_else(|| Error::Json(format!("missing {key}")))
        };
        let e = get("e_dim")?;
        let max_len = get("max_len")?;
        let list = v
            .get("generator")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing generator".into()))?;
        let mut gen = Generator::new();
        for item in list {
            let a = MultiWord::from_json(&n, item.get("alpha").unwrap_or(&Value::Null))?;
            let b = MultiWord::from_json(&n, item.get("beta").unwrap_or(&Value::Null))?;
            let data: Vec<f64> =
                serde_json::from_value(item.get("matrix").cloned().unwrap_or(Value::Null))?;
            gen.insert((a, b), from_interleaved(e, &data)?);
        }
        fill_missing_with_zero(&mut gen, &n, e, max_len);
        kernel_from_generator(side, &n, e, gen, max_len)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PsdReport {
    pub psd: bool,
    pub min_eig: f64,
}

pub fn kernel_is_psd(k: &ToeplitzKernel, tol: f64) -> PsdReport {
    let eig = crate::linalg::min_eig(&k.gram());
    PsdReport {
        psd: eig >= -tol,
        min_eig: eig,
    }
}

/// Isometries `V[i][j]` on a finite space with an embedding of `E`, exact on words of length
/// `≤ window_len`.
#[derive(Clone, Debug)]
pub struct NaimarkDilation {
    pub side: Side,
    pub n: Vec<usize>,
    pub e_dim: usize,
    pub max_len: usize,
    pub window_len: usize,
    pub space_dim: usize,
    pub v: Vec<Vec<CMat>>,
    pub embedding: CMat,
    /// Columns `V_ω emb` for every word of length `≤ max_len`, in [`ToeplitzKernel::words`] order.
    pub factor: CMat,
}

pub fn naimark_dilate(k: &ToeplitzKernel, rank_tol: f64) -> Result<NaimarkDilation> {
    if k.max_len == 0 {
        return Err(Error::InvalidArgument("dilation needs max_len >= 1".into()));
    }
    let left = match k.side {
        Side::Left => k.clone(),
        Side::Right => k.reversed(),
    };
    let words = left.words();
    let e = k.e_dim;
    let (vals, vecs) = hermitian_eig(&left.gram());
    let top = vals.last().copied().unwrap_or(0.0);
    let bottom = vals.first().copied().unwrap_or(0.0);
    if bottom < -rank_tol * top.max(1.0) {
        return Err(Error::NotPsd { min_eig: bottom });
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > rank_tol * top).collect();
    let r = keep.len();
    let mut f = CMat::zeros(r, vals.len());
    for (row, &i) in keep.iter().enumerate() {
        f.set_row(row, &(vecs.column(i).adjoint() * c64(vals[i].sqrt(), 0.0)));
    }
    let index: HashMap<&MultiWord, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let cols_of = |ws: &[MultiWord]| -> CMat {
        let mut m = CMat::zeros(r, ws.len() * e);
        for (c, w) in ws.iter().enumerate() {
            m.columns_mut(c * e, e).copy_from(&f.columns(index[w] * e, e));
        }
        m
    };
    let domain: Vec<MultiWord> = words
        .iter()
        .filter(|w| w.total_len() < k.max_len)
        .cloned()
        .collect();
    let p = pinv(&cols_of(&domain), (rank_tol * top).sqrt());
    let mut v = Vec::with_capacity(k.n.len());
    for i in 0..k.n.len() {
        let row: Vec<CMat> = (1..=k.n[i])
            .map(|j| {
                let shifted: Vec<MultiWord> = domain.iter().map(|w| w.prepend(i, j)).collect();
                cols_of(&shifted) * &p
            })
            .collect();
        v.push(row);
    }
    let embedding = f.columns(0, e).into_owned();
    Ok(NaimarkDilation {
        side: k.side,
        n: k.n.clone(),
        e_dim: e,
        max_len: k.max_len,
        window_len: k.max_len - 1,
        space_dim: r,
        v,
        embedding,
        factor: f,
    })
}

impl NaimarkDilation {
    /// Wraps an explicit tuple and embedding; `factor` is computed from the word images.
    pub fn from_parts(
        side: Side,
        n: &[usize],
        max_len: usize,
        v: Vec<Vec<CMat>>,
        embedding: CMat,
    ) -> Result<Self> {
        let space_dim = embedding.nrows();
        if v.len() != n.len()
            || v.iter().zip(n).any(|(row, &ni)| row.len() != ni)
            || v.iter().flatten().any(|m| m.nrows() != space_dim || m.ncols() != space_dim)
        {
            return Err(Error::ShapeMismatch("tuple does not match the shape or the space".into()));
        }
        let words = enumerate_total(n, max_len);
        let e = embedding.ncols();
        let images = word_images(&v, &embedding, &words);
        let mut factor = CMat::zeros(space_dim, words.len() * e);
        for (c, img) in images.iter().enumerate() {
            factor.columns_mut(c * e, e).copy_from(img);
        }
        Ok(NaimarkDilation {
            side,
            n: n.to_vec(),
            e_dim: e,
            max_len,
            window_len: max_len.saturating_sub(1),
            space_dim,
            v,
            embedding,
            factor,
        })
    }

    /// `V_ω emb` for every word of total length `≤ len`.
    pub fn images(&self, len: usize) -> (Vec<MultiWord>, Vec<CMat>) {
        let words = enumerate_total(&self.n, len);
        let imgs = word_images(&self.v, &self.embedding, &words);
        (words, imgs)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "side": self.side,
            "n": self.n,
            "e_dim": self.e_dim,
            "max_len": self.max_len,
            "window_len": self.window_len,
            "space_dim": self.space_dim,
            "V": self.v.iter().map(|row| row.iter().map(to_interleaved).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "embedding": {
                "rows": self.embedding.nrows(),
                "cols": self.embedding.ncols(),
                "data": to_interleaved(&self.embedding),
            },
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DilationReport {
    pub window_len: usize,
    pub reproduction_error: f64,
    /// Per factor: `max_{s,t} ‖Q*(V_{i,s}*V_{i,t} − δ_st I)Q‖` on the window.
    pub isometry_defects: Vec<f64>,
    /// Largest cross-factor commutator on words of length `≤ window_len − 1`.
    pub commutator_norm: f64,
    pub embedding_defect: f64,
    pub span_rank: usize,
    pub space_dim: usize,
    pub minimal: bool,
}

fn span_basis(images: &[CMat], words: &[MultiWord], len: usize, dim: usize) -> CMat {
    let cols: Vec<&CMat> = images
        .iter()
        .zip(words)
        .filter(|(_, w)| w.total_len() <= len)
        .map(|(m, _)| m)
        .collect();
    let ncols: usize = cols.iter().map(|m| m.ncols()).sum();
    let mut all = CMat::zeros(dim, ncols);
    let mut c = 0;
    for m in cols {
        all.columns_mut(c, m.ncols()).copy_from(m);
        c += m.ncols();
    }
    column_basis(&all, 1e-7)
}

pub fn dilation_verify(d: &NaimarkDilation, k: &ToeplitzKernel) -> Result<DilationReport> {
    if d.n != k.n || d.e_dim != k.e_dim || d.side != k.side {
        return Err(Error::ShapeMismatch("dilation and kernel differ in shape or side".into()));
    }
    let wl = d.window_len.min(k.max_len);
    let (words, imgs) = d.images(d.max_len.max(wl));
    let in_window: Vec<usize> = (0..words.len()).filter(|&i| words[i].total_len() <= wl).collect();
    let reproduction_error = in_window
        .par_iter()
        .map(|&si| {
            let mut worst = 0.0f64;
            for &wi in &in_window {
                let got = imgs[si].adjoint() * &imgs[wi];
                let expected = match d.side {
                    Side::Left => k.value(&words[si], &words[wi]),
                    Side::Right => k.value(&words[si].reverse(), &words[wi].reverse()),
                };
                worst = worst.max(max_abs(&(got - expected)));
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    let q = span_basis(&imgs, &words, wl, d.space_dim);
    let isometry_defects = d
        .v
        .iter()
        .map(|row| {
            let mut worst = 0.0f64;
            for (s, vs) in row.iter().enumerate() {
                for (t, vt) in row.iter().enumerate() {
                    let mut m = q.adjoint() * vs.adjoint() * vt * &q;
                    if s == t {
                        m -= identity(q.ncols());
                    }
                    worst = worst.max(op_norm(&m));
                }
            }
            worst
        })
        .collect();

    let mut commutator_norm = 0.0f64;
    if wl >= 1 {
        let q2 = span_basis(&imgs, &words, wl - 1, d.space_dim);
        for i in 0..d.v.len() {
            for i2 in (i + 1)..d.v.len() {
                for a in &d.v[i] {
                    for b in &d.v[i2] {
                        commutator_norm = commutator_norm.max(op_norm(&((a * b - b * a) * &q2)));
                    }
                }
            }
        }
    }
    let embedding_defect = max_abs(&(d.embedding.adjoint() * &d.embedding - identity(d.e_dim)));
    let span_rank = rank(&d.factor, 1e-7);
    Ok(DilationReport {
        window_len: wl,
        reproduction_error,
        isometry_defects,
        commutator_norm,
        embedding_defect,
        span_rank,
        space_dim: d.space_dim,
        minimal: span_rank == d.space_dim,
    })
}

#[derive(Clone, Debug)]
pub struct WindowIntertwiner {
    /// Maps the first dilation space into the second with `W V_ω emb₁ = V'_ω emb₂`.
    pub w: CMat,
    /// `‖W*W − I‖` on the first space.
    pub unitarity_defect: f64,
    /// `max ‖W V_ω emb₁ − V'_ω emb₂‖` over window words.
    pub matching_error: f64,
}

/// Solves for the operator carrying the monomial images of one dilation onto the other's.
pub fn window_intertwiner(d1: &NaimarkDilation, d2: &NaimarkDilation) -> Result<WindowIntertwiner> {
    if d1.n != d2.n || d1.e_dim != d2.e_dim || d1.max_len != d2.max_len {
        return Err(Error::ShapeMismatch("dilations of different kernels".into()));
    }
    let w = &d2.factor * pinv(&d1.factor, 1e-8);
    let unitarity_defect = op_norm(&(w.adjoint() * &w - identity(d1.space_dim)));
    let matching_error = max_abs(&(&w * &d1.factor - &d2.factor));
    Ok(WindowIntertwiner {
        w,
        unitarity_defect,
        matching_error,
    })
}
