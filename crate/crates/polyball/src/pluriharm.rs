//! Free k-pluriharmonic functions: Γ-kernels and Schur positivity, recovery from row isometries,
//! linear-map data `μ` on R-monomials, and Poisson, Fantappiè and Herglotz–Riesz transforms.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::berezin::{cauchy_operator, PolyballPoint, COMMUTATION_TOL};
use crate::error::{Error, Result};
use crate::fock::{json_usizes, FockOperator, FockTruncation};
use crate::linalg::{
    c64, from_interleaved, identity, kron, lu_solve, max_abs, min_eig, op_norm, swap_tensor,
    to_interleaved, CMat, C64,
};
use crate::naimark::{fill_missing_with_zero, kernel_is_psd, unnormalized_kernel, Generator, ToeplitzKernel};
use crate::toeplitz::{evaluate_at_rs, evaluate_symbol, MultiToeplitzSymbol};
use crate::words::{
    enumerate_box, enumerate_total, is_lambda, lambda_pairs, lambda_pairs_box, MultiWord, Side,
};

/// A finitely supported free k-pluriharmonic function, identified with its symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct PluriharmonicFunction {
    pub symbol: MultiToeplitzSymbol,
}

impl PluriharmonicFunction {
    pub fn new(symbol: MultiToeplitzSymbol) -> Self {
        PluriharmonicFunction { symbol }
    }

    /// `F(X)` on `H ⊗ E`.
    pub fn evaluate(&self, x: &PolyballPoint) -> Result<CMat> {
        evaluate_symbol(&self.symbol, x)
    }

    /// `F(rS)` on a truncation; terms whose words do not fit act as zero and are dropped.
    pub fn at_rs(&self, t: &FockTruncation, r: f64) -> Result<FockOperator> {
        evaluate_at_rs(&self.fitting(t)?, t, r)
    }

    fn fitting(&self, t: &FockTruncation) -> Result<MultiToeplitzSymbol> {
        let mut s = MultiToeplitzSymbol::new(self.symbol.n(), self.symbol.e_dim())?;
        for (a, b, m) in self.symbol.iter() {
            if t.contains(a) && t.contains(b) {
                s.insert(a.clone(), b.clone(), m.clone())?;
            }
        }
        Ok(s)
    }

    /// `(A_𝐠 − A_𝐠*)/(2i)`.
    pub fn constant_imag(&self) -> CMat {
        let g = MultiWord::identity(self.symbol.n());
        match self.symbol.get(&g, &g) {
            Some(a) => (a - a.adjoint()) * c64(0.0, -0.5),
            None => CMat::zeros(self.symbol.e_dim(), self.symbol.e_dim()),
        }
    }
}

/// Right kernel `Γ_{F_r}(σ,ω) = r^{|c⁺|+|c⁻|} A_(c⁺;c⁻)` with right quotients, on words of length `≤ max_len`.
pub fn gamma_kernel(f: &PluriharmonicFunction, r: f64, max_len: usize) -> Result<ToeplitzKernel> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("r = {r} outside [0, 1]")));
    }
    let s = &f.symbol;
    let mut gen = Generator::new();
    for (a, b, m) in s.scaled(r).iter() {
        if a.total_len() <= max_len && b.total_len() <= max_len {
            gen.insert((a.clone(), b.clone()), m.clone());
        }
    }
    fill_missing_with_zero(&mut gen, s.n(), s.e_dim(), max_len);
    unnormalized_kernel(Side::Right, s.n(), s.e_dim(), gen, max_len)
}

#[derive(Clone, Debug, Serialize)]
pub struct SchurEntry {
    pub r: f64,
    pub operator_min_eig: f64,
    pub gram_min_eig: f64,
    pub operator_positive: bool,
    pub gram_positive: bool,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchurReport {
    pub entries: Vec<SchurEntry>,
    pub all_agree: bool,
}

/// For each `r`: the least eigenvalue of `F(rS)` compressed to words of total length `≤ max_len`,
/// and the least eigenvalue of the Γ-kernel Gram matrix on the same words.
pub fn schur_positivity(
    f: &PluriharmonicFunction,
    r_grid: &[f64],
    max_len: usize,
    tol: f64,
) -> Result<SchurReport> {
    let n = f.symbol.n().to_vec();
    let t = FockTruncation::new(&n, &vec![max_len; n.len()])?;
    let e = f.symbol.e_dim();
    let idx: Vec<usize> = enumerate_total(&n, max_len)
        .iter()
        .map(|w| t.basis_index(w))
        .collect::<Result<_>>()?;
    let rows: Vec<usize> = idx.iter().flat_map(|&b| (0..e).map(move |c| b * e + c)).collect();
    let entries = r_grid
        .par_iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("r = {r} outside [0, 1)")));
            }
            let op = f.at_rs(&t, r)?;
            let m = crate::linalg::submatrix(&op.matrix, &rows, &rows);
            let operator_min_eig = min_eig(&m);
            let gram_min_eig = kernel_is_psd(&gamma_kernel(f, r, max_len)?, tol).min_eig;
            let operator_positive = operator_min_eig >= -tol;
            let gram_positive = gram_min_eig >= -tol;
            Ok(SchurEntry {
                r,
                operator_min_eig,
                gram_min_eig,
                operator_positive,
                gram_positive,
                agree: operator_positive == gram_positive,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_agree = entries.iter().all(|e| e.agree);
    Ok(SchurReport { entries, all_agree })
}

fn check_tuple(v: &[Vec<CMat>], n: &[usize]) -> Result<usize> {
    if v.len() != n.len() || v.iter().zip(n).any(|(row, &ni)| row.len() != ni) || v[0].is_empty() {
        return Err(Error::ShapeMismatch("operator tuple does not match the shape".into()));
    }
    let dim = v[0][0].nrows();
    if v.iter().flatten().any(|m| m.nrows() != dim || m.ncols() != dim) {
        return Err(Error::ShapeMismatch("tuple entries must share one square size".into()));
    }
    Ok(dim)
}

fn cross_commutator(v: &[Vec<CMat>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..v.len() {
        for i2 in (i + 1)..v.len() {
            for a in &v[i] {
                for b in &v[i2] {
                    worst = worst.max(op_norm(&(a * b - b * a)));
                }
            }
        }
    }
    worst
}

/// `T_α̃ W` for every word in `words`, keyed by `α`; `words` must be closed under dropping
/// the last letter of the first nonempty factor, shortest first.
fn reversed_images(
    v: &[Vec<CMat>],
    w: &CMat,
    n: &[usize],
    words: Vec<MultiWord>,
) -> BTreeMap<MultiWord, CMat> {
    let mut out: BTreeMap<MultiWord, CMat> = BTreeMap::new();
    for a in words {
        // in the first nonempty factor, T_α̃ starts with the last letter of α
        let img = match (0..a.k()).find(|&i| !a.part(i).is_empty()) {
            None => w.clone(),
            Some(i) => {
                let letters = a.part(i).letters();
                let last = letters[letters.len() - 1];
                let mut l: Vec<Vec<usize>> = a.parts().iter().map(|p| p.letters().to_vec()).collect();
                l[i].pop();
                let rest = MultiWord::from_letters(n, &l).expect("valid letters");
                &v[i][last - 1] * &out[&rest]
            }
        };
        out.insert(a, img);
    }
    out
}

/// Symbol with coefficients `W* V*_α̃ V_β̃ W` over Λ-pairs of total length `≤ max_total_len`.
pub fn from_row_isometries(
    v: &[Vec<CMat>],
    e_basis: &CMat,
    max_total_len: usize,
) -> Result<PluriharmonicFunction> {
    let n: Vec<usize> = v.iter().map(Vec::len).collect();
    let words = enumerate_total(&n, max_total_len);
    let pairs = lambda_pairs(&n, max_total_len);
    compression_symbol(v, e_basis, words, pairs).map(PluriharmonicFunction::new)
}

fn compression_symbol(
    v: &[Vec<CMat>],
    e_basis: &CMat,
    words: Vec<MultiWord>,
    pairs: Vec<(MultiWord, MultiWord)>,
) -> Result<MultiToeplitzSymbol> {
    let n: Vec<usize> = v.iter().map(Vec::len).collect();
    let dim = check_tuple(v, &n)?;
    if e_basis.nrows() != dim || e_basis.ncols() == 0 {
        return Err(Error::ShapeMismatch("E basis does not live in the tuple's space".into()));
    }
    let c = cross_commutator(v);
    if c > COMMUTATION_TOL {
        return Err(Error::CommutationViolation(format!("cross-factor commutator norm {c:e}")));
    }
    let imgs = reversed_images(v, e_basis, &n, words);
    let mut s = MultiToeplitzSymbol::new(&n, e_basis.ncols())?;
    for (a, b) in pairs {
        let m = imgs[&a].adjoint() * &imgs[&b];
        s.insert(a, b, m)?;
    }
    Ok(s)
}

/// Values are present for every Λ-pair with `|α_i|, |β_i| ≤ degree`; all others are bounded in
/// norm by `coeff_bound · ∏_i decay_i^{|α_i|+|β_i|}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailModel {
    pub degree: usize,
    pub coeff_bound: f64,
    pub decay: Vec<f64>,
}

/// Values `μ(R*_α̃ R_β̃)` on Λ-pairs; absent pairs are zero up to the tail model.
#[derive(Clone, Debug, PartialEq)]
pub struct CbMapData {
    n: Vec<usize>,
    e_dim: usize,
    values: BTreeMap<(MultiWord, MultiWord), CMat>,
    herglotz_class: bool,
    tail: Option<TailModel>,
}

impl CbMapData {
    pub fn new(
        n: &[usize],
        e_dim: usize,
        values: BTreeMap<(MultiWord, MultiWord), CMat>,
        herglotz_class: bool,
        tail: Option<TailModel>,
    ) -> Result<Self> {
        if n.is_empty() || n.contains(&0) || e_dim == 0 {
            return Err(Error::InvalidArgument(format!("bad shape n = {n:?}, e_dim = {e_dim}")));
        }
        let g = MultiWord::identity(n);
        for ((a, b), m) in &values {
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
                return Err(Error::ShapeMismatch(format!("value at ({a}; {b}) is not {e_dim}x{e_dim}")));
            }
            if herglotz_class && *a != g && *b != g && max_abs(m) > 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "herglotz-class data must vanish on mixed monomial ({a}; {b})"
                )));
            }
        }
        let unit = values
            .get(&(g.clone(), g))
            .ok_or_else(|| Error::InvalidArgument("the unit value is required".into()))?;
        let d = max_abs(&(unit - unit.adjoint()));
        if d > 1e-12 {
            return Err(Error::NonHermitian {
                alpha: "g".into(),
                beta: "g".into(),
                defect: d,
            });
        }
        if let Some(tm) = &tail {
            if tm.coeff_bound.is_nan() || tm.coeff_bound < 0.0 {
                return Err(Error::InvalidArgument("tail coeff_bound must be >= 0".into()));
            }
            if tm.decay.len() != n.len() || tm.decay.iter().any(|d| d.is_nan() || *d < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tail decay needs {} non-negative entries",
                    n.len()
                )));
            }
        }
        Ok(CbMapData {
            n: n.to_vec(),
            e_dim,
            values,
            herglotz_class,
            tail,
        })
    }

    /// The vacuum state `τ`: unit only.
    pub fn vacuum(n: &[usize], e_dim: usize) -> Result<Self> {
        let g = MultiWord::identity(n);
        let mut values = BTreeMap::new();
        values.insert((g.clone(), g), identity(e_dim));
        CbMapData::new(n, e_dim, values, true, None)
    }

    /// Character at `ζ` in the closed polydisc (all `n_i = 1`):
    /// `μ(R*_α̃ R_β̃) = ∏ conj(ζ_i)^{|α_i|} ζ_i^{|β_i|}`, with per-factor degree `≤ degree`.
    pub fn point_mass(zeta: &[C64], degree: usize) -> Result<Self> {
        if zeta.is_empty() || zeta.iter().any(|z| z.norm() > 1.0 + 1e-12) {
            return Err(Error::InvalidArgument("point mass needs 1 <= k and |ζ_i| <= 1".into()));
        }
        let n = vec![1; zeta.len()];
        let mut values = BTreeMap::new();
        for (a, b) in lambda_pairs_box(&n, &vec![degree; n.len()]) {
            let mut v = c64(1.0, 0.0);
            for (i, z) in zeta.iter().enumerate() {
                v *= z.conj().powu(a.part(i).len() as u32) * z.powu(b.part(i).len() as u32);
            }
            values.insert((a, b), CMat::from_element(1, 1, v));
        }
        let tail = TailModel {
            degree,
            coeff_bound: 1.0,
            decay: zeta.iter().map(|z| z.norm()).collect(),
        };
        CbMapData::new(&n, 1, values, false, Some(tail))
    }

    /// Compression data `μ(R*_α̃ R_β̃) = W* V*_α̃ V_β̃ W` for row contractions `V`, with per-factor
    /// degree `≤ degree`.
    pub fn compression(v: &[Vec<CMat>], w: &CMat, degree: usize) -> Result<Self> {
        let n: Vec<usize> = v.iter().map(Vec::len).collect();
        check_tuple(v, &n)?;
        for row in v {
            let g = row.iter().fold(CMat::zeros(w.nrows(), w.nrows()), |acc, m| acc + m * m.adjoint());
            if op_norm(&g) > 1.0 + 1e-10 {
                return Err(Error::InvalidArgument("compression data needs row contractions".into()));
            }
        }
        let caps = vec![degree; n.len()];
        let row_norm = |row: &Vec<CMat>| {
            let g = row.iter().fold(CMat::zeros(w.nrows(), w.nrows()), |acc, m| acc + m * m.adjoint());
            op_norm(&g).sqrt()
        };
        let s = compression_symbol(v, w, enumerate_box(&n, &caps), lambda_pairs_box(&n, &caps))?;
        let values = s.iter().map(|(a, b, m)| ((a.clone(), b.clone()), m.clone())).collect();
        let tail = TailModel {
            degree,
            coeff_bound: op_norm(w).powi(2),
            decay: v.iter().map(row_norm).collect(),
        };
        CbMapData::new(&n, s.e_dim(), values, false, Some(tail))
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn e_dim(&self) -> usize {
        self.e_dim
    }

    pub fn herglotz_class(&self) -> bool {
        self.herglotz_class
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    pub fn unit(&self) -> &CMat {
        let g = MultiWord::identity(&self.n);
        &self.values[&(g.clone(), g)]
    }

    pub fn get(&self, a: &MultiWord, b: &MultiWord) -> Option<&CMat> {
        self.values.get(&(a.clone(), b.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiWord, &MultiWord, &CMat)> {
        self.values.iter().map(|((a, b), m)| (a, b, m))
    }

    /// The symbol `A_(α;β) = μ(R*_α̃ R_β̃)` of the Poisson transform.
    pub fn to_symbol(&self) -> MultiToeplitzSymbol {
        let mut s = MultiToeplitzSymbol::new(&self.n, self.e_dim).expect("validated shape");
        for ((a, b), m) in &self.values {
            s.insert(a.clone(), b.clone(), m.clone()).expect("validated pair");
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let values: Vec<Value> = self
            .values
            .iter()
            .map(|((a, b), m)| json!({"alpha": a.to_json(), "beta": b.to_json(), "matrix": to_interleaved(m)}))
            .collect();
        json!({
            "n": self.n,
            "e_dim": self.e_dim,
            "unit": to_interleaved(self.unit()),
            "herglotz_class": self.herglotz_class,
            "tail": self.tail,
            "values": values,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = json_usizes(v, "n")?;
        let e = v
            .get("e_dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("missing e_dim".into()))? as usize;
        let mut values = BTreeMap::new();
        if let Some(u) = v.get("unit") {
            let data: Vec<f64> = serde_json::from_value(u.clone())?;
            let g = MultiWord::identity(&n);
            values.insert((g.clone(), g), from_interleaved(e, &data)?);
        }
        if let Some(list) = v.get("values").and_then(Value::as_array) {
            for item in list {
                let a = MultiWord::from_json(&n, item.get("alpha").unwrap_or(&Value::Null))?;
                let b = MultiWord::from_json(&n, item.get("beta").unwrap_or(&Value::Null))?;
                let data: Vec<f64> =
                    serde_json::from_value(item.get("matrix").cloned().unwrap_or(Value::Null))?;
                values.insert((a, b), from_interleaved(e, &data)?);
            }
        }
        let herglotz = v.get("herglotz_class").and_then(Value::as_bool).unwrap_or(false);
        let tail = match v.get("tail") {
            None | Some(Value::Null) => None,
            Some(t) => Some(TailModel {
                degree: t
                    .get("degree")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Json("tail needs degree".into()))? as usize,
                coeff_bound: t
                    .get("coeff_bound")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::Json("tail needs coeff_bound".into()))?,
                decay: match t.get("decay") {
                    None | Some(Value::Null) => vec![1.0; n.len()],
                    Some(d) => serde_json::from_value(d.clone())?,
                },
            }),
        };
        CbMapData::new(&n, e, values, herglotz, tail)
    }
}

/// `μ_r(R*_α̃ R_β̃) = r^{|α|+|β|} μ(R*_α̃ R_β̃)`.
pub fn mu_r_scale(mu: &CbMapData, r: f64) -> Result<CbMapData> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("r = {r} outside [0, 1]")));
    }
    let mut out = mu.clone();
    for ((a, b), m) in out.values.iter_mut() {
        *m *= c64(r.powi((a.total_len() + b.total_len()) as i32), 0.0);
    }
    if let Some(tm) = out.tail.as_mut() {
        tm.decay.iter_mut().for_each(|d| *d *= r);
    }
    Ok(out)
}

/// The data `ν_{F_r}(R*_α̃ R_β̃) = r^{|α|+|β|} A_(α;β)`.
pub fn nu_of(f: &PluriharmonicFunction, r: f64) -> Result<CbMapData> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("r = {r} outside [0, 1]")));
    }
    let s = f.symbol.scaled(r);
    let mut values: BTreeMap<(MultiWord, MultiWord), CMat> =
        s.iter().map(|(a, b, m)| ((a.clone(), b.clone()), m.clone())).collect();
    let g = MultiWord::identity(s.n());
    values
        .entry((g.clone(), g))
        .or_insert_with(|| CMat::zeros(s.e_dim(), s.e_dim()));
    CbMapData::new(s.n(), s.e_dim(), values, false, None)
}

/// The one-sided values `ν(R*_α̃)` and `ν(R_α̃)` read from the vacuum column and row of
/// `F(rR)` on a truncation, i.e. `(id ⊗ τ)[(I ⊗ R_α*) F(rR)]` and `(id ⊗ τ)[F(rR)(I ⊗ R_α)]`.
pub fn nu_trace_form(f: &PluriharmonicFunction, r: f64, t: &FockTruncation) -> Result<CbMapData> {
    let x = PolyballPoint::creation(t, Side::Right, r)?;
    let fr = f.fitting(t)?;
    let op = evaluate_symbol(&fr, &x)?;
    let e = fr.e_dim();
    let g = MultiWord::identity(t.n());
    let mut values = BTreeMap::new();
    for a in t.basis() {
        let idx = t.basis_index(&a.reverse())?;
        let col = op.view((idx * e, 0), (e, e)).into_owned();
        let row = op.view((0, idx * e), (e, e)).into_owned();
        values.insert((a.clone(), g.clone()), col);
        if !a.is_identity() {
            values.insert((g.clone(), a), row);
        }
    }
    CbMapData::new(t.n(), e, values, false, None)
}

/// A transform value on `H ⊗ E` (H major) with a bound on the truncation error.
#[derive(Clone, Debug)]
pub struct TransformValue {
    pub value: CMat,
    pub tail_bound: f64,
}

/// Per-factor `(c_i, q_i)` with `Σ_{|w|=m} ‖X_{i,w}‖ ≤ c_i q_i^m`.
fn factor_growth(x: &PolyballPoint) -> Vec<(f64, f64)> {
    let rho = x.row_norms();
    x.n()
        .iter()
        .zip(rho)
        .map(|(&ni, r)| {
            if ni == 1 {
                (1.0, r)
            } else {
                ((x.h_dim() as f64).sqrt(), (ni as f64).sqrt() * r)
            }
        })
        .collect()
}

/// Bound on `Σ ‖μ‖‖X_α X_β*‖` over terms with some `|α_i|` or `|β_i|` above the degree.
/// With `two_sided` each factor contributes either side; otherwise only `α`.
fn omitted_bound(x: &PolyballPoint, tail: Option<&TailModel>, two_sided: bool) -> Result<f64> {
    let tm = match tail {
        None => return Ok(0.0),
        Some(tm) => tm,
    };
    let growth = factor_growth(x);
    let sides = if two_sided { 2.0 } else { 1.0 };
    let mut full = 1.0;
    let mut inside = 1.0;
    for (&(c, q0), &d) in growth.iter().zip(&tm.decay) {
        let q = q0 * d;
        if q >= 1.0 {
            return Err(Error::Divergence(format!(
                "row growth rate {q} >= 1, the transform series does not converge"
            )));
        }
        let head: f64 = (1..=tm.degree).map(|m| q.powi(m as i32)).sum();
        full *= 1.0 + sides * c * q / (1.0 - q);
        inside *= 1.0 + sides * c * head;
    }
    Ok(tm.coeff_bound * (full - inside).max(0.0))
}

/// `(Pμ)(X) = Σ_Λ X_α X_β* ⊗ μ(R*_α̃ R_β̃)`.
pub fn poisson_transform(mu: &CbMapData, x: &PolyballPoint) -> Result<TransformValue> {
    let value = evaluate_symbol(&mu.to_symbol(), x)?;
    Ok(TransformValue {
        value,
        tail_bound: omitted_bound(x, mu.tail.as_ref(), true)?,
    })
}

/// `(Fμ)(X) = Σ_α X_α ⊗ μ(R*_α̃)`, reading only annihilation values.
pub fn fantappie_transform(mu: &CbMapData, x: &PolyballPoint) -> Result<TransformValue> {
    if x.n() != mu.n() {
        return Err(Error::ShapeMismatch("point and data shapes differ".into()));
    }
    let g = MultiWord::identity(mu.n());
    let h = x.h_dim();
    let e = mu.e_dim();
    let terms: Vec<(&MultiWord, &CMat)> = mu
        .iter()
        .filter(|(_, b, _)| **b == g)
        .map(|(a, _, m)| (a, m))
        .collect();
    let value = terms
        .par_iter()
        .map(|(a, m)| -> Result<CMat> { Ok(kron(&x.monomial(a)?, m)) })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(CMat::zeros(h * e, h * e), |acc, v| acc + v);
    Ok(TransformValue {
        value,
        tail_bound: omitted_bound(x, mu.tail.as_ref(), false)?,
    })
}

/// `(Hμ)(X) = 2(Fμ)(X) − I ⊗ μ(I)`.
pub fn herglotz_transform(mu: &CbMapData, x: &PolyballPoint) -> Result<TransformValue> {
    let f = fantappie_transform(mu, x)?;
    Ok(TransformValue {
        value: f.value * c64(2.0, 0.0) - kron(&identity(x.h_dim()), mu.unit()),
        tail_bound: 2.0 * f.tail_bound,
    })
}

/// `∏_i (I − Σ_j V_{i,j} ⊗ X_{i,j})^{-1}` on `K ⊗ H` (K major), by LU solves.
pub fn resolvent_product(v: &[Vec<CMat>], x: &PolyballPoint) -> Result<CMat> {
    let kd = check_tuple(v, x.n())?;
    let dim = kd * x.h_dim();
    let mut prod = identity(dim);
    for i in (0..x.k()).rev() {
        let mut a = identity(dim);
        for (vij, xij) in v[i].iter().zip(&x.entries()[i]) {
            a -= kron(vij, xij);
        }
        prod = lu_solve(&a, &prod)?;
    }
    Ok(prod)
}

/// `μ̂[A] = Σ_Λ A_(α;β) ⊗ μ(R*_α̃ R_β̃)` for `A` on `truncation ⊗ H` (truncation major), where
/// `A_(α;β)` is the block at row `e_β`, column `e_α`. Output on `H ⊗ E`.
pub fn apply_mu_hat(mu: &CbMapData, a: &CMat, t: &FockTruncation, h_dim: usize) -> Result<CMat> {
    if t.n() != mu.n() || a.nrows() != t.dim() * h_dim || a.ncols() != t.dim() * h_dim {
        return Err(Error::ShapeMismatch("operator does not act on truncation ⊗ H".into()));
    }
    let e = mu.e_dim();
    let mut out = CMat::zeros(h_dim * e, h_dim * e);
    for (al, be, m) in mu.iter() {
        if !t.contains(al) || !t.contains(be) {
            continue;
        }
        let r = t.basis_index(be)?;
        let c = t.basis_index(al)?;
        let blk = a.view((r * h_dim, c * h_dim), (h_dim, h_dim)).into_owned();
        out += kron(&blk, m);
    }
    Ok(out)
}

/// Fantappiè transform through `μ̂` applied to the resolvent product of truncated `R*`.
pub fn fantappie_resolvent(mu: &CbMapData, x: &PolyballPoint, t: &FockTruncation) -> Result<CMat> {
    let v: Vec<Vec<CMat>> = (1..=t.k())
        .map(|i| {
            (1..=t.n()[i - 1])
                .map(|j| t.creation_matrix(Side::Right, i, j, true))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let res = resolvent_product(&v, x)?;
    let g = MultiWord::identity(mu.n());
    let one_sided = CbMapData {
        values: mu
            .values
            .iter()
            .filter(|((_, b), _)| *b == g)
            .map(|(k, m)| (k.clone(), m.clone()))
            .collect(),
        ..mu.clone()
    };
    apply_mu_hat(&one_sided, &res, t, x.h_dim())
}

fn compress_and_swap(m: &CMat, w: &CMat, h: usize) -> CMat {
    let wh = kron(w, &identity(h));
    let c = wh.adjoint() * m * &wh;
    swap_tensor(&c, w.ncols(), h)
}

/// `(W*⊗I) ∏_i(I − Σ_j T_{i,j}* ⊗ X_{i,j})^{-1} (W⊗I)` on `H ⊗ E`: the Fantappiè transform of
/// the compression data of `T`.
pub fn fantappie_from_tuple(t: &[Vec<CMat>], w: &CMat, x: &PolyballPoint) -> Result<CMat> {
    let ta: Vec<Vec<CMat>> = t.iter().map(|row| row.iter().map(|m| m.adjoint()).collect()).collect();
    let res = resolvent_product(&ta, x)?;
    Ok(compress_and_swap(&res, w, x.h_dim()))
}

/// `2·fantappie_from_tuple − I ⊗ W*W`.
pub fn herglotz_from_tuple(t: &[Vec<CMat>], w: &CMat, x: &PolyballPoint) -> Result<CMat> {
    let f = fantappie_from_tuple(t, w, x)?;
    Ok(f * c64(2.0, 0.0) - kron(&identity(x.h_dim()), &(w.adjoint() * w)))
}

/// `(W*⊗I) C_X(V)* C_X(V) (W⊗I)` on `H ⊗ E`.
pub fn poisson_from_tuple(v: &[Vec<CMat>], w: &CMat, x: &PolyballPoint) -> Result<CMat> {
    let c = cauchy_operator(v, x)?;
    Ok(compress_and_swap(&(c.adjoint() * c), w, x.h_dim()))
}
