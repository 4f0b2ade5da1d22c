//! Polyball points, defect maps, Berezin kernels and transforms, the joint spectral
//! radius, the Cauchy-type operator `C_X` and the free pluriharmonic Poisson kernel.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fock::{exact_window, json_usizes, FockMap, FockOperator, FockTruncation, FockVector};
use crate::linalg::{
    c64, from_interleaved, hermitian_eig, identity, kron, lu_solve, max_eig, min_eig, op_norm,
    psd_sqrt, submatrix, to_interleaved, CMat, CVec, SQRT_CLAMP,
};
use crate::words::{enumerate_words, quotients, MultiWord, Side, Word};

/// Cross-factor commutators above this norm disqualify a tuple.
pub const COMMUTATION_TOL: f64 = 1e-9;

/// Added to truncation bounds that can be attained exactly, to cover floating-point error and the
/// defect eigenvalues dropped below `SQRT_CLAMP`.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Norm below which `Φ_i^q(I)` counts as exactly zero.
const NILPOTENT_TOL: f64 = 1e-26;

/// A k-tuple of operator rows `X_i = (X_{i,1}, …, X_{i,n_i})` on `C^h_dim`.
#[derive(Clone, Debug)]
pub struct PolyballPoint {
    n: Vec<usize>,
    h_dim: usize,
    x: Vec<Vec<CMat>>,
}

impl PolyballPoint {
    pub fn new(x: Vec<Vec<CMat>>) -> Result<Self> {
        if x.is_empty() || x.iter().any(Vec::is_empty) {
            return Err(Error::ShapeMismatch("every factor needs at least one entry".into()));
        }
        let h = x[0][0].nrows();
        for row in &x {
            for m in row {
                if m.nrows() != h || m.ncols() != h {
                    return Err(Error::ShapeMismatch(format!(
                        "entry of size {}x{} in a tuple on C^{h}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
            }
        }
        Ok(PolyballPoint {
            n: x.iter().map(Vec::len).collect(),
            h_dim: h,
            x,
        })
    }

    pub fn zero(n: &[usize], h_dim: usize) -> Self {
        PolyballPoint {
            n: n.to_vec(),
            h_dim,
            x: n.iter().map(|&ni| vec![CMat::zeros(h_dim, h_dim); ni]).collect(),
        }
    }

    /// Scalar tuple (h_dim = 1).
    pub fn from_scalars(z: &[Vec<crate::linalg::C64>]) -> Result<Self> {
        PolyballPoint::new(
            z.iter()
                .map(|row| row.iter().map(|&v| CMat::from_element(1, 1, v)).collect())
                .collect(),
        )
    }

    /// `r·S` (left) or `r·R` (right) on a truncation.
    pub fn creation(t: &FockTruncation, side: Side, r: f64) -> Result<Self> {
        let mut x = Vec::with_capacity(t.k());
        for i in 1..=t.k() {
            let mut row = Vec::with_capacity(t.n()[i - 1]);
            for j in 1..=t.n()[i - 1] {
                row.push(t.creation_matrix(side, i, j, false)? * c64(r, 0.0));
            }
            x.push(row);
        }
        PolyballPoint::new(x)
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn h_dim(&self) -> usize {
        self.h_dim
    }

    /// `X_{i,j}` with 0-based indices.
    pub fn get(&self, i: usize, j: usize) -> &CMat {
        &self.x[i][j]
    }

    pub fn entries(&self) -> &[Vec<CMat>] {
        &self.x
    }

    pub fn scaled(&self, r: f64) -> PolyballPoint {
        PolyballPoint {
            n: self.n.clone(),
            h_dim: self.h_dim,
            x: self
                .x
                .iter()
                .map(|row| row.iter().map(|m| m * c64(r, 0.0)).collect())
                .collect(),
        }
    }

    fn check_word(&self, w: &MultiWord) -> Result<()> {
        if w.shape() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "word {w} for a point of shape {:?}",
                self.n
            )));
        }
        Ok(())
    }

    /// `X_{i,w} = X_{i,j_1}⋯X_{i,j_p}` (0-based factor).
    pub fn factor_word(&self, i: usize, w: &Word) -> CMat {
        let mut m = identity(self.h_dim);
        for &j in w.letters() {
            m *= &self.x[i][j - 1];
        }
        m
    }

    /// `X_α = X_{1,α_1}⋯X_{k,α_k}`.
    pub fn monomial(&self, a: &MultiWord) -> Result<CMat> {
        self.check_word(a)?;
        let mut m = identity(self.h_dim);
        for (i, w) in a.parts().iter().enumerate() {
            m *= self.factor_word(i, w);
        }
        Ok(m)
    }

    /// `X*_{1,β_1}⋯X*_{k,β_k}`.
    pub fn monomial_adjoint(&self, b: &MultiWord) -> Result<CMat> {
        self.check_word(b)?;
        let mut m = identity(self.h_dim);
        for (i, w) in b.parts().iter().enumerate() {
            m *= self.factor_word(i, w).adjoint();
        }
        Ok(m)
    }

    /// `X_α X*_{1,β_1}⋯X*_{k,β_k}`.
    pub fn monomial_pair(&self, a: &MultiWord, b: &MultiWord) -> Result<CMat> {
        Ok(self.monomial(a)? * self.monomial_adjoint(b)?)
    }

    /// `Φ_{X_i}(Y) = Σ_j X_{i,j} Y X_{i,j}*` (0-based factor).
    pub fn phi(&self, i: usize, y: &CMat) -> CMat {
        let mut out = CMat::zeros(self.h_dim, self.h_dim);
        for m in &self.x[i] {
            out += m * y * m.adjoint();
        }
        out
    }

    /// `‖Σ_j X_{i,j}X_{i,j}*‖^{1/2}` per factor.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.k())
            .map(|i| max_eig(&self.phi(i, &identity(self.h_dim))).max(0.0).sqrt())
            .collect()
    }

    /// Largest cross-factor commutator norm.
    pub fn commutation_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.k() {
            for i2 in (i + 1)..self.k() {
                for a in &self.x[i] {
                    for b in &self.x[i2] {
                        worst = worst.max(op_norm(&(a * b - b * a)));
                    }
                }
            }
        }
        worst
    }

    /// `‖Φ_i^q(I)‖` for each factor.
    pub fn phi_power_norms(&self, q: &[usize]) -> Vec<f64> {
        (0..self.k())
            .map(|i| {
                let mut y = identity(self.h_dim);
                for _ in 0..q[i] {
                    y = self.phi(i, &y);
                }
                max_eig(&y).max(0.0)
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "h_dim": self.h_dim,
            "X": self.x.iter().map(|row| row.iter().map(to_interleaved).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = json_usizes(v, "n")?;
        let h = v
            .get("h_dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("missing h_dim".into()))? as usize;
        let rows = v
            .get("X")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing X".into()))?;
        if rows.len() != n.len() {
            return Err(Error::Json(format!("X has {} rows, n has {}", rows.len(), n.len())));
        }
        let mut x = Vec::with_capacity(n.len());
        for (row, &ni) in rows.iter().zip(&n) {
            let mats = row
                .as_array()
                .filter(|a| a.len() == ni)
                .ok_or_else(|| Error::Json(format!("row must hold {ni} matrices")))?;
            let mut r = Vec::with_capacity(ni);
            for m in mats {
                let data: Vec<f64> = serde_json::from_value(m.clone())?;
                r.push(from_interleaved(h, &data)?);
            }
            x.push(r);
        }
        PolyballPoint::new(x)
    }
}

/// `Δ_X(I) = (id − Φ_{X_1})∘⋯∘(id − Φ_{X_k})(I)`.
pub fn defect(x: &PolyballPoint) -> CMat {
    let order: Vec<usize> = (0..x.k()).collect();
    defect_ordered(x, &order)
}

/// Defect with the factor maps composed in the given left-to-right order (0-based).
pub fn defect_ordered(x: &PolyballPoint, order: &[usize]) -> CMat {
    let mut y = identity(x.h_dim());
    for &i in order.iter().rev() {
        y = &y - x.phi(i, &y);
    }
    y
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    pub row_norms: Vec<f64>,
    pub defect_min_eig: f64,
    pub commutation_defect: f64,
}

pub fn in_polyball(x: &PolyballPoint, margin: f64) -> MembershipReport {
    let row_norms = x.row_norms();
    let defect_min_eig = min_eig(&defect(x));
    let commutation_defect = x.commutation_defect();
    let member = row_norms.iter().all(|&r| r < 1.0 - margin)
        && defect_min_eig > margin
        && commutation_defect <= COMMUTATION_TOL;
    MembershipReport {
        member,
        row_norms,
        defect_min_eig,
        commutation_defect,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralRadiusReport {
    pub estimate: f64,
    pub last_two: [f64; 2],
    /// `‖Σ_{|α_i|=p} X_αX_α*‖^{1/(2kp)}` for p = 1..=max_p.
    pub sequence: Vec<f64>,
}

/// Joint spectral radius estimate along the diagonal `p_1 = … = p_k = p ≤ max_p`.
pub fn spectral_radius(x: &PolyballPoint, max_p: usize) -> Result<SpectralRadiusReport> {
    if max_p < 2 {
        return Err(Error::InvalidArgument("max_p must be >= 2".into()));
    }
    let k = x.k();
    let mut sequence = Vec::with_capacity(max_p);
    for p in 1..=max_p {
        let mut y = identity(x.h_dim());
        for i in (0..k).rev() {
            for _ in 0..p {
                y = x.phi(i, &y);
            }
        }
        let nrm = max_eig(&y).max(0.0);
        sequence.push(nrm.powf(1.0 / (2.0 * (k * p) as f64)));
    }
    let estimate = sequence.iter().copied().fold(0.0, f64::max);
    let last_two = [sequence[max_p - 2], sequence[max_p - 1]];
    Ok(SpectralRadiusReport {
        estimate,
        last_two,
        sequence,
    })
}

/// Matrix of `K_X : H → truncation ⊗ D` where `D` is the range of `Δ_X(I)`.
#[derive(Clone, Debug)]
pub struct BerezinKernelMatrix {
    pub truncation: FockTruncation,
    pub h_dim: usize,
    pub defect_rank: usize,
    /// Rows indexed basis-major, defect-minor; `h_dim` columns.
    pub matrix: CMat,
    /// True when every omitted term vanishes (nilpotent point).
    pub exact: bool,
    /// Upper bound for `‖I − K*K‖`.
    pub tail_bound: f64,
}

/// Products `X_{i,w}` for every word of factor `i` up to degree `d`, in graded-lex order.
fn factor_products(x: &PolyballPoint, i: usize, d: usize) -> Vec<CMat> {
    let words = enumerate_words(x.n()[i], d);
    let mut out: Vec<CMat> = Vec::with_capacity(words.len());
    let n = x.n()[i];
    let mut offsets = vec![0usize; d + 2];
    let mut p = 1;
    for len in 0..=d {
        offsets[len + 1] = offsets[len] + p;
        p *= n;
    }
    for w in &words {
        if w.is_identity() {
            out.push(identity(x.h_dim()));
        } else {
            let l = w.letters();
            let rest = Word::new(n, l[1..].to_vec()).expect("valid letters");
            let ri = offsets[rest.len()] + rest.lex_rank();
            out.push(x.get(i, l[0] - 1) * &out[ri]);
        }
    }
    out
}

pub fn berezin_kernel(x: &PolyballPoint, t: &FockTruncation) -> Result<BerezinKernelMatrix> {
    if t.n() != x.n() {
        return Err(Error::ShapeMismatch(format!(
            "truncation shape {:?} vs point shape {:?}",
            t.n(),
            x.n()
        )));
    }
    let q: Vec<usize> = t.degrees().iter().map(|d| d + 1).collect();
    let tails = x.phi_power_norms(&q);
    let exact = tails.iter().all(|&v| v <= NILPOTENT_TOL);
    let rho = x.row_norms().into_iter().fold(0.0, f64::max);
    if !exact && rho >= 1.0 {
        return Err(Error::Divergence(format!(
            "max row norm {rho} >= 1 and the point is not nilpotent within the truncation"
        )));
    }
    let tail_bound = if exact {
        0.0
    } else {
        tails.iter().map(|v| 1.0 + v).product::<f64>() - 1.0 + ROUNDING_SLACK
    };

    let (vals, vecs) = hermitian_eig(&defect(x));
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > SQRT_CLAMP).collect();
    let dr = keep.len();
    let h = x.h_dim();
    // Δ^{1/2} restricted to its range: diag(√λ) U*
    let mut half = CMat::zeros(dr, h);
    for (r, &i) in keep.iter().enumerate() {
        let row = vecs.column(i).adjoint() * c64(vals[i].sqrt(), 0.0);
        half.set_row(r, &row);
    }

    let prods: Vec<Vec<CMat>> = (0..x.k())
        .map(|i| factor_products(x, i, t.degrees()[i]))
        .collect();
    let basis = t.basis();
    let mut matrix = CMat::zeros(t.dim() * dr, h);
    for (idx, w) in basis.iter().enumerate() {
        let mut m = half.clone();
        for (i, p) in w.parts().iter().enumerate() {
            let fi = word_slot(p, x.n()[i]);
            m *= prods[i][fi].adjoint();
        }
        matrix.view_mut((idx * dr, 0), (dr, h)).copy_from(&m);
    }
    Ok(BerezinKernelMatrix {
        truncation: t.clone(),
        h_dim: h,
        defect_rank: dr,
        matrix,
        exact,
        tail_bound,
    })
}

fn word_slot(w: &Word, n: usize) -> usize {
    let mut off = 0;
    let mut p = 1;
    for _ in 0..w.len() {
        off += p;
        p *= n;
    }
    off + w.lex_rank()
}

impl BerezinKernelMatrix {
    /// The `h_dim` columns as vectors in `truncation ⊗ D`.
    pub fn columns(&self) -> Vec<FockVector> {
        (0..self.h_dim)
            .map(|c| FockVector {
                dim: self.truncation.dim(),
                coeff_dim: self.defect_rank,
                data: CVec::from_iterator(self.matrix.nrows(), self.matrix.column(c).iter().copied()),
            })
            .collect()
    }

    /// Rows belonging to the given basis indices (all defect slots).
    pub fn rows_for(&self, basis_indices: &[usize]) -> CMat {
        let dr = self.defect_rank;
        let rows: Vec<usize> = basis_indices
            .iter()
            .flat_map(|&b| (0..dr).map(move |d| b * dr + d))
            .collect();
        let cols: Vec<usize> = (0..self.h_dim).collect();
        submatrix(&self.matrix, &rows, &cols)
    }
}

/// `B_X[g] = K*(g ⊗ I)K` for a scalar operator `g` on the kernel's truncation.
pub fn berezin_transform(g: &dyn FockMap, kernel: &BerezinKernelMatrix) -> Result<CMat> {
    if g.truncation() != &kernel.truncation {
        return Err(Error::ShapeMismatch("operator and kernel truncations differ".into()));
    }
    let mut y = CMat::zeros(kernel.matrix.nrows(), kernel.h_dim);
    for (c, col) in kernel.columns().iter().enumerate() {
        let gv = g.apply_to(col)?;
        y.set_column(c, &gv.data);
    }
    Ok(kernel.matrix.adjoint() * y)
}

/// `B^ext[u] = (I_E ⊗ K*)(u ⊗ I)(I_E ⊗ K)` for `u` on `truncation ⊗ E`; result on `H ⊗ E`.
pub fn berezin_transform_ext(u: &FockOperator, kernel: &BerezinKernelMatrix) -> Result<CMat> {
    if u.truncation != kernel.truncation {
        return Err(Error::ShapeMismatch("operator and kernel truncations differ".into()));
    }
    let e = u.coeff_dim;
    let h = kernel.h_dim;
    let d = kernel.truncation.dim();
    let dr = kernel.defect_rank;
    let mut out = CMat::zeros(h * e, h * e);
    for e1 in 0..e {
        for e2 in 0..e {
            let g = CMat::from_fn(d, d, |r, c| u.matrix[(r * e + e1, c * e + e2)]);
            let mut b = CMat::zeros(h, h);
            for s in 0..dr {
                let rows: Vec<usize> = (0..d).map(|r| r * dr + s).collect();
                let ks = submatrix(&kernel.matrix, &rows, &(0..h).collect::<Vec<_>>());
                b += ks.adjoint() * &g * &ks;
            }
            for a in 0..h {
                for a2 in 0..h {
                    out[(a * e + e1, a2 * e + e2)] = b[(a, a2)];
                }
            }
        }
    }
    Ok(out)
}

/// Bound on `‖B_X(S_αS_β*) − X_αX_β*‖` caused by truncation.
pub fn moment_tail_bound(
    x: &PolyballPoint,
    t: &FockTruncation,
    a: &MultiWord,
    b: &MultiWord,
) -> Result<f64> {
    if !t.contains(a) || !t.contains(b) {
        return Err(Error::WordOutOfRange {
            word: format!("{a} / {b}"),
            degrees: t.degrees().to_vec(),
        });
    }
    let q: Vec<usize> = (0..t.k())
        .map(|i| t.degrees()[i] - a.part(i).len().max(b.part(i).len()) + 1)
        .collect();
    let tails = x.phi_power_norms(&q);
    if tails.iter().all(|&v| v <= NILPOTENT_TOL) {
        return Ok(0.0);
    }
    let g = tails.iter().map(|v| 1.0 + v).product::<f64>() - 1.0 + ROUNDING_SLACK;
    Ok(op_norm(&x.monomial(a)?) * op_norm(&x.monomial_adjoint(b)?) * g)
}

fn check_tuple(v: &[Vec<CMat>], x: &PolyballPoint) -> Result<usize> {
    if v.len() != x.k() || v.iter().zip(x.n()).any(|(row, &ni)| row.len() != ni) {
        return Err(Error::ShapeMismatch("operator tuple shape differs from the point".into()));
    }
    let kd = v[0][0].nrows();
    if v.iter().flatten().any(|m| m.nrows() != kd || m.ncols() != kd) {
        return Err(Error::ShapeMismatch("tuple entries must share one square size".into()));
    }
    Ok(kd)
}

/// `C_X(V) = (I ⊗ Δ_X(I)^{1/2}) ∏_i (I − Σ_j V_{i,j} ⊗ X_{i,j}*)^{-1}` on `K ⊗ H` (K major).
pub fn cauchy_operator(v: &[Vec<CMat>], x: &PolyballPoint) -> Result<CMat> {
    let kd = check_tuple(v, x)?;
    let h = x.h_dim();
    let dim = kd * h;
    let mut prod = identity(dim);
    for i in (0..x.k()).rev() {
        let mut a = identity(dim);
        for (vij, xij) in v[i].iter().zip(&x.entries()[i]) {
            a -= kron(vij, &xij.adjoint());
        }
        prod = lu_solve(&a, &prod)?;
    }
    let half = psd_sqrt(&defect(x));
    Ok(kron(&identity(kd), &half) * prod)
}

/// Truncated right creations as an operator tuple.
pub fn right_creation_tuple(t: &FockTruncation) -> Result<Vec<Vec<CMat>>> {
    (1..=t.k())
        .map(|i| {
            (1..=t.n()[i - 1])
                .map(|j| t.creation_matrix(Side::Right, i, j, false))
                .collect()
        })
        .collect()
}

/// `C_X` with `V = R` on the truncation, as an operator on `truncation ⊗ H`.
pub fn cauchy_operator_r(x: &PolyballPoint, t: &FockTruncation) -> Result<FockOperator> {
    let c = cauchy_operator(&right_creation_tuple(t)?, x)?;
    FockOperator::new(t.clone(), x.h_dim(), c)
}

#[derive(Clone, Debug)]
pub struct PoissonKernel {
    /// Operator on `truncation ⊗ H`.
    pub operator: FockOperator,
    /// The compression to the truncation omits no term, so this is zero.
    pub tail_bound: f64,
}

/// Compression of `P(R,X) = Σ_Λ R*_{α̃} R_{β̃} ⊗ X_α X_β*` to the truncation.
pub fn poisson_kernel(x: &PolyballPoint, t: &FockTruncation) -> Result<PoissonKernel> {
    if t.n() != x.n() {
        return Err(Error::ShapeMismatch("truncation and point shapes differ".into()));
    }
    let q: Vec<usize> = t.degrees().iter().map(|d| d + 1).collect();
    let nilpotent = x.phi_power_norms(&q).iter().all(|&v| v <= NILPOTENT_TOL);
    let rho = x.row_norms().into_iter().fold(0.0, f64::max);
    if !nilpotent && rho >= 1.0 {
        return Err(Error::Divergence(format!("max row norm {rho} >= 1")));
    }
    let h = x.h_dim();
    let basis = t.basis();
    let mut m = CMat::zeros(t.dim() * h, t.dim() * h);
    for (ci, w) in basis.iter().enumerate() {
        for (ri, g) in basis.iter().enumerate() {
            if let Some((a, b)) = quotients(Side::Left, w, g) {
                let blk = x.monomial_pair(&a, &b)?;
                m.view_mut((ri * h, ci * h), (h, h)).copy_from(&blk);
            }
        }
    }
    let mut op = FockOperator::new(t.clone(), h, m)?;
    op.flags.self_adjoint = true;
    Ok(PoissonKernel {
        operator: op,
        tail_bound: 0.0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationCheck {
    /// `‖Q(P(R,X) − C_X*C_X)Q‖` with `Q` the window projection.
    pub max_error: f64,
    /// Upper bound for the same quantity.
    pub tail_bound: f64,
    pub window_dim: usize,
}

/// Bound for `‖(I − P_{≤d}) C_X Q_b‖²` where `Q_b` projects on the window with raise budget `b`.
pub fn factorization_tail_bound(x: &PolyballPoint, budget: &[usize]) -> Result<f64> {
    const BOX: usize = 48;
    let k = x.k();
    let delta = defect(x);
    let dnorm = max_eig(&delta).max(0.0);
    let rho = x.row_norms();
    let q = vec![BOX + 1; k];
    let nil: Vec<bool> = x.phi_power_norms(&q).iter().map(|&v| v <= NILPOTENT_TOL).collect();
    // exact terms inside the box
    let mut inside = 0.0;
    let mut stack: Vec<(usize, Vec<usize>, CMat)> = vec![(0, Vec::new(), delta.clone())];
    while let Some((i, p, y)) = stack.pop() {
        if i == k {
            if p.iter().zip(budget).any(|(pi, bi)| pi > bi) {
                inside += max_eig(&y).max(0.0).sqrt();
            }
            continue;
        }
        let mut cur = y;
        for pi in 0..=BOX {
            let mut p2 = p.clone();
            p2.push(pi);
            stack.push((i + 1, p2, cur.clone()));
            cur = x.phi(i, &cur);
        }
    }
    let mut outside = 0.0;
    for i in 0..k {
        if nil[i] {
            continue;
        }
        if rho[i] >= 1.0 {
            return Err(Error::Divergence(format!("row norm {} >= 1", rho[i])));
        }
        let mut term = rho[i].powi(BOX as i32 + 1) / (1.0 - rho[i]);
        for i2 in 0..k {
            if i2 == i {
                continue;
            }
            term *= if nil[i2] {
                (0..=BOX).map(|p| rho[i2].powi(p as i32)).sum::<f64>()
            } else {
                1.0 / (1.0 - rho[i2])
            };
        }
        outside += term;
    }
    let t = inside + dnorm.sqrt() * outside;
    Ok(t * t)
}

/// Compares the Poisson kernel with `C_X*C_X` on the window with raise budget `budget`.
pub fn poisson_factorization_check(
    x: &PolyballPoint,
    t: &FockTruncation,
    budget: &[usize],
) -> Result<FactorizationCheck> {
    let window = exact_window(t, budget)?;
    let p = poisson_kernel(x, t)?;
    let c = cauchy_operator_r(x, t)?;
    let cc = c.matrix.adjoint() * &c.matrix;
    let h = x.h_dim();
    let idx: Vec<usize> = window
        .indices(t)
        .iter()
        .flat_map(|&b| (0..h).map(move |e| b * h + e))
        .collect();
    let diff = submatrix(&(&p.operator.matrix - cc), &idx, &idx);
    Ok(FactorizationCheck {
        max_error: op_norm(&diff),
        tail_bound: factorization_tail_bound(x, budget)?,
        window_dim: idx.len(),
    })
}
