//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Clamp threshold for eigenvalues when taking square roots of PSD matrices.
pub const SQRT_CLAMP: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn scalar(z: C64) -> CMat {
    CMat::from_element(1, 1, z)
}

/// Kronecker product with `a` as the major (slow) index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Returns the Hermitian part `(m + m*)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eig(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn max_eig(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Square root of a PSD matrix; eigenvalues below [`SQRT_CLAMP`] are set to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eig(m);
    let d: Vec<C64> = vals
        .iter()
        .map(|&l| c64(if l > SQRT_CLAMP { l.sqrt() } else { 0.0 }, 0.0))
        .collect();
    let dm = CMat::from_diagonal(&CVec::from_vec(d));
    &vecs * dm * vecs.adjoint()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator (spectral) norm.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    // the smaller Gram matrix keeps the eigenproblem cheap
    let g = if m.nrows() >= m.ncols() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    max_eig(&g).max(0.0).sqrt()
}

pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Orthonormal basis of the column space, cutting singular values below
/// `rel_tol * largest`.
pub fn column_basis(m: &CMat, rel_tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let g = m * m.adjoint();
    let (vals, vecs) = hermitian_eig(&g);
    let top = vals.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let keep: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i] > rel_tol * rel_tol * top)
        .collect();
    let mut out = CMat::zeros(m.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &vecs.column(i));
    }
    out
}

pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    column_basis(m, rel_tol).ncols()
}

/// Moore-Penrose pseudo-inverse with singular values below `cut` treated as zero.
pub fn pinv(m: &CMat, cut: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            let col = vt.row(i).adjoint() * (u.column(i).adjoint() / c64(s, 0.0));
            out += col;
        }
    }
    out
}

/// Solves `a x = b` by LU; on failure reports the smallest singular value of `a`.
pub fn lu_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let lu = a.clone().lu();
    match lu.solve(b) {
        Some(x) if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => Ok(x),
        _ => Err(Error::SingularResolvent {
            min_singular_value: min_singular_value(a),
        }),
    }
}

/// Reorders an operator on `A ⊗ B` (A major) into the same operator on `B ⊗ A`.
pub fn swap_tensor(m: &CMat, a: usize, b: usize) -> CMat {
    assert_eq!(m.nrows(), a * b);
    assert_eq!(m.ncols(), a * b);
    let mut out = CMat::zeros(a * b, a * b);
    for i in 0..a {
        for j in 0..b {
            let r_old = i * b + j;
            let r_new = j * a + i;
            for k in 0..a {
                for l in 0..b {
                    out[(r_new, l * a + k)] = m[(r_old, k * b + l)];
                }
            }
        }
    }
    out
}

/// Compression `basis* m basis`.
pub fn compress(m: &CMat, basis: &CMat) -> CMat {
    basis.adjoint() * m * basis
}

/// Principal submatrix on the given index list.
pub fn submatrix(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn to_interleaved(m: &CMat) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)].re);
            v.push(m[(r, c)].im);
        }
    }
    v
}

pub fn from_interleaved(dim: usize, data: &[f64]) -> Result<CMat> {
    if data.len() != 2 * dim * dim {
        return Err(Error::Json(format!(
            "expected {} numbers for a {dim}x{dim} complex matrix, got {}",
            2 * dim * dim,
            data.len()
        )));
    }
    Ok(CMat::from_fn(dim, dim, |r, c| {
        let k = 2 * (r * dim + c);
        c64(data[k], data[k + 1])
    }))
}

/// Largest `|a - b|` entry, with a shape check.
pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_diff shape mismatch");
    max_abs(&(a - b))
}
