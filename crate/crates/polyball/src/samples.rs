//! Seeded random instances: polyball points, nilpotent points, symbols and kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::berezin::PolyballPoint;
use crate::error::Result;
use crate::fock::{apply_word, FockTruncation, FockVector};
use crate::linalg::{c64, identity, kron, op_norm, CMat, CVec};
use crate::naimark::{fill_missing_with_zero, generator_support, Generator};
use crate::toeplitz::MultiToeplitzSymbol;
use crate::words::{lambda_pairs, MultiWord, Side};

/// Independent stream `index` of the generator seeded by `seed`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn hermitian_matrix<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let m = complex_matrix(rng, n, n);
    (&m + m.adjoint()) * c64(0.5, 0.0)
}

pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    complex_matrix(rng, n, n).qr().q()
}

/// `cols` orthonormal vectors in `C^dim`.
pub fn isometry<R: Rng>(rng: &mut R, dim: usize, cols: usize) -> CMat {
    assert!(cols <= dim, "cannot fit {cols} orthonormal columns in C^{dim}");
    complex_matrix(rng, dim, cols).qr().q()
}

fn row_norm(row: &[CMat]) -> f64 {
    let g = row.iter().fold(CMat::zeros(row[0].nrows(), row[0].nrows()), |acc, m| acc + m * m.adjoint());
    op_norm(&g).sqrt()
}

fn scale_row(row: &mut [CMat], target: f64) {
    let r = row_norm(row);
    if r > 0.0 {
        for m in row.iter_mut() {
            *m *= c64(target / r, 0.0);
        }
    }
}

/// Embeds per-factor rows on `C^{dims[i]}` into `⊗_i C^{dims[i]}`, so that factors commute.
fn tensor_point(rows: Vec<Vec<CMat>>, dims: &[usize]) -> Result<PolyballPoint> {
    let x = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let left = identity(dims[..i].iter().product());
            let right = identity(dims[i + 1..].iter().product());
            row.iter().map(|a| kron(&kron(&left, a), &right)).collect()
        })
        .collect();
    PolyballPoint::new(x)
}

/// Random commuting point with factor `i` acting on the `i`-th tensor slot of dimension `dims[i]`;
/// each row norm is uniform in `[0.2, 1] · max_row_norm`.
pub fn polyball_point<R: Rng>(
    rng: &mut R,
    n: &[usize],
    dims: &[usize],
    max_row_norm: f64,
) -> Result<PolyballPoint> {
    let rows = n
        .iter()
        .zip(dims)
        .map(|(&ni, &d)| {
            let mut row: Vec<CMat> = (0..ni).map(|_| complex_matrix(rng, d, d)).collect();
            let target = max_row_norm * rng.gen_range(0.2..=1.0);
            scale_row(&mut row, target);
            row
        })
        .collect();
    tensor_point(rows, dims)
}

/// Strictly upper-triangular entries in each slot: jointly nilpotent, `Φ_i^{dims[i]}(I) = 0`.
pub fn nilpotent_point<R: Rng>(
    rng: &mut R,
    n: &[usize],
    dims: &[usize],
    max_row_norm: f64,
) -> Result<PolyballPoint> {
    let rows = n
        .iter()
        .zip(dims)
        .map(|(&ni, &d)| {
            let mut row: Vec<CMat> = (0..ni)
                .map(|_| {
                    let mut m = complex_matrix(rng, d, d);
                    for r in 0..d {
                        for c in 0..=r {
                            m[(r, c)] = c64(0.0, 0.0);
                        }
                    }
                    m
                })
                .collect();
            if d > 1 {
                scale_row(&mut row, max_row_norm * rng.gen_range(0.2..=1.0));
            }
            row
        })
        .collect();
    tensor_point(rows, dims)
}

/// Scalar point with `|z_i| ≤ max_row_norm` (`n_i = 1` for all `i` unless given otherwise).
pub fn scalar_point<R: Rng>(rng: &mut R, n: &[usize], max_row_norm: f64) -> Result<PolyballPoint> {
    polyball_point(rng, n, &vec![1; n.len()], max_row_norm)
}

/// Hermitian-symmetric symbol supported on Λ-pairs of total length `≤ max_total`.
/// The constant term is `c·I + H` with `c` uniform in `[0, 2·spread]`, so both positive and
/// non-positive functions occur.
pub fn hermitian_symbol<R: Rng>(
    rng: &mut R,
    n: &[usize],
    e_dim: usize,
    max_total: usize,
    spread: f64,
) -> Result<MultiToeplitzSymbol> {
    let mut s = MultiToeplitzSymbol::new(n, e_dim)?;
    for (a, b) in lambda_pairs(n, max_total) {
        if a.is_identity() && b.is_identity() {
            let c = rng.gen_range(0.0..2.0 * spread);
            let m = identity(e_dim) * c64(c, 0.0) + hermitian_matrix(rng, e_dim) * c64(0.3, 0.0);
            s.insert(a, b, m)?;
        } else if b.is_identity() || (!a.is_identity() && a < b) {
            let m = complex_matrix(rng, e_dim, e_dim) * c64(rng.gen_range(0.0..0.5), 0.0);
            s.insert(b.clone(), a.clone(), m.adjoint())?;
            s.insert(a, b, m)?;
        }
    }
    Ok(s)
}

/// Generator of `K(σ,ω) = P_E S_σ* S_ω|_E` for left creations tensored with `C^m`, where `E` is a
/// random `e_dim`-dimensional subspace of the vectors of degree `≤ 1`. Always positive semidefinite.
pub fn psd_left_generator<R: Rng>(
    rng: &mut R,
    n: &[usize],
    e_dim: usize,
    m: usize,
    max_len: usize,
) -> Result<Generator> {
    let t = FockTruncation::new(n, &vec![max_len + 1; n.len()])?;
    let low: Vec<usize> = crate::words::enumerate_total(n, 1)
        .iter()
        .map(|w| t.basis_index(w))
        .collect::<Result<_>>()?;
    let q = isometry(rng, low.len() * m, e_dim);
    let emb: Vec<FockVector> = (0..e_dim)
        .map(|c| {
            let mut data = CVec::zeros(t.dim() * m);
            for (li, &b) in low.iter().enumerate() {
                for e in 0..m {
                    data[b * m + e] = q[(li * m + e, c)];
                }
            }
            FockVector::from_data(&t, m, data)
        })
        .collect::<Result<_>>()?;
    let g = MultiWord::identity(n);
    let words = crate::words::enumerate_total(n, max_len);
    let mut images = std::collections::HashMap::new();
    for w in &words {
        let cols: Vec<CVec> = emb
            .iter()
            .map(|v| apply_word(&t, Side::Left, w, &g, v).map(|r| r.data))
            .collect::<Result<_>>()?;
        images.insert(w.clone(), CMat::from_columns(&cols));
    }
    let mut gen = Generator::new();
    for (a, b) in generator_support(n, max_len) {
        let val = images[&a].adjoint() * &images[&b];
        gen.insert((a, b), val);
    }
    Ok(gen)
}

/// A generator whose kernel has a principal minor `[[I, cU*], [cU, I]]` with `c > 1`, hence not PSD.
pub fn non_psd_left_generator<R: Rng>(
    rng: &mut R,
    n: &[usize],
    e_dim: usize,
    max_len: usize,
) -> Result<Generator> {
    let i = rng.gen_range(0..n.len());
    let j = rng.gen_range(1..=n[i]);
    let a = MultiWord::identity(n).prepend(i, j);
    let g = MultiWord::identity(n);
    let c = rng.gen_range(1.5..3.0);
    let u = unitary(rng, e_dim) * c64(c, 0.0);
    let mut gen = Generator::new();
    gen.insert((g.clone(), g.clone()), identity(e_dim));
    gen.insert((g.clone(), a.clone()), u.adjoint());
    gen.insert((a, g), u);
    fill_missing_with_zero(&mut gen, n, e_dim, max_len);
    Ok(gen)
}

/// Commuting diagonal unitaries `V_i = diag(e^{iθ_{i,·}})` on `C^dim`, one per factor (`n_i = 1`).
pub fn diagonal_unitaries<R: Rng>(rng: &mut R, k: usize, dim: usize) -> Vec<Vec<CMat>> {
    (0..k)
        .map(|_| {
            let d: Vec<_> = (0..dim)
                .map(|_| {
                    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    c64(t.cos(), t.sin())
                })
                .collect();
            vec![CMat::from_diagonal(&CVec::from_vec(d))]
        })
        .collect()
}
