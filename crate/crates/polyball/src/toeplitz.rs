//! k-multi-Toeplitz operators on truncated Fock spaces: membership, Fourier coefficients,
//! symbol extraction and symbol evaluation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::berezin::PolyballPoint;
use crate::error::{Error, Result};
use crate::fock::{exact_window, json_usizes, FockOperator, FockTruncation};
use crate::linalg::{c64, from_interleaved, kron, max_abs, to_interleaved, CMat};
use crate::words::{is_lambda, lambda_pairs, quotients, MultiWord, Side};

/// Default tolerance for identities that hold exactly on windows.
pub const WINDOW_TOL: f64 = 1e-10;

/// Finitely supported coefficient map `(α;β) ↦ A_(α;β)` over Λ.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiToeplitzSymbol {
    n: Vec<usize>,
    e_dim: usize,
    coeffs: BTreeMap<(MultiWord, MultiWord), CMat>,
}

impl MultiToeplitzSymbol {
    pub fn new(n: &[usize], e_dim: usize) -> Result<Self> {
        if n.is_empty() || n.contains(&0) || e_dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "symbol needs a nonempty shape and e_dim > 0, got n = {n:?}, e_dim = {e_dim}"
            )));
        }
        Ok(MultiToeplitzSymbol {
            n: n.to_vec(),
            e_dim,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn e_dim(&self) -> usize {
        self.e_dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sets `A_(a;b)`, replacing any previous value.
    pub fn insert(&mut self, a: MultiWord, b: MultiWord, m: CMat) -> Result<()> {
        if a.shape() != self.n || b.shape() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "pair ({a}; {b}) for a symbol of shape {:?}",
                self.n
            )));
        }
        if !is_lambda(&a, &b) {
            return Err(Error::NotInLambda {
                alpha: a.to_string(),
                beta: b.to_string(),
            });
        }
        if m.nrows() != self.e_dim || m.ncols() != self.e_dim {
            return Err(Error::ShapeMismatch(format!(
                "coefficient {}x{} for e_dim {}",
                m.nrows(),
                m.ncols(),
                self.e_dim
            )));
        }
        self.coeffs.insert((a, b), m);
        Ok(())
    }

    pub fn get(&self, a: &MultiWord, b: &MultiWord) -> Option<&CMat> {
        self.coeffs.get(&(a.clone(), b.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiWord, &MultiWord, &CMat)> {
        self.coeffs.iter().map(|((a, b), m)| (a, b, m))
    }

    pub fn max_total_len(&self) -> usize {
        self.coeffs
            .keys()
            .map(|(a, b)| a.total_len() + b.total_len())
            .max()
            .unwrap_or(0)
    }

    /// Coefficients of `φ(r·)`: `A_(α;β) ↦ r^{|α|+|β|} A_(α;β)`.
    pub fn scaled(&self, r: f64) -> MultiToeplitzSymbol {
        let mut out = self.clone();
        for ((a, b), m) in out.coeffs.iter_mut() {
            *m *= c64(r.powi((a.total_len() + b.total_len()) as i32), 0.0);
        }
        out
    }

    /// Largest `‖A_(β;α) − A_(α;β)*‖` entry; zero for self-adjoint symbols.
    pub fn hermitian_defect(&self) -> f64 {
        let zero = CMat::zeros(self.e_dim, self.e_dim);
        let mut worst = 0.0f64;
        for ((a, b), m) in &self.coeffs {
            let other = self.coeffs.get(&(b.clone(), a.clone())).unwrap_or(&zero);
            worst = worst.max(max_abs(&(other - m.adjoint())));
        }
        worst
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|((a, b), m)| {
                json!({"alpha": a.to_json(), "beta": b.to_json(), "matrix": to_interleaved(m)})
            })
            .collect();
        json!({"n": self.n, "e_dim": self.e_dim, "coeffs": coeffs})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = json_usizes(v, "n")?;
        let e = v
            .get("e_dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("missing e_dim".into()))? as usize;
        let mut s = MultiToeplitzSymbol::new(&n, e)?;
        let list = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing coeffs".into()))?;
        for c in list {
            let a = MultiWord::from_json(&n, c.get("alpha").unwrap_or(&Value::Null))?;
            let b = MultiWord::from_json(&n, c.get("beta").unwrap_or(&Value::Null))?;
            let data: Vec<f64> =
                serde_json::from_value(c.get("matrix").cloned().unwrap_or(Value::Null))?;
            s.insert(a, b, from_interleaved(e, &data)?)?;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ToeplitzReport {
    pub pass: bool,
    pub max_violation: f64,
}

fn check_square(t: &FockOperator) -> Result<()> {
    let d = t.truncation.dim() * t.coeff_dim;
    if t.matrix.nrows() != d || t.matrix.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "operator matrix {}x{} for space of dimension {d}",
            t.matrix.nrows(),
            t.matrix.ncols()
        )));
    }
    Ok(())
}

/// Checks `(R_{i,s}*⊗I) T (R_{i,t}⊗I) = δ_st T` on the budget-1 window.
pub fn is_k_multi_toeplitz(t: &FockOperator, tol: f64) -> Result<ToeplitzReport> {
    check_square(t)?;
    let tr = &t.truncation;
    let window = exact_window(tr, &vec![1; tr.k()])?.indices(tr);
    let e = t.coeff_dim;
    let mut worst = 0.0f64;
    for i0 in 0..tr.k() {
        let ni = tr.n()[i0];
        // images of the window under each right creation in factor i
        let imgs: Vec<Vec<usize>> = (1..=ni)
            .map(|j| {
                window
                    .iter()
                    .map(|&x| tr.step(Side::Right, i0, j, false, x).expect("window is exact"))
                    .collect()
            })
            .collect();
        for s in 0..ni {
            for u in 0..ni {
                let v = window
                    .par_iter()
                    .enumerate()
                    .map(|(yi, &y)| {
                        let mut w = 0.0f64;
                        for (xi, &x) in window.iter().enumerate() {
                            let ry = imgs[s][yi];
                            let rx = imgs[u][xi];
                            for a in 0..e {
                                for b in 0..e {
                                    let lhs = t.matrix[(ry * e + a, rx * e + b)];
                                    let rhs = if s == u {
                                        t.matrix[(y * e + a, x * e + b)]
                                    } else {
                                        c64(0.0, 0.0)
                                    };
                                    w = w.max((lhs - rhs).norm());
                                }
                            }
                        }
                        w
                    })
                    .reduce(|| 0.0, f64::max);
                worst = worst.max(v);
            }
        }
    }
    Ok(ToeplitzReport {
        pass: worst <= tol,
        max_violation: worst,
    })
}

/// Entry-level form: `⟨T(e_γ⊗h), e_ω⊗ℓ⟩` must equal `⟨A_(c⁺;c⁻)h, ℓ⟩` for right-comparable
/// `ω, γ` and vanish otherwise. Returns the largest deviation over the whole truncation.
pub fn inner_product_violation(t: &FockOperator) -> Result<f64> {
    check_square(t)?;
    let tr = &t.truncation;
    let basis = tr.basis();
    let e = t.coeff_dim;
    let worst = (0..basis.len())
        .into_par_iter()
        .map(|ri| {
            let mut w = 0.0f64;
            for (ci, g) in basis.iter().enumerate() {
                let blk = t.block(ri, ci);
                let expected = match quotients(Side::Right, &basis[ri], g) {
                    Some((p, m)) => {
                        let pi = tr.basis_index(&p).expect("quotient inside truncation");
                        let mi = tr.basis_index(&m).expect("quotient inside truncation");
                        t.block(pi, mi)
                    }
                    None => CMat::zeros(e, e),
                };
                w = w.max(max_abs(&(blk - expected)));
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `A_(a;b)`: the block of `T` at row `e_a`, column `e_b`.
pub fn fourier_coefficient(t: &FockOperator, a: &MultiWord, b: &MultiWord) -> Result<CMat> {
    check_square(t)?;
    if a.shape() != t.truncation.n() || b.shape() != t.truncation.n() {
        return Err(Error::ShapeMismatch(format!("pair ({a}; {b}) for a different shape")));
    }
    if !is_lambda(a, b) {
        return Err(Error::NotInLambda {
            alpha: a.to_string(),
            beta: b.to_string(),
        });
    }
    let r = t.truncation.basis_index(a)?;
    let c = t.truncation.basis_index(b)?;
    Ok(t.block(r, c))
}

/// All nonzero Fourier coefficients with `Σ_i |α_i|+|β_i| ≤ max_total_len`.
pub fn extract_symbol(t: &FockOperator, max_total_len: usize) -> Result<MultiToeplitzSymbol> {
    check_square(t)?;
    let tr = &t.truncation;
    if tr.degrees().iter().sum::<usize>() < max_total_len {
        return Err(Error::InvalidArgument(format!(
            "max_total_len {max_total_len} exceeds the truncation degrees {:?}",
            tr.degrees()
        )));
    }
    let pairs: Vec<(MultiWord, MultiWord)> = lambda_pairs(tr.n(), max_total_len)
        .into_iter()
        .filter(|(a, b)| tr.contains(a) && tr.contains(b))
        .collect();
    let found: Vec<(MultiWord, MultiWord, CMat)> = pairs
        .into_par_iter()
        .filter_map(|(a, b)| {
            let m = fourier_coefficient(t, &a, &b).ok()?;
            (max_abs(&m) > 0.0).then_some((a, b, m))
        })
        .collect();
    let mut s = MultiToeplitzSymbol::new(tr.n(), t.coeff_dim)?;
    for (a, b, m) in found {
        s.insert(a, b, m)?;
    }
    Ok(s)
}

/// `Σ X_α X_β* ⊗ A_(α;β)` on `H ⊗ E` (H major).
pub fn evaluate_symbol(sym: &MultiToeplitzSymbol, x: &PolyballPoint) -> Result<CMat> {
    if x.n() != sym.n() {
        return Err(Error::ShapeMismatch(format!(
            "point of shape {:?} for symbol of shape {:?}",
            x.n(),
            sym.n()
        )));
    }
    let h = x.h_dim();
    let e = sym.e_dim();
    let terms: Vec<(&MultiWord, &MultiWord, &CMat)> = sym.iter().collect();
    let value = terms
        .par_iter()
        .map(|(a, b, m)| -> Result<CMat> { Ok(kron(&x.monomial_pair(a, b)?, m)) })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(CMat::zeros(h * e, h * e), |acc, v| acc + v);
    Ok(value)
}

/// `φ(rS)` on a truncation, assembled from word actions; equals [`evaluate_symbol`] at `rS`.
pub fn evaluate_at_rs(sym: &MultiToeplitzSymbol, t: &FockTruncation, r: f64) -> Result<FockOperator> {
    if t.n() != sym.n() {
        return Err(Error::ShapeMismatch("truncation and symbol shapes differ".into()));
    }
    let e = sym.e_dim();
    let mut m = CMat::zeros(t.dim() * e, t.dim() * e);
    for (a, b, c) in sym.iter() {
        if !t.contains(a) || !t.contains(b) {
            return Err(Error::WordOutOfRange {
                word: format!("({a}; {b})"),
                degrees: t.degrees().to_vec(),
            });
        }
        let coeff = c * c64(r.powi((a.total_len() + b.total_len()) as i32), 0.0);
        for idx in 0..t.dim() {
            if let Some(target) = t.word_step(Side::Left, a, b, idx) {
                let mut blk = m.view_mut((target * e, idx * e), (e, e));
                blk += &coeff;
            }
        }
    }
    FockOperator::new(t.clone(), e, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::word_operator;
    use crate::linalg::{identity, max_diff, scalar};

    fn mw(n: &[usize], l: &[Vec<usize>]) -> MultiWord {
        MultiWord::from_letters(n, l).unwrap()
    }

    #[test]
    fn word_operators_are_toeplitz() {
        let n = [2, 2];
        let t = FockTruncation::new(&n, &[3, 3]).unwrap();
        let c = scalar(c64(1.0, 0.5));
        for (a, b) in lambda_pairs(&n, 2) {
            let op = word_operator(&t, &a, &b, &c).unwrap();
            let rep = is_k_multi_toeplitz(&op, WINDOW_TOL).unwrap();
            assert!(rep.pass && rep.max_violation == 0.0, "({a}; {b})");
            assert_eq!(inner_product_violation(&op).unwrap(), 0.0);
        }
    }

    #[test]
    fn shift_passes_and_flip_fails() {
        let t = FockTruncation::new(&[2], &[3]).unwrap();
        let s1 = t.creation_matrix(Side::Left, 1, 1, false).unwrap();
        let op = FockOperator::new(t.clone(), 1, s1.clone()).unwrap();
        assert!(is_k_multi_toeplitz(&op, WINDOW_TOL).unwrap().pass);

        let s2 = t.creation_matrix(Side::Left, 1, 2, false).unwrap();
        let bad = &s1 * s2.adjoint() + &s2 * s1.adjoint();
        let op = FockOperator::new(t, 1, bad).unwrap();
        let rep = is_k_multi_toeplitz(&op, WINDOW_TOL).unwrap();
        assert!(!rep.pass && rep.max_violation >= 0.5);
    }

    #[test]
    fn fourier_examples() {
        let n = [1, 1];
        let t = FockTruncation::new(&n, &[2, 2]).unwrap();
        let g = MultiWord::identity(&n);
        let id = FockOperator::identity(&t, 1);
        assert_eq!(fourier_coefficient(&id, &g, &g).unwrap(), identity(1));
        let a = mw(&n, &[vec![1], vec![]]);
        assert_eq!(fourier_coefficient(&id, &a, &g).unwrap(), CMat::zeros(1, 1));

        let s11 = t.creation_matrix(Side::Left, 1, 1, false).unwrap();
        let s21 = t.creation_matrix(Side::Left, 2, 1, false).unwrap();
        let m = s11 * c64(2.0, 0.0) + s21.adjoint() * c64(3.0, 0.0);
        let op = FockOperator::new(t, 1, m).unwrap();
        let b = mw(&n, &[vec![], vec![1]]);
        assert_eq!(fourier_coefficient(&op, &a, &g).unwrap()[(0, 0)], c64(2.0, 0.0));
        assert_eq!(fourier_coefficient(&op, &g, &b).unwrap()[(0, 0)], c64(3.0, 0.0));
        let nl = mw(&n, &[vec![1], vec![]]);
        assert!(matches!(
            fourier_coefficient(&op, &nl, &nl),
            Err(Error::NotInLambda { .. })
        ));
    }

    #[test]
    fn extract_roundtrip_and_zero() {
        let n = [2, 1];
        let t = FockTruncation::new(&n, &[2, 2]).unwrap();
        let mut sym = MultiToeplitzSymbol::new(&n, 2).unwrap();
        let c1 = CMat::from_fn(2, 2, |r, c| c64(r as f64 + 1.0, c as f64));
        let c2 = CMat::from_fn(2, 2, |r, c| c64(0.0, (r * 2 + c) as f64 + 1.0));
        sym.insert(mw(&n, &[vec![2], vec![]]), mw(&n, &[vec![], vec![1]]), c1)
            .unwrap();
        sym.insert(MultiWord::identity(&n), mw(&n, &[vec![1, 2], vec![]]), c2)
            .unwrap();
        let op = evaluate_at_rs(&sym, &t, 1.0).unwrap();
        assert_eq!(extract_symbol(&op, 3).unwrap(), sym);
        let zero = FockOperator::new(t.clone(), 1, CMat::zeros(t.dim(), t.dim())).unwrap();
        assert!(extract_symbol(&zero, 2).unwrap().is_empty());
    }

    #[test]
    fn evaluate_examples() {
        let n = [1, 1];
        let x = PolyballPoint::from_scalars(&[vec![c64(0.3, 0.1)], vec![c64(-0.2, 0.0)]]).unwrap();
        let mut sym = MultiToeplitzSymbol::new(&n, 1).unwrap();
        sym.insert(MultiWord::identity(&n), MultiWord::identity(&n), identity(1))
            .unwrap();
        assert!(max_diff(&evaluate_symbol(&sym, &x).unwrap(), &identity(1)) < 1e-15);
        let mut sym = MultiToeplitzSymbol::new(&n, 1).unwrap();
        sym.insert(mw(&n, &[vec![1], vec![]]), MultiWord::identity(&n), identity(1))
            .unwrap();
        assert_eq!(evaluate_symbol(&sym, &x).unwrap()[(0, 0)], c64(0.3, 0.1));
    }

    #[test]
    fn evaluate_at_rs_matches_point_evaluation() {
        let n = [2, 1];
        let t = FockTruncation::new(&n, &[2, 1]).unwrap();
        let mut sym = MultiToeplitzSymbol::new(&n, 1).unwrap();
        sym.insert(mw(&n, &[vec![1], vec![]]), mw(&n, &[vec![], vec![1]]), scalar(c64(1.0, 2.0)))
            .unwrap();
        sym.insert(mw(&n, &[vec![], vec![]]), mw(&n, &[vec![2, 1], vec![]]), scalar(c64(0.5, 0.0)))
            .unwrap();
        let x = PolyballPoint::creation(&t, Side::Left, 0.7).unwrap();
        let a = evaluate_symbol(&sym, &x).unwrap();
        let b = evaluate_at_rs(&sym, &t, 0.7).unwrap();
        assert!(max_diff(&a, &b.matrix) < 1e-14);
    }

    #[test]
    fn json_roundtrip() {
        let n = [1, 2];
        let mut sym = MultiToeplitzSymbol::new(&n, 1).unwrap();
        sym.insert(MultiWord::identity(&n), mw(&n, &[vec![1], vec![2]]), scalar(c64(0.25, -1.0)))
            .unwrap();
        let back = MultiToeplitzSymbol::from_json(&sym.to_json()).unwrap();
        assert_eq!(back, sym);
    }
}
