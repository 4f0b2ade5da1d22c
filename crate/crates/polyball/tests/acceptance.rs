//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the process fails if any does.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use polyball::berezin::{
    berezin_kernel, berezin_transform, moment_tail_bound, poisson_factorization_check,
    spectral_radius, PolyballPoint,
};
use polyball::fock::{exact_window, word_operator, FockOperator, FockTruncation, WordMap};
use polyball::linalg::{
    c64, hermitian_eig, identity, kron, max_diff, op_norm, pinv, CMat, CVec, C64,
};
use polyball::naimark::{
    dilation_verify, kernel_from_generator, naimark_dilate, window_intertwiner, NaimarkDilation,
    ToeplitzKernel,
};
use polyball::pluriharm::{
    herglotz_from_tuple, herglotz_transform, poisson_transform, schur_positivity, CbMapData,
    PluriharmonicFunction,
};
use polyball::samples::{
    complex_matrix, hermitian_matrix, hermitian_symbol, isometry, nilpotent_point,
    non_psd_left_generator, polyball_point, psd_left_generator, rng_for,
};
use polyball::toeplitz::{
    evaluate_symbol, extract_symbol, inner_product_violation, is_k_multi_toeplitz,
    MultiToeplitzSymbol,
};
use polyball::words::{enumerate_total, lambda_pairs, MultiWord, Side};
use polyball::{Error, Result};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn polar(r: f64, t: f64) -> C64 {
    c64(r * t.cos(), r * t.sin())
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn berezin_moments() -> Result<Outcome> {
    let shapes: [(&[usize], &[usize], &[usize]); 4] = [
        (&[2, 1], &[2, 1], &[8, 16]),
        (&[1, 2], &[1, 2], &[16, 8]),
        (&[2], &[3], &[12]),
        (&[1, 1], &[2, 2], &[20, 20]),
    ];
    let per_point: Vec<(usize, usize, f64, f64)> = (0..50u64)
        .into_par_iter()
        .map(|idx| -> Result<_> {
            let (n, dims, deg) = shapes[idx as usize % shapes.len()];
            let mut rng = rng_for(101, idx);
            let x = polyball_point(&mut rng, n, dims, 0.6)?;
            let t = FockTruncation::new(n, deg)?;
            let kernel = berezin_kernel(&x, &t)?;
            let words = enumerate_total(n, 3);
            let (mut checks, mut bad, mut worst, mut worst_tail) = (0, 0, 0.0f64, 0.0f64);
            for a in &words {
                for b in words.iter().filter(|b| a.total_len() + b.total_len() <= 3) {
                    let wm = WordMap {
                        truncation: t.clone(),
                        side: Side::Left,
                        a: a.clone(),
                        b: b.clone(),
                        coeff: c64(1.0, 0.0),
                    };
                    let got = berezin_transform(&wm, &kernel)?;
                    let err = op_norm(&(got - x.monomial_pair(a, b)?));
                    let tail = moment_tail_bound(&x, &t, a, b)?;
                    checks += 1;
                    if err > tail.max(1e-9) {
                        bad += 1;
                    }
                    worst = worst.max(err);
                    worst_tail = worst_tail.max(tail);
                }
            }
            Ok((checks, bad, worst, worst_tail))
        })
        .collect::<Result<_>>()?;
    let checks: usize = per_point.iter().map(|p| p.0).sum();
    let bad: usize = per_point.iter().map(|p| p.1).sum();
    Ok(Outcome {
        pass: bad == 0,
        detail: format!(
            "{checks} moments at 50 points, {bad} over max(1e-9, tail), max error {:.2e}, max tail {:.2e}",
            max_of(per_point.iter().map(|p| p.2)),
            max_of(per_point.iter().map(|p| p.3))
        ),
    })
}

fn kernel_isometry() -> Result<Outcome> {
    let shapes: [(&[usize], &[usize], &[usize]); 4] = [
        (&[2, 1], &[2, 2], &[3, 3]),
        (&[2, 1], &[3, 1], &[3, 2]),
        (&[1, 2], &[1, 3], &[2, 3]),
        (&[2], &[3], &[4]),
    ];
    let (mut iso, mut inter, mut inexact) = (0.0f64, 0.0f64, 0);
    for idx in 0..20u64 {
        let (n, dims, deg) = shapes[idx as usize % shapes.len()];
        let mut rng = rng_for(202, idx);
        let x = nilpotent_point(&mut rng, n, dims, 0.9)?;
        let t = FockTruncation::new(n, deg)?;
        let k = berezin_kernel(&x, &t)?;
        if !k.exact {
            inexact += 1;
        }
        let kk = k.matrix.adjoint() * &k.matrix;
        iso = iso.max(op_norm(&(kk - identity(x.h_dim()))));
        for i in 1..=n.len() {
            for j in 1..=n[i - 1] {
                let lhs = &k.matrix * x.get(i - 1, j - 1).adjoint();
                let sa = t.creation_matrix(Side::Left, i, j, true)?;
                let rhs = kron(&sa, &identity(k.defect_rank)) * &k.matrix;
                inter = inter.max(op_norm(&(lhs - rhs)));
            }
        }
    }
    Ok(Outcome {
        pass: inexact == 0 && iso <= 1e-10 && inter <= 1e-10,
        detail: format!(
            "20 nilpotent points, ||K*K - I|| max {iso:.2e}, intertwining max {inter:.2e} (tol 1e-10), {inexact} not flagged exact"
        ),
    })
}

fn poisson_factorization() -> Result<Outcome> {
    let dims: [&[usize]; 3] = [&[2, 1], &[1, 2], &[2, 2]];
    let rows: Vec<(f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|idx| -> Result<_> {
            let mut rng = rng_for(303, idx);
            let x = polyball_point(&mut rng, &[2, 1], dims[idx as usize % 3], 0.5)?;
            let t = FockTruncation::new(&[2, 1], &[4, 4])?;
            let c = poisson_factorization_check(&x, &t, &[2, 2])?;
            Ok((c.max_error, c.tail_bound))
        })
        .collect::<Result<_>>()?;
    let bad = rows.iter().filter(|(e, b)| e > b).count();
    Ok(Outcome {
        pass: bad == 0,
        detail: format!(
            "20 points, {bad} with error above bound, max error {:.2e}, max error/bound {:.3}",
            max_of(rows.iter().map(|r| r.0)),
            max_of(rows.iter().map(|r| r.0 / r.1))
        ),
    })
}

fn classical_poisson(r: f64, t: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * t.cos() + r * r)
}

fn classical_recovery() -> Result<Outcome> {
    let phi = [0.3, -1.1];
    let zeta: Vec<C64> = phi.iter().map(|&p| polar(1.0, p)).collect();
    let mu = CbMapData::point_mass(&zeta, 24)?;
    let mut worst = 0.0f64;
    let mut worst_tail = 0.0f64;
    for ri in 1..=5 {
        let r = 0.1 * ri as f64;
        for ti in 0..5 {
            let th = -PI + ti as f64 * 2.0 * PI / 5.0;
            let z = [polar(r, th), polar(r, -th)];
            let x = PolyballPoint::from_scalars(&[vec![z[0]], vec![z[1]]])?;
            let v = poisson_transform(&mu, &x)?;
            let want = classical_poisson(r, th - phi[0]) * classical_poisson(r, -th - phi[1]);
            worst = worst.max((v.value[(0, 0)] - c64(want, 0.0)).norm());
            worst_tail = worst_tail.max(v.tail_bound);
        }
    }
    let one = CbMapData::point_mass(&[c64(1.0, 0.0), c64(1.0, 0.0)], 24)?;
    let x = PolyballPoint::from_scalars(&[vec![c64(0.5, 0.0)], vec![c64(0.5, 0.0)]])?;
    let nine = poisson_transform(&one, &x)?.value[(0, 0)];
    let nine_err = (nine - c64(9.0, 0.0)).norm();
    Ok(Outcome {
        pass: worst <= 1e-6 && nine_err <= 1e-6,
        detail: format!(
            "25 points in the bidisc, max |error| {worst:.2e} (tail bound {worst_tail:.2e}), value at (0.5, 0.5) = {:.9} (tol 1e-6)",
            nine.re
        ),
    })
}

fn random_symbol<R: Rng>(
    rng: &mut R,
    n: &[usize],
    e: usize,
    t: &FockTruncation,
) -> Result<(MultiToeplitzSymbol, FockOperator)> {
    let mut sym = MultiToeplitzSymbol::new(n, e)?;
    let mut op = CMat::zeros(t.dim() * e, t.dim() * e);
    for (a, b) in lambda_pairs(n, 3) {
        if rng.gen_bool(0.5) {
            let c = complex_matrix(rng, e, e);
            op += word_operator(t, &a, &b, &c)?.matrix;
            sym.insert(a, b, c)?;
        }
    }
    Ok((sym, FockOperator::new(t.clone(), e, op)?))
}

fn fourier_roundtrip() -> Result<Outcome> {
    let shapes: [(&[usize], &[usize]); 3] = [(&[2, 1], &[3, 3]), (&[1, 1], &[3, 3]), (&[2], &[4])];
    let (mut coef_err, mut apply_err, mut key_mismatch) = (0.0f64, 0.0f64, 0);
    for idx in 0..30u64 {
        let (n, deg) = shapes[idx as usize % 3];
        let e = 1 + idx as usize % 2;
        let mut rng = rng_for(505, idx);
        let t = FockTruncation::new(n, deg)?;
        let (sym, op) = random_symbol(&mut rng, n, e, &t)?;
        let ext = extract_symbol(&op, 3)?;
        if ext.len() != sym.len() {
            key_mismatch += 1;
        }
        for (a, b, m) in sym.iter() {
            match ext.get(a, b) {
                Some(got) => coef_err = coef_err.max(max_diff(got, m)),
                None => key_mismatch += 1,
            }
        }
        let budget: Vec<usize> = (0..n.len())
            .map(|i| max_of(sym.iter().map(|(a, b, _)| a.part(i).len().max(b.part(i).len()) as f64)) as usize)
            .collect();
        let window = exact_window(&t, &budget)?;
        let s = PolyballPoint::creation(&t, Side::Left, 1.0)?;
        let phi = evaluate_symbol(&ext, &s)?;
        let mut q = CVec::zeros(t.dim() * e);
        for b in window.indices(&t) {
            for c in 0..e {
                q[b * e + c] = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let d = &phi * &q - &op.matrix * &q;
        apply_err = apply_err.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(Outcome {
        pass: key_mismatch == 0 && coef_err <= 1e-11 && apply_err <= 1e-11,
        detail: format!(
            "30 symbols, coefficient error {coef_err:.2e}, window action error {apply_err:.2e} (tol 1e-11), {key_mismatch} support mismatches"
        ),
    })
}

fn analytic_polynomial<R: Rng>(rng: &mut R, big: &FockTruncation, e: usize) -> Result<CMat> {
    let g = MultiWord::identity(big.n());
    let mut m = CMat::zeros(big.dim() * e, big.dim() * e);
    for a in enumerate_total(big.n(), 2) {
        if rng.gen_bool(0.6) {
            m += word_operator(big, &a, &g, &complex_matrix(rng, e, e))?.matrix;
        }
    }
    Ok(m)
}

fn toeplitz_characterization() -> Result<Outcome> {
    let shapes: [(&[usize], &[usize]); 3] = [(&[2, 1], &[3, 3]), (&[1, 1], &[3, 3]), (&[2], &[4])];
    let (mut worst_pos, mut worst_ip) = (0.0f64, 0.0f64);
    for idx in 0..30u64 {
        let (n, deg) = shapes[idx as usize % 3];
        let e = 1 + idx as usize % 2;
        let mut rng = rng_for(606, idx);
        let t = FockTruncation::new(n, deg)?;
        let big = t.enlarged(&vec![2; n.len()])?;
        let p = analytic_polynomial(&mut rng, &big, e)?;
        let q = analytic_polynomial(&mut rng, &big, e)?;
        let full = p.adjoint() * q;
        let idx_small: Vec<usize> = t
            .embedding_into(&big)?
            .iter()
            .flat_map(|&b| (0..e).map(move |c| b * e + c))
            .collect();
        let sub = CMat::from_fn(idx_small.len(), idx_small.len(), |r, c| {
            full[(idx_small[r], idx_small[c])]
        });
        let op = FockOperator::new(t.clone(), e, sub)?;
        worst_pos = worst_pos.max(is_k_multi_toeplitz(&op, 1e-11)?.max_violation);
        worst_ip = worst_ip.max(inner_product_violation(&op)?);
    }

    let mut negatives: Vec<(String, f64)> = Vec::new();
    for idx in 0..10u64 {
        let mut rng = rng_for(607, idx);
        let (label, op) = match idx {
            0..=3 => {
                let n: &[usize] = if idx % 2 == 0 { &[2] } else { &[2, 1] };
                let t = FockTruncation::new(n, &vec![3; n.len()])?;
                let s1 = t.creation_matrix(Side::Left, 1, 1, false)?;
                let s2 = t.creation_matrix(Side::Left, 1, 2, false)?;
                let c = c64(rng.gen_range(0.5..2.0), 0.0);
                let m = (&s1 * s2.adjoint() + &s2 * s1.adjoint()) * c;
                ("flip", FockOperator::new(t, 1, m)?)
            }
            4..=6 => {
                let n: &[usize] = if idx == 5 { &[2, 1] } else { &[2] };
                let t = FockTruncation::new(n, &vec![3; n.len()])?;
                let r = t.creation_matrix(Side::Right, 1, 1, false)?;
                let c = complex_matrix(&mut rng, 2, 2);
                ("right creation", FockOperator::new(t, 2, kron(&r, &c))?)
            }
            _ => {
                let t = FockTruncation::new(&[2, 1], &[2, 2])?;
                let m = hermitian_matrix(&mut rng, t.dim());
                ("random dense", FockOperator::new(t, 1, m)?)
            }
        };
        let v = is_k_multi_toeplitz(&op, 1e-11)?.max_violation;
        negatives.push((label.to_string(), v));
    }
    let min_neg = negatives.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        pass: worst_pos <= 1e-11 && worst_ip <= 1e-11 && min_neg >= 1e-2,
        detail: format!(
            "30 products p(S)*q(S): max violation {worst_pos:.2e}, inner-product form {worst_ip:.2e} (tol 1e-11); 10 non-Toeplitz: min violation {min_neg:.3} (need >= 1e-2)"
        ),
    })
}

/// Dilation of a right kernel built directly: `W_{i,j}` appends `g_j` in factor `i`.
fn right_oracle(gam: &ToeplitzKernel, rank_tol: f64) -> Result<NaimarkDilation> {
    let words = gam.words();
    let e = gam.e_dim();
    let (vals, vecs) = hermitian_eig(&gam.gram());
    let top = vals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > rank_tol * top).collect();
    let mut f = CMat::zeros(keep.len(), vals.len());
    for (row, &i) in keep.iter().enumerate() {
        f.set_row(row, &(vecs.column(i).adjoint() * c64(vals[i].sqrt(), 0.0)));
    }
    let index: HashMap<&MultiWord, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let cols_of = |ws: &[MultiWord]| {
        let mut m = CMat::zeros(f.nrows(), ws.len() * e);
        for (c, w) in ws.iter().enumerate() {
            m.columns_mut(c * e, e).copy_from(&f.columns(index[w] * e, e));
        }
        m
    };
    let domain: Vec<MultiWord> = words
        .iter()
        .filter(|w| w.total_len() < gam.max_len())
        .cloned()
        .collect();
    let p = pinv(&cols_of(&domain), (rank_tol * top).sqrt());
    let n = gam.n().to_vec();
    let v: Vec<Vec<CMat>> = (0..n.len())
        .map(|i| {
            (1..=n[i])
                .map(|j| {
                    let shifted: Vec<MultiWord> = domain.iter().map(|w| w.append(i, j)).collect();
                    cols_of(&shifted) * &p
                })
                .collect()
        })
        .collect();
    let g = MultiWord::identity(&n);
    let emb = f.columns(index[&g] * e, e).into_owned();
    NaimarkDilation::from_parts(Side::Right, &n, gam.max_len(), v, emb)
}

fn naimark() -> Result<Outcome> {
    let shapes: [&[usize]; 5] = [&[2, 1], &[1, 2], &[2], &[1, 1], &[2, 2]];
    let rows: Vec<(f64, f64, f64, bool, f64, f64, f64)> = (0..30u64)
        .into_par_iter()
        .map(|idx| -> Result<_> {
            let n = shapes[idx as usize % shapes.len()];
            let e = 1 + idx as usize % 2;
            let mut rng = rng_for(707, idx);
            let gen = psd_left_generator(&mut rng, n, e, 2, 3)?;
            let k = kernel_from_generator(Side::Left, n, e, gen, 3)?;
            let d = naimark_dilate(&k, 1e-10)?;
            let rep = dilation_verify(&d, &k)?;
            let (mut dual_match, mut dual_unit, mut dual_rep) = (0.0, 0.0, 0.0);
            if idx < 10 {
                let gam = k.reversed();
                let reduced = naimark_dilate(&gam, 1e-10)?;
                let oracle = right_oracle(&gam, 1e-10)?;
                let w = window_intertwiner(&reduced, &oracle)?;
                dual_match = w.matching_error;
                dual_unit = w.unitarity_defect;
                dual_rep = dilation_verify(&oracle, &gam)?.reproduction_error;
            }
            Ok((
                rep.reproduction_error,
                max_of(rep.isometry_defects.iter().copied()),
                rep.commutator_norm,
                rep.minimal,
                dual_match,
                dual_unit,
                dual_rep,
            ))
        })
        .collect::<Result<_>>()?;
    let mut refused = 0;
    for idx in 0..10u64 {
        let n = shapes[idx as usize % shapes.len()];
        let e = 1 + idx as usize % 2;
        let mut rng = rng_for(708, idx);
        let gen = non_psd_left_generator(&mut rng, n, e, 3)?;
        let k = kernel_from_generator(Side::Left, n, e, gen, 3)?;
        if let Err(Error::NotPsd { .. }) = naimark_dilate(&k, 1e-10) {
            refused += 1;
        }
    }
    let repro = max_of(rows.iter().map(|r| r.0));
    let iso = max_of(rows.iter().map(|r| r.1));
    let comm = max_of(rows.iter().map(|r| r.2));
    let minimal = rows.iter().filter(|r| r.3).count();
    let dm = max_of(rows.iter().map(|r| r.4));
    let du = max_of(rows.iter().map(|r| r.5));
    let dr = max_of(rows.iter().map(|r| r.6));
    Ok(Outcome {
        pass: repro <= 1e-8
            && iso <= 1e-9
            && comm <= 1e-9
            && refused == 10
            && dm <= 1e-9
            && du <= 1e-9
            && dr <= 1e-8,
        detail: format!(
            "30 PSD kernels: reproduction {repro:.2e} (tol 1e-8), isometry {iso:.2e}, commutators {comm:.2e} (tol 1e-9), {minimal}/30 minimal; {refused}/10 non-PSD refused; right duality: matching {dm:.2e}, unitarity {du:.2e}, reproduction {dr:.2e}"
        ),
    })
}

fn schur_equivalence() -> Result<Outcome> {
    let shapes: [(&[usize], usize); 3] = [(&[2, 1], 3), (&[1, 1], 4), (&[2], 4)];
    let rows: Vec<(bool, usize, usize)> = (0..30u64)
        .into_par_iter()
        .map(|idx| -> Result<_> {
            let (n, l) = shapes[idx as usize % 3];
            let e = 1 + idx as usize % 2;
            let mut rng = rng_for(808, idx);
            let sym = hermitian_symbol(&mut rng, n, e, 3, 1.0)?;
            let rep = schur_positivity(&PluriharmonicFunction::new(sym), &[0.3, 0.6, 0.9], l, 1e-8)?;
            let pos = rep.entries.iter().filter(|x| x.operator_positive).count();
            Ok((rep.all_agree, pos, rep.entries.len() - pos))
        })
        .collect::<Result<_>>()?;
    let disagree = rows.iter().filter(|r| !r.0).count();
    let pos: usize = rows.iter().map(|r| r.1).sum();
    let neg: usize = rows.iter().map(|r| r.2).sum();
    Ok(Outcome {
        pass: disagree == 0,
        detail: format!(
            "30 symbols x 3 radii: {pos} positive, {neg} not positive, {disagree} symbols with disagreement (tol 1e-8)"
        ),
    })
}

fn herglotz() -> Result<Outcome> {
    let mu = CbMapData::point_mass(&[c64(1.0, 0.0)], 200)?;
    let mut scalar_err = 0.0f64;
    for ri in 0..4 {
        let rho = 0.3 * ri as f64;
        for ti in 0..8 {
            let z = polar(rho, ti as f64 * TAU / 8.0);
            let x = PolyballPoint::from_scalars(&[vec![z]])?;
            let h = herglotz_transform(&mu, &x)?.value[(0, 0)];
            let want = (c64(1.0, 0.0) + z) / (c64(1.0, 0.0) - z);
            scalar_err = scalar_err.max((h - want).norm());
            let p = poisson_transform(&mu, &x)?.value[(0, 0)];
            scalar_err = scalar_err.max((p.re - want.re).abs() + p.im.abs());
        }
    }

    let big_n = 48usize;
    let m = 2 * big_n;
    let (mut tuple_err, mut series_err) = (0.0f64, 0.0f64);
    for (case, e) in [1usize, 2].into_iter().enumerate() {
        let mut rng = rng_for(909, case as u64);
        let xi = rng.gen_range(0.0..TAU);
        let th = rng.gen_range(0.0..TAU);
        let mut u1 = Vec::with_capacity(m);
        let mut u2 = Vec::with_capacity(m);
        for p in 0..big_n {
            u1.push(polar(1.0, TAU * p as f64 / big_n as f64));
            u2.push(polar(1.0, xi));
        }
        for p in 0..big_n {
            u1.push(polar(1.0, th));
            u2.push(polar(1.0, TAU * p as f64 / big_n as f64));
        }
        let w = if e == 1 {
            CMat::from_element(m, 1, c64(1.0 / (m as f64).sqrt(), 0.0))
        } else {
            isometry(&mut rng, m, e)
        };
        let c = hermitian_matrix(&mut rng, e) * c64(0.3, 0.0);
        let half = |u: &[C64]| vec![CMat::from_diagonal(&CVec::from_vec(u.to_vec())) * c64(0.5, 0.0)];
        let t = vec![half(&u1), half(&u2)];
        let data = CbMapData::compression(&t, &w, 30)?;
        for a in 0..3 {
            for b in 0..3 {
                let y = [polar(0.2 * a as f64, 1.3 * b as f64), polar(0.4 - 0.1 * a as f64, 0.7 - b as f64)];
                // f(Y) = W* diag(2 ∏_i (1 − conj(u_{p,i}) y_i)^{-1} − 1) W + i c
                let d: Vec<C64> = (0..m)
                    .map(|p| {
                        let g = (c64(1.0, 0.0) - u1[p].conj() * y[0]) * (c64(1.0, 0.0) - u2[p].conj() * y[1]);
                        c64(2.0, 0.0) / g - c64(1.0, 0.0)
                    })
                    .collect();
                let ic = &c * c64(0.0, 1.0);
                let f = w.adjoint() * CMat::from_diagonal(&CVec::from_vec(d)) * &w + &ic;
                let y2 = PolyballPoint::from_scalars(&[vec![y[0] * 2.0], vec![y[1] * 2.0]])?;
                let via_tuple = herglotz_from_tuple(&t, &w, &y2)? + &ic;
                let via_series = herglotz_transform(&data, &y2)?.value + &ic;
                tuple_err = tuple_err.max(op_norm(&(via_tuple - &f)));
                series_err = series_err.max(op_norm(&(via_series - &f)));
            }
        }
    }
    Ok(Outcome {
        pass: scalar_err <= 1e-7 && tuple_err <= 1e-7 && series_err <= 1e-7,
        detail: format!(
            "k=1 point mass vs (1+z)/(1-z): {scalar_err:.2e}; k=2 f(Y) vs H(2Y) + i Im f(0): resolvent {tuple_err:.2e}, series {series_err:.2e} (tol 1e-7)"
        ),
    })
}

fn spectral_radii() -> Result<Outcome> {
    let mut errs: Vec<(String, f64)> = Vec::new();
    let x = PolyballPoint::from_scalars(&[vec![c64(0.3, 0.0), c64(0.4, 0.0)]])?;
    errs.push(("(0.3,0.4)".into(), (spectral_radius(&x, 12)?.estimate - 0.5).abs()));
    let x = PolyballPoint::from_scalars(&[vec![c64(0.3, 0.0), c64(0.0, 0.4)], vec![c64(0.6, 0.0)]])?;
    errs.push(("k=2 scalars".into(), (spectral_radius(&x, 12)?.estimate - 0.3f64.sqrt()).abs()));
    for (n, d, r) in [(vec![1usize], vec![12usize], 0.7), (vec![1, 1], vec![12, 12], 0.6)] {
        let t = FockTruncation::new(&n, &d)?;
        let x = PolyballPoint::creation(&t, Side::Left, r)?;
        errs.push((format!("rS n={n:?}"), (spectral_radius(&x, 12)?.estimate - r).abs()));
    }
    let diag = CMat::from_diagonal(&CVec::from_vec(vec![c64(0.8, 0.0), c64(0.0, -0.3)]));
    let x = PolyballPoint::new(vec![vec![diag]])?;
    errs.push(("diag(0.8,-0.3i)".into(), (spectral_radius(&x, 12)?.estimate - 0.8).abs()));
    let worst = max_of(errs.iter().map(|e| e.1));
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("{} closed-form cases, max error {worst:.2e} (tol 1e-6)", errs.len()),
    })
}

type Criterion = fn() -> Result<Outcome>;

fn main() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("Berezin transform of monomials", berezin_moments),
        ("Berezin kernel isometry and intertwining", kernel_isometry),
        ("Poisson kernel factorization", poisson_factorization),
        ("classical Poisson recovery", classical_recovery),
        ("Fourier coefficient roundtrip", fourier_roundtrip),
        ("multi-Toeplitz characterization", toeplitz_characterization),
        ("Naimark dilation", naimark),
        ("Schur positivity equivalence", schur_equivalence),
        ("Herglotz representation", herglotz),
        ("spectral radius", spectral_radii),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} | {detail} | {:.1}s",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
