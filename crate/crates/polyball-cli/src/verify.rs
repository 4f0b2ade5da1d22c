use std::f64::consts::TAU;
use std::time::{SystemTime, UNIX_EPOCH};

use log::{debug, info};
use polyball::berezin::{
    berezin_kernel, berezin_transform, defect, defect_ordered, moment_tail_bound,
    poisson_factorization_check, spectral_radius, PolyballPoint,
};
use polyball::fock::{exact_window, word_operator, FockOperator, FockTruncation, WordMap};
use polyball::linalg::{
    c64, identity, kron, max_abs, max_diff, op_norm, rank, submatrix, CMat, CVec, C64,
};
use polyball::naimark::{dilation_verify, kernel_from_generator, naimark_dilate};
use polyball::pluriharm::{
    herglotz_from_tuple, herglotz_transform, poisson_transform, schur_positivity, CbMapData,
    PluriharmonicFunction,
};
use polyball::samples::{
    complex_matrix, diagonal_unitaries, hermitian_matrix, hermitian_symbol, isometry,
    nilpotent_point, non_psd_left_generator, polyball_point, psd_left_generator, rng_for,
};
use polyball::toeplitz::{evaluate_symbol, extract_symbol, is_k_multi_toeplitz, MultiToeplitzSymbol};
use polyball::words::{enumerate_total, lambda_pairs, MultiWord, Side};
use polyball::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::commands::emit;
use crate::{Failure, RunConfig};

#[derive(Clone, Debug, Serialize)]
pub struct Identity {
    pub name: &'static str,
    pub paper_anchor: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn identity_check(name: &'static str, anchor: &'static str, err: f64, tol: f64) -> Identity {
    Identity {
        name,
        paper_anchor: anchor,
        max_error: err,
        tolerance: tol,
        pass: err <= tol,
        note: None,
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    t: FockTruncation,
}

impl Ctx<'_> {
    fn n(&self) -> &[usize] {
        &self.cfg.n
    }

    fn k(&self) -> usize {
        self.cfg.n.len()
    }

    /// Tensor slot sizes for random points, keeping `h_dim ≤ 4`.
    fn dims(&self) -> Vec<usize> {
        (0..self.k()).map(|i| if i < 2 { 2 } else { 1 }).collect()
    }

    /// Radii from the grid where series with box degrees stay small.
    fn small_radii(&self) -> Vec<f64> {
        let v: Vec<f64> = self.cfg.r_grid.iter().copied().filter(|&r| r <= 0.7).collect();
        if v.is_empty() {
            vec![0.5]
        } else {
            v
        }
    }
}

type Item = fn(&Ctx, &mut ChaCha8Rng) -> Result<Vec<Identity>>;

fn vacuum_cyclicity(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let g = MultiWord::identity(c.n());
    let mut cols = CMat::zeros(c.t.dim(), c.t.dim());
    for (j, a) in c.t.basis().iter().enumerate() {
        let m = c.t.monomial_matrix(Side::Left, a, &g)?;
        cols.set_column(j, &m.column(0));
    }
    let missing = (c.t.dim() - rank(&cols, 1e-10)) as f64;
    Ok(vec![identity_check(
        "vacuum_cyclicity",
        "span{S_α e_g} = truncated Fock space",
        missing,
        0.0,
    )])
}

fn creation_relations(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let t = &c.t;
    let mut iso = 0.0f64;
    let mut comm = 0.0f64;
    for i in 1..=c.k() {
        let mut budget = vec![0; c.k()];
        budget[i - 1] = 1;
        let win = exact_window(t, &budget)?.indices(t);
        let all: Vec<usize> = (0..t.dim()).collect();
        for s in 1..=c.n()[i - 1] {
            for u in 1..=c.n()[i - 1] {
                let a = t.creation_matrix(Side::Left, i, s, false)?;
                let b = t.creation_matrix(Side::Left, i, u, false)?;
                let prod = submatrix(&(a.adjoint() * b), &all, &win);
                let want = if s == u { submatrix(&identity(t.dim()), &all, &win) } else { CMat::zeros(t.dim(), win.len()) };
                iso = iso.max(max_abs(&(prod - want)));
            }
        }
        for i2 in 1..=c.k() {
            let mut b2 = budget.clone();
            b2[i2 - 1] += 1;
            if b2.iter().zip(t.degrees()).any(|(b, d)| b > d) {
                continue;
            }
            let win = exact_window(t, &b2)?.indices(t);
            for s in 1..=c.n()[i - 1] {
                for u in 1..=c.n()[i2 - 1] {
                    let sl = t.creation_matrix(Side::Left, i, s, false)?;
                    let rr = t.creation_matrix(Side::Right, i2, u, false)?;
                    let d = &sl * &rr - &rr * &sl;
                    comm = comm.max(max_abs(&submatrix(&d, &all, &win)));
                }
            }
        }
    }
    Ok(vec![
        identity_check("creation_row_isometries", "S_{i,s}* S_{i,t} = δ_{st} I", iso, c.cfg.tol),
        identity_check("left_right_creations_commute", "S_{i,s} R_{j,t} = R_{j,t} S_{i,s}", comm, c.cfg.tol),
    ])
}

fn random_toeplitz(c: &Ctx, rng: &mut ChaCha8Rng, e: usize, max_total: usize) -> Result<(MultiToeplitzSymbol, FockOperator)> {
    let mut sym = MultiToeplitzSymbol::new(c.n(), e)?;
    let mut op = CMat::zeros(c.t.dim() * e, c.t.dim() * e);
    for (a, b) in lambda_pairs(c.n(), max_total) {
        if c.t.contains(&a) && c.t.contains(&b) && rng.gen_bool(0.5) {
            let m = complex_matrix(rng, e, e);
            op += word_operator(&c.t, &a, &b, &m)?.matrix;
            sym.insert(a, b, m)?;
        }
    }
    Ok((sym, FockOperator::new(c.t.clone(), e, op)?))
}

fn toeplitz_items(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let max_total = c.t.degrees().iter().sum::<usize>().min(3);
    let e = 2;
    let (sym, op) = random_toeplitz(c, rng, e, max_total)?;
    let ext = extract_symbol(&op, max_total)?;
    let mut coef = if ext.len() == sym.len() { 0.0f64 } else { f64::INFINITY };
    for (a, b, m) in sym.iter() {
        coef = coef.max(ext.get(a, b).map_or(f64::INFINITY, |x| max_diff(x, m)));
    }
    let s = PolyballPoint::creation(&c.t, Side::Left, 1.0)?;
    let phi = evaluate_symbol(&ext, &s)?;
    let budget: Vec<usize> = (0..c.k())
        .map(|i| sym.iter().map(|(a, b, _)| a.part(i).len().max(b.part(i).len())).max().unwrap_or(0))
        .collect();
    let win = exact_window(&c.t, &budget)?;
    let mut q = CVec::zeros(c.t.dim() * e);
    for b in win.indices(&c.t) {
        for j in 0..e {
            q[b * e + j] = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let act = (&phi * &q - &op.matrix * &q).camax();
    let viol = is_k_multi_toeplitz(&op, c.cfg.tol)?.max_violation;

    let neg = if c.n()[0] > 1 {
        let r = c.t.creation_matrix(Side::Right, 1, 1, false)?;
        FockOperator::new(c.t.clone(), 1, r)?
    } else {
        FockOperator::new(c.t.clone(), 1, hermitian_matrix(rng, c.t.dim()))?
    };
    let neg_viol = is_k_multi_toeplitz(&neg, c.cfg.tol)?.max_violation;
    let mut rejection = identity_check(
        "toeplitz_rejection",
        "T ≠ (I⊗R*_{i,s}) T (I⊗R_{i,t}) detected",
        (1e-2 - neg_viol).max(0.0),
        0.0,
    );
    rejection.note = Some(format!("violation of a non-Toeplitz operator: {neg_viol:e} (needs >= 1e-2)"));
    Ok(vec![
        identity_check("fourier_extract_evaluate", "A_(α;β) = ⟨T(e_β⊗h), e_α⊗ℓ⟩", coef, c.cfg.tol),
        identity_check("fourier_window_action", "Tq = φ_T(S) q on window polynomials", act, c.cfg.tol),
        identity_check("toeplitz_membership", "(I⊗R*_{i,s}) T (I⊗R_{i,t}) = δ_{st} T", viol, c.cfg.tol),
        rejection,
    ])
}

fn berezin_nilpotent(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let dims: Vec<usize> = c.dims().iter().zip(c.t.degrees()).map(|(&d, &g)| d.min(g + 1)).collect();
    let x = nilpotent_point(rng, c.n(), &dims, 0.9)?;
    let k = berezin_kernel(&x, &c.t)?;
    let iso = op_norm(&(k.matrix.adjoint() * &k.matrix - identity(x.h_dim())));
    let mut inter = 0.0f64;
    for i in 1..=c.k() {
        for j in 1..=c.n()[i - 1] {
            let lhs = &k.matrix * x.get(i - 1, j - 1).adjoint();
            let sa = c.t.creation_matrix(Side::Left, i, j, true)?;
            let rhs = kron(&sa, &identity(k.defect_rank)) * &k.matrix;
            inter = inter.max(op_norm(&(lhs - rhs)));
        }
    }
    Ok(vec![
        identity_check("berezin_kernel_isometry", "K_X* K_X = I for pure X", iso, c.cfg.tol),
        identity_check("berezin_intertwining", "K_X X*_{i,j} = (S*_{i,j} ⊗ I) K_X", inter, c.cfg.tol),
    ])
}

fn berezin_moments(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let x = polyball_point(rng, c.n(), &c.dims(), 0.5)?;
    let k = berezin_kernel(&x, &c.t)?;
    let words: Vec<MultiWord> = enumerate_total(c.n(), 2).into_iter().filter(|w| c.t.contains(w)).collect();
    let mut ratio = 0.0f64;
    for a in &words {
        for b in words.iter().filter(|b| a.total_len() + b.total_len() <= 2) {
            let wm = WordMap { truncation: c.t.clone(), side: Side::Left, a: a.clone(), b: b.clone(), coeff: c64(1.0, 0.0) };
            let err = op_norm(&(berezin_transform(&wm, &k)? - x.monomial_pair(a, b)?));
            let bound = moment_tail_bound(&x, &c.t, a, b)?.max(c.cfg.tol);
            ratio = ratio.max(err / bound);
        }
    }
    let mut id = identity_check("berezin_moments", "B_X(S_α S_β*) = X_α X_β*", ratio, 1.0);
    id.note = Some("error divided by max(tol, truncation bound)".into());
    Ok(vec![id])
}

fn defect_order(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let x = polyball_point(rng, c.n(), &c.dims(), 0.9)?;
    let order: Vec<usize> = (0..c.k()).rev().collect();
    let err = max_diff(&defect(&x), &defect_ordered(&x, &order));
    Ok(vec![identity_check("defect_order_independence", "Δ_X = ∏_i (id − Φ_{X_i})(I) in any order", err, c.cfg.tol)])
}

fn poisson_factorization(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let x = polyball_point(rng, c.n(), &c.dims(), 0.5)?;
    let budget: Vec<usize> = c.t.degrees().iter().map(|d| d.div_ceil(2)).collect();
    let chk = poisson_factorization_check(&x, &c.t, &budget)?;
    let mut id = identity_check(
        "poisson_factorization",
        "P(R,X) = C_X* C_X",
        chk.max_error / chk.tail_bound.max(c.cfg.tol),
        1.0,
    );
    id.note = Some(format!("error {:e}, bound {:e}", chk.max_error, chk.tail_bound));
    Ok(vec![id])
}

/// Box degree whose point-mass tail at radius `r` in `k` variables is below `tol`.
fn degree_for(r: f64, k: usize, tol: f64) -> usize {
    let mut d = 8;
    while d < 400 {
        let tail = 2.0 * k as f64 * (1.0 + 2.0 * r / (1.0 - r)).powi(k as i32) * r.powi(d as i32 + 1) / (1.0 - r);
        if tail < tol {
            break;
        }
        d += 8;
    }
    d
}

fn point_mass_items(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let k = c.k();
    let mut pois = 0.0f64;
    let mut herg = 0.0f64;
    for r in c.small_radii() {
        let d = degree_for(r, k, c.cfg.tol / 10.0);
        let mu = CbMapData::point_mass(&vec![c64(1.0, 0.0); k], d)?;
        let x = PolyballPoint::from_scalars(&vec![vec![c64(r, 0.0)]; k])?;
        let v = poisson_transform(&mu, &x)?.value[(0, 0)];
        pois = pois.max((v - c64(((1.0 + r) / (1.0 - r)).powi(k as i32), 0.0)).norm());

        let d1 = degree_for(r, 1, c.cfg.tol / 10.0);
        let mu1 = CbMapData::point_mass(&[c64(1.0, 0.0)], d1)?;
        for j in 0..4 {
            let z = c64(r * (TAU * j as f64 / 4.0).cos(), r * (TAU * j as f64 / 4.0).sin());
            let x = PolyballPoint::from_scalars(&[vec![z]])?;
            let h = herglotz_transform(&mu1, &x)?.value[(0, 0)];
            herg = herg.max((h - (c64(1.0, 0.0) + z) / (c64(1.0, 0.0) - z)).norm());
        }
    }
    Ok(vec![
        identity_check("classical_poisson_point_mass", "Pμ(z) = ∏_i (1−|z_i|²)/|1−z_i|²", pois, c.cfg.tol),
        identity_check("classical_herglotz_point_mass", "Hμ(z) = (1+z)/(1−z)", herg, c.cfg.tol),
    ])
}

fn herglotz_scaling(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let k = c.k();
    let m = 6;
    let v = diagonal_unitaries(rng, k, m);
    let w = isometry(rng, m, 1);
    let im = hermitian_matrix(rng, 1) * c64(0.0, 0.3);
    let t: Vec<Vec<CMat>> = v.iter().map(|row| vec![&row[0] * c64(1.0 / k as f64, 0.0)]).collect();
    let mut err = 0.0f64;
    for r in c.small_radii() {
        let y: Vec<C64> = (0..k)
            .map(|i| c64((r / k as f64) * (0.7 * (i + 1) as f64).cos(), (r / k as f64) * (0.7 * (i + 1) as f64).sin()))
            .collect();
        // f(Y) = W* diag(2 ∏_i (1 − conj(v_{i,p}) y_i)^{-1} − 1) W + i c
        let d: Vec<C64> = (0..m)
            .map(|p| {
                let g = (0..k).fold(c64(1.0, 0.0), |acc, i| acc * (c64(1.0, 0.0) - v[i][0][(p, p)].conj() * y[i]));
                c64(2.0, 0.0) / g - c64(1.0, 0.0)
            })
            .collect();
        let f = w.adjoint() * CMat::from_diagonal(&CVec::from_vec(d)) * &w + &im;
        let ky: Vec<Vec<C64>> = y.iter().map(|&z| vec![z * k as f64]).collect();
        let h = herglotz_from_tuple(&t, &w, &PolyballPoint::from_scalars(&ky)?)? + &im;
        err = err.max(op_norm(&(h - f)));
    }
    Ok(vec![identity_check("herglotz_k_scaling", "f(Y) = Hμ(kY) + i Im f(0)", err, c.cfg.tol)])
}

fn naimark_items(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let l = c.cfg.max_len;
    let e = 2;
    let gen = psd_left_generator(rng, c.n(), e, 2, l)?;
    let kern = kernel_from_generator(Side::Left, c.n(), e, gen, l)?;
    let d = naimark_dilate(&kern, c.cfg.rank_tol)?;
    let rep = dilation_verify(&d, &kern)?;
    let bad = non_psd_left_generator(rng, c.n(), e, l)?;
    let bad = kernel_from_generator(Side::Left, c.n(), e, bad, l)?;
    let refused = matches!(naimark_dilate(&bad, c.cfg.rank_tol), Err(polyball::Error::NotPsd { .. }));
    let iso = rep.isometry_defects.iter().copied().fold(0.0, f64::max);
    Ok(vec![
        identity_check("naimark_reproduction", "K(σ,ω) = P_E V_σ* V_ω|_E", rep.reproduction_error, c.cfg.tol),
        identity_check("naimark_row_isometries", "V_{i,s}* V_{i,t} = δ_{st} I on the window", iso, c.cfg.tol),
        identity_check("naimark_commutation", "V_{i,s} V_{j,t} = V_{j,t} V_{i,s} for i ≠ j", rep.commutator_norm, c.cfg.tol),
        identity_check("naimark_refuses_non_psd", "K not PSD ⇒ no dilation", if refused { 0.0 } else { 1.0 }, 0.0),
    ])
}

fn schur(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let sym = hermitian_symbol(rng, c.n(), 2, c.cfg.max_len.min(3), 1.0)?;
    let rep = schur_positivity(&PluriharmonicFunction::new(sym), &c.cfg.r_grid, c.cfg.max_len, c.cfg.tol)?;
    let disagree = rep.entries.iter().filter(|e| !e.agree).count() as f64;
    Ok(vec![identity_check("schur_positivity_equivalence", "F(rS) ≥ 0 ⇔ Γ_{F_r} ≥ 0", disagree, 0.0)])
}

fn spectral(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Identity>> {
    let r = 0.5;
    let x = PolyballPoint::creation(&c.t, Side::Left, r)?;
    let p = *c.t.degrees().iter().min().expect("k >= 1");
    let est = spectral_radius(&x, p.max(2))?.estimate;
    let mut id = identity_check("spectral_radius_rs", "r(rS) = r", (est - r).abs(), c.cfg.tol);
    if p < 2 {
        id.note = Some("truncation degree below 2 limits the power sequence".into());
    }
    Ok(vec![id])
}

const ITEMS: [Item; 13] = [
    vacuum_cyclicity,
    creation_relations,
    toeplitz_items,
    berezin_nilpotent,
    berezin_moments,
    defect_order,
    poisson_factorization,
    point_mass_items,
    herglotz_scaling,
    naimark_items,
    schur,
    spectral,
    |c, rng| {
        let (_, op) = random_toeplitz(c, rng, 1, 2)?;
        let scaled = FockOperator::new(c.t.clone(), 1, &op.matrix * c64(2.5, -1.0))?;
        let v = is_k_multi_toeplitz(&scaled, c.cfg.tol)?.max_violation;
        Ok(vec![identity_check("toeplitz_linear_span", "multi-Toeplitz operators form a linear space", v, c.cfg.tol)])
    },
];

pub fn cmd_verify(cfg: &RunConfig) -> std::result::Result<(), Failure> {
    let t = FockTruncation::new(&cfg.n, &cfg.degrees)?;
    let ctx = Ctx { cfg, t };
    info!("verify: n = {:?}, degrees = {:?}, seed = {}", cfg.n, cfg.degrees, cfg.seed);
    let results: Vec<Result<Vec<Identity>>> = ITEMS
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let mut rng = rng_for(cfg.seed, i as u64);
            item(&ctx, &mut rng)
        })
        .collect();
    let mut identities = Vec::new();
    for r in results {
        identities.extend(r?);
    }
    for id in &identities {
        debug!("{}: error {:e} / tolerance {:e}", id.name, id.max_error, id.tolerance);
    }
    let all_pass = identities.iter().all(|i| i.pass);
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    emit(
        cfg,
        &json!({
            "config": cfg,
            "timestamp": timestamp,
            "identities": identities,
            "all_pass": all_pass,
        }),
    )?;
    if all_pass {
        Ok(())
    } else {
        let failed: Vec<&str> = identities.iter().filter(|i| !i.pass).map(|i| i.name).collect();
        Err(Failure::Internal(format!("identities failed: {}", failed.join(", "))))
    }
}
