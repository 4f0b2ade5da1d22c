use polyball::berezin::{
    berezin_kernel, berezin_transform, defect, defect_ordered, in_polyball, PolyballPoint,
};
use polyball::fock::{word_operator, FockOperator, FockTruncation};
use polyball::linalg::{c64, identity, max_diff, min_eig, op_norm, CMat};
use polyball::naimark::{dilation_verify, kernel_from_generator, naimark_dilate};
use polyball::pluriharm::{
    herglotz_transform, mu_r_scale, poisson_from_tuple, poisson_transform, CbMapData,
};
use polyball::samples::{
    complex_matrix, diagonal_unitaries, isometry, polyball_point, psd_left_generator, rng_for,
};
use polyball::toeplitz::{extract_symbol, is_k_multi_toeplitz, MultiToeplitzSymbol};
use polyball::words::{enumerate_total, lambda_membership, lambda_pairs, quotients, MultiWord, Side};
use proptest::prelude::*;
use rand::Rng;

const SHAPES: [&[usize]; 4] = [&[2, 1], &[1, 2], &[2], &[1, 1]];

fn shape() -> impl Strategy<Value = &'static [usize]> {
    (0..SHAPES.len()).prop_map(|i| SHAPES[i])
}

fn multiword(n: &'static [usize], max_len: usize) -> impl Strategy<Value = MultiWord> {
    let parts: Vec<_> = n
        .iter()
        .map(|&ni| proptest::collection::vec(1..=ni, 0..=max_len))
        .collect();
    parts.prop_map(move |letters| MultiWord::from_letters(n, &letters).unwrap())
}

fn word_pair() -> impl Strategy<Value = (MultiWord, MultiWord)> {
    shape().prop_flat_map(|n| (multiword(n, 3), multiword(n, 3)))
}

fn point_dims(n: &[usize]) -> Vec<usize> {
    n.iter().map(|&ni| if ni > 1 { 2 } else { 1 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quotients_reassemble((w, v) in word_pair()) {
        if let Some((p, m)) = quotients(Side::Left, &w, &v) {
            prop_assert_eq!(v.concat(&p), w.concat(&m));
            prop_assert!(lambda_membership(&p, &m).unwrap());
        }
        if let Some((p, m)) = quotients(Side::Right, &w, &v) {
            prop_assert_eq!(p.concat(&v), m.concat(&w));
            prop_assert!(lambda_membership(&p, &m).unwrap());
        }
        let rw = w.reverse();
        let rv = v.reverse();
        prop_assert_eq!(
            quotients(Side::Left, &w, &v).map(|(p, m)| (p.reverse(), m.reverse())),
            quotients(Side::Right, &rw, &rv)
        );
    }

    #[test]
    fn multiword_json_roundtrip((w, _) in word_pair()) {
        let back = MultiWord::from_json(&w.shape(), &w.to_json()).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn toeplitz_operators_roundtrip(n in shape(), seed in any::<u64>(), e in 1usize..=2) {
        let mut rng = rng_for(seed, 0);
        let t = FockTruncation::new(n, &vec![3; n.len()]).unwrap();
        let mut sym = MultiToeplitzSymbol::new(n, e).unwrap();
        let mut op = CMat::zeros(t.dim() * e, t.dim() * e);
        for (a, b) in lambda_pairs(n, 3) {
            if rng.gen_bool(0.4) {
                let c = complex_matrix(&mut rng, e, e);
                op += word_operator(&t, &a, &b, &c).unwrap().matrix;
                sym.insert(a, b, c).unwrap();
            }
        }
        let op = FockOperator::new(t, e, op).unwrap();
        prop_assert!(is_k_multi_toeplitz(&op, 1e-12).unwrap().pass);
        let back = extract_symbol(&op, 3).unwrap();
        prop_assert_eq!(back.len(), sym.len());
        for (a, b, m) in sym.iter() {
            prop_assert!(max_diff(back.get(a, b).unwrap(), m) < 1e-14);
        }
        let js = MultiToeplitzSymbol::from_json(&sym.to_json()).unwrap();
        prop_assert_eq!(js.len(), sym.len());
    }

    #[test]
    fn defect_does_not_depend_on_order(n in shape(), seed in any::<u64>()) {
        let mut rng = rng_for(seed, 1);
        let x = polyball_point(&mut rng, n, &point_dims(n), 0.9).unwrap();
        let order: Vec<usize> = (0..n.len()).rev().collect();
        prop_assert!(max_diff(&defect(&x), &defect_ordered(&x, &order)) < 1e-13);
    }

    #[test]
    fn scaling_stays_in_the_polyball(n in shape(), seed in any::<u64>(), r in 0.0f64..1.0) {
        let mut rng = rng_for(seed, 2);
        let x = polyball_point(&mut rng, n, &point_dims(n), 0.9).unwrap();
        let y = x.scaled(r);
        prop_assert!(in_polyball(&y, 0.0).member);
        for (a, b) in x.row_norms().iter().zip(y.row_norms()) {
            prop_assert!((a * r - b).abs() < 1e-12);
        }
    }

    #[test]
    fn berezin_transform_is_unital_positive_and_contractive(
        n in shape(),
        seed in any::<u64>(),
    ) {
        let mut rng = rng_for(seed, 3);
        let x = polyball_point(&mut rng, n, &point_dims(n), 0.6).unwrap();
        let t = FockTruncation::new(n, &vec![4; n.len()]).unwrap();
        let k = berezin_kernel(&x, &t).unwrap();
        let one = FockOperator::identity(&t, 1);
        let b1 = berezin_transform(&one, &k).unwrap();
        prop_assert!(op_norm(&(b1 - identity(x.h_dim()))) <= k.tail_bound);
        let a = complex_matrix(&mut rng, t.dim(), t.dim());
        let pos = FockOperator::new(t.clone(), 1, a.adjoint() * &a).unwrap();
        let bp = berezin_transform(&pos, &k).unwrap();
        prop_assert!(min_eig(&bp) > -1e-10 * op_norm(&pos.matrix));
        let g = FockOperator::new(t, 1, a).unwrap();
        let bg = berezin_transform(&g, &k).unwrap();
        prop_assert!(op_norm(&bg) <= op_norm(&g.matrix) * (1.0 + 1e-12));
    }

    #[test]
    fn radial_data_matches_scaled_point(n in shape(), seed in any::<u64>(), r in 0.1f64..1.0) {
        let mut rng = rng_for(seed, 4);
        let v = polyball_point(&mut rng, n, &point_dims(n), 1.0).unwrap();
        let w = isometry(&mut rng, v.h_dim(), 1);
        let mu = CbMapData::compression(v.entries(), &w, 3).unwrap();
        let x = polyball_point(&mut rng, n, &point_dims(n), 0.5).unwrap();
        let lhs = poisson_transform(&mu_r_scale(&mu, r).unwrap(), &x).unwrap().value;
        let rhs = poisson_transform(&mu, &x.scaled(r)).unwrap().value;
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn series_and_resolvent_poisson_agree(k in 1usize..=2, seed in any::<u64>()) {
        let mut rng = rng_for(seed, 5);
        let n = vec![1; k];
        let v = diagonal_unitaries(&mut rng, k, 3);
        let w = isometry(&mut rng, 3, 1);
        let mu = CbMapData::compression(&v, &w, 12).unwrap();
        let x = polyball_point(&mut rng, &n, &vec![2; k], 0.4).unwrap();
        let series = poisson_transform(&mu, &x).unwrap();
        let exact = poisson_from_tuple(&v, &w, &x).unwrap();
        prop_assert!(op_norm(&(series.value - exact)) <= series.tail_bound + 1e-12);
    }

    #[test]
    fn one_variable_herglotz_real_part_is_poisson(seed in any::<u64>(), n1 in 1usize..=2) {
        let mut rng = rng_for(seed, 6);
        let n = [n1];
        let v = polyball_point(&mut rng, &n, &[2], 1.0).unwrap();
        let w = isometry(&mut rng, 2, 1);
        let degree = if n1 == 1 { 30 } else { 8 };
        let mu = CbMapData::compression(v.entries(), &w, degree).unwrap();
        let x = polyball_point(&mut rng, &n, &[2], 0.5).unwrap();
        let h = herglotz_transform(&mu, &x).unwrap();
        let p = poisson_transform(&mu, &x).unwrap();
        let re = (&h.value + h.value.adjoint()) * c64(0.5, 0.0);
        prop_assert!(op_norm(&(re - p.value)) <= h.tail_bound + p.tail_bound + 1e-12);
    }

    #[test]
    fn dilations_reproduce_psd_kernels(n in shape(), seed in any::<u64>(), e in 1usize..=2) {
        let mut rng = rng_for(seed, 7);
        let gen = psd_left_generator(&mut rng, n, e, 2, 2).unwrap();
        let k = kernel_from_generator(Side::Left, n, e, gen, 2).unwrap();
        let d = naimark_dilate(&k, 1e-10).unwrap();
        let rep = dilation_verify(&d, &k).unwrap();
        prop_assert!(rep.reproduction_error < 1e-9);
        prop_assert!(rep.isometry_defects.iter().all(|&v| v < 1e-9));
        let gram = k.gram();
        prop_assert!(min_eig(&gram) > -1e-10);
        prop_assert_eq!(k.words(), enumerate_total(n, 2));
    }

    #[test]
    fn kernel_columns_are_in_the_polyball_point_range(n in shape(), seed in any::<u64>()) {
        let mut rng = rng_for(seed, 8);
        let x = polyball_point(&mut rng, n, &point_dims(n), 0.7).unwrap();
        let t = FockTruncation::new(n, &vec![4; n.len()]).unwrap();
        let k = berezin_kernel(&x, &t).unwrap();
        let kk = k.matrix.adjoint() * &k.matrix;
        prop_assert!(max_diff(&kk, &kk.adjoint()) < 1e-13);
        prop_assert!(min_eig(&(identity(x.h_dim()) - kk)) > -1e-12);
        let z = PolyballPoint::zero(n, x.h_dim());
        prop_assert!(in_polyball(&z, 0.0).member);
    }
}
