use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankmetric_core::groups::{
    conj_average, covering_number, enumerate_group, gluck_check, group_center, pdf_decompose, pdf_from_function,
    random_pdf, scalar_subgroup, sl_order, GroupData, Pdf, DEFAULT_GROUP_CAP,
};
use rankmetric_core::matgf::central_distance;
use rankmetric_core::{Error, Rational};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn enumerated_orders_match_the_formula() {
    for (n, q, want) in [(2usize, 2u64, 6usize), (2, 3, 24), (2, 4, 60), (2, 5, 120), (3, 2, 168), (2, 9, 720), (4, 2, 20160)] {
        let g = enumerate_group(n, q, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), want);
        assert_eq!(sl_order(n, q), want as u128);
        for i in (0..g.order()).step_by(97) {
            assert_eq!(g.mul(i, g.inverse(i)), g.identity());
            assert_eq!(g.element(i).det().unwrap().0, 1);
        }
    }
    // |GL_4(2)| = 15·14·12·8
    assert_eq!(sl_order(4, 2), 15 * 14 * 12 * 8);
}

#[test]
fn cap_names_the_predicted_order() {
    match enumerate_group(3, 5, DEFAULT_GROUP_CAP) {
        Err(Error::Resource { what, needed, .. }) => {
            assert_eq!(needed, 372_000);
            assert!(what.contains("372000"), "{what}");
        }
        other => panic!("expected a resource error, got {other:?}"),
    }
}

#[test]
fn class_sizes_divide_the_order() {
    for (n, q) in [(2usize, 3u64), (2, 5), (2, 7), (3, 2), (2, 8)] {
        let d = GroupData::new(n, q, DEFAULT_GROUP_CAP).unwrap();
        let sizes = d.classes.sizes();
        assert_eq!(sizes.iter().sum::<usize>(), d.group.order());
        assert!(sizes.iter().all(|s| d.group.order().is_multiple_of(*s)));
        assert_eq!(d.classes.size(d.classes.class_of(d.group.identity())), 1);
        for z in group_center(&d.group) {
            assert_eq!(d.classes.size(d.classes.class_of(z)), 1);
            assert_eq!(central_distance(d.group.element(z)).unwrap().0, Rational::from_integer(0));
        }
    }
}

#[test]
fn centers_are_the_scalar_roots_of_unity() {
    for (n, q, size) in [(2usize, 2u64, 1usize), (2, 3, 2), (2, 5, 2), (2, 7, 2), (3, 2, 1), (3, 3, 1), (2, 9, 2), (2, 4, 1)] {
        let g = enumerate_group(n, q, DEFAULT_GROUP_CAP).unwrap();
        let center = group_center(&g);
        assert_eq!(center, scalar_subgroup(&g));
        assert_eq!(center.len(), size);
    }
}

#[test]
fn covering_number_respects_inverse_classes() {
    for (n, q) in [(2usize, 5u64), (2, 7), (3, 2), (2, 8)] {
        let d = GroupData::new(n, q, DEFAULT_GROUP_CAP).unwrap();
        for k in 0..d.classes.count() {
            let a = covering_number(&d.constants, k);
            assert_eq!(a, covering_number(&d.constants, d.classes.inverse_class(k)));
            assert_eq!(a.is_none(), d.classes.is_central(k));
        }
    }
}

#[test]
fn gluck_bound_on_sl2_13() {
    let d = GroupData::new(2, 13, DEFAULT_GROUP_CAP).unwrap();
    let t = d.character_table(1).unwrap();
    assert!(t.orthogonality_error() < 1e-8);
    let r = gluck_check(&t, &d.classes, 13);
    assert!(r.passed && r.max_ratio < 8.0 / 13.0, "{r:?}");
    for k in 0..d.classes.count() {
        assert_eq!(r.per_class[k].is_none(), d.classes.is_central(k));
    }
}

#[test]
fn structure_constants_match_character_formula_on_sl2_5() {
    let d = GroupData::new(2, 5, DEFAULT_GROUP_CAP).unwrap();
    let t = d.character_table(9).unwrap();
    let r = d.classes.count();
    let order = d.group.order() as f64;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let kinv = d.classes.inverse_class(k);
                let s: Complex64 = (0..t.count())
                    .map(|p| t.value(p, i) * t.value(p, j) * t.value(p, kinv) / t.degree(p) as f64)
                    .sum();
                let want = d.classes.size(i) as f64 * d.classes.size(j) as f64 / order * s;
                assert!((want - c(d.constants.get(i, j, k) as f64)).norm() < 1e-6);
            }
        }
    }
}

#[test]
fn conj_average_is_a_linear_projection() {
    let d = GroupData::new(2, 5, DEFAULT_GROUP_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let a = random_pdf(&d.group, &mut rng);
    let b = random_pdf(&d.group, &mut rng);
    let ca = conj_average(&d.classes, &a);
    let twice = conj_average(&d.classes, &ca);
    let close = |x: &Pdf, y: &Pdf| x.values().iter().zip(y.values()).all(|(u, v)| (u - v).norm() < 1e-12);
    assert!(close(&ca, &twice));
    let mixed = conj_average(&d.classes, &a.mix(&b, 0.3));
    assert!(close(&mixed, &ca.mix(&conj_average(&d.classes, &b), 0.3)));
    assert!(ca.class_values(&d.classes, 1e-12).is_some());
    assert!(a.class_values(&d.classes, 1e-12).is_none());
    assert!((ca.value(d.group.identity()) - c(1.0)).norm() < 1e-12);
    assert!(ca.gram_check(&d.group, 64, 5, &mut rng) >= -1e-9);
}

#[test]
fn random_pdfs_are_bounded_and_positive() {
    let d = GroupData::new(2, 3, DEFAULT_GROUP_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let p = random_pdf(&d.group, &mut rng);
        assert!((p.value(d.group.identity()) - c(1.0)).norm() < 1e-12);
        assert!(p.values().iter().all(|v| v.norm() <= 1.0 + 1e-12));
        assert!(p.gram_min_eigenvalue(&d.group, &(0..24).collect::<Vec<_>>()) >= -1e-9);
    }
    let constant = pdf_from_function(&d.group, &vec![c(2.5); 24]).unwrap();
    assert!(constant.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));
    assert!(pdf_from_function(&d.group, &vec![c(0.0); 24]).is_err());
}

#[test]
fn decomposition_examples() {
    let d = GroupData::new(2, 5, DEFAULT_GROUP_CAP).unwrap();
    let t = d.character_table(2).unwrap();
    let order = d.group.order();

    let one = pdf_decompose(&Pdf::trivial(order), &d.classes, &t).unwrap();
    assert!((one.lambda - 1.0).abs() < 1e-8 && one.lambda_pi.iter().all(|x| x.abs() < 1e-8));

    for p in 1..t.count() {
        let chi = Pdf::normalized_character(&t, &d.classes, p);
        let dec = pdf_decompose(&chi, &d.classes, &t).unwrap();
        assert!(dec.lambda.abs() < 1e-8);
        for (i, x) in dec.lambda_pi.iter().enumerate() {
            let want = if i + 1 == p { 1.0 } else { 0.0 };
            assert!((x - want).abs() < 1e-8);
        }
    }

    let mut delta = vec![c(0.0); order];
    delta[d.group.identity()] = c(1.0);
    let dec = pdf_decompose(&Pdf::from_values(delta), &d.classes, &t).unwrap();
    assert!((dec.lambda - 1.0 / order as f64).abs() < 1e-8);
    for (i, x) in dec.lambda_pi.iter().enumerate() {
        let dp = t.degree(i + 1) as f64;
        assert!((x - dp * dp / order as f64).abs() < 1e-8);
    }
    assert!(dec.sum_error < 1e-8 && dec.reconstruction_error < 1e-8 && dec.positive);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let chi = conj_average(&d.classes, &random_pdf(&d.group, &mut rng));
        let dec = pdf_decompose(&chi, &d.classes, &t).unwrap();
        assert!(dec.positive && dec.sum_error < 1e-8 && dec.reconstruction_error < 1e-8);
    }

    let not_class = Pdf::from_values((0..order).map(|_| c(rng.gen())).collect());
    assert!(pdf_decompose(&not_class, &d.classes, &t).is_err());
}
