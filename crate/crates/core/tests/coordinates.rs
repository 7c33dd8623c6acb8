use std::f64::consts::PI;

use fission_core::lie::{self, CMat, CartanElement, GroupElement, Triangle, C64, I};
use fission_core::sample::{self, Rng};
use fission_core::spaces::*;
use fission_core::jets;
use proptest::prelude::*;

fn stokes_point(n: usize, k: usize, rng: &mut Rng) -> StokesPoint {
    let s = (0..2 * k - 2)
        .map(|idx| sample::unipotent(n, if idx % 2 == 0 { Triangle::Upper } else { Triangle::Lower }, rng))
        .collect();
    StokesPoint {
        c: sample::group_element(n, rng),
        s,
        lambda: sample::cartan(n, rng),
    }
}

fn random_dir(dim: usize, rng: &mut Rng) -> Vec<C64> {
    sample::disc_vector(dim, rng)
}

fn max_diff(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| lie::max_norm(&(x - y))).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stokes_round_trip(seed in any::<u64>(), n in 2usize..4, k in 2usize..5) {
        let mut rng = sample::rng(seed);
        let p = stokes_point(n, k, &mut rng);
        let de = stokes_to_de(&p).unwrap();
        let back = de_to_stokes(&de).unwrap();
        prop_assert!(max_diff(&p.s, &back.s) < 1e-12);
        // δ(d_j) = ε⁻¹ and δ(e_j) = ε.
        let eps = p.lambda.exp_scaled(PI * I / (k as f64 - 1.0));
        for (d, e) in de.d.iter().zip(&de.e) {
            let dd = CMat::from_diagonal(&d.diagonal());
            let de_ = CMat::from_diagonal(&e.diagonal());
            prop_assert!(lie::max_norm(&(&dd * &eps - CMat::identity(n, n))) < 1e-12);
            prop_assert!(lie::max_norm(&(de_ - &eps)) < 1e-12);
        }
    }

    #[test]
    fn stokes_and_de_moments_agree(seed in any::<u64>(), n in 2usize..4, k in 2usize..5) {
        let mut rng = sample::rng(seed);
        let p = stokes_point(n, k, &mut rng);
        // C⁻¹ S_{2k−2}⋯S_1 e^{2πiΛ} C by direct products.
        let mut prod = CMat::identity(n, n);
        for s in &p.s {
            prod = s * prod;
        }
        let expected = lie::inverse(&p.c, "C").unwrap() * prod * p.lambda.exp_scaled(2.0 * PI * I) * &p.c;
        let got = stokes_to_de(&p).unwrap().moment().unwrap();
        prop_assert!(lie::max_norm(&(got - &expected)) < 1e-10 * lie::max_norm(&expected).max(1.0));
    }

    #[test]
    fn omega_is_antisymmetric(seed in any::<u64>(), k in 2usize..5) {
        let mut rng = sample::rng(seed);
        let space = Fission::new(2, k).unwrap();
        let p = space.sample_point(&mut rng).unwrap();
        let (x, y) = (random_dir(space.dim(), &mut rng), random_dir(space.dim(), &mut rng));
        let a = omega(&space, &p, &x, &y).unwrap();
        let b = omega(&space, &p, &y, &x).unwrap();
        prop_assert!((a + b).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn fundamental_vectors_are_linear(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let space = Fission::new(2, 3).unwrap();
        let p = space.sample_point(&mut rng).unwrap();
        let (x, y) = (sample::disc_matrix(2, &mut rng), sample::disc_matrix(2, &mut rng));
        let vx = fundamental_vector(&space, 0, &x, &p).unwrap().0;
        let vy = fundamental_vector(&space, 0, &y, &p).unwrap().0;
        let vxy = fundamental_vector(&space, 0, &(&x + &y), &p).unwrap().0;
        for i in 0..vx.len() {
            prop_assert!((vx[i] + vy[i] - vxy[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn actions_compose(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let space = Fission::new(2, 3).unwrap();
        let p = space.sample_point(&mut rng).unwrap();
        for (f, kind) in space.factors().into_iter().enumerate() {
            let g = fission_core::verify::random_group_element(kind, 2, &mut rng);
            let h = fission_core::verify::random_group_element(kind, 2, &mut rng);
            let two_steps = act_point(&space, f, &g, &act_point(&space, f, &h, &p).unwrap()).unwrap();
            let once = act_point(&space, f, &(&g * &h), &p).unwrap();
            prop_assert!(max_diff(&two_steps.parts, &once.parts) < 1e-12);
            let fixed = act_point(&space, f, &CMat::identity(2, 2), &p).unwrap();
            prop_assert!(max_diff(&fixed.parts, &p.parts) == 0.0);
        }
    }
}

#[test]
fn zero_lambda_stokes_conversion() {
    let mut rng = sample::rng(1);
    let mut p = stokes_point(2, 2, &mut rng);
    p.lambda = CartanElement::zero(2);
    let de = stokes_to_de(&p).unwrap();
    assert!(lie::max_norm(&(&de.d[0] - lie::inverse(&p.s[1], "S2").unwrap())) < 1e-15);
    assert!(lie::max_norm(&(&de.e[0] - &p.s[0])) < 1e-15);
}

#[test]
fn lattice_translations_leave_omega_unchanged() {
    for k in 2..=4 {
        let mut rng = sample::rng(10 + k as u64);
        let space = Fission::new(2, k).unwrap();
        for _ in 0..3 {
            let p = stokes_point(2, k, &mut rng);
            let shift = [C64::new(1.0, 0.0), C64::new(-2.0, 0.0)];
            let shifted = StokesPoint {
                lambda: p.lambda.add(&CartanElement(shift.to_vec())),
                ..p.clone()
            };
            for _ in 0..4 {
                let (x, y) = (random_dir(space.dim(), &mut rng), random_dir(space.dim(), &mut rng));
                let a = omega_stokes(&space, &p, &x, &y).unwrap();
                let b = omega_stokes(&space, &shifted, &x, &y).unwrap();
                assert!((a - b).norm() < 1e-9 * a.norm().max(1.0), "k={k}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn stokes_chart_matches_de_chart_form() {
    // The Stokes pullback evaluated on directions that only move C and Λ must
    // agree with the d/e evaluator on the transported directions.
    let mut rng = sample::rng(20);
    let space = Fission::new(2, 3).unwrap();
    let p = stokes_point(2, 3, &mut rng);
    let de = space.point(&stokes_to_de(&p).unwrap()).unwrap();
    let dim = space.dim();
    for (a, b) in [(0, 1), (2, 3), (1, 2)] {
        let (x, y) = (jets::unit(dim, a), jets::unit(dim, b));
        let w1 = omega_stokes(&space, &p, &x, &y).unwrap();
        let w2 = omega(&space, &de, &x, &y).unwrap();
        assert!((w1 - w2).norm() < 1e-12 * w1.norm().max(1.0));
    }
}

#[test]
fn expanded_form_matches_two_form() {
    for n in [2usize, 3] {
        for k in 2..=4usize {
            let mut rng = sample::rng(30 + 10 * n as u64 + k as u64);
            let space = Fission::new(n, k).unwrap();
            for _ in 0..20 {
                let p = space.sample_point(&mut rng).unwrap();
                let (x, y) = (random_dir(space.dim(), &mut rng), random_dir(space.dim(), &mut rng));
                let a = omega(&space, &p, &x, &y).unwrap();
                let b = omega_alt(&space, &p, &x, &y).unwrap();
                assert!((a - b).norm() < 1e-10 * a.norm().max(1.0), "n={n} k={k}: {a} vs {b}");
                assert!(omega_alt(&space, &p, &x, &x).unwrap().norm() < 1e-12);
            }
        }
    }
}

#[test]
fn dual_group_view_matches() {
    let mut rng = sample::rng(40);
    let p = stokes_point(2, 2, &mut rng);
    let fp = stokes_to_de(&p).unwrap();
    let dg = dual_group_view(&fp).unwrap();
    // b- = e^{−πiΛ}S₂⁻¹, b+ = e^{−πiΛ}S₁e^{2πiΛ}.
    let half_inv = p.lambda.exp_scaled(-PI * I);
    let full = p.lambda.exp_scaled(2.0 * PI * I);
    assert!(lie::max_norm(&(&dg.b_minus - &half_inv * lie::inverse(&p.s[1], "S2").unwrap())) < 1e-12);
    assert!(lie::max_norm(&(&dg.b_plus - &half_inv * &p.s[0] * &full)) < 1e-12);
    let dd = CMat::from_diagonal(&dg.b_minus.diagonal()) * CMat::from_diagonal(&dg.b_plus.diagonal());
    assert!(lie::max_norm(&(dd - CMat::identity(2, 2))) < 1e-12);
    let word = lie::inverse(&dg.b_minus, "b-").unwrap() * &dg.b_plus;
    assert!(lie::max_norm(&(word - &p.s[1] * &p.s[0] * &full)) < 1e-12);
    assert!(lie::max_norm(&(dg.moment().unwrap() - fp.moment().unwrap())) < 1e-12);
}

#[test]
fn conjugacy_chart_form_matches_intrinsic_form() {
    let mut rng = sample::rng(50);
    for n in [2usize, 3] {
        let space = ConjugacyClass::new(GroupElement::new(sample::group_element(n, &mut rng)).unwrap());
        for _ in 0..5 {
            let p = space.sample_point(&mut rng).unwrap();
            let g = moment_at(&space, &p, 0).unwrap();
            let (x, y) = (random_dir(space.dim(), &mut rng), random_dir(space.dim(), &mut rng));
            let dx = moment_derivative(&space, &p, 0, &x).unwrap();
            let dy = moment_derivative(&space, &p, 0, &y).unwrap();
            let chart = omega(&space, &p, &x, &y).unwrap();
            let intrinsic = intrinsic_form_on_tangents(&g, &dx, &dy).unwrap();
            assert!((chart - intrinsic).norm() < 1e-10 * chart.norm().max(1.0), "{chart} vs {intrinsic}");
        }
    }
    // ω_{g₀}(v_X, v_Y) at g₀ = diag(2, 1) with X = E₁₂, Y = E₂₁: ½(½ − 2).
    let g0 = lie::diag_matrix(&[C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
    let w = intrinsic_form(&g0, &lie::elementary(2, 0, 1), &lie::elementary(2, 1, 0)).unwrap();
    assert!((w - C64::new(-0.75, 0.0)).norm() < 1e-15);
}

#[test]
fn k1_slice_form_is_the_conjugacy_form() {
    let mut rng = sample::rng(60);
    let fs = FissionSimple::new(2);
    for _ in 0..3 {
        let lambda = sample::affine_regular_cartan(2, &mut rng);
        let c = sample::group_element(2, &mut rng);
        let p = fs.point(c.clone(), &lambda).unwrap();
        let class = ConjugacyClass::new(GroupElement::new(lambda.exp_scaled(2.0 * PI * I)).unwrap());
        let g = lie::inverse(&c, "C").unwrap() * lambda.exp_scaled(2.0 * PI * I) * &c;
        for _ in 0..4 {
            // C-directions only: dC = C Y, so dg = [g, Y].
            let (y1, y2) = (sample::disc_matrix(2, &mut rng), sample::disc_matrix(2, &mut rng));
            let mut x = lie::flatten(&y1);
            x.extend([C64::new(0.0, 0.0); 2]);
            let mut y = lie::flatten(&y2);
            y.extend([C64::new(0.0, 0.0); 2]);
            let slice = omega(&fs, &p, &x, &y).unwrap();
            let m = jets::seed(&vec![C64::new(0.0, 0.0); 4], &[&lie::flatten(&y1), &lie::flatten(&y2)]);
            let cj = &jets::Jet::constant(c.clone()) * &jets::Jet::from_entries(2, |i, j| m[2 * i + j]).exp();
            let chart = class.two_form(&[cj], 0, 1).unwrap().value();
            let intrinsic = intrinsic_form_on_tangents(&g, &(&g * &y1 - &y1 * &g), &(&g * &y2 - &y2 * &g)).unwrap();
            assert!((slice - chart).norm() < 1e-10 * slice.norm().max(1.0));
            assert!((slice - intrinsic).norm() < 1e-10 * slice.norm().max(1.0));
        }
    }
}

#[test]
fn non_affine_regular_k1_point_is_rejected() {
    let fs = FissionSimple::new(2);
    let lambda = CartanElement::from_real(&[0.0, 1.0]);
    assert!(matches!(
        fs.point(CMat::identity(2, 2), &lambda),
        Err(fission_core::Error::NotAffineRegular { .. })
    ));
}
