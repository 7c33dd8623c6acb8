use std::sync::Arc;

use fission_core::lie::GroupElement;
use fission_core::sample::{self, Rng};
use fission_core::spaces::*;
use fission_core::verify::{self, CheckReport, Status, Tolerances};
use proptest::prelude::*;

fn spaces_under_test() -> Vec<Arc<dyn QhSpace>> {
    let mut rng = sample::rng(7);
    let mut out: Vec<Arc<dyn QhSpace>> = Vec::new();
    for n in [2usize, 3] {
        out.push(Arc::new(ConjugacyClass::new(GroupElement::new(sample::group_element(n, &mut rng)).unwrap())));
        out.push(Arc::new(Double::new(n)));
        out.push(Arc::new(FissionSimple::new(n)));
        for k in 2..=4 {
            out.push(Arc::new(Fission::new(n, k).unwrap()));
        }
    }
    out
}

fn fusions() -> Vec<Arc<dyn QhSpace>> {
    let mut rng = sample::rng(8);
    let f2: Arc<dyn QhSpace> = Arc::new(Fission::new(2, 2).unwrap());
    let f3: Arc<dyn QhSpace> = Arc::new(Fission::new(2, 3).unwrap());
    let d: Arc<dyn QhSpace> = Arc::new(Double::new(2));
    let c: Arc<dyn QhSpace> = Arc::new(ConjugacyClass::new(GroupElement::new(sample::group_element(2, &mut rng)).unwrap()));
    vec![
        Arc::new(fuse(f2.clone(), f3, 0, 0).unwrap()),
        Arc::new(fuse(d, c.clone(), 0, 0).unwrap()),
        Arc::new(fuse(f2, c, 0, 0).unwrap()),
    ]
}

/// QH1 and QH2 at every drawn point; QH3 must pass conclusively somewhere
/// and never fail, with inconclusive draws replaced.
fn assert_axioms(space: &dyn QhSpace, rng: &mut Rng) {
    let tol = Tolerances::default();
    let mut conclusive_qh3 = 0;
    let mut draws = 0;
    while conclusive_qh3 < 2 {
        draws += 1;
        assert!(draws <= 12, "{}: too many inconclusive QH3 draws", space.name());
        let p = space.sample_point(rng).unwrap();
        for r in verify::axiom_suite(space, &p, 10, rng, &tol).unwrap() {
            match (r.name.as_str(), r.status) {
                ("qh3", Status::Inconclusive) => {}
                ("qh3", Status::Pass) => conclusive_qh3 += 1,
                (_, Status::Pass) => {}
                _ => panic!("{}: {:?}", space.name(), r),
            }
        }
    }
}

#[test]
fn axioms_hold_on_basic_spaces() {
    for (i, space) in spaces_under_test().iter().enumerate() {
        let mut rng = sample::rng(sample::derive_seed(100, &[i as u64]));
        assert_axioms(space.as_ref(), &mut rng);
    }
}

#[test]
fn axioms_hold_on_fusions() {
    for (i, space) in fusions().iter().enumerate() {
        let mut rng = sample::rng(sample::derive_seed(200, &[i as u64]));
        assert_axioms(space.as_ref(), &mut rng);
    }
}

#[test]
fn forms_are_invariant_and_moments_equivariant() {
    let tol = Tolerances::default();
    let mut all = spaces_under_test();
    all.extend(fusions());
    for (i, space) in all.iter().enumerate() {
        let mut rng = sample::rng(sample::derive_seed(300, &[i as u64]));
        let p = space.sample_point(&mut rng).unwrap();
        for (f, kind) in space.factors().into_iter().enumerate() {
            let g = verify::random_group_element(kind, space.n(), &mut rng);
            let inv = verify::check_invariance(space.as_ref(), f, &g, &p, tol.invariance).unwrap();
            let eqv = verify::check_equivariance(space.as_ref(), f, &g, &p, tol.equivariance).unwrap();
            assert!(inv.passed(), "{:?}", inv);
            assert!(eqv.passed(), "{:?}", eqv);
        }
    }
}

#[test]
fn torus_slices_of_fission_spaces() {
    let tol = Tolerances::default();
    for k in 2..=3 {
        let space = Fission::new(2, k).unwrap();
        let mut rng = sample::rng(400 + k as u64);
        let p = space.sample_point(&mut rng).unwrap();
        let t = space.factors().iter().position(|f| *f == FactorKind::T).unwrap();
        let r = verify::check_slice(&space, t, &p, &tol).unwrap();
        assert_ne!(r.status, Status::Fail, "{:?}", r);
    }
}

#[test]
fn merged_reports_pick_the_worst_status() {
    let mut rng = sample::rng(500);
    let space = Double::new(2);
    let reports: Vec<CheckReport> = (0..3)
        .map(|_| {
            let p = space.sample_point(&mut rng).unwrap();
            verify::check_qh1(&space, &p, &verify::random_triples(space.dim(), 5, &mut rng), 1e-8).unwrap()
        })
        .collect();
    let merged = CheckReport::merge(&reports).unwrap();
    assert_eq!(merged.samples, 3);
    assert_eq!(merged.status, Status::Pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn qh1_on_random_double_points(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let space = Double::new(2);
        let p = space.sample_point(&mut rng).unwrap();
        let t = verify::random_triples(space.dim(), 8, &mut rng);
        let r = verify::check_qh1(&space, &p, &t, 1e-8).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn qh2_on_random_fission_points(seed in any::<u64>(), k in 2usize..5) {
        let mut rng = sample::rng(seed);
        let space = Fission::new(2, k).unwrap();
        let p = space.sample_point(&mut rng).unwrap();
        for (f, kind) in space.factors().into_iter().enumerate() {
            let x = verify::random_algebra_element(kind, 2, &mut rng);
            let r = verify::check_qh2(&space, f, &p, &x, 1e-9).unwrap();
            prop_assert!(r.passed(), "{:?}", r);
        }
    }
}
