//! Acceptance suite. Prints one PASS/FAIL line per criterion with the
//! measured worst case and the pinned tolerance, then fails if any criterion
//! failed. Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use fission_cli::{config, dims, RunOptions};
use fission_core::additive::{self, ExtendedPoint, IrregularType, JetAlgebra, JetAlgebraElement, JetGroupElement, PrincipalPart};
use fission_core::jets::{self, Jet};
use fission_core::lie::{self, CMat, CartanElement, GroupElement, Triangle, C64, I};
use fission_core::sample::{self, Rng};
use fission_core::spaces::*;
use fission_core::verify::{self, Status, Tolerances};

struct Outcome {
    id: usize,
    title: &'static str,
    ok: bool,
    detail: String,
}

fn outcome(id: usize, title: &'static str, ok: bool, detail: String) -> Outcome {
    println!("{} [{id:>2}] {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    Outcome { id, title, ok, detail }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

/// Max QH1/QH2 residual and QH3 agreement at `points` generic samples. A QH3
/// decision without spectral gap marks the sample non-generic; it is redrawn
/// (QH1/QH2 still count) up to `max_redraws` times per sample.
struct SuiteResult {
    worst: f64,
    qh3_ok: bool,
    redraws: usize,
}

fn axiom_samples(space: &dyn QhSpace, points: usize, rng: &mut Rng, tol: &Tolerances) -> SuiteResult {
    const MAX_REDRAWS: usize = 10;
    let mut out = SuiteResult {
        worst: 0.0,
        qh3_ok: true,
        redraws: 0,
    };
    for _ in 0..points {
        let mut attempts = 0;
        loop {
            let p = space.sample_point(rng).unwrap();
            let t = verify::random_triples(space.dim(), 10, rng);
            out.worst = out.worst.max(verify::check_qh1(space, &p, &t, tol.qh1).unwrap().residual);
            for (f, kind) in space.factors().into_iter().enumerate() {
                let x = verify::random_algebra_element(kind, space.n(), rng);
                out.worst = out.worst.max(verify::check_qh2(space, f, &p, &x, tol.qh2).unwrap().residual);
            }
            let q3 = verify::check_qh3(space, &p, tol).unwrap();
            out.worst = out.worst.max(q3.residual);
            match q3.status {
                Status::Inconclusive if attempts < MAX_REDRAWS => {
                    attempts += 1;
                    out.redraws += 1;
                }
                s => {
                    out.qh3_ok &= s == Status::Pass;
                    break;
                }
            }
        }
    }
    out
}

fn fission_space(n: usize, k: usize) -> Arc<dyn QhSpace> {
    if k == 1 {
        Arc::new(FissionSimple::new(n))
    } else {
        Arc::new(Fission::new(n, k).unwrap())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let (mut worst, mut qh3_ok, mut redraws) = (0.0f64, true, Vec::new());
    for n in [2usize, 3] {
        for k in 1..=4usize {
            let space = fission_space(n, k);
            let mut rng = sample::rng(sample::derive_seed(1, &[n as u64, k as u64]));
            let r = axiom_samples(space.as_ref(), 5, &mut rng, &tol);
            worst = worst.max(r.worst);
            qh3_ok &= r.qh3_ok;
            if r.redraws > 0 {
                redraws.push(format!("n={n},k={k}:{}", r.redraws));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst < 1e-8 && qh3_ok && secs < 120.0;
    outcome(
        1,
        "axiom suite on fission spaces",
        ok,
        format!(
            "max residual {worst:.3e} (tol 1e-8), QH3 kernels match: {qh3_ok}, QH3 redraws [{}], {secs:.1}s (limit 120s)",
            redraws.join(" ")
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        for k in 2..=4usize {
            let space = Fission::new(n, k).unwrap();
            let mut rng = sample::rng(sample::derive_seed(2, &[n as u64, k as u64]));
            for _ in 0..20 {
                let p = space.sample_point(&mut rng).unwrap();
                let x = sample::disc_vector(space.dim(), &mut rng);
                let y = sample::disc_vector(space.dim(), &mut rng);
                let a = omega(&space, &p, &x, &y).unwrap();
                let b = omega_alt(&space, &p, &x, &y).unwrap();
                worst = worst.max(rel((a - b).norm(), a.norm()));
            }
        }
    }
    outcome(2, "expanded form equals the two-form", worst < 1e-10, format!("max rel diff {worst:.3e} (tol 1e-10)"))
}

fn criterion_3() -> Outcome {
    let mut rng = sample::rng(3);
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let space = ConjugacyClass::new(GroupElement::new(sample::group_element(n, &mut rng)).unwrap());
        for _ in 0..10 {
            let p = space.sample_point(&mut rng).unwrap();
            let g = moment_at(&space, &p, 0).unwrap();
            let x = sample::disc_vector(space.dim(), &mut rng);
            let y = sample::disc_vector(space.dim(), &mut rng);
            let chart = omega(&space, &p, &x, &y).unwrap();
            let dx = moment_derivative(&space, &p, 0, &x).unwrap();
            let dy = moment_derivative(&space, &p, 0, &y).unwrap();
            let intrinsic = intrinsic_form_on_tangents(&g, &dx, &dy).unwrap();
            worst = worst.max(rel((chart - intrinsic).norm(), chart.norm()));
        }
    }
    let g0 = lie::diag_matrix(&[C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
    let hand = intrinsic_form(&g0, &lie::elementary(2, 0, 1), &lie::elementary(2, 1, 0)).unwrap();
    let hand_err = (hand - C64::new(-0.75, 0.0)).norm();
    outcome(
        3,
        "conjugacy chart form equals the intrinsic form",
        worst < 1e-10 && hand_err < 1e-15,
        format!("max rel diff {worst:.3e} (tol 1e-10), hand value {hand} vs -3/4 err {hand_err:.1e} (tol 1e-15)"),
    )
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = sample::rng(4);
    let f: Arc<dyn QhSpace> = Arc::new(Fission::new(2, 2).unwrap());
    let d: Arc<dyn QhSpace> = Arc::new(Double::new(2));
    let c: Arc<dyn QhSpace> = Arc::new(ConjugacyClass::new(GroupElement::new(sample::group_element(2, &mut rng)).unwrap()));
    let spaces: [(&str, Fusion); 2] = [
        ("C(k=2)*C(k=2)", fuse(f.clone(), f, 0, 0).unwrap()),
        ("D*conjugacy", fuse(d, c, 0, 0).unwrap()),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, space) in &spaces {
        let r = axiom_samples(space, 5, &mut rng, &tol);
        ok &= r.worst < 1e-8 && r.qh3_ok;
        parts.push(format!("{name}: max residual {:.3e}, QH3 {}, redraws {}", r.worst, r.qh3_ok, r.redraws));
    }
    outcome(4, "fusion products satisfy the axioms", ok, format!("{} (tol 1e-8)", parts.join("; ")))
}

fn criterion_5() -> Outcome {
    let tol = Tolerances::default();
    let space = groupoid_space(2).unwrap();
    let mut rng = sample::rng(5);
    let (mut mu_err, mut rel_err, mut orbit_err) = (0.0f64, 0.0f64, 0.0f64);
    let (mut nullities, mut redraws) = (Vec::new(), 0);
    let id = CMat::identity(2, 2);
    let relation = |t: &GroupoidTuple| {
        let (a, b) = t.relation_residuals();
        let scale = lie::max_norm(&t.g).max(1.0) * lie::max_norm(&t.b_plus).max(lie::max_norm(&t.b_minus)).max(1.0);
        a.max(b) / scale
    };
    while nullities.len() < 5 {
        let p = sample_unit_level(2, &mut rng).unwrap();
        mu_err = mu_err.max(lie::max_norm(&(moment_at(&space, &p, 0).unwrap() - &id)));
        let t = groupoid_tuple(&p).unwrap();
        rel_err = rel_err.max(relation(&t));
        let g = sample::group_element(2, &mut rng);
        let q = act_point(&space, 0, &g, &p).unwrap();
        orbit_err = orbit_err.max(lie::max_norm(&(moment_at(&space, &q, 0).unwrap() - &id)));
        orbit_err = orbit_err.max(relation(&groupoid_tuple(&q).unwrap()));
        let r = verify::check_reduction(&space, 0, &p, &tol).unwrap();
        match r.status {
            Status::Inconclusive if redraws < 20 => redraws += 1,
            _ => nullities.push((r.status, r.rank_observed)),
        }
    }
    let kernel_ok = nullities.iter().all(|&(s, k)| s == Status::Pass && k == Some(4));
    let ok = mu_err < 1e-10 && rel_err < 1e-9 && orbit_err < 1e-9 && kernel_ok;
    outcome(
        5,
        "reduction of the fused k=2 pair and groupoid relations",
        ok,
        format!(
            "|mu-I| {mu_err:.3e} (tol 1e-10), kernel dims {:?} (expect 4), relations {rel_err:.3e} (tol 1e-9), after G action {orbit_err:.3e} (tol 1e-9), redraws {redraws}",
            nullities.iter().map(|n| n.1.unwrap_or(usize::MAX)).collect::<Vec<_>>()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = sample::rng(6);
    let fs = FissionSimple::new(2);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let lambda = sample::affine_regular_cartan(2, &mut rng);
        let c = sample::group_element(2, &mut rng);
        let p = fs.point(c.clone(), &lambda).unwrap();
        let eps = lambda.exp_scaled(2.0 * PI * I);
        let class = ConjugacyClass::new(GroupElement::new(eps.clone()).unwrap());
        let g = lie::inverse(&c, "C").unwrap() * &eps * &c;
        for _ in 0..5 {
            // Slice directions move C only: dC = C Y, hence dg = [g, Y].
            let (y1, y2) = (sample::disc_matrix(2, &mut rng), sample::disc_matrix(2, &mut rng));
            let pad = |y: &CMat| {
                let mut v = lie::flatten(y);
                v.extend([C64::new(0.0, 0.0); 2]);
                v
            };
            let slice = omega(&fs, &p, &pad(&y1), &pad(&y2)).unwrap();
            let m = jets::seed(&[C64::new(0.0, 0.0); 4], &[&lie::flatten(&y1), &lie::flatten(&y2)]);
            let cj = &Jet::constant(c.clone()) * &Jet::from_entries(2, |i, j| m[2 * i + j]).exp();
            let chart = class.two_form(&[cj], 0, 1).unwrap().value();
            let intrinsic = intrinsic_form_on_tangents(&g, &(&g * &y1 - &y1 * &g), &(&g * &y2 - &y2 * &g)).unwrap();
            worst = worst.max(rel((slice - chart).norm(), slice.norm()));
            worst = worst.max(rel((slice - intrinsic).norm(), slice.norm()));
        }
    }
    outcome(6, "k=1 slice form is the conjugacy-class form", worst < 1e-10, format!("max rel diff {worst:.3e} (tol 1e-10)"))
}

fn stokes_point(n: usize, k: usize, rng: &mut Rng) -> StokesPoint {
    StokesPoint {
        c: sample::group_element(n, rng),
        s: (0..2 * k - 2)
            .map(|i| sample::unipotent(n, if i % 2 == 0 { Triangle::Upper } else { Triangle::Lower }, rng))
            .collect(),
        lambda: sample::cartan(n, rng),
    }
}

fn criterion_7() -> Outcome {
    let (mut mu, mut trip, mut lattice) = (0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 3] {
        for k in 2..=4usize {
            let mut rng = sample::rng(sample::derive_seed(7, &[n as u64, k as u64]));
            let space = Fission::new(n, k).unwrap();
            for _ in 0..5 {
                let p = stokes_point(n, k, &mut rng);
                let mut word = CMat::identity(n, n);
                for s in &p.s {
                    word = s * word;
                }
                let expected = lie::inverse(&p.c, "C").unwrap() * word * p.lambda.exp_scaled(2.0 * PI * I) * &p.c;
                let de = stokes_to_de(&p).unwrap();
                mu = mu.max(rel(lie::max_norm(&(de.moment().unwrap() - &expected)), lie::max_norm(&expected)));
                let back = de_to_stokes(&de).unwrap();
                for (a, b) in p.s.iter().zip(&back.s) {
                    trip = trip.max(lie::max_norm(&(a - b)));
                }
                let shift: Vec<C64> = (0..n).map(|i| C64::new(i as f64 * 2.0 - 1.0, 0.0)).collect();
                let moved = StokesPoint {
                    lambda: p.lambda.add(&CartanElement(shift)),
                    ..p.clone()
                };
                let x = sample::disc_vector(space.dim(), &mut rng);
                let y = sample::disc_vector(space.dim(), &mut rng);
                let a = omega_stokes(&space, &p, &x, &y).unwrap();
                let b = omega_stokes(&space, &moved, &x, &y).unwrap();
                lattice = lattice.max(rel((a - b).norm(), a.norm()));
            }
        }
    }
    outcome(
        7,
        "Stokes and d/e coordinates agree",
        mu < 1e-10 && trip < 1e-12 && lattice < 1e-9,
        format!("moments {mu:.3e} (tol 1e-10), round trip {trip:.3e} (tol 1e-12), lattice shift {lattice:.3e} (tol 1e-9)"),
    )
}

fn criterion_8() -> Outcome {
    let (mut pairing, mut closed, mut moment, mut lambda) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 3] {
        for k in 1..=4usize {
            let mut rng = sample::rng(sample::derive_seed(8, &[n as u64, k as u64]));
            for _ in 0..5 {
                // ⟨g·A, X⟩ = ⟨A, g⁻¹Xg⟩ with the conjugate expanded by hand.
                let mut gc = vec![sample::group_element(n, &mut rng)];
                gc.extend((1..k).map(|_| sample::disc_matrix(n, &mut rng)));
                let g = JetGroupElement::new(gc).unwrap();
                let a = PrincipalPart::new((0..k).map(|_| sample::disc_matrix(n, &mut rng)).collect()).unwrap();
                let x = JetAlgebraElement::random(n, k, JetAlgebra::Full, &mut rng);
                let gi = g.inverse();
                let mut conj = vec![CMat::zeros(n, n); k];
                for (p, gp) in gi.coeffs().iter().enumerate() {
                    for (q, xq) in x.coeffs.iter().enumerate() {
                        for (r, hr) in g.coeffs().iter().enumerate() {
                            if p + q + r < k {
                                conj[p + q + r] += gp * xq * hr;
                            }
                        }
                    }
                }
                let lhs = additive::res_pairing(&additive::coadjoint(&g, &a).unwrap(), &x).unwrap();
                let rhs = additive::res_pairing(&a, &JetAlgebraElement::new(conj).unwrap()).unwrap();
                pairing = pairing.max(rel((lhs - rhs).norm(), lhs.norm()));
            }
            let orbit = additive::ExtendedOrbit::new(IrregularType::sample(n, k, &mut rng).unwrap());
            for _ in 0..2 {
                let p = orbit.sample_point(&mut rng);
                let t = verify::random_triples(orbit.chart_dim(), 10, &mut rng);
                closed = closed.max(additive::check_closedness(&orbit, &p, &t, 1e-9).unwrap().residual);
                moment = moment.max(additive::moment_checks(&orbit, &p, &mut rng, 1e-9).unwrap().residual);
                let q = orbit.extended_point(&p).unwrap();
                let base = additive::formal_normalize(&q, orbit.irregular_type()).unwrap().lambda();
                let h = sample::group_element(n, &mut rng);
                let hi = lie::inverse(&h, "h").unwrap();
                let t = sample::torus_element(n, &mut rng);
                let moved = [
                    ExtendedPoint {
                        g0: GroupElement::new(q.g0.matrix() * &hi).unwrap(),
                        a: q.a.conjugate(&h, &hi),
                    },
                    ExtendedPoint {
                        g0: GroupElement::new(&t * q.g0.matrix()).unwrap(),
                        a: q.a.clone(),
                    },
                ];
                for m in &moved {
                    let l = additive::formal_normalize(m, orbit.irregular_type()).unwrap().lambda();
                    for (u, v) in l.entries().iter().zip(base.entries()) {
                        lambda = lambda.max((u - v).norm());
                    }
                }
            }
        }
    }
    outcome(
        8,
        "additive suite",
        pairing < 1e-12 && closed < 1e-9 && moment < 1e-9 && lambda < 1e-9,
        format!(
            "pairing {pairing:.3e} (tol 1e-12), closedness {closed:.3e} (tol 1e-9), moments {moment:.3e} (tol 1e-9), Lambda invariance {lambda:.3e} (tol 1e-9)"
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut mismatches = Vec::new();
    for n in [2usize, 3] {
        for k in 1..=4usize {
            let f = additive::dims(n, k).unwrap();
            let m = dims::measure(n, k, sample::derive_seed(9, &[n as u64, k as u64])).unwrap();
            let same = m.conclusive && (m.c_tilde, m.c, m.o_tilde, m.o, m.o_b) == (f.c_tilde, f.c, f.o_tilde, f.o, f.o_b);
            let matching = m.c == m.o && m.c_tilde == m.o_tilde;
            if !same || !matching {
                mismatches.push(format!("n={n},k={k}: {m:?} vs {f:?}"));
            }
        }
    }
    let f = additive::dims(2, 2).unwrap();
    let table = (f.c_tilde, f.o_tilde, f.c, f.o, f.o_b);
    let ok = mismatches.is_empty() && table == (8, 8, 4, 4, Some(0));
    outcome(
        9,
        "measured ranks match the dimension counts",
        ok,
        format!(
            "n in {{2,3}}, k in 1..=4: {}; n=2,k=2 gives {table:?}",
            if mismatches.is_empty() { "all ranks equal the formulas".to_string() } else { mismatches.join("; ") }
        ),
    )
}

fn criterion_10() -> Outcome {
    let text = r#"
n = 2
seed = 2024
samples = 3
checks = ["qh1", "qh2", "qh3", "invariance", "equivariance", "slice", "reduction", "closedness", "moment", "dimension", "t_slice"]
[[spaces]]
kind = "fission"
k = 3
[[spaces]]
kind = "fusion"
parts = [{ kind = "double" }, { kind = "conjugacy" }]
[[spaces]]
kind = "groupoid"
[[spaces]]
kind = "extended"
k = 2
"#;
    let campaign = config::parse(text, "acceptance").unwrap();
    let run = |threads| {
        let opts = RunOptions {
            threads: Some(threads),
            ..Default::default()
        };
        fission_cli::run(campaign.clone(), &opts).unwrap().to_json()
    };
    let (a, b, c) = (run(1), run(1), run(3));
    let ok = a == b && a == c;
    outcome(10, "reruns are byte-identical", ok, format!("{} bytes, rerun identical: {}, 3 threads identical: {}", a.len(), a == b, a == c))
}

#[test]
fn acceptance() {
    let outcomes = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.ok).map(|o| format!("[{}] {}: {}", o.id, o.title, o.detail)).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
