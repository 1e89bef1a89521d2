use ph_bspline::hermite::{
    build_conics, endpoint_preimage, hermite_report, pencil_cubic, recover_v, solve_sign_case, solve_sign_case_rotated,
    Conic, ConicKind,
};
use ph_bspline::{
    build_mu, classify_conic, curve_quality, feasibility, intersect_conics, ph_from_preimage, solve_hermite, Complex64,
    Error, HermiteProblem, Mode, MuLayout, SignCase,
};
mod common;

use common::conics::{grid_oracle, moved, Param, SPAN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn problem(p0: (f64, f64), p1: (f64, f64), d0: (f64, f64), d1: (f64, f64), k0: f64, k1: f64) -> HermiteProblem {
    HermiteProblem::new(c(p0.0, p0.1), c(p1.0, p1.1), c(d0.0, d0.1), c(d1.0, d1.1), k0, k1, 0.5).unwrap()
}

fn sampled_cubic() -> HermiteProblem {
    problem((1.0, 0.0), (3.0, 0.5), (1.0, -1.0), (0.2, 3.0), 3.040559, 1.066953)
}

fn wide_turn() -> HermiteProblem {
    problem((-6.0, -1.0), (1.0, 0.0), (30.0, 25.0), (25.0, -30.0), 0.0366, 0.0275)
}

fn symmetric_arch(k: f64) -> HermiteProblem {
    problem((0.0, 0.0), (1.0, 0.0), (-3.0, 1.0), (-3.0, -1.0), k, k)
}

fn parallel_tangents(k0: f64, k1: f64) -> HermiteProblem {
    problem((0.0, 5.0), (-3.0, 4.0), (25.0, -15.0), (25.0, -15.0), k0, k1)
}

fn count(pr: &HermiteProblem, sign: SignCase) -> usize {
    let v = solve_sign_case(pr, sign).unwrap();
    for s in &v {
        assert!(s.interpolates(pr), "{sign:?}: residuals {:?}", s.residuals);
    }
    v.len()
}

#[test]
fn endpoint_preimages_square_to_tangents() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let d0 = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let d1 = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        for sign in SignCase::ALL {
            let (z0, z3) = endpoint_preimage(d0, d1, sign).unwrap();
            assert!((z0 * z0 - d0).norm() <= 1e-12 * (1.0 + d0.norm()));
            assert!((z3 * z3 - d1).norm() <= 1e-12 * (1.0 + d1.norm()));
        }
    }
}

#[test]
fn conics_match_direct_endpoint_mismatch() {
    // For any (u1, u2), (A + iB)(u1, u2) is r(1) - p1 of the curve built from the
    // remaining coefficients, computed here through the Gramian pipeline.
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut tested = 0;
    while tested < 40 {
        let a = rng.gen_range(0.1..0.9);
        let pr = HermiteProblem::new(
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            a,
        )
        .unwrap();
        let sign = if rng.gen_bool(0.5) { SignCase::PP } else { SignCase::PM };
        let (z0, z3) = endpoint_preimage(pr.d0, pr.d1, sign).unwrap();
        if z0.re.abs() < 0.1 * z0.norm() || z3.re.abs() < 0.1 * z3.norm() {
            continue;
        }
        tested += 1;
        let (ca, cb) = build_conics(&pr, z0, z3).unwrap();
        let mu = build_mu(2, &[a], MuLayout::Clamped { start: 0.0, end: 1.0 }).unwrap();
        for _ in 0..6 {
            let (u1, u2) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let (v1, v2) = recover_v(&pr, z0, z3, u1, u2);
            let z = [z0, c(u1, v1), c(u2, v2), z3];
            let ph = ph_from_preimage(&z, &mu, 2, Mode::Clamped, pr.p0).unwrap();
            let miss = ph.curve().eval(1.0).unwrap() - pr.p1;
            let got = c(ca.eval(u1, u2), cb.eval(u1, u2));
            let scale = 1.0 + ph.control_points().iter().fold(0.0f64, |m, x| m.max(x.norm()));
            assert!((got - miss).norm() <= 1e-9 * scale, "a={a}: {got} vs {miss}");
        }
    }
}

#[test]
fn curvature_elimination_matches_frame() {
    let pr = sampled_cubic();
    let (z0, z3) = endpoint_preimage(pr.d0, pr.d1, SignCase::PP).unwrap();
    let mu = build_mu(2, &[0.5], MuLayout::Clamped { start: 0.0, end: 1.0 }).unwrap();
    let (v1, v2) = recover_v(&pr, z0, z3, 0.3, -0.7);
    let z = [z0, c(0.3, v1), c(-0.7, v2), z3];
    let ph = ph_from_preimage(&z, &mu, 2, Mode::Clamped, pr.p0).unwrap();
    let k0 = ph_bspline::frame_and_curvature(ph.preimage(), 0.0).unwrap().kappa;
    let k1 = ph_bspline::frame_and_curvature(ph.preimage(), 1.0).unwrap().kappa;
    assert!((k0 - pr.kappa0).abs() < 1e-10);
    assert!((k1 - pr.kappa1).abs() < 1e-10);
}

#[test]
fn closed_form_conic_entries() {
    let pr = wide_turn();
    let (z0, z3) = endpoint_preimage(pr.d0, pr.d1, SignCase::PM).unwrap();
    let (ca, cb) = build_conics(&pr, z0, z3).unwrap();
    let (u0, v0, u3, v3) = (z0.re, z0.im, z3.re, z3.im);
    assert!((ca.m[1][2] - (u0 * u3 - v0 * v3) / (10.0 * u0 * u3)).abs() < 1e-15);
    assert!((cb.m[1][1] - 2.0 * v0 * 2.5 / (15.0 * u0)).abs() < 1e-15);
    assert!((cb.m[2][2] - 2.0 * v3 * 2.5 / (15.0 * u3)).abs() < 1e-15);
    assert_eq!(build_conics(&pr, c(0.0, 1.0), z3), Err(Error::AxisAlignedTangent));
}

#[test]
fn classification_of_canonical_forms() {
    let rows = [
        (Conic::new(-1.0, 0.0, 0.0, 0.25, 0.0, 1.0), ConicKind::Ellipse),
        (Conic::new(1.0, 0.0, 0.0, 0.25, 0.0, 1.0), ConicKind::ImaginaryConic),
        (Conic::new(-1.0, 0.0, 0.0, 1.0, 0.0, -4.0), ConicKind::Hyperbola),
        (Conic::new(0.0, 0.0, -0.5, 1.0, 0.0, 0.0), ConicKind::Parabola),
        (Conic::new(0.0, 0.0, 0.0, 1.0, 0.0, -4.0), ConicKind::RealLinePair),
        (Conic::new(0.0, 0.0, 0.0, 1.0, 0.0, 4.0), ConicKind::ImaginaryLinePair),
        (Conic::new(-1.0, 0.0, 0.0, 1.0, 0.0, 0.0), ConicKind::ParallelRealLines),
        (
            Conic::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            ConicKind::ParallelImaginaryLines,
        ),
        (Conic::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0), ConicKind::DoubleLine),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for (canon, kind) in rows {
        assert_eq!(classify_conic(&canon), kind);
        for _ in 0..20 {
            let m = moved(canon, &mut rng);
            assert_eq!(classify_conic(&m), kind, "{:?}", m.m);
        }
    }
    assert_eq!(
        classify_conic(&Conic::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)),
        ConicKind::Empty
    );
}

#[test]
fn pencil_polynomial_matches_sampled_determinants() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..200 {
        let mut e = || rng.gen_range(-2.0..2.0);
        let a = Conic::new(e(), e(), e(), e(), e(), e());
        let b = Conic::new(e(), e(), e(), e(), e(), e());
        let [c3, c2, c1, c0] = pencil_cubic(&a, &b);
        for l in [0.0, 1.0, -1.0, 2.0, -2.0] {
            let direct = (a.matrix() - b.matrix() * l).determinant();
            let poly = ((c3 * l + c2) * l + c1) * l + c0;
            assert!(
                (direct - poly).abs() <= 1e-10 * (1.0 + direct.abs()),
                "{direct} vs {poly}"
            );
        }
    }
}

#[test]
fn circle_examples() {
    let unit = Conic::new(-1.0, 0.0, 0.0, 1.0, 0.0, 1.0);
    let shifted = Conic::new(0.0, -1.0, 0.0, 1.0, 0.0, 1.0);
    let pts = intersect_conics(&unit, &shifted).unwrap();
    let h = 3f64.sqrt() / 2.0;
    assert_eq!(pts.len(), 2);
    assert!((pts[0].0 - 0.5).abs() < 1e-12 && (pts[0].1 + h).abs() < 1e-12);
    assert!((pts[1].0 - 0.5).abs() < 1e-12 && (pts[1].1 - h).abs() < 1e-12);

    let tangent = Conic::new(3.0, -2.0, 0.0, 1.0, 0.0, 1.0);
    let pts = intersect_conics(&unit, &tangent).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].0 - 1.0).abs() < 1e-8 && pts[0].1.abs() < 1e-8);

    let scaled = Conic::from_matrix(&(unit.matrix() * 3.0));
    assert_eq!(intersect_conics(&unit, &scaled), Err(Error::IdenticalConics));
}

#[test]
fn intersections_agree_with_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut checked = 0;
    let mut drawn = 0;
    let mut nonempty = 0;
    while checked < 100 {
        drawn += 1;
        let pa = Param::random(&mut rng);
        let mut e = || rng.gen_range(-1.0..1.0);
        let b = Conic::new(e(), e(), e(), e(), e(), e());
        let Some(mut expect) = grid_oracle(&pa, &b) else {
            continue;
        };
        let a = pa.conic();
        let got = intersect_conics(&a, &b).unwrap();
        // the oracle only scans a window of each hyperbola branch
        if pa.hyperbola && got.iter().any(|&p| (pa.parameter(p).abs() - SPAN).abs() < 0.5) {
            continue;
        }
        let got: Vec<_> = got
            .into_iter()
            .filter(|&p| !pa.hyperbola || pa.parameter(p).abs() < SPAN)
            .collect();
        checked += 1;
        expect.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        assert_eq!(got.len(), expect.len(), "pair {drawn}: {got:?} vs {expect:?}");
        for p in &expect {
            assert!(
                got.iter()
                    .any(|q| (q.0 - p.0).hypot(q.1 - p.1) <= 1e-6 * (1.0 + p.0.hypot(p.1))),
                "pair {drawn}: oracle point {p:?} missing from {got:?}"
            );
        }
        for q in &got {
            assert!(a.eval(q.0, q.1).abs() <= 1e-8 * a.max_abs() * (1.0 + q.0 * q.0 + q.1 * q.1));
            assert!(b.eval(q.0, q.1).abs() <= 1e-8 * b.max_abs() * (1.0 + q.0 * q.0 + q.1 * q.1));
        }
        nonempty += usize::from(!got.is_empty());
    }
    assert!(drawn < 130, "{drawn} draws for 100 usable pairs");
    assert!(nonempty > 30);
}

#[test]
fn solution_counts() {
    let cases = [
        (sampled_cubic(), 2, 2),
        (wide_turn(), 2, 4),
        (symmetric_arch(-2.5), 2, 0),
        (parallel_tangents(-0.2, 0.2), 2, 0),
    ];
    for (pr, pp, pm) in cases {
        let start = Instant::now();
        assert_eq!(count(&pr, SignCase::PP), pp);
        assert_eq!(count(&pr, SignCase::PM), pm);
        let all = solve_hermite(&pr).unwrap();
        assert_eq!(all.len(), pp + pm);
        for w in all.windows(2) {
            assert!((w[0].rabs, w[0].bend) <= (w[1].rabs, w[1].bend));
        }
        assert!(start.elapsed().as_secs_f64() < 1.0);
    }
}

#[test]
fn other_curvature_choices() {
    assert_eq!(count(&symmetric_arch(-5.0), SignCase::PM), 2);
    assert_eq!(count(&parallel_tangents(-0.4, 0.4), SignCase::PM), 2);
}

#[test]
fn infeasible_curvatures() {
    let f = feasibility(&symmetric_arch(0.0), SignCase::PP).unwrap();
    assert!(!f.is_feasible(-0.569210, -0.569210));
    assert!(f.is_feasible(-2.5, -2.5));
    assert_eq!(f.imaginary(-0.569210, -0.569210), (true, false));

    let f = feasibility(&parallel_tangents(0.0, 0.0), SignCase::PP).unwrap();
    assert!(f.is_feasible(-0.2, 0.2));
    assert!(!f.is_feasible(-0.065371, 0.065371));

    match solve_hermite(&symmetric_arch(-0.569210)) {
        Err(Error::NoSolutions(report)) => {
            assert_eq!(report.cases.len(), 2);
            for case in &report.cases {
                assert!(!case.feasible);
                assert_eq!(case.intersections, 0);
                assert!(case.imaginary().contains(&"A"));
            }
        }
        other => panic!("expected NoSolutions, got {other:?}"),
    }
}

#[test]
fn invariant_signs_do_not_depend_on_knot() {
    let expected = [
        (sampled_cubic(), SignCase::PP, [1.0, -1.0], [1.0, -1.0]),
        (wide_turn(), SignCase::PP, [1.0, 1.0], [-1.0, -1.0]),
        (parallel_tangents(0.0, 0.0), SignCase::PP, [1.0, 1.0], [-1.0, 1.0]),
    ];
    for (pr, sign, sa, sb) in expected {
        for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let f = feasibility(&HermiteProblem { a, ..pr }, sign).unwrap();
            // I1 of B in the second example changes sign for small a; its I2 does not
            let ks: &[usize] = if a == 0.5 { &[0, 1] } else { &[1] };
            for &k in ks {
                assert_eq!(f.a_invariants[k].signum(), sa[k], "a={a}");
                assert_eq!(f.b_invariants[k].signum(), sb[k], "a={a}");
            }
        }
    }
    let f = feasibility(&symmetric_arch(0.0), SignCase::PP).unwrap();
    assert!(f.a_invariants[0] < 0.0 && f.a_invariants[1] > 0.0 && f.b_invariants[1] < 0.0);
}

#[test]
fn wide_turn_ellipse_for_every_curvature() {
    let f = feasibility(&wide_turn(), SignCase::PP).unwrap();
    for i in 0..=40 {
        for j in 0..=40 {
            let (k0, k1) = (-10.0 + 0.5 * i as f64, -10.0 + 0.5 * j as f64);
            assert!(f.i3(k0, k1).0 < 0.0);
            assert!(f.is_feasible(k0, k1));
        }
    }
    assert!(f.boundary([-10.0, 10.0, -10.0, 10.0], 40).is_empty());
}

#[test]
fn boundary_tracks_zero_set() {
    let f = feasibility(&parallel_tangents(0.0, 0.0), SignCase::PP).unwrap();
    let segs = f.boundary([-0.5, 0.5, -0.5, 0.5], 100);
    assert!(segs.len() > 20);
    let scale = f.i3(0.0, 0.0).0.abs();
    for s in &segs {
        for p in s {
            assert!(f.i3(p.0, p.1).0.abs() < 1e-2 * scale);
        }
    }
    // the cubic's curvatures lie inside the ellipse, the chosen ones outside
    assert!(f.i3(-0.065371, 0.065371).0 > 0.0);
    assert!(f.i3(-0.2, 0.2).0 < 0.0);
}

#[test]
fn rotation_gives_the_same_curves() {
    let pr = sampled_cubic();
    for sign in SignCase::ALL {
        let base = solve_sign_case_rotated(&pr, sign, 0.0).unwrap();
        for theta in [
            std::f64::consts::FRAC_PI_6,
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_3,
        ] {
            let rot = solve_sign_case_rotated(&pr, sign, theta).unwrap();
            assert_eq!(rot.len(), base.len());
            for s in &rot {
                assert!(s.interpolates(&pr));
                let hit = base.iter().any(|b| {
                    b.control_points
                        .iter()
                        .zip(&s.control_points)
                        .all(|(x, y)| (x - y).norm() < 1e-8)
                });
                assert!(hit, "theta={theta}: no matching curve");
            }
        }
    }
}

#[test]
fn axis_aligned_tangent_uses_rotation() {
    // z0 = i, so u0 vanishes in the given frame
    let pr = problem((0.0, 0.0), (-2.0, 1.0), (-1.0, 0.0), (-1.0, 0.5), 0.5, -0.5);
    // π/6 would leave z3 within 2° of the imaginary axis
    assert!((ph_bspline::hermite::choose_rotation(&pr).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    let (z0, z3) = endpoint_preimage(pr.d0, pr.d1, SignCase::PP).unwrap();
    assert_eq!(build_conics(&pr, z0, z3), Err(Error::AxisAlignedTangent));
    match solve_hermite(&pr) {
        Ok(sols) => {
            for s in &sols {
                assert!(s.interpolates(&pr), "{:?}", s.residuals);
            }
        }
        Err(Error::NoSolutions(_)) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn opposite_signs_give_the_same_curve() {
    let pr = wide_turn();
    let mu = build_mu(2, &[0.5], MuLayout::Clamped { start: 0.0, end: 1.0 }).unwrap();
    for s in solve_hermite(&pr).unwrap() {
        let neg: Vec<Complex64> = s.z.iter().map(|z| -z).collect();
        let ph = ph_from_preimage(&neg, &mu, 2, Mode::Clamped, pr.p0).unwrap();
        for (x, y) in ph.control_points().iter().zip(&s.control_points) {
            assert!((x - y).norm() < 1e-9 * (1.0 + y.norm()));
        }
    }
}

#[test]
fn quality_of_solutions_is_finite_and_ordered() {
    let sols = solve_hermite(&sampled_cubic()).unwrap();
    let best = &sols[0];
    let q = curve_quality(&best.curve).unwrap();
    assert_eq!((q.rabs, q.bend), (best.rabs, best.bend));
    assert!(sols
        .iter()
        .all(|s| s.rabs.is_finite() && s.bend.is_finite() && s.rabs >= 0.0));
}

#[test]
fn report_for_feasible_problem() {
    let rep = hermite_report(&wide_turn()).unwrap();
    assert_eq!(rep.cases[0].intersections, 2);
    assert_eq!(rep.cases[1].intersections, 4);
    assert!(rep.cases.iter().all(|c| c.feasible && c.imaginary().is_empty()));
}
