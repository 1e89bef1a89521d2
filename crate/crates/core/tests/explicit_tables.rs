//! The tabulated coefficients must agree with the Gramian solves and the generic pipeline.

use ph_bspline::explicit::{explicit_offset_points, explicit_weights};
use ph_bspline::knots::derive_partitions_with;
use ph_bspline::{
    arc_length, build_mu, explicit_chi, explicit_curve, explicit_offset, explicit_zeta, offset_with, solve_chi,
    solve_zeta, Complex64, ExplicitCase, ExtraKnots, KnotVector, Mode, MuLayout, PHCurve,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL: f64 = 1e-9;

fn random_mu(rng: &mut ChaCha8Rng, n: usize, m: usize, mode: Mode) -> KnotVector {
    let mut t = 0.0;
    let mut knots = Vec::new();
    match mode {
        Mode::Clamped => {
            for _ in 0..m - 1 {
                t += rng.gen_range(0.1..2.0);
                knots.push(t);
            }
            let end = t + rng.gen_range(0.1..2.0);
            build_mu(n, &knots, MuLayout::Clamped { start: 0.0, end }).unwrap()
        }
        _ => {
            knots.push(0.0);
            for _ in 0..m + 1 {
                t += rng.gen_range(0.1..2.0);
                knots.push(t);
            }
            build_mu(n, &knots, MuLayout::Closed).unwrap()
        }
    }
}

fn case(rng: &mut ChaCha8Rng, n: usize, m: usize, mode: Mode) -> ExplicitCase {
    let mu = random_mu(rng, n, m, mode);
    let extra = match mode {
        Mode::Closed => ExtraKnots::Explicit(
            mu.first() - rng.gen_range(0.1..2.0),
            mu.last() + rng.gen_range(0.1..2.0),
        ),
        _ => ExtraKnots::Mirror,
    };
    ExplicitCase::new(derive_partitions_with(&mu, n, mode, extra).unwrap()).unwrap()
}

fn random_z(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)))
        .collect()
}

fn configurations() -> Vec<(usize, usize, Mode)> {
    let mut out = Vec::new();
    for m in 1..=5 {
        out.push((1, m, Mode::Clamped));
        out.push((1, m, Mode::Closed));
        out.push((2, m, Mode::Closed));
        if m >= 2 {
            out.push((2, m, Mode::Clamped));
        }
    }
    out
}

fn rel(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(1e-300)
}

#[test]
fn chi_matches_gramian_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, m, mode) in configurations() {
        for _ in 0..3 {
            let c = case(&mut rng, n, m, mode);
            let solved = solve_chi(c.partitions()).unwrap();
            let table = explicit_chi(&c);
            let err = table.max_abs_diff(&solved);
            assert!(err <= REL, "n={n} m={m} {mode:?}: chi differs by {err:e}");
        }
    }
}

#[test]
fn zeta_matches_gramian_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (n, m, mode) in configurations() {
        for _ in 0..3 {
            let c = case(&mut rng, n, m, mode);
            let solved = solve_zeta(c.partitions()).unwrap();
            let table = explicit_zeta(&c);
            let mut worst = (0.0, (0, 0, 0));
            for ((i, j, k), _) in solved.iter().chain(table.iter()) {
                let e = (table.get(i, j, k) - solved.get(i, j, k)).abs();
                if e > worst.0 {
                    worst = (e, (i, j, k));
                }
            }
            assert!(
                worst.0 <= REL,
                "n={n} m={m} {mode:?}: zeta differs by {:e} at {:?}",
                worst.0,
                worst.1
            );
        }
    }
}

#[test]
fn curve_coefficients_match_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (n, m, mode) in configurations() {
        let c = case(&mut rng, n, m, mode);
        let z = random_z(&mut rng, c.preimage_len());
        let r0 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let ex = explicit_curve(&c, &z, r0).unwrap();
        let ph = PHCurve::from_tensor(&z, c.partitions().clone(), solve_chi(c.partitions()).unwrap(), r0).unwrap();

        let scale = ph.control_points().iter().fold(1.0f64, |a, x| a.max(x.norm()));
        for (k, (a, b)) in ex.r.iter().zip(ph.control_points()).enumerate() {
            assert!(rel(*a, *b, scale) <= REL, "n={n} m={m} {mode:?}: r_{k} {a} vs {b}");
        }
        for (k, (a, b)) in ex.p.iter().zip(ph.hodograph().coeffs()).enumerate() {
            assert!(rel(*a, *b, scale) <= REL, "n={n} m={m} {mode:?}: p_{k} {a} vs {b}");
        }
        let speed = ph.speed();
        for (k, (a, b)) in ex.sigma.iter().zip(speed.coeffs()).enumerate() {
            assert!(
                (a - b).abs() <= REL * scale,
                "n={n} m={m} {mode:?}: sigma_{k} {a} vs {b}"
            );
        }
        let al = arc_length(&ph);
        for (k, (a, b)) in ex.l.iter().zip(al.spline.coeffs()).enumerate() {
            assert!((a - b).abs() <= REL * scale, "n={n} m={m} {mode:?}: l_{k} {a} vs {b}");
        }
        assert!(
            (ex.length - al.total).abs() <= REL * al.total,
            "n={n} m={m} {mode:?}: length {} vs {}",
            ex.length,
            al.total
        );
    }
}

#[test]
fn offsets_match_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (n, m, mode) in configurations() {
        let c = case(&mut rng, n, m, mode);
        let z = random_z(&mut rng, c.preimage_len());
        let ex = explicit_curve(&c, &z, Complex64::new(0.0, 0.0)).unwrap();
        let ps = c.partitions();
        let zeta = solve_zeta(ps).unwrap();
        let h = 0.3;

        let gamma = explicit_weights(&c, &ex.sigma).unwrap();
        let gamma_ref = zeta.contract(|_, j| ex.sigma[j]);
        for (k, (a, b)) in gamma.iter().zip(&gamma_ref).enumerate() {
            assert!((a - b).abs() <= REL * 2.0, "n={n} m={m} {mode:?}: gamma_{k} {a} vs {b}");
        }
        let q = explicit_offset_points(&c, &ex, h);
        let ih = Complex64::new(0.0, h);
        let q_ref = zeta.contract(|i, j| ex.r[i] * ex.sigma[j] - ih * ex.p[j]);
        let scale = q_ref.iter().fold(1.0f64, |a, x| a.max(x.norm()));
        for (k, (a, b)) in q.iter().zip(&q_ref).enumerate() {
            assert!(rel(*a, *b, scale) <= REL, "n={n} m={m} {mode:?}: q_{k} {a} vs {b}");
        }

        let ph = PHCurve::from_tensor(&z, ps.clone(), solve_chi(ps).unwrap(), Complex64::new(0.0, 0.0)).unwrap();
        let reference = offset_with(&ph, &ph.speed(), &zeta, h).unwrap();
        let table = explicit_offset(&c, &ex, h).unwrap();
        let (lo, hi) = ps.domain();
        for s in 0..=40 {
            let t = lo + (hi - lo) * s as f64 / 40.0;
            let a = table.eval(t).unwrap();
            let b = reference.eval(t).unwrap();
            assert!(rel(a, b, 1.0 + b.norm()) <= REL, "n={n} m={m} {mode:?}: offset at {t}");
        }
    }
}
