//! Quick randomized consistency checks.

use ph_bspline::{
    build_mu, explicit_chi, hermite::solve_sign_case, ph_from_preimage, solve_chi, Complex64, ExplicitCase,
    HermiteProblem, Mode, MuLayout, SignCase,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn clamped_mu(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ph_bspline::KnotVector {
    let mut t = 0.0;
    let interior: Vec<f64> = (0..m.saturating_sub(1))
        .map(|_| {
            t += rng.gen_range(0.1..2.0);
            t
        })
        .collect();
    let end = t + rng.gen_range(0.1..2.0);
    build_mu(n, &interior, MuLayout::Clamped { start: 0.0, end }).expect("increasing knots")
}

fn rand_z(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect()
}

fn ph_identity(rng: &mut ChaCha8Rng, draws: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(n.max(1)..=n + 3);
        let mu = clamped_mu(rng, n, m);
        let len = mu.basis_count(n);
        let z = rand_z(rng, len);
        let Ok(ph) = ph_from_preimage(&z, &mu, n, Mode::Clamped, Complex64::new(0.0, 0.0)) else {
            return Check {
                name: "ph_identity",
                passed: false,
                value: f64::NAN,
                tolerance: 1e-10,
            };
        };
        let sigma = ph.speed();
        let (lo, hi) = ph.domain();
        let ts: Vec<f64> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
        let smax = ts.iter().fold(0.0f64, |a, &t| a.max(sigma.value(t)));
        for t in ts {
            let e = (ph.hodograph().value(t).norm() - sigma.value(t)).abs() / (1.0 + smax);
            worst = worst.max(e);
        }
    }
    Check {
        name: "ph_identity",
        passed: worst <= 1e-10,
        value: worst,
        tolerance: 1e-10,
    }
}

fn explicit_equivalence(rng: &mut ChaCha8Rng, draws: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let n = rng.gen_range(1..=2);
        let m = rng.gen_range(n..=5);
        let mu = clamped_mu(rng, n, m);
        let case = ExplicitCase::from_knots(&mu, n, Mode::Clamped).expect("supported case");
        let solved = solve_chi(case.partitions()).expect("positive definite gramian");
        worst = worst.max(explicit_chi(&case).max_abs_diff(&solved));
    }
    Check {
        name: "explicit_equivalence",
        passed: worst <= 1e-9,
        value: worst,
        tolerance: 1e-9,
    }
}

fn hermite_counts() -> Check {
    let c = Complex64::new;
    let pr = HermiteProblem::new(
        c(1.0, 0.0),
        c(3.0, 0.5),
        c(1.0, -1.0),
        c(0.2, 3.0),
        3.040559,
        1.066953,
        0.5,
    )
    .expect("valid problem");
    let count = |s| solve_sign_case(&pr, s).map(|v| v.iter().filter(|x| x.interpolates(&pr)).count());
    let ok = matches!((count(SignCase::PP), count(SignCase::PM)), (Ok(2), Ok(2)));
    Check {
        name: "hermite_counts",
        passed: ok,
        value: if ok { 0.0 } else { 1.0 },
        tolerance: 0.0,
    }
}

pub fn run(seed: u64, draws: usize) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        ph_identity(&mut rng, draws),
        explicit_equivalence(&mut rng, draws),
        hermite_counts(),
    ];
    Report { seed, checks }
}
