//! Inputs shared by the benchmarks.

use ph_bspline::{build_mu, Complex64, HermiteProblem, KnotVector, MuLayout};

/// Clamped knot vector with `m` uneven spans.
pub fn clamped_knots(n: usize, m: usize) -> KnotVector {
    let interior: Vec<f64> = (1..m).map(|i| i as f64 + 0.3 * (i as f64 * 1.7).sin()).collect();
    build_mu(
        n,
        &interior,
        MuLayout::Clamped {
            start: 0.0,
            end: m as f64,
        },
    )
    .expect("increasing knots")
}

/// A smooth, nowhere-vanishing preimage with `len` coefficients.
pub fn preimage(len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| {
            let t = i as f64 * 0.7;
            Complex64::new(1.5 + 0.5 * t.cos(), 0.8 * t.sin())
        })
        .collect()
}

pub fn hermite_sampled_cubic() -> HermiteProblem {
    let c = Complex64::new;
    HermiteProblem::new(
        c(1.0, 0.0),
        c(3.0, 0.5),
        c(1.0, -1.0),
        c(0.2, 3.0),
        3.040559,
        1.066953,
        0.5,
    )
    .expect("valid problem")
}
