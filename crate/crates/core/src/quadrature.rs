//! Gauss–Legendre rules and adaptive quadrature.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss–Legendre rule mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussRule { nodes, weights }
    }

    /// Rule exact for polynomials of the given degree.
    pub fn exact_for(degree: usize) -> Self {
        Self::new((degree + 1).div_ceil(2).max(1))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(t, w)` pairs on `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points(a, b).map(|(t, w)| w * f(t)).sum()
    }
}

/// Adaptive Gauss–Legendre quadrature by interval bisection.
///
/// Always splits the piece with the largest error estimate (a 10-point rule against
/// the sum over its halves) until the total estimate is within `rel_tol` of `∫|f|`,
/// or at rounding level.
pub fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let rule = GaussRule::new(10);
    let mut heap = BinaryHeap::new();
    let whole = rule.integrate(a, b, &mut *f);
    let first = Piece::new(f, &rule, a, b, whole);
    let (mut value, mut abs, mut err) = (first.value, first.abs, first.err);
    heap.push(first);
    for _ in 0..MAX_PIECES {
        if err <= (rel_tol * abs).max(64.0 * f64::EPSILON * abs) || !value.is_finite() {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (l, r) = (
            Piece::new(f, &rule, p.a, m, p.left),
            Piece::new(f, &rule, m, p.b, p.right),
        );
        value += l.value + r.value - p.value;
        abs += l.abs + r.abs - p.abs;
        err += l.err + r.err - p.err;
        heap.push(l);
        heap.push(r);
    }
    // Re-sum to shed the drift of the running updates.
    heap.iter().map(|p| p.value).sum()
}

const MAX_PIECES: usize = 1 << 14;

struct Piece {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    value: f64,
    abs: f64,
    err: f64,
}

impl Piece {
    fn new(f: &mut dyn FnMut(f64) -> f64, rule: &GaussRule, a: f64, b: f64, whole: f64) -> Piece {
        let m = 0.5 * (a + b);
        let mut sums = |lo: f64, hi: f64| {
            rule.points(lo, hi).fold((0.0, 0.0), |(s, t), (x, w)| {
                let y = f(x);
                (s + w * y, t + w * y.abs())
            })
        };
        let (left, la) = sums(a, m);
        let (right, ra) = sums(m, b);
        let value = left + right;
        let err = (value - whole).abs();
        Piece {
            a,
            b,
            left,
            right,
            value,
            abs: la + ra,
            err: if err.is_nan() { f64::INFINITY } else { err },
        }
    }
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}
