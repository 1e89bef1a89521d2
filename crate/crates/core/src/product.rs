//! Products of B-spline bases expressed in a finer basis.
//!
//! `N_i^A(t) N_j^B(t) = Σ_k c_k^{i,j} N_k^C(t)` is recovered by solving the Gramian system
//! of the `C` basis against the right-hand sides `⟨N_i^A N_j^B, N_l^C⟩`.

use crate::banded::{BandedSymMatrix, GramSolver};
use crate::bspline::{basis_eval, Coeff, LocalBasis};
use crate::error::Result;
use crate::knots::{KnotVector, PartitionSet};
use crate::quadrature::GaussRule;
use std::collections::BTreeMap;

/// Relative threshold below which solved product coefficients are dropped.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Sparse coefficients `c_k^{i,j}` keyed by `(i, j, k)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProductTensor {
    entries: BTreeMap<(usize, usize, usize), f64>,
    dims: [usize; 3],
}

impl ProductTensor {
    pub fn new(dims: [usize; 3]) -> Self {
        ProductTensor {
            entries: BTreeMap::new(),
            dims,
        }
    }

    /// Index bounds: counts of `i`, `j` and `k`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn insert(&mut self, i: usize, j: usize, k: usize, v: f64) {
        assert!(
            i < self.dims[0] && j < self.dims[1] && k < self.dims[2],
            "index out of bounds"
        );
        if v != 0.0 {
            self.entries.insert((i, j, k), v);
        } else {
            self.entries.remove(&(i, j, k));
        }
    }

    /// Stored value, zero when absent.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries.get(&(i, j, k)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// `out_k = Σ_{i,j} c_k^{i,j} f(i, j)`.
    pub fn contract<T: Coeff>(&self, f: impl Fn(usize, usize) -> T) -> Vec<T> {
        let mut out = vec![T::default(); self.dims[2]];
        for (&(i, j, k), &v) in &self.entries {
            out[k] = out[k] + f(i, j) * v;
        }
        out
    }

    /// Largest difference between this tensor and `other` over the union of stored keys.
    pub fn max_abs_diff(&self, other: &ProductTensor) -> f64 {
        let mut worst: f64 = 0.0;
        for (&key, &v) in &self.entries {
            worst = worst.max((v - other.get(key.0, key.1, key.2)).abs());
        }
        for (&key, &v) in &other.entries {
            if !self.entries.contains_key(&key) {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

/// One factor of a product: a knot vector with a degree.
#[derive(Debug, Clone, Copy)]
pub struct Basis<'a> {
    pub knots: &'a KnotVector,
    pub degree: usize,
}

impl<'a> Basis<'a> {
    pub fn new(knots: &'a KnotVector, degree: usize) -> Self {
        Basis { knots, degree }
    }
}

fn merged_breakpoints(kvs: &[&KnotVector]) -> Vec<f64> {
    let mut pts: Vec<f64> = kvs.iter().flat_map(|kv| kv.breaks().iter().map(|&(v, _)| v)).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫ N_{iA}^{degA}(t) N_{iB}^{degB}(t) dt` over the real line, exact up to rounding.
pub fn inner_product(
    kv_a: &KnotVector,
    deg_a: usize,
    i_a: usize,
    kv_b: &KnotVector,
    deg_b: usize,
    i_b: usize,
) -> Result<f64> {
    let (a0, a1) = (kv_a[i_a], kv_a[i_a + deg_a + 1]);
    let (b0, b1) = (kv_b[i_b], kv_b[i_b + deg_b + 1]);
    // surface index errors before the support test
    basis_eval(kv_a, deg_a, i_a, a0)?;
    basis_eval(kv_b, deg_b, i_b, b0)?;
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let rule = GaussRule::exact_for(deg_a + deg_b);
    let mut total = 0.0;
    for w in merged_breakpoints(&[kv_a, kv_b]).windows(2) {
        let (s0, s1) = (w[0].max(lo), w[1].min(hi));
        if s0 < s1 {
            for (t, wt) in rule.points(s0, s1) {
                total += wt * basis_eval(kv_a, deg_a, i_a, t)? * basis_eval(kv_b, deg_b, i_b, t)?;
            }
        }
    }
    Ok(total)
}

/// Gramian `a_{k,l} = ⟨N_k, N_l⟩` over the full knot range, with bandwidth `degree`.
pub fn assemble_gramian(kv: &KnotVector, degree: usize) -> BandedSymMatrix {
    let count = kv.basis_count(degree);
    let mut a = BandedSymMatrix::zeros(count, degree.min(count.saturating_sub(1)));
    let lb = LocalBasis::new(kv, degree);
    let rule = GaussRule::exact_for(2 * degree);
    let mut buf = Vec::new();
    let mut vals: Vec<(usize, f64)> = Vec::new();
    for &(s0, s1) in positive_spans(kv).iter() {
        for (t, w) in rule.points(s0, s1) {
            vals.clear();
            lb.for_each(t, &mut buf, |i, v| vals.push((i, v)));
            for &(i, vi) in &vals {
                for &(j, vj) in &vals {
                    if j <= i {
                        a.add(i, j, w * vi * vj);
                    }
                }
            }
        }
    }
    a
}

fn positive_spans(kv: &KnotVector) -> Vec<(f64, f64)> {
    kv.breaks().windows(2).map(|w| (w[0].0, w[1].0)).collect()
}

/// Expresses every product `N_i^A N_j^B` in the basis `C`.
///
/// With `symmetric` set, `A` and `B` must coincide and only `j <= i` is solved; both
/// `(i, j)` and `(j, i)` are stored.
pub fn product_tensor(a: Basis, b: Basis, c: Basis, symmetric: bool) -> Result<ProductTensor> {
    let na = a.knots.basis_count(a.degree);
    let nb = b.knots.basis_count(b.degree);
    let nc = c.knots.basis_count(c.degree);
    let gram = assemble_gramian(c.knots, c.degree);
    let solver = GramSolver::new(&gram)?;

    let la = LocalBasis::new(a.knots, a.degree);
    let lb = LocalBasis::new(b.knots, b.degree);
    let lc = LocalBasis::new(c.knots, c.degree);
    let rule = GaussRule::exact_for(a.degree + b.degree + c.degree);
    let inside = |kv: &KnotVector, t: f64| t > kv.first() && t < kv.last();

    let mut rhs: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let (mut ba, mut bb, mut bc) = (Vec::new(), Vec::new(), Vec::new());
    let mut va: Vec<(usize, f64)> = Vec::new();
    let mut vb: Vec<(usize, f64)> = Vec::new();
    let mut vc: Vec<(usize, f64)> = Vec::new();
    let breaks = merged_breakpoints(&[a.knots, b.knots, c.knots]);
    for w in breaks.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let mid = 0.5 * (s0 + s1);
        if !(inside(a.knots, mid) && inside(b.knots, mid) && inside(c.knots, mid)) {
            continue;
        }
        for (t, wt) in rule.points(s0, s1) {
            va.clear();
            vb.clear();
            vc.clear();
            la.for_each(t, &mut ba, |i, v| va.push((i, v)));
            lb.for_each(t, &mut bb, |i, v| vb.push((i, v)));
            lc.for_each(t, &mut bc, |i, v| vc.push((i, v)));
            for &(i, x) in &va {
                for &(j, y) in &vb {
                    if symmetric && j > i {
                        continue;
                    }
                    let f = wt * x * y;
                    let col = rhs.entry((i, j)).or_insert_with(|| vec![0.0; nc]);
                    for &(l, z) in &vc {
                        col[l] += f * z;
                    }
                }
            }
        }
    }

    let mut tensor = ProductTensor::new([na, nb, nc]);
    for ((i, j), mut col) in rhs {
        solver.solve_in_place(&mut col);
        let max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k, &v) in col.iter().enumerate() {
            if v.abs() > DROP_TOLERANCE * max {
                tensor.insert(i, j, k, v);
                if symmetric && i != j {
                    tensor.insert(j, i, k, v);
                }
            }
        }
    }
    Ok(tensor)
}

/// Coefficients `χ_k^{i,j}` of `N_{i,μ}^n N_{j,μ}^n` over `ν`.
pub fn solve_chi(ps: &PartitionSet) -> Result<ProductTensor> {
    let n = ps.n();
    product_tensor(
        Basis::new(ps.mu(), n),
        Basis::new(ps.mu(), n),
        Basis::new(ps.nu(), 2 * n),
        true,
    )
}

/// Coefficients `ζ_k^{i,j}` of `N_{i,ρ}^{2n+1} N_{j,ν}^{2n}` over `τ`.
pub fn solve_zeta(ps: &PartitionSet) -> Result<ProductTensor> {
    let n = ps.n();
    product_tensor(
        Basis::new(ps.rho(), 2 * n + 1),
        Basis::new(ps.nu(), 2 * n),
        Basis::new(ps.tau(), 4 * n + 1),
        false,
    )
}
