//! Closed-form coefficients for cubic and quintic PH B-splines.
//!
//! For `n = 1, 2` in clamped and closed mode the product coefficients, control points,
//! arc-length coefficients and offset weights have explicit expressions in the knot
//! differences `d_k`. Each case carries its own indexing of `d_k`:
//!
//! | case            | `d_k`                     | range        |
//! |-----------------|---------------------------|--------------|
//! | clamped cubic   | `t_{k+1} - t_k`           | `0..=m+1`    |
//! | clamped quintic | `t_{k+2} - t_{k+1}`       | `0..=m`      |
//! | closed cubic    | `t_k - t_{k-1}`           | `0..=m+4`    |
//! | closed quintic  | `t_k - t_{k-1}`           | `0..=m+6`    |
//!
//! In closed mode `t_{-1}` and the last knot come from the extra knots of `rho`.

use crate::bspline::{basis_eval, Spline};
use crate::error::{Error, Result};
use crate::knots::{derive_partitions, KnotVector, Mode, PartitionSet};
use crate::ph::{closed_residuals, RationalSpline};
use crate::product::ProductTensor;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// One of the four tabulated configurations together with its knot differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCase {
    n: usize,
    mode: Mode,
    m: usize,
    d: Vec<f64>,
    partitions: PartitionSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    ClampedCubic,
    ClampedQuintic,
    ClosedCubic,
    ClosedQuintic,
}

impl ExplicitCase {
    pub fn new(partitions: PartitionSet) -> Result<Self> {
        let n = partitions.n();
        let mode = partitions.mode();
        let m = partitions.m();
        let kind = match (n, mode) {
            (1, Mode::Clamped) => Kind::ClampedCubic,
            (2, Mode::Clamped) => Kind::ClampedQuintic,
            (1, Mode::Closed) => Kind::ClosedCubic,
            (2, Mode::Closed) => Kind::ClosedQuintic,
            _ => {
                return Err(Error::UnsupportedCase(format!(
                    "no tables for n={n} in {} mode",
                    mode.name()
                )))
            }
        };
        if kind == Kind::ClampedQuintic && m < 2 {
            return Err(Error::UnsupportedCase("clamped quintic tables need m >= 2".into()));
        }
        let t = partitions.mu().flat();
        let d = match kind {
            Kind::ClampedCubic => t.windows(2).map(|w| w[1] - w[0]).collect(),
            Kind::ClampedQuintic => t[1..t.len() - 1].windows(2).map(|w| w[1] - w[0]).collect(),
            Kind::ClosedCubic | Kind::ClosedQuintic => {
                let rho = partitions.rho();
                let mut ext = Vec::with_capacity(t.len() + 2);
                ext.push(rho.first());
                ext.extend_from_slice(t);
                ext.push(rho.last());
                ext.windows(2).map(|w| w[1] - w[0]).collect()
            }
        };
        Ok(ExplicitCase {
            n,
            mode,
            m,
            d,
            partitions,
        })
    }

    /// Derives the partitions of `mu` (mirrored extra knots) and wraps them.
    pub fn from_knots(mu: &KnotVector, n: usize, mode: Mode) -> Result<Self> {
        Self::new(derive_partitions(mu, n, mode)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Knot differences `d_0, d_1, ...` in the indexing of this case.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// `D_k = d_k + d_{k+1}`.
    pub fn big_d(&self, k: usize) -> f64 {
        self.dk(k) + self.dk(k + 1)
    }

    pub fn partitions(&self) -> &PartitionSet {
        &self.partitions
    }

    /// Number of preimage coefficients.
    pub fn preimage_len(&self) -> usize {
        self.partitions.p() + 1
    }

    fn kind(&self) -> Kind {
        match (self.n, self.mode) {
            (1, Mode::Clamped) => Kind::ClampedCubic,
            (2, Mode::Clamped) => Kind::ClampedQuintic,
            (1, _) => Kind::ClosedCubic,
            _ => Kind::ClosedQuintic,
        }
    }

    fn dk(&self, k: usize) -> f64 {
        self.d.get(k).copied().unwrap_or(0.0)
    }

    fn dims_chi(&self) -> [usize; 3] {
        let p = self.partitions.p();
        [p + 1, p + 1, self.partitions.q() + 1]
    }

    fn dims_zeta(&self) -> [usize; 3] {
        let q = self.partitions.q();
        [q + 2, q + 1, self.partitions.w() + 1]
    }
}

/// Inserts `c_k^{i,j}`, silently dropping entries whose indices fall outside the tensor.
fn put(t: &mut ProductTensor, k: isize, i: isize, j: isize, v: f64) {
    let [ni, nj, nk] = t.dims();
    if i < 0 || j < 0 || k < 0 || i as usize >= ni || j as usize >= nj || k as usize >= nk {
        return;
    }
    t.insert(i as usize, j as usize, k as usize, v);
}

fn put_sym(t: &mut ProductTensor, k: isize, i: isize, j: isize, v: f64) {
    put(t, k, i, j, v);
    put(t, k, j, i, v);
}

/// Tabulated `χ_k^{i,j}` (keys `(i, j, k)`).
pub fn explicit_chi(case: &ExplicitCase) -> ProductTensor {
    let mut t = ProductTensor::new(case.dims_chi());
    let m = case.m as isize;
    let d = |k: isize| case.dk(k as usize);
    match case.kind() {
        Kind::ClampedCubic => {
            for k in 0..=m {
                put(&mut t, 2 * k, k, k, 1.0);
            }
            for k in 0..m {
                put_sym(&mut t, 2 * k + 1, k, k + 1, 0.5);
            }
        }
        Kind::ClosedCubic => {
            for k in 0..=m + 1 {
                put(&mut t, 2 * k + 1, k, k, 1.0);
            }
            for k in 0..=m {
                put_sym(&mut t, 2 * k + 2, k, k + 1, 0.5);
            }
        }
        Kind::ClampedQuintic => {
            for k in 1..m {
                let (a, b, c) = (d(k - 1), d(k), d(k + 1));
                let den = (a + b) * (b + c);
                put_sym(&mut t, 3 * k - 1, k - 1, k, b * c / (6.0 * den));
                put_sym(&mut t, 3 * k - 1, k - 1, k + 1, b * b / (6.0 * den));
                put(&mut t, 3 * k - 1, k, k, 2.0 / 3.0 + a * c / (3.0 * den));
                put_sym(&mut t, 3 * k - 1, k, k + 1, a * b / (6.0 * den));
            }
            // k = 0 and k = m-1 give the end entries 1 and 1/2
            for k in 0..m {
                let (b, c) = (d(k), d(k + 1));
                put(&mut t, 3 * k, k, k, c / (b + c));
                put_sym(&mut t, 3 * k, k, k + 1, 0.5 * b / (b + c));
                put_sym(&mut t, 3 * k + 1, k, k + 1, 0.5 * c / (b + c));
                put(&mut t, 3 * k + 1, k + 1, k + 1, b / (b + c));
            }
        }
        Kind::ClosedQuintic => {
            for k in 1..=m + 3 {
                let (a, b, c) = (d(k), d(k + 1), d(k + 2));
                let den = (a + b) * (b + c);
                put_sym(&mut t, 3 * k, k - 2, k - 1, b * c / (6.0 * den));
                put_sym(&mut t, 3 * k, k - 2, k, b * b / (6.0 * den));
                put(&mut t, 3 * k, k - 1, k - 1, 2.0 / 3.0 + a * c / (3.0 * den));
                put_sym(&mut t, 3 * k, k - 1, k, a * b / (6.0 * den));
            }
            for k in 0..=m + 3 {
                let (b, c) = (d(k + 1), d(k + 2));
                put(&mut t, 3 * k + 1, k - 1, k - 1, c / (b + c));
                put_sym(&mut t, 3 * k + 1, k - 1, k, 0.5 * b / (b + c));
                put_sym(&mut t, 3 * k + 2, k - 1, k, 0.5 * c / (b + c));
                put(&mut t, 3 * k + 2, k, k, b / (b + c));
            }
        }
    }
    t
}

/// Tabulated `ζ_k^{i,j}` (keys `(i, j, k)`), `i` indexing `rho` and `j` indexing `nu`.
///
/// Entries at the ends of closed tables are instances of the periodic rows with
/// out-of-range indices dropped.
pub fn explicit_zeta(case: &ExplicitCase) -> ProductTensor {
    let mut t = ProductTensor::new(case.dims_zeta());
    let m = case.m as isize;
    let d = |k: isize| case.dk(k as usize);
    let dd = |k: isize| d(k) + d(k + 1);
    let z = &mut t;
    match case.kind() {
        Kind::ClampedCubic => {
            for k in 0..=m {
                put(z, 5 * k, 2 * k, 2 * k, d(k + 1) / dd(k));
                put(z, 5 * k, 2 * k + 1, 2 * k, d(k) / dd(k));
            }
            for k in 0..m {
                let (a, b, c, e0, e1) = (d(k), d(k + 1), d(k + 2), dd(k), dd(k + 1));
                put(z, 5 * k + 1, 2 * k, 2 * k + 1, 2.0 * b / (5.0 * e0));
                put(z, 5 * k + 1, 2 * k + 1, 2 * k, 0.6);
                put(z, 5 * k + 1, 2 * k + 1, 2 * k + 1, 2.0 * a / (5.0 * e0));

                put(z, 5 * k + 2, 2 * k, 2 * k + 2, b / (10.0 * e0));
                put(z, 5 * k + 2, 2 * k + 1, 2 * k + 1, 0.6);
                put(z, 5 * k + 2, 2 * k + 1, 2 * k + 2, a / (10.0 * e0));
                put(z, 5 * k + 2, 2 * k + 2, 2 * k, 0.3);

                put(z, 5 * k + 3, 2 * k + 1, 2 * k + 2, 0.3);
                put(z, 5 * k + 3, 2 * k + 2, 2 * k, c / (10.0 * e1));
                put(z, 5 * k + 3, 2 * k + 2, 2 * k + 1, 0.6);
                put(z, 5 * k + 3, 2 * k + 3, 2 * k, b / (10.0 * e1));

                put(z, 5 * k + 4, 2 * k + 2, 2 * k + 1, 2.0 * c / (5.0 * e1));
                put(z, 5 * k + 4, 2 * k + 2, 2 * k + 2, 0.6);
                put(z, 5 * k + 4, 2 * k + 3, 2 * k + 1, 2.0 * b / (5.0 * e1));
            }
        }
        Kind::ClosedCubic => {
            for k in 0..=m + 1 {
                put(z, 5 * k + 7, 2 * k + 1, 2 * k + 1, d(k + 2) / dd(k + 1));
                put(z, 5 * k + 7, 2 * k + 2, 2 * k + 1, d(k + 1) / dd(k + 1));
            }
            for k in -1..=m + 1 {
                let (a, b, c, e0, e1) = (d(k + 1), d(k + 2), d(k + 3), dd(k + 1), dd(k + 2));
                put(z, 5 * k + 8, 2 * k + 1, 2 * k + 2, 2.0 * b / (5.0 * e0));
                put(z, 5 * k + 8, 2 * k + 2, 2 * k + 1, 0.6);
                put(z, 5 * k + 8, 2 * k + 2, 2 * k + 2, 2.0 * a / (5.0 * e0));

                put(z, 5 * k + 9, 2 * k + 1, 2 * k + 3, b / (10.0 * e0));
                put(z, 5 * k + 9, 2 * k + 2, 2 * k + 2, 0.6);
                put(z, 5 * k + 9, 2 * k + 2, 2 * k + 3, a / (10.0 * e0));
                put(z, 5 * k + 9, 2 * k + 3, 2 * k + 1, 0.3);

                put(z, 5 * k + 10, 2 * k + 2, 2 * k + 3, 0.3);
                put(z, 5 * k + 10, 2 * k + 3, 2 * k + 1, c / (10.0 * e1));
                put(z, 5 * k + 10, 2 * k + 3, 2 * k + 2, 0.6);
                put(z, 5 * k + 10, 2 * k + 4, 2 * k + 1, b / (10.0 * e1));

                put(z, 5 * k + 11, 2 * k + 3, 2 * k + 2, 2.0 * c / (5.0 * e1));
                put(z, 5 * k + 11, 2 * k + 3, 2 * k + 3, 0.6);
                put(z, 5 * k + 11, 2 * k + 4, 2 * k + 2, 2.0 * b / (5.0 * e1));
            }
        }
        Kind::ClampedQuintic => {
            for k in 0..m {
                quintic_pair(z, 8 * k, 3 * k, d(k), d(k + 1), dd(k));
            }
            for k in 0..m - 1 {
                quintic_inner(z, 8 * k + 2, 3 * k, d(k), d(k + 1), d(k + 2), dd(k), dd(k + 1));
            }
        }
        Kind::ClosedQuintic => {
            for k in 0..=m + 3 {
                quintic_pair(z, 8 * k + 11, 3 * k + 1, d(k + 1), d(k + 2), dd(k + 1));
            }
            for k in -1..=m + 3 {
                let (a, b, c) = (d(k + 1), d(k + 2), d(k + 3));
                quintic_inner(z, 8 * k + 13, 3 * k + 1, a, b, c, dd(k + 1), dd(k + 2));
            }
        }
    }
    t
}

/// Rows `s` and `s+1` of the quintic tables; `o` is the leading `rho` index.
fn quintic_pair(z: &mut ProductTensor, s: isize, o: isize, a: f64, b: f64, e: f64) {
    let e2 = e * e;
    put(z, s, o, o, b * b / e2);
    put(z, s, o + 1, o, 13.0 * a * b / (9.0 * e2));
    put(z, s, o + 2, o, 4.0 * a * a / (9.0 * e2));
    put(z, s, o, o + 1, 5.0 * a * b / (9.0 * e2));
    put(z, s, o + 1, o + 1, 5.0 * a * a / (9.0 * e2));

    put(z, s + 1, o + 1, o, 5.0 * b * b / (9.0 * e2));
    put(z, s + 1, o + 2, o, 5.0 * a * b / (9.0 * e2));
    put(z, s + 1, o + 1, o + 1, 13.0 * a * b / (9.0 * e2));
    put(z, s + 1, o + 2, o + 1, a * a / e2);
    put(z, s + 1, o, o + 1, 4.0 * b * b / (9.0 * e2));
}

/// Rows `s..s+6` of the quintic tables.
#[allow(clippy::too_many_arguments)]
fn quintic_inner(z: &mut ProductTensor, s: isize, o: isize, a: f64, b: f64, c: f64, e0: f64, e1: f64) {
    let (f0, f1) = (e0 * e0, e1 * e1);

    put(z, s, o, o + 2, b * b / (6.0 * f0));
    put(z, s, o + 1, o + 2, a * b / (3.0 * f0));
    put(z, s, o + 2, o + 2, a * a / (6.0 * f0));
    put(z, s, o + 1, o + 1, 5.0 * b / (9.0 * e0));
    put(z, s, o + 2, o + 1, 15.0 * a / (18.0 * e0));
    put(z, s, o + 2, o, 5.0 * b / (18.0 * e0));

    let s = s + 1;
    put(z, s, o, o + 3, b * b / (21.0 * f0));
    put(z, s, o + 1, o + 3, 2.0 * a * b / (21.0 * f0));
    put(z, s, o + 2, o + 3, a * a / (21.0 * f0));
    put(z, s, o + 1, o + 2, 5.0 * b / (14.0 * e0));
    put(z, s, o + 2, o + 2, 5.0 * a / (14.0 * e0));
    put(z, s, o + 2, o + 1, 10.0 / 21.0);
    put(z, s, o + 3, o + 1, 5.0 * a / (42.0 * e0));
    put(z, s, o + 3, o, 5.0 * b / (42.0 * e0));

    let s = s + 1;
    let g = 126.0 * f0 * e1;
    put(z, s, o, o + 4, b * b * b / g);
    put(z, s, o + 1, o + 4, 2.0 * a * b * b / g);
    put(z, s, o + 2, o + 4, a * a * b / g);
    put(z, s, o, o + 3, b * b * c / g);
    put(z, s, o + 1, o + 3, 2.0 * a * b * c / g + 10.0 * b / (63.0 * e0));
    put(z, s, o + 2, o + 3, a * a * c / g + 10.0 * a / (63.0 * e0));
    put(z, s, o + 2, o + 2, 10.0 / 21.0);
    let h = 126.0 * e0 * e1;
    put(z, s, o + 3, o + 1, 5.0 * a * c / h + 20.0 / 63.0);
    put(z, s, o + 4, o + 1, 5.0 * a * b / h);
    put(z, s, o + 3, o, 5.0 * b * c / h);
    put(z, s, o + 4, o, 5.0 * b * b / h);

    let s = s + 1;
    put(z, s, o + 1, o + 4, 5.0 * b * b / h);
    put(z, s, o + 2, o + 4, 5.0 * a * b / h);
    put(z, s, o + 1, o + 3, 5.0 * b * c / h);
    put(z, s, o + 2, o + 3, 5.0 * a * c / h + 20.0 / 63.0);
    put(z, s, o + 3, o + 2, 10.0 / 21.0);
    let g = 126.0 * e0 * f1;
    put(z, s, o + 3, o + 1, a * c * c / g + 10.0 * c / (63.0 * e1));
    put(z, s, o + 4, o + 1, 2.0 * a * b * c / g + 10.0 * b / (63.0 * e1));
    put(z, s, o + 5, o + 1, a * b * b / g);
    put(z, s, o + 3, o, b * c * c / g);
    put(z, s, o + 4, o, 2.0 * b * b * c / g);
    put(z, s, o + 5, o, b * b * b / g);

    let s = s + 1;
    put(z, s, o + 2, o + 4, 5.0 * b / (42.0 * e1));
    put(z, s, o + 2, o + 3, 5.0 * c / (42.0 * e1));
    put(z, s, o + 3, o + 3, 10.0 / 21.0);
    put(z, s, o + 4, o + 2, 5.0 * b / (14.0 * e1));
    put(z, s, o + 3, o + 2, 5.0 * c / (14.0 * e1));
    put(z, s, o + 3, o + 1, c * c / (21.0 * f1));
    put(z, s, o + 4, o + 1, 2.0 * b * c / (21.0 * f1));
    put(z, s, o + 5, o + 1, b * b / (21.0 * f1));

    let s = s + 1;
    put(z, s, o + 3, o + 4, 5.0 * b / (18.0 * e1));
    put(z, s, o + 3, o + 3, 15.0 * c / (18.0 * e1));
    put(z, s, o + 4, o + 3, 5.0 * b / (9.0 * e1));
    put(z, s, o + 3, o + 2, c * c / (6.0 * f1));
    put(z, s, o + 4, o + 2, b * c / (3.0 * f1));
    put(z, s, o + 5, o + 2, b * b / (6.0 * f1));
}

/// Coefficient sequences of a PH curve computed from the closed-form recursions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCurve {
    pub z: Vec<Complex64>,
    /// Hodograph control points.
    pub p: Vec<Complex64>,
    /// Curve control points.
    pub r: Vec<Complex64>,
    /// Parametric speed coefficients.
    pub sigma: Vec<f64>,
    /// Arc-length coefficients.
    pub l: Vec<f64>,
    /// Total arc length over the domain.
    pub length: f64,
}

/// Evaluates the closed-form expressions for `p`, `r`, `σ`, `l` and the total length.
pub fn explicit_curve(case: &ExplicitCase, z: &[Complex64], r0: Complex64) -> Result<ExplicitCurve> {
    if z.len() != case.preimage_len() {
        return Err(Error::ShapeMismatch(format!(
            "{} preimage coefficients, expected {}",
            z.len(),
            case.preimage_len()
        )));
    }
    let m = case.m as isize;
    let d = |k: isize| case.dk(k as usize);
    let zc = |i: isize| {
        if i < 0 || i as usize >= z.len() {
            Complex64::new(0.0, 0.0)
        } else {
            z[i as usize]
        }
    };
    let sq = |i: isize| zc(i).norm_sqr();
    // z_i conj(z_j) + z_j conj(z_i)
    let mix = |i: isize, j: isize| 2.0 * (zc(i) * zc(j).conj()).re;
    let q = case.partitions.q();
    let zero = Complex64::new(0.0, 0.0);
    let mut p = vec![zero; q + 1];
    let mut sigma = vec![0.0; q + 1];
    let mut r = vec![zero; q + 2];
    let mut l = vec![0.0; q + 2];
    let at = |k: isize| k as usize;
    r[0] = r0;

    let length = match case.kind() {
        Kind::ClampedCubic => {
            for k in 0..=m {
                p[at(2 * k)] = zc(k) * zc(k);
                sigma[at(2 * k)] = sq(k);
            }
            for k in 0..m {
                p[at(2 * k + 1)] = zc(k) * zc(k + 1);
                sigma[at(2 * k + 1)] = 0.5 * mix(k, k + 1);
            }
            r[1] = r[0] + d(1) / 3.0 * zc(0) * zc(0);
            l[1] = d(1) / 3.0 * sq(0);
            for i in 0..m {
                let (a, b) = (at(2 * i + 2), at(2 * i + 3));
                r[a] = r[a - 1] + d(i + 1) / 3.0 * zc(i) * zc(i + 1);
                l[a] = l[a - 1] + d(i + 1) / 6.0 * mix(i, i + 1);
                if i + 1 < m {
                    r[b] = r[b - 1] + (d(i + 1) + d(i + 2)) / 3.0 * zc(i + 1) * zc(i + 1);
                    l[b] = l[b - 1] + (d(i + 1) + d(i + 2)) / 3.0 * sq(i + 1);
                }
            }
            let e = at(2 * m + 1);
            r[e] = r[e - 1] + d(m) / 3.0 * zc(m) * zc(m);
            l[e] = l[e - 1] + d(m) / 3.0 * sq(m);
            l[e]
        }
        Kind::ClampedQuintic => {
            p[0] = zc(0) * zc(0);
            p[1] = zc(0) * zc(1);
            sigma[0] = sq(0);
            sigma[1] = 0.5 * mix(0, 1);
            r[1] = r[0] + d(1) / 5.0 * zc(0) * zc(0);
            r[2] = r[1] + d(1) / 5.0 * zc(0) * zc(1);
            l[1] = d(1) / 5.0 * sq(0);
            l[2] = l[1] + d(1) / 10.0 * mix(0, 1);
            for k in 1..m {
                let (a, b, c) = (d(k - 1), d(k), d(k + 1));
                let den = (a + b) * (b + c);
                let left = (b * zc(k - 1) + a * zc(k)) / (a + b);
                let right = (c * zc(k) + b * zc(k + 1)) / (b + c);
                let pk = 2.0 / 3.0 * zc(k) * zc(k) + left * right / 3.0;
                p[at(3 * k - 1)] = pk;
                sigma[at(3 * k - 1)] = b * c / (6.0 * den) * mix(k - 1, k)
                    + b * b / (6.0 * den) * mix(k - 1, k + 1)
                    + (2.0 / 3.0 + a * c / (3.0 * den)) * sq(k)
                    + a * b / (6.0 * den) * mix(k, k + 1);
                let i3 = at(3 * k);
                r[i3] = r[i3 - 1] + b / 5.0 * pk;
                l[i3] = l[i3 - 1]
                    + 2.0 * b / 15.0 * sq(k)
                    + b / (15.0 * den)
                        * (a * c * sq(k)
                            + b * b / 2.0 * mix(k - 1, k + 1)
                            + b * c / 2.0 * mix(k - 1, k)
                            + a * b / 2.0 * mix(k, k + 1));
                if k + 1 < m {
                    let w = (c * zc(k) + b * zc(k + 1)) / (b + c);
                    p[i3] = zc(k) * w;
                    p[i3 + 1] = zc(k + 1) * w;
                    sigma[i3] = c / (b + c) * sq(k) + 0.5 * b / (b + c) * mix(k, k + 1);
                    sigma[i3 + 1] = 0.5 * c / (b + c) * mix(k, k + 1) + b / (b + c) * sq(k + 1);
                    r[i3 + 1] = r[i3] + zc(k) / 5.0 * (c * zc(k) + b * zc(k + 1));
                    r[i3 + 2] = r[i3 + 1] + zc(k + 1) / 5.0 * (c * zc(k) + b * zc(k + 1));
                    l[i3 + 1] = l[i3] + (c * sq(k) + b / 2.0 * mix(k, k + 1)) / 5.0;
                    l[i3 + 2] = l[i3 + 1] + (b * sq(k + 1) + c / 2.0 * mix(k, k + 1)) / 5.0;
                }
            }
            let e = at(3 * m - 3);
            p[e] = zc(m - 1) * zc(m);
            p[e + 1] = zc(m) * zc(m);
            sigma[e] = 0.5 * mix(m - 1, m);
            sigma[e + 1] = sq(m);
            r[e + 1] = r[e] + d(m - 1) / 5.0 * zc(m - 1) * zc(m);
            r[e + 2] = r[e + 1] + d(m - 1) / 5.0 * zc(m) * zc(m);
            l[e + 1] = l[e] + d(m - 1) / 10.0 * mix(m - 1, m);
            l[e + 2] = l[e + 1] + d(m - 1) / 5.0 * sq(m);
            l[e + 2]
        }
        Kind::ClosedCubic => {
            for k in 0..=m + 1 {
                p[at(2 * k + 1)] = zc(k) * zc(k);
                sigma[at(2 * k + 1)] = sq(k);
            }
            for k in 0..=m {
                p[at(2 * k + 2)] = zc(k) * zc(k + 1);
                sigma[at(2 * k + 2)] = 0.5 * mix(k, k + 1);
            }
            r[1] = r[0];
            for i in 0..=m + 1 {
                let a = at(2 * i + 2);
                r[a] = r[a - 1] + (d(i + 1) + d(i + 2)) / 3.0 * zc(i) * zc(i);
                l[a] = l[a - 1] + (d(i + 1) + d(i + 2)) / 3.0 * sq(i);
                if i <= m {
                    r[a + 1] = r[a] + d(i + 2) / 3.0 * zc(i) * zc(i + 1);
                    l[a + 1] = l[a] + d(i + 2) / 6.0 * mix(i, i + 1);
                }
            }
            let e = at(2 * m + 5);
            r[e] = r[e - 1];
            l[e] = l[e - 1];
            let (t1, _) = case.partitions.domain();
            let n2 = basis_eval(case.partitions.rho(), 3, 2, t1)?;
            let (a, b) = (at(2 * m + 3), at(2 * m + 4));
            l[a] + (l[b] - l[a] - l[2]) * n2
        }
        Kind::ClosedQuintic => {
            let (d1, d2) = (d(1), d(2));
            p[2] = d1 / (d1 + d2) * zc(0) * zc(0);
            sigma[2] = d1 / (d1 + d2) * sq(0);
            r[1] = r[0];
            r[2] = r[1];
            r[3] = r[2] + d1 / 5.0 * zc(0) * zc(0);
            l[3] = d1 / 5.0 * sq(0);
            for k in 1..=m + 3 {
                let (a, b, c) = (d(k), d(k + 1), d(k + 2));
                let den = (a + b) * (b + c);
                let left = (b * zc(k - 2) + a * zc(k - 1)) / (a + b);
                let right = (c * zc(k - 1) + b * zc(k)) / (b + c);
                let pk = 2.0 / 3.0 * zc(k - 1) * zc(k - 1) + left * right / 3.0;
                let i3 = at(3 * k);
                p[i3] = pk;
                sigma[i3] = b * c / (6.0 * den) * mix(k - 2, k - 1)
                    + b * b / (6.0 * den) * mix(k - 2, k)
                    + (2.0 / 3.0 + a * c / (3.0 * den)) * sq(k - 1)
                    + a * b / (6.0 * den) * mix(k - 1, k);
                r[i3 + 1] = r[i3] + b / 5.0 * pk;
                l[i3 + 1] = l[i3]
                    + 2.0 * b / 15.0 * sq(k - 1)
                    + b / (15.0 * den)
                        * (a * c * sq(k - 1)
                            + b * b / 2.0 * mix(k - 2, k)
                            + b * c / 2.0 * mix(k - 2, k - 1)
                            + a * b / 2.0 * mix(k - 1, k));
                if k <= m + 2 {
                    let w = (c * zc(k - 1) + b * zc(k)) / (b + c);
                    p[i3 + 1] = zc(k - 1) * w;
                    p[i3 + 2] = zc(k) * w;
                    sigma[i3 + 1] = c / (b + c) * sq(k - 1) + 0.5 * b / (b + c) * mix(k - 1, k);
                    sigma[i3 + 2] = 0.5 * c / (b + c) * mix(k - 1, k) + b / (b + c) * sq(k);
                    r[i3 + 2] = r[i3 + 1] + zc(k - 1) / 5.0 * (c * zc(k - 1) + b * zc(k));
                    r[i3 + 3] = r[i3 + 2] + zc(k) / 5.0 * (c * zc(k - 1) + b * zc(k));
                    l[i3 + 2] = l[i3 + 1] + (c * sq(k - 1) + b / 2.0 * mix(k - 1, k)) / 5.0;
                    l[i3 + 3] = l[i3 + 2] + (b * sq(k) + c / 2.0 * mix(k - 1, k)) / 5.0;
                }
            }
            let (a, b) = (d(m + 4), d(m + 5));
            let e = at(3 * m + 10);
            p[e] = b / (a + b) * zc(m + 2) * zc(m + 2);
            sigma[e] = b / (a + b) * sq(m + 2);
            r[e + 1] = r[e] + b / 5.0 * zc(m + 2) * zc(m + 2);
            l[e + 1] = l[e] + b / 5.0 * sq(m + 2);
            for i in e + 2..e + 4 {
                r[i] = r[e + 1];
                l[i] = l[e + 1];
            }
            let (t2, _) = case.partitions.domain();
            let rho = case.partitions.rho();
            let mut total = 0.0;
            for j in 4..=6 {
                total += (l[at(3 * m + 3) + j] - l[j]) * basis_eval(rho, 5, j, t2)?;
            }
            total
        }
    };
    Ok(ExplicitCurve {
        z: z.to_vec(),
        p,
        r,
        sigma,
        l,
        length,
    })
}

/// Offset weights `γ_k` from the closed-form expressions in `σ`.
pub fn explicit_weights(case: &ExplicitCase, sigma: &[f64]) -> Result<Vec<f64>> {
    let q = case.partitions.q();
    if sigma.len() != q + 1 {
        return Err(Error::ShapeMismatch(format!(
            "{} speed coefficients, expected {}",
            sigma.len(),
            q + 1
        )));
    }
    let m = case.m as isize;
    let d = |k: isize| case.dk(k as usize);
    let dd = |k: isize| d(k) + d(k + 1);
    let s = |k: isize| sigma[k as usize];
    let mut g = vec![0.0; case.partitions.w() + 1];
    let mut set = |k: isize, v: f64| g[k as usize] = v;
    match case.kind() {
        Kind::ClampedCubic => {
            for k in 0..=m {
                set(5 * k, s(2 * k));
            }
            for k in 0..m {
                let (a, b, c) = (s(2 * k), s(2 * k + 1), s(2 * k + 2));
                set(5 * k + 1, 0.6 * a + 0.4 * b);
                set(5 * k + 2, 0.3 * a + 0.6 * b + 0.1 * c);
                set(5 * k + 3, 0.1 * a + 0.6 * b + 0.3 * c);
                set(5 * k + 4, 0.4 * b + 0.6 * c);
            }
        }
        Kind::ClosedCubic => {
            set(4, d(0) / (10.0 * dd(0)) * s(1));
            set(5, 0.3 * s(1));
            set(6, 0.6 * s(1));
            for k in 0..=m + 1 {
                set(5 * k + 7, s(2 * k + 1));
            }
            for k in 0..=m {
                let (a, b, c) = (s(2 * k + 1), s(2 * k + 2), s(2 * k + 3));
                set(5 * k + 8, 0.6 * a + 0.4 * b);
                set(5 * k + 9, 0.3 * a + 0.6 * b + 0.1 * c);
                set(5 * k + 10, 0.1 * a + 0.6 * b + 0.3 * c);
                set(5 * k + 11, 0.4 * b + 0.6 * c);
            }
            let e = s(2 * m + 3);
            set(5 * m + 13, 0.6 * e);
            set(5 * m + 14, 0.3 * e);
            set(5 * m + 15, d(m + 4) / (10.0 * dd(m + 3)) * e);
        }
        Kind::ClampedQuintic => {
            let avg = |k: isize| (s(3 * k + 1) * d(k) + s(3 * k) * d(k + 1)) / dd(k);
            for k in 0..m {
                set(8 * k, 4.0 / 9.0 * s(3 * k) + 5.0 / 9.0 * avg(k));
                set(8 * k + 1, 5.0 / 9.0 * avg(k) + 4.0 / 9.0 * s(3 * k + 1));
            }
            for k in 0..m - 1 {
                quintic_weights(
                    &mut set,
                    8 * k + 2,
                    avg(k),
                    avg(k + 1),
                    [s(3 * k + 1), s(3 * k + 2), s(3 * k + 3)],
                );
            }
        }
        Kind::ClosedQuintic => {
            let (f0, f1) = (d(0) / dd(0), d(1) / dd(1));
            let s2 = s(2);
            set(7, f0 * f0 * f1 * s2 / 126.0);
            set(8, 5.0 / 126.0 * f0 * f1 * s2);
            set(9, 5.0 / 42.0 * f1 * s2);
            set(10, 5.0 / 18.0 * f1 * s2);
            let avg = |k: isize| (s(3 * k + 2) * d(k + 1) + s(3 * k + 1) * d(k + 2)) / dd(k + 1);
            for k in 0..=m + 3 {
                set(8 * k + 11, 4.0 / 9.0 * s(3 * k + 1) + 5.0 / 9.0 * avg(k));
                set(8 * k + 12, 5.0 / 9.0 * avg(k) + 4.0 / 9.0 * s(3 * k + 2));
            }
            for k in 0..=m + 2 {
                quintic_weights(
                    &mut set,
                    8 * k + 13,
                    avg(k),
                    avg(k + 1),
                    [s(3 * k + 2), s(3 * k + 3), s(3 * k + 4)],
                );
            }
            let (e0, e1) = (d(m + 5) / dd(m + 4), d(m + 6) / dd(m + 5));
            let e = s(3 * m + 10);
            set(8 * m + 37, 5.0 / 18.0 * e0 * e);
            set(8 * m + 38, 5.0 / 42.0 * e0 * e);
            set(8 * m + 39, 5.0 / 126.0 * e1 * e0 * e);
            set(8 * m + 40, e1 * e1 * e0 * e / 126.0);
        }
    }
    Ok(g)
}

/// Weights `s..s+5` of a quintic table given the blended end values and three inner speeds.
fn quintic_weights(set: &mut impl FnMut(isize, f64), s: isize, lo: f64, hi: f64, x: [f64; 3]) {
    let [a, b, c] = x;
    set(s, 5.0 / 18.0 * lo + 5.0 / 9.0 * a + b / 6.0);
    set(s + 1, 5.0 / 42.0 * lo + 10.0 / 21.0 * a + 5.0 / 14.0 * b + c / 21.0);
    set(
        s + 2,
        5.0 / 126.0 * lo + 20.0 / 63.0 * a + 10.0 / 21.0 * b + 10.0 / 63.0 * c + hi / 126.0,
    );
    set(
        s + 3,
        lo / 126.0 + 10.0 / 63.0 * a + 10.0 / 21.0 * b + 20.0 / 63.0 * c + 5.0 / 126.0 * hi,
    );
    set(s + 4, a / 21.0 + 5.0 / 14.0 * b + 10.0 / 21.0 * c + 5.0 / 42.0 * hi);
    set(s + 5, b / 6.0 + 5.0 / 9.0 * c + 5.0 / 18.0 * hi);
}

/// Offset control points `q_k = Σ ζ_k^{i,j} (σ_j r_i - i h p_j)`.
pub fn explicit_offset_points(case: &ExplicitCase, curve: &ExplicitCurve, h: f64) -> Vec<Complex64> {
    let ih = Complex64::new(0.0, h);
    explicit_zeta(case).contract(|i, j| curve.r[i] * curve.sigma[j] - ih * curve.p[j])
}

/// Rational offset at distance `h` assembled from the tabulated weights and points.
pub fn explicit_offset(case: &ExplicitCase, curve: &ExplicitCurve, h: f64) -> Result<RationalSpline> {
    let ps = &case.partitions;
    if curve.sigma.len() != ps.q() + 1 || curve.r.len() != ps.q() + 2 || curve.p.len() != ps.q() + 1 {
        return Err(Error::ShapeMismatch("curve data does not match the case".into()));
    }
    let gamma = explicit_weights(case, &curve.sigma)?;
    let q = explicit_offset_points(case, curve, h);
    let degree = 4 * ps.n() + 1;
    let domain = ps.domain();
    let numerator = Spline::new(degree, ps.tau().clone(), q, domain)?;
    let weights = Spline::new(degree, ps.tau().clone(), gamma, domain)?;
    RationalSpline::new(numerator, weights, h)
}

/// Which family of closed cubic examples to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreimageVariant {
    /// The preimage itself closes up: `z_{m+1} = z_0`.
    ZClosed,
    /// The preimage changes sign across the junction: `z_{m+1} = -z_0`.
    ZOpen,
}

/// Complete preimage of a closed cubic together with the discriminant that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedPreimageData {
    pub m: usize,
    pub variant: PreimageVariant,
    pub z: Vec<Complex64>,
    /// `r±` for `m = 2`, `R±` for `m = 3`, absent for `m = 1`.
    pub discriminant: Option<Complex64>,
}

/// `r±` of the closed cubic with `m = 2`; `sign` selects the `±` in the mixed term.
pub fn discriminant_r(d: &[f64], z0: Complex64, z1: Complex64, sign: f64) -> Complex64 {
    let (d1, d2, d3) = (d[1], d[2], d[3]);
    -(4.0 * d1 * d2 + 4.0 * d1 * d3 + 4.0 * d2 * d3 + 3.0 * d1 * d1) * z0 * z0
        - (4.0 * d1 * d2 + sign * 2.0 * d1 * d3 + 4.0 * d2 * d3) * z0 * z1
        - (4.0 * d1 * d2 + 4.0 * d1 * d3 + 4.0 * d2 * d3 + 3.0 * d3 * d3) * z1 * z1
}

/// `R±` of the closed cubic with `m = 3`.
pub fn discriminant_big_r(d: &[f64], z: [Complex64; 3], sign: f64) -> Complex64 {
    let (d1, d2, d3, d4) = (d[1], d[2], d[3], d[4]);
    let [z0, z1, z2] = z;
    -(4.0 * d1 * d2 + 4.0 * d1 * d4 + 4.0 * d2 * d4 + 3.0 * d1 * d1) * z0 * z0
        - (4.0 * d1 * d2 + 4.0 * d2 * d4) * z0 * z1
        + sign * 2.0 * d1 * d4 * z0 * z2
        - (4.0 * d1 * d2 + 4.0 * d1 * d3 + 4.0 * d2 * d4 + 4.0 * d3 * d4) * z1 * z1
        - (4.0 * d1 * d3 + 4.0 * d3 * d4) * z1 * z2
        - (4.0 * d1 * d3 + 4.0 * d1 * d4 + 4.0 * d3 * d4 + 3.0 * d4 * d4) * z2 * z2
}

/// Closed-form completion of a closed cubic preimage for `m = 1, 2, 3`.
///
/// `free` holds `z_0` (`m = 1`), `z_0, z_1` (`m = 2`) or `z_0, z_1, z_2` (`m = 3`).
pub fn closed_cubic_preimage(
    case: &ExplicitCase,
    variant: PreimageVariant,
    free: &[Complex64],
) -> Result<ClosedPreimageData> {
    if case.kind() != Kind::ClosedCubic || !(1..=3).contains(&case.m) {
        return Err(Error::UnsupportedCase(
            "closed forms exist for closed cubics with m = 1, 2, 3".into(),
        ));
    }
    let m = case.m;
    if free.len() != m {
        return Err(Error::ShapeMismatch(format!(
            "{} free coefficients, expected {m}",
            free.len()
        )));
    }
    if free.iter().any(|c| c.norm() == 0.0) {
        return Err(Error::DegenerateInput("free coefficients must be nonzero".into()));
    }
    let d = &case.d;
    let z0 = free[0];
    let i = Complex64::i();
    let closed = variant == PreimageVariant::ZClosed;
    let scale = free.iter().fold(0.0f64, |a, c| a.max(c.norm_sqr())) * d.iter().fold(0.0f64, |a, &x| a.max(x)).powi(2);
    let check = |disc: Complex64| {
        if disc.norm() <= 1e-14 * scale.max(1.0) {
            Err(Error::DegenerateDiscriminant(format!("discriminant {disc} vanishes")))
        } else {
            Ok(disc)
        }
    };
    let (unknown, discriminant) = match m {
        1 => {
            let z1 = if closed {
                Complex64::new(-0.5, -3f64.sqrt() / 2.0) * z0
            } else {
                let (d1, d2) = (d[1], d[2]);
                (d1 - d2 + ((d1 + 3.0 * d2) * (3.0 * d1 + d2)).sqrt() * i) / (2.0 * (d1 + d2)) * z0
            };
            (z1, None)
        }
        2 => {
            let z1 = free[1];
            let (d1, d3) = (d[1], d[3]);
            if closed {
                let r = check(discriminant_r(d, z0, z1, -1.0))?;
                (-(d1 * z0 + d3 * z1 + r.sqrt()) / (2.0 * (d1 + d3)), Some(r))
            } else {
                let r = check(discriminant_r(d, z0, z1, 1.0))?;
                ((d1 * z0 - d3 * z1 + r.sqrt()) / (2.0 * (d1 + d3)), Some(r))
            }
        }
        _ => {
            let z2 = free[2];
            let (d1, d4) = (d[1], d[4]);
            let zs = [z0, free[1], z2];
            if closed {
                let r = check(discriminant_big_r(d, zs, 1.0))?;
                (-(d1 * z0 + d4 * z2 + r.sqrt()) / (2.0 * (d1 + d4)), Some(r))
            } else {
                let r = check(discriminant_big_r(d, zs, -1.0))?;
                ((d1 * z0 - d4 * z2 + r.sqrt()) / (2.0 * (d1 + d4)), Some(r))
            }
        }
    };
    let mut z = free.to_vec();
    z.push(unknown);
    z.push(if closed { z0 } else { -z0 });
    Ok(ClosedPreimageData {
        m,
        variant,
        z,
        discriminant,
    })
}

/// Result of completing a closed preimage by Newton's method.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub z: Vec<Complex64>,
    pub iterations: usize,
    /// Largest closure residual at the returned point.
    pub residual: f64,
}

const NEWTON_MAX_ITER: usize = 100;

/// Solves the closure conditions for the coefficients listed in `unknown`, starting from `z`.
///
/// The residual map is holomorphic in `z`, so a complex Newton step with backtracking
/// is used. Converges once the residual falls below `1e-12` times the problem scale.
pub fn closed_preimage_newton(
    z: &[Complex64],
    partitions: &PartitionSet,
    chi: &ProductTensor,
    unknown: &[usize],
) -> Result<NewtonSolution> {
    if partitions.mode() != Mode::Closed {
        return Err(Error::ModeMismatch("closed partitions required".into()));
    }
    let n = partitions.n();
    if unknown.len() != n + 1 {
        return Err(Error::ShapeMismatch(format!(
            "{} unknowns, expected {}",
            unknown.len(),
            n + 1
        )));
    }
    if z.len() != partitions.p() + 1 || unknown.iter().any(|&u| u >= z.len()) {
        return Err(Error::ShapeMismatch("preimage length does not match partitions".into()));
    }
    let residual = |z: &[Complex64]| closed_residuals(&chi.contract(|i, j| z[i] * z[j]), partitions);
    let norm = |r: &[Complex64]| r.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let span = partitions.mu().last() - partitions.mu().first();

    let mut z = z.to_vec();
    let mut r = residual(&z);
    let mut best = norm(&r);
    for it in 0..=NEWTON_MAX_ITER {
        let zmax = z.iter().fold(0.0f64, |a, c| a.max(c.norm_sqr()));
        let tol = 1e-12 * (zmax * span).max(1.0);
        if best <= tol {
            return Ok(NewtonSolution {
                z,
                iterations: it,
                residual: best,
            });
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        // dp_j / dz_u = 2 Σ_b χ_j^{u,b} z_b
        let mut jac = DMatrix::<Complex64>::zeros(n + 1, n + 1);
        for (col, &u) in unknown.iter().enumerate() {
            let dp = chi.contract(|i, j| if i == u { 2.0 * z[j] } else { Complex64::new(0.0, 0.0) });
            for (row, v) in closed_residuals(&dp, partitions).into_iter().enumerate() {
                jac[(row, col)] = v;
            }
        }
        let rhs = DVector::from_iterator(n + 1, r.iter().map(|c| -c));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let mut trial = z.clone();
            for (k, &u) in unknown.iter().enumerate() {
                trial[u] += step[k] * lambda;
            }
            let tr = residual(&trial);
            let tn = norm(&tr);
            if tn < best {
                z = trial;
                r = tr;
                best = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence {
        best: z,
        residual: best,
    })
}
