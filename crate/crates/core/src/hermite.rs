//! G² Hermite interpolation with clamped quintic PH B-splines on `{0,0,0,a,1,1,1}`.
//!
//! Fixing `z_0` and `z_3` from the end tangents and eliminating `v_1, v_2` through the
//! curvature constraints leaves two real conics in `(u_1, u_2)`. Their intersections are
//! found through a degenerate member of the pencil `A - λB`.

use crate::bspline::ComplexSpline;
use crate::error::{Error, Result};
use crate::explicit::{explicit_chi, explicit_curve, ExplicitCase};
use crate::knots::{build_mu, Mode, MuLayout};
use crate::ph::{frame_and_curvature, PHCurve};
use crate::quadrature::adaptive;
use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Interpolation data: end points, end tangents, end curvatures and the interior knot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteProblem {
    pub p0: Complex64,
    pub p1: Complex64,
    pub d0: Complex64,
    pub d1: Complex64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub a: f64,
}

impl HermiteProblem {
    pub fn new(
        p0: Complex64,
        p1: Complex64,
        d0: Complex64,
        d1: Complex64,
        kappa0: f64,
        kappa1: f64,
        a: f64,
    ) -> Result<Self> {
        let vals = [
            p0.re, p0.im, p1.re, p1.im, d0.re, d0.im, d1.re, d1.im, kappa0, kappa1, a,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("hermite data must be finite".into()));
        }
        if d0.norm() == 0.0 || d1.norm() == 0.0 {
            return Err(Error::ZeroTangent);
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidInput(format!("interior knot {a} outside (0, 1)")));
        }
        Ok(HermiteProblem {
            p0,
            p1,
            d0,
            d1,
            kappa0,
            kappa1,
            a,
        })
    }

    /// Data rotated about the origin by `theta`; curvatures are unchanged.
    pub fn rotated(&self, theta: f64) -> HermiteProblem {
        let e = Complex64::from_polar(1.0, theta);
        HermiteProblem {
            p0: self.p0 * e,
            p1: self.p1 * e,
            d0: self.d0 * e,
            d1: self.d1 * e,
            ..*self
        }
    }

    fn scale(&self) -> f64 {
        1f64.max(self.p0.norm()).max(self.p1.norm())
    }
}

/// Sign choice for `(z_0, z_3)`; the other two combinations give the same curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignCase {
    PP,
    PM,
}

impl SignCase {
    pub const ALL: [SignCase; 2] = [SignCase::PP, SignCase::PM];

    pub fn name(self) -> &'static str {
        match self {
            SignCase::PP => "++",
            SignCase::PM => "+-",
        }
    }
}

/// `z_0 = |d_0|^{1/2} e^{iω_0/2}` and `z_3 = ±|d_1|^{1/2} e^{iω_1/2}`.
pub fn endpoint_preimage(d0: Complex64, d1: Complex64, sign: SignCase) -> Result<(Complex64, Complex64)> {
    if d0.norm() == 0.0 || d1.norm() == 0.0 {
        return Err(Error::ZeroTangent);
    }
    let half = |d: Complex64| Complex64::from_polar(d.norm().sqrt(), d.arg() / 2.0);
    let z3 = half(d1);
    Ok((half(d0), if sign == SignCase::PP { z3 } else { -z3 }))
}

/// Quadric `(1, u_1, u_2) M (1, u_1, u_2)ᵀ = 0` with symmetric `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conic {
    pub m: [[f64; 3]; 3],
}

/// Types of real conics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicKind {
    Ellipse,
    Hyperbola,
    Parabola,
    ImaginaryConic,
    RealLinePair,
    ImaginaryLinePair,
    ParallelRealLines,
    ParallelImaginaryLines,
    DoubleLine,
    /// All coefficients vanish.
    Empty,
}

impl ConicKind {
    /// True for the kinds without real points in general position.
    pub fn is_imaginary(self) -> bool {
        matches!(
            self,
            ConicKind::ImaginaryConic | ConicKind::ImaginaryLinePair | ConicKind::ParallelImaginaryLines
        )
    }
}

impl Conic {
    /// Builds from the six distinct entries `m00, m01, m02, m11, m12, m22`.
    pub fn new(m00: f64, m01: f64, m02: f64, m11: f64, m12: f64, m22: f64) -> Self {
        Conic {
            m: [[m00, m01, m02], [m01, m11, m12], [m02, m12, m22]],
        }
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let s = 0.5 * (m + m.transpose());
        Conic::new(s[(0, 0)], s[(0, 1)], s[(0, 2)], s[(1, 1)], s[(1, 2)], s[(2, 2)])
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.m[i][j])
    }

    pub fn eval(&self, u1: f64, u2: f64) -> f64 {
        let x = [1.0, u1, u2];
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += x[i] * self.m[i][j] * x[j];
            }
        }
        s
    }

    /// Gradient of [`Conic::eval`] with respect to `(u_1, u_2)`.
    pub fn gradient(&self, u1: f64, u2: f64) -> [f64; 2] {
        let x = [1.0, u1, u2];
        let row = |i: usize| 2.0 * (0..3).map(|j| self.m[i][j] * x[j]).sum::<f64>();
        [row(1), row(2)]
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn i1(&self) -> f64 {
        self.m[1][1] + self.m[2][2]
    }

    pub fn i2(&self) -> f64 {
        self.m[1][1] * self.m[2][2] - self.m[1][2] * self.m[1][2]
    }

    pub fn i3(&self) -> f64 {
        self.matrix().determinant()
    }

    fn negated(&self) -> Conic {
        Conic::from_matrix(&-self.matrix())
    }
}

const CLASSIFY_TOL: f64 = 1e-12;

/// Classifies a conic from the signs of `I_1, I_2, I_3`.
///
/// Parallel line pairs are told apart by the sum of the principal minors through the
/// constant term, which decides reality whatever the sign of `m_00`.
pub fn classify_conic(c: &Conic) -> ConicKind {
    let c = if c.m[0][0] < 0.0 { c.negated() } else { *c };
    let s = c.max_abs();
    if s == 0.0 {
        return ConicKind::Empty;
    }
    let (i1, i2, i3) = (c.i1(), c.i2(), c.i3());
    let zero3 = i3.abs() <= CLASSIFY_TOL * s * s * s;
    let zero2 = i2.abs() <= CLASSIFY_TOL * s * s;
    if !zero3 {
        if zero2 {
            return ConicKind::Parabola;
        }
        if i2 < 0.0 {
            return ConicKind::Hyperbola;
        }
        return if i1 * i3 < 0.0 {
            ConicKind::Ellipse
        } else {
            ConicKind::ImaginaryConic
        };
    }
    if !zero2 {
        return if i2 < 0.0 {
            ConicKind::RealLinePair
        } else {
            ConicKind::ImaginaryLinePair
        };
    }
    let m = &c.m;
    let minors = [
        m[0][0] * m[1][1] - m[0][1] * m[0][1],
        m[0][0] * m[2][2] - m[0][2] * m[0][2],
        m[0][1] * m[1][2] - m[0][2] * m[1][1],
        m[0][1] * m[2][2] - m[0][2] * m[1][2],
        m[0][0] * m[1][2] - m[0][1] * m[0][2],
        i2,
    ];
    let rank2 = minors.iter().any(|v| v.abs() > CLASSIFY_TOL * s * s);
    if !rank2 {
        return ConicKind::DoubleLine;
    }
    let k = minors[0] + minors[1];
    if k < 0.0 {
        ConicKind::ParallelRealLines
    } else {
        ConicKind::ParallelImaginaryLines
    }
}

/// Conics `A` (real part) and `B` (imaginary part) of the compatibility equation.
///
/// Requires `|u_0| ≥ 10⁻⁶|z_0|` and `|u_3| ≥ 10⁻⁶|z_3|`.
pub fn build_conics(pr: &HermiteProblem, z0: Complex64, z3: Complex64) -> Result<(Conic, Conic)> {
    let (u0, v0, u3, v3) = (z0.re, z0.im, z3.re, z3.im);
    if !axis_clear(z0) || !axis_clear(z3) {
        return Err(Error::AxisAlignedTangent);
    }
    let a = pr.a;
    let b = 1.0 - a;
    let (k0, k1) = (pr.kappa0, pr.kappa1);
    let s0 = u0 * u0 + v0 * v0;
    let s3 = u3 * u3 + v3 * v3;
    let (s02, s32) = (s0 * s0, s3 * s3);

    let a00 = pr.p0.re - pr.p1.re + (a * pr.d0.re + b * pr.d1.re) / 5.0
        - k0 * k0 * a * a * (3.0 - a) * s02 * s02 / (240.0 * u0 * u0)
        - k1 * k1 * b * b * (2.0 + a) * s32 * s32 / (240.0 * u3 * u3)
        + k0 * k1 * a * b * (s0 * s3).powi(2) / (80.0 * u0 * u3)
        - k0 * a * s02 * (a * (4.0 - a) * v0 + b * b * v3) / (60.0 * u0)
        + k1 * b * s32 * (a * a * v0 + b * (3.0 + a) * v3) / (60.0 * u3);
    let a01 = ((a * (4.0 - a) * (u0 * u0 - v0 * v0) + b * b * (u0 * u3 - v0 * v3)) / (3.0 * u0)
        - k0 * v0 * a * (3.0 - a) * s02 / (6.0 * u0 * u0)
        + k1 * v0 * b * s32 / (4.0 * u0 * u3))
        / 10.0;
    let a02 = (k1 * v3 * (a + 2.0) * b * s32 / (6.0 * u3 * u3) - k0 * a * v3 * s02 / (4.0 * u0 * u3)
        + (a * a * (u0 * u3 - v0 * v3) + (a + 3.0) * b * (u3 * u3 - v3 * v3)) / (3.0 * u3))
        / 10.0;
    let a11 = (u0 * u0 - v0 * v0) * (3.0 - a) / (15.0 * u0 * u0);
    let a12 = (u0 * u3 - v0 * v3) / (10.0 * u0 * u3);
    let a22 = (u3 * u3 - v3 * v3) * (2.0 + a) / (15.0 * u3 * u3);

    let b00 = pr.p0.im - pr.p1.im
        + (a * pr.d0.im + b * pr.d1.im) / 5.0
        + k0 * a * s02 * (a * (4.0 - a) * u0 + b * b * u3) / (60.0 * u0)
        - k1 * b * s32 * (u3 * b * (3.0 + a) + u0 * a * a) / (60.0 * u3);
    let b01 = 0.5
        * (k0 * a * (3.0 - a) * s02 / (30.0 * u0)
            + b * b * (u0 * v3 + u3 * v0) / (15.0 * u0)
            + 2.0 * a * v0 * (4.0 - a) / 15.0
            - k1 * b * s32 / (20.0 * u3));
    let b02 = ((2.0 * a * a * (u3 * v0 + u0 * v3) + 4.0 * u3 * v3 * (3.0 + a) * b - k1 * (2.0 + a) * b * s32)
        / (3.0 * u3)
        + k0 * a * s02 / (2.0 * u0))
        / 20.0;
    let b11 = 2.0 * v0 * (3.0 - a) / (15.0 * u0);
    let b12 = (v0 * u3 + u0 * v3) / (10.0 * u0 * u3);
    let b22 = 2.0 * v3 * (2.0 + a) / (15.0 * u3);

    Ok((
        Conic::new(a00, a01, a02, a11, a12, a22),
        Conic::new(b00, b01, b02, b11, b12, b22),
    ))
}

/// `v_1, v_2` from the curvature constraints.
pub fn recover_v(pr: &HermiteProblem, z0: Complex64, z3: Complex64, u1: f64, u2: f64) -> (f64, f64) {
    let (u0, v0, u3, v3) = (z0.re, z0.im, z3.re, z3.im);
    let s0 = z0.norm_sqr();
    let s3 = z3.norm_sqr();
    let v1 = (u1 * v0 + pr.a / 4.0 * pr.kappa0 * s0 * s0) / u0;
    let v2 = (u2 * v3 - (1.0 - pr.a) / 4.0 * pr.kappa1 * s3 * s3) / u3;
    (v1, v2)
}

/// Coefficients `[c_3, c_2, c_1, c_0]` of `det(A - λB) = c_3 λ³ + c_2 λ² + c_1 λ + c_0`.
///
/// `A_k` has its `k`-th column taken from `B`, and `B_k` its `k`-th column taken from `A`.
pub fn pencil_cubic(a: &Conic, b: &Conic) -> [f64; 4] {
    let (ma, mb) = (a.matrix(), b.matrix());
    let swap = |base: &Matrix3<f64>, from: &Matrix3<f64>, k: usize| {
        let mut m = *base;
        m.set_column(k, &from.column(k));
        m.determinant()
    };
    let sa: f64 = (0..3).map(|k| swap(&ma, &mb, k)).sum();
    let sb: f64 = (0..3).map(|k| swap(&mb, &ma, k)).sum();
    [-mb.determinant(), sb, -sa, ma.determinant()]
}

fn proportional(a: &Conic, b: &Conic) -> bool {
    let (ma, mb) = (a.matrix(), b.matrix());
    let (na, nb) = (ma.norm(), mb.norm());
    if na == 0.0 || nb == 0.0 {
        return true;
    }
    let alpha = ma.dot(&mb) / (nb * nb);
    (ma - mb * alpha).norm() <= 1e-12 * na
}

/// Real roots of `c_3 x³ + c_2 x² + c_1 x + c_0`, lowering the degree when the leading
/// coefficients vanish.
pub fn real_cubic_roots(c: [f64; 4]) -> Vec<f64> {
    let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let tiny = 1e-12 * scale;
    let [c3, c2, c1, c0] = c;
    let mut roots: Vec<Complex64> = if c3.abs() > tiny {
        cardano(c2 / c3, c1 / c3, c0 / c3)
    } else if c2.abs() > tiny {
        let disc = Complex64::new(c1 * c1 - 4.0 * c2 * c0, 0.0).sqrt();
        let q = -0.5 * (c1 + if c1 >= 0.0 { disc } else { -disc });
        let mut r = vec![q / c2];
        if q.norm() > 0.0 {
            r.push(c0 / q);
        }
        r
    } else if c1.abs() > tiny {
        vec![Complex64::new(-c0 / c1, 0.0)]
    } else {
        Vec::new()
    };
    let poly = |x: Complex64| ((c3 * x + c2) * x + c1) * x + c0;
    let dpoly = |x: Complex64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    for r in roots.iter_mut() {
        let d = dpoly(*r);
        if d.norm() > 0.0 {
            *r -= poly(*r) / d;
        }
    }
    let mut out: Vec<f64> = Vec::new();
    for r in roots {
        if r.im.abs() <= 1e-9 * r.norm().max(1.0) {
            let x = r.re;
            if !out.iter().any(|&y| (y - x).abs() <= 1e-12 * x.abs().max(1.0)) {
                out.push(x);
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Roots of the monic cubic `x³ + b x² + c x + d`.
fn cardano(b: f64, c: f64, d: f64) -> Vec<Complex64> {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = Complex64::new(-b / 3.0, 0.0);
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let w1 = Complex64::new(-q / 2.0, 0.0) + disc;
    let w2 = Complex64::new(-q / 2.0, 0.0) - disc;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    if w.norm() == 0.0 {
        return vec![shift; 3];
    }
    let cr = w.powf(1.0 / 3.0);
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = Vec::with_capacity(3);
    let mut ck = cr;
    for _ in 0..3 {
        out.push(ck - p / (3.0 * ck) + shift);
        ck *= omega;
    }
    out
}

/// Real `λ` for which `A - λB` is degenerate.
pub fn pencil_degenerate_lambdas(a: &Conic, b: &Conic) -> Result<Vec<f64>> {
    if proportional(a, b) {
        return Err(Error::IdenticalConics);
    }
    Ok(real_cubic_roots(pencil_cubic(a, b)))
}

/// Line `l_0 + l_1 u_1 + l_2 u_2 = 0`.
type Line = [f64; 3];

enum Split {
    Lines(Vec<Line>),
    Point(f64, f64),
    Nothing,
}

/// Splits a degenerate conic into its real lines, or returns the real vertex of an
/// imaginary line pair.
fn split_degenerate(q: &Matrix3<f64>) -> Split {
    let eig = SymmetricEigen::new(*q);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()));
    let (l1, l2) = (eig.eigenvalues[idx[0]], eig.eigenvalues[idx[1]]);
    if l1 == 0.0 {
        return Split::Nothing;
    }
    let e1 = eig.eigenvectors.column(idx[0]).into_owned();
    let e2 = eig.eigenvectors.column(idx[1]).into_owned();
    if l2.abs() <= 1e-9 * l1.abs() {
        return Split::Lines(vec![[e1[0], e1[1], e1[2]]]);
    }
    if l1 * l2 < 0.0 {
        let (a, b) = (l1.abs().sqrt(), l2.abs().sqrt());
        let lp = e1 * a + e2 * b;
        let lm = e1 * a - e2 * b;
        return Split::Lines(vec![[lp[0], lp[1], lp[2]], [lm[0], lm[1], lm[2]]]);
    }
    let e3 = eig.eigenvectors.column(idx[2]);
    if e3[0].abs() <= 1e-12 * e3.norm() {
        return Split::Nothing;
    }
    Split::Point(e3[1] / e3[0], e3[2] / e3[0])
}

/// Real intersections of a line with a conic.
fn line_conic(l: &Line, c: &Conic) -> Vec<(f64, f64)> {
    let n2 = l[1] * l[1] + l[2] * l[2];
    if n2 <= 1e-24 * (l[0] * l[0] + n2) {
        // line at infinity
        return Vec::new();
    }
    let p = [1.0, -l[0] * l[1] / n2, -l[0] * l[2] / n2];
    let d = [0.0, -l[2], l[1]];
    let m = &c.m;
    let form = |x: &[f64; 3], y: &[f64; 3]| {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += x[i] * m[i][j] * y[j];
            }
        }
        s
    };
    let (qa, qb, qc) = (form(&d, &d), form(&d, &p), form(&p, &p));
    let at = |s: f64| (p[1] + s * d[1], p[2] + s * d[2]);
    let big = qa.abs().max(qb.abs()).max(qc.abs());
    if big == 0.0 {
        return Vec::new();
    }
    if qa.abs() <= 1e-14 * big {
        if qb.abs() <= 1e-14 * big {
            return Vec::new();
        }
        return vec![at(-qc / (2.0 * qb))];
    }
    let disc = qb * qb - qa * qc;
    if disc < -1e-12 * (qb * qb + (qa * qc).abs()) {
        return Vec::new();
    }
    let root = disc.max(0.0).sqrt();
    let t = -(qb + if qb >= 0.0 { root } else { -root });
    if t == 0.0 {
        return vec![at(0.0)];
    }
    vec![at(t / qa), at(qc / t)]
}

/// Newton refinement of a common point of two conics.
fn polish(a: &Conic, b: &Conic, mut x: (f64, f64)) -> (f64, f64) {
    for _ in 0..12 {
        let f = [a.eval(x.0, x.1), b.eval(x.0, x.1)];
        let ga = a.gradient(x.0, x.1);
        let gb = b.gradient(x.0, x.1);
        let det = ga[0] * gb[1] - ga[1] * gb[0];
        let norm = (ga[0].abs() + ga[1].abs()) * (gb[0].abs() + gb[1].abs());
        if det.abs() <= 1e-14 * norm || norm == 0.0 {
            break;
        }
        let dx = (f[0] * gb[1] - f[1] * ga[1]) / det;
        let dy = (ga[0] * f[1] - gb[0] * f[0]) / det;
        let next = (x.0 - dx, x.1 - dy);
        let res = |p: (f64, f64)| a.eval(p.0, p.1).abs() / a.max_abs() + b.eval(p.0, p.1).abs() / b.max_abs();
        if res(next) > res(x) {
            break;
        }
        x = next;
    }
    x
}

fn on_conic(c: &Conic, x: (f64, f64)) -> bool {
    c.eval(x.0, x.1).abs() <= 1e-8 * c.max_abs() * (1.0 + x.0 * x.0 + x.1 * x.1)
}

/// Real intersection points of two conics; an empty list means none exist.
pub fn intersect_conics(a: &Conic, b: &Conic) -> Result<Vec<(f64, f64)>> {
    let lambdas = pencil_degenerate_lambdas(a, b)?;
    let (ma, mb) = (a.matrix(), b.matrix());
    let mut members: Vec<(Matrix3<f64>, Conic)> = lambdas.iter().map(|&l| (ma - mb * l, *b)).collect();
    let c3 = pencil_cubic(a, b)[0];
    if c3.abs() <= 1e-10 * mb.norm().powi(3) {
        // B is itself degenerate; intersect its lines with A
        members.push((mb, *a));
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut split_any = false;
    for (q, other) in members {
        let candidates = match split_degenerate(&q) {
            Split::Lines(lines) => lines.iter().flat_map(|l| line_conic(l, &other)).collect(),
            Split::Point(x, y) => vec![(x, y)],
            Split::Nothing => continue,
        };
        split_any = true;
        for p in candidates {
            let p = polish(a, b, p);
            if !(p.0.is_finite() && p.1.is_finite()) || !on_conic(a, p) || !on_conic(b, p) {
                continue;
            }
            let tol = 1e-8 * 1f64.max(p.0.hypot(p.1));
            if !points.iter().any(|x| (x.0 - p.0).hypot(x.1 - p.1) <= tol) {
                points.push(p);
            }
        }
    }
    if !split_any {
        return Err(Error::SplitFailure);
    }
    points.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    Ok(points)
}

/// Absolute rotation index and bending energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quality {
    pub rabs: f64,
    pub bend: f64,
}

/// `rabs = (1/2π) ∫|κ|σ dt` and `bend = ∫κ²σ dt` over the domain, span by span.
pub fn curve_quality(ph: &PHCurve) -> Result<Quality> {
    preimage_quality(ph.preimage())
}

pub fn preimage_quality(z: &ComplexSpline) -> Result<Quality> {
    let dz = z.derivative();
    let (lo, hi) = z.domain();
    let mut cuts: Vec<f64> = z
        .knots()
        .breaks()
        .iter()
        .map(|b| b.0)
        .filter(|&t| t > lo && t < hi)
        .collect();
    cuts.insert(0, lo);
    cuts.push(hi);
    let mut bad: Option<f64> = None;
    // κσ = 2 Im(z̄ z') / |z|²
    let mut turn = |t: f64| {
        let zt = z.value(t);
        let m = zt.norm_sqr();
        if m <= 1e-28 {
            bad.get_or_insert(t);
            return (0.0, 0.0);
        }
        let w = 2.0 * (zt.conj() * dz.value(t)).im;
        (w / m, w * w / (m * m * m))
    };
    // Put near-cusps and turning-direction changes at piece ends.
    let mut fine = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        fine.push(w[0]);
        fine.extend(span_features(
            &|t| z.value(t).norm_sqr(),
            &|t| (z.value(t).conj() * dz.value(t)).im,
            w[0],
            w[1],
        ));
    }
    fine.push(hi);
    let (mut rabs, mut bend) = (0.0, 0.0);
    for w in fine.windows(2) {
        rabs += adaptive(&mut |t| turn(t).0.abs(), w[0], w[1], 1e-9);
        bend += adaptive(&mut |t| turn(t).1, w[0], w[1], 1e-9);
    }
    if let Some(t) = bad {
        return Err(Error::NonRegular { t });
    }
    Ok(Quality {
        rabs: rabs / (2.0 * PI),
        bend,
    })
}

/// Interior local minima of `m` and sign changes of `w` on `[a, b]`, sorted.
fn span_features(m: &dyn Fn(f64) -> f64, w: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Vec<f64> {
    const N: usize = 32;
    let ts: Vec<f64> = (0..=N).map(|i| a + (b - a) * i as f64 / N as f64).collect();
    let mv: Vec<f64> = ts.iter().map(|&t| m(t)).collect();
    let wv: Vec<f64> = ts.iter().map(|&t| w(t)).collect();
    let mut out = Vec::new();
    for i in 1..N {
        if mv[i] <= mv[i - 1] && mv[i] <= mv[i + 1] {
            out.push(golden_min(m, ts[i - 1], ts[i + 1]));
        }
    }
    for i in 0..N {
        if wv[i] * wv[i + 1] < 0.0 {
            out.push(bisect_root(w, ts[i], ts[i + 1], wv[i]));
        }
    }
    let tol = 1e-12 * (b - a);
    out.retain(|&t| t > a + tol && t < b - tol);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|x, y| (*x - *y).abs() <= tol);
    out
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn bisect_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// One interpolant of the Hermite problem.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSolution {
    pub sign_case: SignCase,
    pub z: [Complex64; 4],
    /// Control points `r_0..r_8`.
    pub control_points: Vec<Complex64>,
    pub curve: PHCurve,
    pub rabs: f64,
    pub bend: f64,
    /// `|r(0)-p0|, |r(1)-p1|, |r'(0)-d0|, |r'(1)-d1|, |κ(0)-κ0|, |κ(1)-κ1|`.
    pub residuals: [f64; 6],
}

impl HermiteSolution {
    /// Whether the residuals meet the interpolation tolerances for `problem`.
    ///
    /// Positions are measured against the larger of the data and the control polygon,
    /// since far-away intersection points give correspondingly large loops.
    pub fn interpolates(&self, problem: &HermiteProblem) -> bool {
        let s = self.control_points.iter().fold(problem.scale(), |a, c| a.max(c.norm()));
        let ds = s.max(problem.d0.norm()).max(problem.d1.norm());
        let r = &self.residuals;
        r[0] <= 1e-8 * s
            && r[1] <= 1e-8 * s
            && r[2] <= 1e-8 * ds
            && r[3] <= 1e-8 * ds
            && r[4] <= 1e-6 * (1.0 + problem.kappa0.abs())
            && r[5] <= 1e-6 * (1.0 + problem.kappa1.abs())
    }
}

fn axis_clear(z: Complex64) -> bool {
    z.re.abs() >= 1e-6 * z.norm()
}

const ROTATIONS: [f64; 4] = [0.0, PI / 6.0, PI / 4.0, PI / 3.0];

/// Smallest rotation from `{0, π/6, π/4, π/3}` that keeps `u_0` and `u_3` away from zero.
///
/// "Away" means `|u| ≥ 0.05 |z|`; the half-angle shifts are at least π/24 apart, so two of
/// the four rotations always qualify.
pub fn choose_rotation(problem: &HermiteProblem) -> Result<f64> {
    let margin = |z: Complex64| z.re.abs() / z.norm();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for theta in ROTATIONS {
        let r = problem.rotated(theta);
        let (z0, z3) = endpoint_preimage(r.d0, r.d1, SignCase::PP)?;
        let worst = margin(z0).min(margin(z3));
        if worst >= 0.05 {
            return Ok(theta);
        }
        if worst > best.0 {
            best = (worst, theta);
        }
    }
    let r = problem.rotated(best.1);
    let (z0, z3) = endpoint_preimage(r.d0, r.d1, SignCase::PP)?;
    if axis_clear(z0) && axis_clear(z3) {
        Ok(best.1)
    } else {
        Err(Error::AxisAlignedTangent)
    }
}

fn clamped_case(a: f64) -> Result<ExplicitCase> {
    let mu = build_mu(2, &[a], MuLayout::Clamped { start: 0.0, end: 1.0 })?;
    ExplicitCase::from_knots(&mu, 2, Mode::Clamped)
}

/// Solutions of one sign case, solving in a frame rotated by `theta`.
pub fn solve_sign_case_rotated(problem: &HermiteProblem, sign: SignCase, theta: f64) -> Result<Vec<HermiteSolution>> {
    let rot = problem.rotated(theta);
    let (z0, z3) = endpoint_preimage(rot.d0, rot.d1, sign)?;
    let (ca, cb) = build_conics(&rot, z0, z3)?;
    let points = match intersect_conics(&ca, &cb) {
        Ok(p) => p,
        Err(Error::IdenticalConics) => Vec::new(),
        Err(e) => return Err(e),
    };
    let case = clamped_case(problem.a)?;
    let chi = explicit_chi(&case);
    let back = Complex64::from_polar(1.0, -theta / 2.0);
    let mut out = Vec::with_capacity(points.len());
    for (u1, u2) in points {
        let (v1, v2) = recover_v(&rot, z0, z3, u1, u2);
        let z = [z0, Complex64::new(u1, v1), Complex64::new(u2, v2), z3].map(|c| c * back);
        let curve = explicit_curve(&case, &z, problem.p0)?;
        let ph = PHCurve::from_tensor(&z, case.partitions().clone(), chi.clone(), problem.p0)?;
        let q = curve_quality(&ph)?;
        let residuals = residuals(&ph, problem)?;
        out.push(HermiteSolution {
            sign_case: sign,
            z,
            control_points: curve.r,
            curve: ph,
            rabs: q.rabs,
            bend: q.bend,
            residuals,
        });
    }
    Ok(out)
}

/// Solutions of one sign case with the automatic rotation.
pub fn solve_sign_case(problem: &HermiteProblem, sign: SignCase) -> Result<Vec<HermiteSolution>> {
    solve_sign_case_rotated(problem, sign, choose_rotation(problem)?)
}

fn residuals(ph: &PHCurve, pr: &HermiteProblem) -> Result<[f64; 6]> {
    let r = ph.curve();
    let h = ph.hodograph();
    Ok([
        (r.eval(0.0)? - pr.p0).norm(),
        (r.eval(1.0)? - pr.p1).norm(),
        (h.eval(0.0)? - pr.d0).norm(),
        (h.eval(1.0)? - pr.d1).norm(),
        (frame_and_curvature(ph.preimage(), 0.0)?.kappa - pr.kappa0).abs(),
        (frame_and_curvature(ph.preimage(), 1.0)?.kappa - pr.kappa1).abs(),
    ])
}

/// All solutions over both sign cases, sorted by rotation index then bending energy.
pub fn solve_hermite(problem: &HermiteProblem) -> Result<Vec<HermiteSolution>> {
    let theta = choose_rotation(problem)?;
    let mut all = Vec::new();
    for sign in SignCase::ALL {
        all.extend(solve_sign_case_rotated(problem, sign, theta)?);
    }
    if all.is_empty() {
        return Err(Error::NoSolutions(Box::new(hermite_report(problem)?)));
    }
    all.sort_by(|x, y| x.rabs.total_cmp(&y.rabs).then(x.bend.total_cmp(&y.bend)));
    Ok(all)
}

/// Conic invariants and reality for one sign case at the problem's curvatures.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub sign_case: SignCase,
    pub rotation: f64,
    pub invariants_a: [f64; 3],
    pub invariants_b: [f64; 3],
    pub kind_a: ConicKind,
    pub kind_b: ConicKind,
    pub feasible: bool,
    pub intersections: usize,
}

impl CaseReport {
    /// Names of the conics that are imaginary.
    pub fn imaginary(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.kind_a.is_imaginary() {
            v.push("A");
        }
        if self.kind_b.is_imaginary() {
            v.push("B");
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteReport {
    pub cases: Vec<CaseReport>,
}

pub fn hermite_report(problem: &HermiteProblem) -> Result<HermiteReport> {
    let mut cases = Vec::new();
    for sign in SignCase::ALL {
        let f = feasibility(problem, sign)?;
        let (ca, cb) = f.conics(problem.kappa0, problem.kappa1)?;
        let intersections = match intersect_conics(&ca, &cb) {
            Ok(p) => p.len(),
            Err(_) => 0,
        };
        let (kind_a, kind_b) = (classify_conic(&ca), classify_conic(&cb));
        cases.push(CaseReport {
            sign_case: sign,
            rotation: f.rotation,
            invariants_a: [ca.i1(), ca.i2(), ca.i3()],
            invariants_b: [cb.i1(), cb.i2(), cb.i3()],
            kind_a,
            kind_b,
            feasible: !kind_a.is_imaginary() && !kind_b.is_imaginary(),
            intersections,
        });
    }
    Ok(HermiteReport { cases })
}

/// Reality analysis of the two conics as a function of the end curvatures.
///
/// `I_1` and `I_2` depend on the tangents and `a` only; `I_3` is quadratic in `(κ_0, κ_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub sign_case: SignCase,
    pub rotation: f64,
    /// `[I_1, I_2]` of `A` and of `B`.
    pub a_invariants: [f64; 2],
    pub b_invariants: [f64; 2],
    problem: HermiteProblem,
    z0: Complex64,
    z3: Complex64,
}

/// Feasibility data for the tangents and knot of `problem`; its curvatures are ignored.
pub fn feasibility(problem: &HermiteProblem, sign: SignCase) -> Result<Feasibility> {
    let rotation = choose_rotation(problem)?;
    let rot = problem.rotated(rotation);
    let (z0, z3) = endpoint_preimage(rot.d0, rot.d1, sign)?;
    let (ca, cb) = build_conics(&rot, z0, z3)?;
    Ok(Feasibility {
        sign_case: sign,
        rotation,
        a_invariants: [ca.i1(), ca.i2()],
        b_invariants: [cb.i1(), cb.i2()],
        problem: rot,
        z0,
        z3,
    })
}

impl Feasibility {
    pub fn conics(&self, kappa0: f64, kappa1: f64) -> Result<(Conic, Conic)> {
        let pr = HermiteProblem {
            kappa0,
            kappa1,
            ..self.problem
        };
        build_conics(&pr, self.z0, self.z3)
    }

    /// `(I_3^A, I_3^B)` at the given curvatures.
    pub fn i3(&self, kappa0: f64, kappa1: f64) -> (f64, f64) {
        match self.conics(kappa0, kappa1) {
            Ok((a, b)) => (a.i3(), b.i3()),
            Err(_) => (f64::NAN, f64::NAN),
        }
    }

    /// Whether `A` and `B` are imaginary at the given curvatures.
    pub fn imaginary(&self, kappa0: f64, kappa1: f64) -> (bool, bool) {
        match self.conics(kappa0, kappa1) {
            Ok((a, b)) => (classify_conic(&a).is_imaginary(), classify_conic(&b).is_imaginary()),
            Err(_) => (true, true),
        }
    }

    /// Both conics real.
    pub fn is_feasible(&self, kappa0: f64, kappa1: f64) -> bool {
        let (a, b) = self.imaginary(kappa0, kappa1);
        !a && !b
    }

    /// Segments approximating `I_3^A = 0` over `[k0min, k0max] × [k1min, k1max]`.
    pub fn boundary(&self, bbox: [f64; 4], resolution: usize) -> Vec<[(f64, f64); 2]> {
        let n = resolution.max(2);
        let [x0, x1, y0, y1] = bbox;
        let xs: Vec<f64> = (0..=n).map(|i| x0 + (x1 - x0) * i as f64 / n as f64).collect();
        let ys: Vec<f64> = (0..=n).map(|j| y0 + (y1 - y0) * j as f64 / n as f64).collect();
        let grid: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| self.i3(x, y).0).collect())
            .collect();
        let mut segs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let corners = [
                    (xs[i], ys[j], grid[i][j]),
                    (xs[i + 1], ys[j], grid[i + 1][j]),
                    (xs[i + 1], ys[j + 1], grid[i + 1][j + 1]),
                    (xs[i], ys[j + 1], grid[i][j + 1]),
                ];
                let mut hits = Vec::new();
                for e in 0..4 {
                    let (ax, ay, av) = corners[e];
                    let (bx, by, bv) = corners[(e + 1) % 4];
                    if (av < 0.0) != (bv < 0.0) {
                        let s = av / (av - bv);
                        hits.push((ax + s * (bx - ax), ay + s * (by - ay)));
                    }
                }
                for pair in hits.chunks(2) {
                    if let [p, q] = pair {
                        segs.push([*p, *q]);
                    }
                }
            }
        }
        segs
    }
}
