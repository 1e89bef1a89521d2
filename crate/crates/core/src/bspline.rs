//! B-spline basis functions and splines with real or complex coefficients.

use crate::error::{Error, Result};
use crate::knots::KnotVector;
use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

/// Coefficient type of a spline: a real number or a planar point stored as a complex number.
pub trait Coeff:
    Copy + Default + Debug + PartialEq + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl Coeff for f64 {}
impl Coeff for Complex64 {}

/// Divides, treating `0/0` (and any zero denominator) as zero.
#[inline]
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Value of the `i`-th normalized B-spline of degree `n` on `kv` at `t`.
///
/// Right-continuous, except at the last knot where the limit from the left is returned.
pub fn basis_eval(kv: &KnotVector, n: usize, i: usize, t: f64) -> Result<f64> {
    let count = kv.basis_count(n);
    if i >= count {
        return Err(Error::IndexOutOfRange { index: i, count });
    }
    let k = kv.flat();
    if t < k[i] || t > k[i + n + 1] {
        return Ok(0.0);
    }
    let at_end = t == kv.last();
    let mut vals: Vec<f64> = (i..=i + n)
        .map(|j| {
            let inside = if at_end {
                k[j] < t && t <= k[j + 1]
            } else {
                k[j] <= t && t < k[j + 1]
            };
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for d in 1..=n {
        for j in 0..=n - d {
            let a = i + j;
            let left = ratio(t - k[a], k[a + d] - k[a]) * vals[j];
            let right = ratio(k[a + d + 1] - t, k[a + d + 1] - k[a + 1]) * vals[j + 1];
            vals[j] = left + right;
        }
    }
    Ok(vals[0])
}

/// Evaluates all basis functions of one degree that can be nonzero at interior points.
///
/// The knot vector is padded with copies of its end knots so that spans near the ends
/// (for example the extra knots of an open `tau`) are handled uniformly.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    degree: usize,
    padded: Vec<f64>,
    count: usize,
}

impl LocalBasis {
    pub fn new(kv: &KnotVector, degree: usize) -> Self {
        let mut padded = vec![kv.first(); degree];
        padded.extend_from_slice(kv.flat());
        padded.extend(std::iter::repeat_n(kv.last(), degree));
        LocalBasis {
            degree,
            padded,
            count: kv.basis_count(degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Index of the first function returned by [`Self::eval`] and the nonzero values at `t`.
    ///
    /// `t` must lie strictly inside the knot range. Indices below zero or beyond the basis
    /// count belong to padding and are reported as `None` by [`Self::for_each`].
    pub fn eval(&self, t: f64, out: &mut Vec<f64>) -> isize {
        let p = self.degree;
        let k = &self.padded;
        let span = k.partition_point(|&x| x <= t) - 1;
        out.clear();
        out.resize(p + 1, 0.0);
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        out[0] = 1.0;
        for j in 1..=p {
            left[j] = t - k[span + 1 - j];
            right[j] = k[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let tmp = ratio(out[r], right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            out[j] = saved;
        }
        span as isize - p as isize - p as isize
    }

    /// Calls `f(index, value)` for every real basis function that may be nonzero at `t`.
    pub fn for_each(&self, t: f64, buf: &mut Vec<f64>, mut f: impl FnMut(usize, f64)) {
        let first = self.eval(t, buf);
        for (j, &v) in buf.iter().enumerate() {
            let idx = first + j as isize;
            if idx >= 0 && (idx as usize) < self.count {
                f(idx as usize, v);
            }
        }
    }
}

/// A spline `Σ c_i N_i(t)` of given degree on a knot vector, valid on `domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline<T> {
    degree: usize,
    knots: KnotVector,
    coeffs: Vec<T>,
    domain: (f64, f64),
}

pub type RealSpline = Spline<f64>;
pub type ComplexSpline = Spline<Complex64>;

impl<T: Coeff> Spline<T> {
    /// Creates a spline; `domain` must be bounded by knots inside the valid region.
    pub fn new(degree: usize, knots: KnotVector, coeffs: Vec<T>, domain: (f64, f64)) -> Result<Self> {
        let need = knots.basis_count(degree);
        if coeffs.len() != need || knots.len() < degree + 2 {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for {} knots of degree {degree} (expected {need})",
                coeffs.len(),
                knots.len()
            )));
        }
        knots.check_multiplicity(degree + 1)?;
        let (lo, hi) = domain;
        let valid_lo = knots[degree];
        let valid_hi = knots[need];
        if !(lo < hi) || lo < valid_lo || hi > valid_hi || knots.multiplicity(lo) == 0 || knots.multiplicity(hi) == 0 {
            return Err(Error::ShapeMismatch(format!(
                "domain [{lo}, {hi}] not within knots [{valid_lo}, {valid_hi}]"
            )));
        }
        Ok(Spline {
            degree,
            knots,
            coeffs,
            domain,
        })
    }

    /// Creates a spline on the largest interval where the basis sums to one.
    pub fn with_full_domain(degree: usize, knots: KnotVector, coeffs: Vec<T>) -> Result<Self> {
        let need = knots.basis_count(degree);
        if need == 0 {
            return Err(Error::ShapeMismatch("not enough knots".into()));
        }
        let domain = (knots[degree], knots[need]);
        Self::new(degree, knots, coeffs, domain)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Returns a copy restricted to a sub-interval bounded by knots.
    pub fn with_domain(&self, domain: (f64, f64)) -> Result<Self> {
        Self::new(self.degree, self.knots.clone(), self.coeffs.clone(), domain)
    }

    /// Spline with the same knots and coefficients transformed by `f`.
    pub fn map<U: Coeff>(&self, f: impl Fn(T) -> U) -> Spline<U> {
        Spline {
            degree: self.degree,
            knots: self.knots.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            domain: self.domain,
        }
    }

    fn span(&self, t: f64) -> usize {
        let k = self.knots.flat();
        let last = self.coeffs.len() - 1;
        let i = if t >= self.domain.1 {
            k.partition_point(|&x| x < t)
        } else {
            k.partition_point(|&x| x <= t)
        };
        i.saturating_sub(1).clamp(self.degree, last)
    }

    /// Evaluates at `t`, which must lie in the domain.
    pub fn eval(&self, t: f64) -> Result<T> {
        let (lo, hi) = self.domain;
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfDomain { t, lo, hi });
        }
        Ok(self.value(t))
    }

    /// de Boor evaluation without the domain check.
    pub fn value(&self, t: f64) -> T {
        let p = self.degree;
        let k = self.knots.flat();
        let s = self.span(t);
        let mut d: Vec<T> = self.coeffs[s - p..=s].to_vec();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let lo = k[j + s - p];
                let alpha = ratio(t - lo, k[j + 1 + s - r] - lo);
                d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
            }
        }
        d[p]
    }

    /// Naive evaluation `Σ c_i N_i(t)` through [`basis_eval`]; used as a reference.
    pub fn value_naive(&self, t: f64) -> T {
        let mut acc = T::default();
        for (i, &c) in self.coeffs.iter().enumerate() {
            let b = basis_eval(&self.knots, self.degree, i, t).unwrap_or(0.0);
            if b != 0.0 {
                acc = acc + c * b;
            }
        }
        acc
    }

    /// Derivative spline of degree `degree - 1` on the interior knot vector.
    pub fn derivative(&self) -> Spline<T> {
        let p = self.degree;
        if p == 0 {
            return Spline {
                degree: 0,
                knots: self.knots.clone(),
                coeffs: vec![T::default(); self.coeffs.len()],
                domain: self.domain,
            };
        }
        let k = self.knots.flat();
        let coeffs = (0..self.coeffs.len() - 1)
            .map(|i| (self.coeffs[i + 1] - self.coeffs[i]) * ratio(p as f64, k[i + p + 1] - k[i + 1]))
            .collect();
        let knots = KnotVector::new(k[1..k.len() - 1].to_vec()).expect("interior of a valid knot vector");
        Spline {
            degree: p - 1,
            knots,
            coeffs,
            domain: self.domain,
        }
    }

    /// Antiderivative on `rho`, which must equal this spline's knots plus one knot at each end.
    ///
    /// `r_{i+1} = r_i + (s_{i+d+1} - s_i)/(d+1) c_i` with `r_0 = r0`.
    pub fn integrate(&self, rho: &KnotVector, r0: T) -> Result<Spline<T>> {
        let s = self.knots.flat();
        let rf = rho.flat();
        if rf.len() != s.len() + 2 || rf[1..rf.len() - 1] != *s {
            return Err(Error::ShapeMismatch(
                "integration knots must extend the spline knots by one at each end".into(),
            ));
        }
        let d = self.degree;
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        let mut acc = r0;
        out.push(acc);
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc = acc + c * ((s[i + d + 1] - s[i]) / (d + 1) as f64);
            out.push(acc);
        }
        Spline::new(d + 1, rho.clone(), out, self.domain)
    }
}

impl ComplexSpline {
    pub fn re(&self) -> RealSpline {
        self.map(|c| c.re)
    }

    pub fn im(&self) -> RealSpline {
        self.map(|c| c.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kv(v: &[f64]) -> KnotVector {
        KnotVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn degree_zero_indicator() {
        let k = kv(&[0.0, 1.0, 2.0]);
        assert_eq!(basis_eval(&k, 0, 0, 0.5).unwrap(), 1.0);
        assert_eq!(basis_eval(&k, 0, 0, 1.0).unwrap(), 0.0);
        assert_eq!(basis_eval(&k, 0, 1, 1.0).unwrap(), 1.0);
        assert_eq!(basis_eval(&k, 0, 1, 2.0).unwrap(), 1.0);
        assert!(matches!(basis_eval(&k, 0, 2, 0.5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn bernstein_midpoint() {
        let k = kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert!((basis_eval(&k, 2, 1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(basis_eval(&k, 2, 2, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn constant_spline_and_clamped_ends() {
        let k = kv(&[0.0, 0.0, 0.0, 0.4, 1.0, 1.0, 1.0]);
        let s = RealSpline::with_full_domain(2, k.clone(), vec![2.5; 4]).unwrap();
        for t in [0.0, 0.2, 0.4, 0.9, 1.0] {
            assert!((s.eval(t).unwrap() - 2.5).abs() < 1e-14);
        }
        let s = RealSpline::with_full_domain(2, k, vec![1.0, -2.0, 3.0, 7.0]).unwrap();
        assert_eq!(s.eval(0.0).unwrap(), 1.0);
        assert_eq!(s.eval(1.0).unwrap(), 7.0);
        assert!(matches!(s.eval(1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn clamped_endpoint_derivative() {
        let k = kv(&[0.0, 0.0, 0.0, 0.3, 0.7, 1.0, 1.0, 1.0]);
        let c = vec![0.5, 1.5, -1.0, 2.0, 0.25];
        let s = RealSpline::with_full_domain(2, k.clone(), c.clone()).unwrap();
        let d = s.derivative();
        let expected = 2.0 / (k[3] - k[1]) * (c[1] - c[0]);
        assert!((d.eval(0.0).unwrap() - expected).abs() < 1e-13);
        let zero = RealSpline::with_full_domain(2, k, vec![3.0; 5]).unwrap().derivative();
        assert!(zero.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn integrate_constant_is_linear() {
        let nu = kv(&[0.0, 0.0, 0.0, 0.5, 0.5, 1.5, 1.5, 1.5]);
        let rho = kv(&[0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 1.5, 1.5, 1.5, 1.5]);
        let one = ComplexSpline::with_full_domain(2, nu, vec![Complex64::new(1.0, 0.0); 5]).unwrap();
        let r0 = Complex64::new(0.25, -1.0);
        let r = one.integrate(&rho, r0).unwrap();
        for t in [0.0, 0.3, 0.5, 1.2, 1.5] {
            assert!((r.eval(t).unwrap() - (r0 + t)).norm() < 1e-14);
        }
    }

    #[test]
    fn local_basis_matches_recursion() {
        let k = kv(&[-1.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 2.0, 2.0, 2.0, 3.0]);
        for degree in 0..=4 {
            let lb = LocalBasis::new(&k, degree);
            let mut buf = Vec::new();
            for &t in &[-0.7, -0.01, 0.2, 0.5, 1.3, 2.4, 2.99] {
                let mut seen = vec![0.0; k.basis_count(degree)];
                lb.for_each(t, &mut buf, |i, v| seen[i] = v);
                for (i, &v) in seen.iter().enumerate() {
                    let direct = basis_eval(&k, degree, i, t).unwrap();
                    assert!((v - direct).abs() < 1e-14, "deg {degree} i {i} t {t}");
                }
            }
        }
    }

    fn knot_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
        (1usize..=5, prop::collection::vec(0.05f64..1.0, 1..7)).prop_map(|(deg, spans)| {
            let mut flat = vec![0.0; deg + 1];
            let mut t = 0.0;
            for s in spans {
                t += s;
                flat.push(t);
            }
            let end = *flat.last().unwrap();
            flat.extend(std::iter::repeat_n(end, deg));
            (deg, flat)
        })
    }

    proptest! {
        #[test]
        fn partition_of_unity_and_support((deg, flat) in knot_strategy(), u in 0.0f64..=1.0) {
            let k = KnotVector::new(flat).unwrap();
            let t = k.first() + u * (k.last() - k.first());
            let mut sum = 0.0;
            for i in 0..k.basis_count(deg) {
                let b = basis_eval(&k, deg, i, t).unwrap();
                prop_assert!(b >= 0.0);
                if t < k[i] || t > k[i + deg + 1] {
                    prop_assert_eq!(b, 0.0);
                }
                sum += b;
            }
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn de_boor_matches_naive(
            (deg, flat) in knot_strategy(),
            seed in prop::collection::vec(-2.0f64..2.0, 12),
            u in 0.0f64..=1.0,
        ) {
            let k = KnotVector::new(flat).unwrap();
            let coeffs: Vec<f64> = (0..k.basis_count(deg)).map(|i| seed[i % seed.len()] + i as f64 * 0.1).collect();
            let s = RealSpline::with_full_domain(deg, k, coeffs).unwrap();
            let (lo, hi) = s.domain();
            let t = lo + u * (hi - lo);
            prop_assert!((s.value(t) - s.value_naive(t)).abs() <= 1e-12 * (1.0 + s.value(t).abs()));
        }

        #[test]
        fn derivative_matches_finite_difference(
            (deg, flat) in knot_strategy(),
            seed in prop::collection::vec(-2.0f64..2.0, 12),
            u in 0.05f64..0.95,
        ) {
            let k = KnotVector::new(flat).unwrap();
            let coeffs: Vec<f64> = (0..k.basis_count(deg)).map(|i| seed[i % seed.len()]).collect();
            let s = RealSpline::with_full_domain(deg, k.clone(), coeffs).unwrap();
            let (lo, hi) = s.domain();
            let t = lo + u * (hi - lo);
            // keep the stencil inside one polynomial piece
            let gap = k.breaks().iter().map(|&(v, _)| (v - t).abs()).fold(f64::INFINITY, f64::min);
            prop_assume!(gap > 1e-3);
            let h = (gap / 3.0).min(1e-3);
            let f = |x: f64| s.value(x);
            let fd = (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
            let ds = s.derivative();
            let d = ds.value(t);
            let scale = ds.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
            prop_assert!((fd - d).abs() <= 1e-6 * scale);
        }

        #[test]
        fn integrate_then_differentiate(
            (deg, flat) in knot_strategy(),
            seed in prop::collection::vec(-2.0f64..2.0, 12),
            r0 in -3.0f64..3.0,
        ) {
            let k = KnotVector::new(flat).unwrap();
            let coeffs: Vec<f64> = (0..k.basis_count(deg)).map(|i| seed[i % seed.len()]).collect();
            let s = RealSpline::with_full_domain(deg, k.clone(), coeffs.clone()).unwrap();
            let mut rho = vec![k.first()];
            rho.extend_from_slice(k.flat());
            rho.push(k.last());
            let rho = KnotVector::new(rho).unwrap();
            let r = s.integrate(&rho, r0).unwrap();
            prop_assert_eq!(r.coeffs()[0], r0);
            let back = r.derivative();
            for (a, b) in back.coeffs().iter().zip(&coeffs) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            for j in 0..=20 {
                let t = s.domain().0 + (s.domain().1 - s.domain().0) * j as f64 / 20.0;
                prop_assert!((back.value(t) - s.value(t)).abs() <= 1e-10);
            }
        }
    }
}
