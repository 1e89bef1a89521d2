//! PH B-spline curves built from complex preimages.
//!
//! Points and vectors of the plane are stored as complex numbers `x + iy`.

use crate::bspline::{ComplexSpline, RealSpline, Spline};
use crate::error::{Error, Result};
use crate::knots::{derive_partitions, Mode, PartitionSet};
use crate::product::{solve_chi, solve_zeta, ProductTensor};
use crate::quadrature::GaussRule;
use num_complex::Complex64;

/// A PH curve `r(t) = r0 + ∫ z(s)² ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct PHCurve {
    preimage: ComplexSpline,
    hodograph: ComplexSpline,
    curve: ComplexSpline,
    partitions: PartitionSet,
    chi: ProductTensor,
    r0: Complex64,
}

/// Builds the PH curve of a preimage `z` over `mu`, computing `χ` from Gramian systems.
pub fn ph_from_preimage(
    z: &[Complex64],
    mu: &crate::knots::KnotVector,
    n: usize,
    mode: Mode,
    r0: Complex64,
) -> Result<PHCurve> {
    let ps = derive_partitions(mu, n, mode)?;
    let chi = solve_chi(&ps)?;
    PHCurve::from_tensor(z, ps, chi, r0)
}

impl PHCurve {
    /// Assembles a curve from precomputed product coefficients `χ`.
    pub fn from_tensor(z: &[Complex64], partitions: PartitionSet, chi: ProductTensor, r0: Complex64) -> Result<Self> {
        let n = partitions.n();
        let p = partitions.p();
        if z.len() != p + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} preimage coefficients, expected {}",
                z.len(),
                p + 1
            )));
        }
        if chi.dims() != [p + 1, p + 1, partitions.q() + 1] {
            return Err(Error::ShapeMismatch("product tensor does not match partitions".into()));
        }
        if z.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::DegenerateInput("preimage is identically zero".into()));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("preimage coefficients must be finite".into()));
        }
        let domain = partitions.domain();
        let preimage = Spline::new(n, partitions.mu().clone(), z.to_vec(), domain)?;
        let pk = chi.contract(|i, j| z[i] * z[j]);
        let hodograph = Spline::new(2 * n, partitions.nu().clone(), pk, domain)?;
        let curve = hodograph.integrate(partitions.rho(), r0)?;
        Ok(PHCurve {
            preimage,
            hodograph,
            curve,
            partitions,
            chi,
            r0,
        })
    }

    pub fn preimage(&self) -> &ComplexSpline {
        &self.preimage
    }

    /// `p(t) = z(t)²` over `nu`.
    pub fn hodograph(&self) -> &ComplexSpline {
        &self.hodograph
    }

    /// `r(t)` over `rho`.
    pub fn curve(&self) -> &ComplexSpline {
        &self.curve
    }

    pub fn partitions(&self) -> &PartitionSet {
        &self.partitions
    }

    pub fn chi(&self) -> &ProductTensor {
        &self.chi
    }

    pub fn r0(&self) -> Complex64 {
        self.r0
    }

    pub fn domain(&self) -> (f64, f64) {
        self.partitions.domain()
    }

    /// Control points `r_i`.
    pub fn control_points(&self) -> &[Complex64] {
        self.curve.coeffs()
    }

    /// Parametric speed `σ(t) = |z(t)|²` over `nu`, with `σ_k = Σ χ_k^{i,j} z_i z̄_j`.
    pub fn speed(&self) -> RealSpline {
        let z = self.preimage.coeffs();
        let sk = self.chi.contract(|i, j| z[i] * z[j].conj());
        self.hodograph
            .map(|_| 0.0)
            .with_coeffs(sk.iter().map(|c| c.re).collect())
    }

    /// Imaginary parts left over in the double sum for `σ_k`; zero up to rounding.
    pub fn speed_imaginary_residue(&self) -> f64 {
        let z = self.preimage.coeffs();
        let sk = self.chi.contract(|i, j| z[i] * z[j].conj());
        sk.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// Same curve translated so that `r_0 = r0`.
    pub fn translated(&self, r0: Complex64) -> Result<PHCurve> {
        let shift = r0 - self.r0;
        let mut out = self.clone();
        out.curve = self.curve.map(|c| c + shift);
        out.r0 = r0;
        Ok(out)
    }
}

impl<T: crate::bspline::Coeff> Spline<T> {
    /// Same knots, degree and domain with new coefficients.
    pub(crate) fn with_coeffs<U: crate::bspline::Coeff>(&self, coeffs: Vec<U>) -> Spline<U> {
        Spline::new(self.degree(), self.knots().clone(), coeffs, self.domain()).expect("coefficient count preserved")
    }
}

/// Parametric speed of the PH curve generated by `z`.
pub fn parametric_speed(ph: &PHCurve) -> RealSpline {
    ph.speed()
}

/// Cumulative arc length spline (with `l_0 = 0`) and the total length.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLength {
    pub spline: RealSpline,
    pub total: f64,
}

impl ArcLength {
    /// Length from the start of the domain to `t`.
    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.spline.eval(t)? - self.spline.value(self.spline.domain().0))
    }
}

pub fn arc_length(ph: &PHCurve) -> ArcLength {
    let sigma = ph.speed();
    let spline = sigma
        .integrate(ph.partitions.rho(), 0.0)
        .expect("rho extends nu by construction");
    let total = total_length(ph, &spline);
    ArcLength { spline, total }
}

fn total_length(ph: &PHCurve, l: &RealSpline) -> f64 {
    let ps = &ph.partitions;
    let n = ps.n();
    let p = ps.p();
    let c = l.coeffs();
    let rho = ps.rho();
    let (t0, t1) = ps.domain();
    let basis = |i: usize, t: f64| crate::bspline::basis_eval(rho, 2 * n + 1, i, t).unwrap_or(0.0);
    match ps.mode() {
        Mode::Clamped => c[ps.q() + 1],
        Mode::Closed => (0..=n)
            .map(|k| {
                let a = (n - 1) * (n + 1) + 1 + k;
                (c[p * (n + 1) + 1 + k] - c[a]) * basis(a, t0)
            })
            .sum(),
        Mode::Open => (0..=n)
            .map(|k| {
                let a = (n - 1) * (n + 1) + 1 + k;
                let b = p * (n + 1) + 1 + k;
                c[b] * basis(b, t1) - c[a] * basis(a, t0)
            })
            .sum(),
    }
}

/// Total length of a closed curve written directly in terms of `σ_j`.
pub fn closed_length_from_speed(ph: &PHCurve) -> Result<f64> {
    let ps = &ph.partitions;
    if ps.mode() != Mode::Closed {
        return Err(Error::ModeMismatch("closed curve required".into()));
    }
    let n = ps.n();
    let m = ps.m();
    let s = ps.nu();
    let sigma = ph.speed();
    let sg = sigma.coeffs();
    let t_n = ps.domain().0;
    let mut total = 0.0;
    for k in 0..=n {
        let inner: f64 = ((n - 1) * (n + 1) + k + 1..=(m + n) * (n + 1) + k)
            .map(|j| (s[j + 2 * n + 1] - s[j]) / (2 * n + 1) as f64 * sg[j])
            .sum();
        let b = crate::bspline::basis_eval(ps.rho(), 2 * n + 1, (n - 1) * (n + 1) + 1 + k, t_n)?;
        total += inner * b;
    }
    Ok(total)
}

/// Rational spline `Σ q_k N_k(t) / Σ γ_k N_k(t)` describing an offset curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSpline {
    numerator: ComplexSpline,
    weights: RealSpline,
    h: f64,
}

impl RationalSpline {
    pub fn new(numerator: ComplexSpline, weights: RealSpline, h: f64) -> Result<Self> {
        if numerator.knots() != weights.knots()
            || numerator.degree() != weights.degree()
            || numerator.domain() != weights.domain()
        {
            return Err(Error::ShapeMismatch("numerator and weights must share knots".into()));
        }
        Ok(RationalSpline { numerator, weights, h })
    }

    pub fn degree(&self) -> usize {
        self.numerator.degree()
    }

    pub fn knots(&self) -> &crate::knots::KnotVector {
        self.numerator.knots()
    }

    pub fn numerator(&self) -> &ComplexSpline {
        &self.numerator
    }

    pub fn weights(&self) -> &RealSpline {
        &self.weights
    }

    pub fn distance(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> (f64, f64) {
        self.numerator.domain()
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let w = self.weights.eval(t)?;
        if w == 0.0 {
            return Err(Error::NonRegular { t });
        }
        Ok(self.numerator.eval(t)? / w)
    }
}

/// Fails with `NonRegular` if `σ` vanishes at a quadrature node or endpoint of the domain.
pub fn check_regular(ph: &PHCurve, sigma: &RealSpline) -> Result<()> {
    let scale = sigma.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let (lo, hi) = ph.domain();
    let rule = GaussRule::exact_for(2 * ph.partitions.n() + 2);
    let breaks: Vec<f64> = ph
        .partitions
        .mu()
        .breaks()
        .iter()
        .map(|&(v, _)| v)
        .filter(|&v| v >= lo && v <= hi)
        .collect();
    for w in breaks.windows(2) {
        let pts = rule.points(w[0], w[1]).map(|(t, _)| t).chain([w[0], w[1]]);
        for t in pts {
            if !(sigma.value(t) > tol) {
                return Err(Error::NonRegular { t });
            }
        }
    }
    Ok(())
}

/// Offset at signed distance `h` (positive to the right of the direction of travel).
pub fn offset(ph: &PHCurve, sigma: &RealSpline, h: f64) -> Result<RationalSpline> {
    let zeta = solve_zeta(&ph.partitions)?;
    offset_with(ph, sigma, &zeta, h)
}

/// Offset using precomputed `ζ` coefficients.
pub fn offset_with(ph: &PHCurve, sigma: &RealSpline, zeta: &ProductTensor, h: f64) -> Result<RationalSpline> {
    let ps = &ph.partitions;
    if zeta.dims() != [ps.q() + 2, ps.q() + 1, ps.w() + 1] {
        return Err(Error::ShapeMismatch("zeta does not match partitions".into()));
    }
    check_regular(ph, sigma)?;
    let r = ph.curve.coeffs();
    let p = ph.hodograph.coeffs();
    let s = sigma.coeffs();
    let ih = Complex64::new(0.0, h);
    let q = zeta.contract(|i, j| r[i] * s[j] - ih * p[j]);
    let gamma = zeta.contract(|_, j| s[j]);
    let domain = ps.domain();
    let numerator = Spline::new(4 * ps.n() + 1, ps.tau().clone(), q, domain)?;
    let weights = Spline::new(4 * ps.n() + 1, ps.tau().clone(), gamma, domain)?;
    RationalSpline::new(numerator, weights, h)
}

/// Unit tangent, unit normal and signed curvature at a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub tangent: Complex64,
    pub normal: Complex64,
    pub kappa: f64,
}

pub fn frame_and_curvature(z: &ComplexSpline, t: f64) -> Result<Frame> {
    let zt = z.eval(t)?;
    let dz = z.derivative().value(t);
    let m = zt.norm_sqr();
    if zt.norm() < 1e-14 {
        return Err(Error::ZeroPreimage { t });
    }
    let (u, v) = (zt.re, zt.im);
    Ok(Frame {
        tangent: Complex64::new(u * u - v * v, 2.0 * u * v) / m,
        normal: Complex64::new(2.0 * u * v, v * v - u * u) / m,
        kappa: 2.0 * (zt.conj() * dz).im / (m * m),
    })
}

/// Residuals of the clamped end conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedReport {
    /// `|r(t_n) - r_0|`.
    pub position_start: f64,
    /// `|r(t_{p+1}) - r_{q+1}|`.
    pub position_end: f64,
    /// `|r'(t_n) - (2n+1)/(s'_{2n+2} - s'_1) (r_1 - r_0)|`.
    pub tangent_start: f64,
    /// `|r'(t_{p+1}) - (2n+1)/(s'_{q+2n+2} - s'_{q+1}) (r_{q+1} - r_q)|`.
    pub tangent_end: f64,
    /// Bernstein-form weights `α`, `β` of the end conditions (open and closed mode only).
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

impl ClampedReport {
    pub fn max(&self) -> f64 {
        self.position_start
            .max(self.position_end)
            .max(self.tangent_start)
            .max(self.tangent_end)
    }
}

/// `α = (t_n - t_{n-1}) / (t_{n+1} - t_{n-1})` of `mu`.
pub fn bernstein_alpha(mu: &crate::knots::KnotVector, n: usize) -> f64 {
    crate::bspline::ratio(mu[n] - mu[n - 1], mu[n + 1] - mu[n - 1])
}

/// `β = (t_{p+1} - t_p) / (t_{p+2} - t_p)` of `mu`.
pub fn bernstein_beta(mu: &crate::knots::KnotVector, p: usize) -> f64 {
    crate::bspline::ratio(mu[p + 1] - mu[p], mu[p + 2] - mu[p])
}

/// Bernstein polynomial `B_k^n(x)`.
pub fn bernstein(n: usize, k: usize, x: f64) -> f64 {
    let binom = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    binom * x.powi(k as i32) * (1.0 - x).powi((n - k) as i32)
}

/// `r(t_n)` written as a Bernstein combination of control points (open and closed mode).
pub fn start_point_bernstein(ph: &PHCurve) -> Option<Complex64> {
    let ps = &ph.partitions;
    if ps.mode() == Mode::Clamped {
        return None;
    }
    let n = ps.n();
    let alpha = bernstein_alpha(ps.mu(), n);
    let r = ph.curve.coeffs();
    Some(
        (0..=n)
            .map(|k| r[(n - 1) * (n + 1) + k + 1] * bernstein(n, k, alpha))
            .sum(),
    )
}

/// `r(t_{p+1})` written as a Bernstein combination of control points (open and closed mode).
pub fn end_point_bernstein(ph: &PHCurve) -> Option<Complex64> {
    let ps = &ph.partitions;
    if ps.mode() == Mode::Clamped {
        return None;
    }
    let n = ps.n();
    let p = ps.p();
    let beta = bernstein_beta(ps.mu(), p);
    let r = ph.curve.coeffs();
    Some((0..=n).map(|k| r[p * (n + 1) + k + 1] * bernstein(n, k, beta)).sum())
}

pub fn check_clamped(ph: &PHCurve) -> ClampedReport {
    let ps = &ph.partitions;
    let n = ps.n();
    let q = ps.q();
    let sp = ps.rho();
    let r = ph.curve.coeffs();
    let (t0, t1) = ps.domain();
    let deg = (2 * n + 1) as f64;
    let d1 = ph.hodograph.value(t0);
    let d2 = ph.hodograph.value(t1);
    let open = ps.mode() != Mode::Clamped;
    ClampedReport {
        position_start: (ph.curve.value(t0) - r[0]).norm(),
        position_end: (ph.curve.value(t1) - r[q + 1]).norm(),
        tangent_start: (d1 - (r[1] - r[0]) * crate::bspline::ratio(deg, sp[2 * n + 2] - sp[1])).norm(),
        tangent_end: (d2 - (r[q + 1] - r[q]) * crate::bspline::ratio(deg, sp[q + 2 * n + 2] - sp[q + 1])).norm(),
        alpha: open.then(|| bernstein_alpha(ps.mu(), n)),
        beta: open.then(|| bernstein_beta(ps.mu(), ps.p())),
    }
}

/// Closure residuals and knot checks of a closed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedReport {
    /// `Σ_j (s_{j+2n+1} - s_j) p_j` for `k = 0..=n`.
    pub residuals: Vec<Complex64>,
    /// Mirrored knot spans around the junction agree.
    pub knots_ok: bool,
    /// Preimage coefficients wrap: `z_{m+1+i} = z_i` for `i < n`.
    pub z_wrapped: bool,
}

impl ClosedReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.norm()))
    }
}

/// The `n+1` closure sums for hodograph coefficients `p`.
pub fn closed_residuals(p: &[Complex64], ps: &PartitionSet) -> Vec<Complex64> {
    let n = ps.n();
    let m = ps.m();
    let s = ps.nu();
    (0..=n)
        .map(|k| {
            (n * (n + 1) - k..(m + n + 1) * (n + 1) - k)
                .map(|j| p[j] * (s[j + 2 * n + 1] - s[j]))
                .sum()
        })
        .collect()
}

/// Checks the closure conditions for `z` on closed-mode partitions.
pub fn check_closed(z: &[Complex64], ps: &PartitionSet) -> Result<ClosedReport> {
    let chi = solve_chi(ps)?;
    check_closed_with(z, ps, &chi)
}

pub fn check_closed_with(z: &[Complex64], ps: &PartitionSet, chi: &ProductTensor) -> Result<ClosedReport> {
    if ps.mode() != Mode::Closed {
        return Err(Error::ModeMismatch("closed partitions required".into()));
    }
    if z.len() != ps.p() + 1 {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients, expected {}",
            z.len(),
            ps.p() + 1
        )));
    }
    let n = ps.n();
    let m = ps.m();
    let mu = ps.mu();
    let p = chi.contract(|i, j| z[i] * z[j]);
    let tol = crate::knots::span_tolerance(mu);
    let knots_ok = [n, n + 1]
        .iter()
        .all(|&k| ((mu[m + 1 + k] - mu[m + k]) - (mu[k] - mu[k - 1])).abs() <= tol);
    let zscale = z.iter().fold(1.0f64, |a, c| a.max(c.norm()));
    let z_wrapped = (0..n).all(|i| (z[m + 1 + i] - z[i]).norm() <= 1e-12 * zscale);
    Ok(ClosedReport {
        residuals: closed_residuals(&p, ps),
        knots_ok,
        z_wrapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::{build_mu, KnotVector, MuLayout};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kv(v: &[f64]) -> KnotVector {
        KnotVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_preimage_is_a_segment() {
        let mu = kv(&[0.0, 0.0, 1.0, 1.0]);
        let r0 = c(0.5, -1.0);
        let ph = ph_from_preimage(&[c(1.0, 0.0); 2], &mu, 1, Mode::Clamped, r0).unwrap();
        for t in [0.0, 0.25, 0.7, 1.0] {
            assert!((ph.curve().eval(t).unwrap() - (r0 + t)).norm() < 1e-14);
        }
        let sigma = ph.speed();
        assert!(sigma.coeffs().iter().all(|&s| (s - 1.0).abs() < 1e-14));
        let len = arc_length(&ph);
        assert!((len.total - 1.0).abs() < 1e-14);
        let f = frame_and_curvature(ph.preimage(), 0.3).unwrap();
        assert_eq!((f.tangent, f.normal, f.kappa), (c(1.0, 0.0), c(0.0, -1.0), 0.0));
    }

    #[test]
    fn rejects_zero_preimage() {
        let mu = kv(&[0.0, 0.0, 1.0, 1.0]);
        let err = ph_from_preimage(&[c(0.0, 0.0); 2], &mu, 1, Mode::Clamped, c(0.0, 0.0));
        assert!(matches!(err, Err(Error::DegenerateInput(_))));
        let err = ph_from_preimage(&[c(1.0, 0.0); 3], &mu, 1, Mode::Clamped, c(0.0, 0.0));
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn bezier_cubic_control_points() {
        let mu = kv(&[0.0, 0.0, 1.0, 1.0]);
        let z = [c(1.0, 0.5), c(-0.3, 2.0)];
        let ph = ph_from_preimage(&z, &mu, 1, Mode::Clamped, c(0.0, 0.0)).unwrap();
        let r = ph.control_points();
        let want = [
            c(0.0, 0.0),
            z[0] * z[0] / 3.0,
            z[0] * z[0] / 3.0 + z[0] * z[1] / 3.0,
            z[0] * z[0] / 3.0 + z[0] * z[1] / 3.0 + z[1] * z[1] / 3.0,
        ];
        for (a, b) in r.iter().zip(&want) {
            assert!((a - b).norm() < 1e-14);
        }
        let z = [c(1.0, 0.0), c(0.0, 1.0)];
        let ph = ph_from_preimage(&z, &mu, 1, Mode::Clamped, c(0.0, 0.0)).unwrap();
        assert!((arc_length(&ph).total - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn quintic_first_step() {
        let mu = build_mu(2, &[0.3, 1.1], MuLayout::Clamped { start: 0.0, end: 2.0 }).unwrap();
        let z = [c(1.0, 0.2), c(0.3, -0.4), c(-1.0, 0.5), c(0.2, 0.9), c(0.4, 0.1)];
        let r0 = c(1.0, 1.0);
        let ph = ph_from_preimage(&z, &mu, 2, Mode::Clamped, r0).unwrap();
        let r = ph.control_points();
        assert!((r[1] - (r0 + z[0] * z[0] * 0.3 / 5.0)).norm() < 1e-13);
    }

    #[test]
    fn clamped_conditions_hold_for_clamped_curves() {
        let mu = build_mu(2, &[0.4, 0.9, 1.5], MuLayout::Clamped { start: 0.0, end: 2.0 }).unwrap();
        let z = [
            c(1.0, 0.2),
            c(0.3, -0.4),
            c(-1.0, 0.5),
            c(0.2, 0.9),
            c(0.7, 0.7),
            c(-0.1, 1.2),
        ];
        let ph = ph_from_preimage(&z, &mu, 2, Mode::Clamped, c(0.0, 0.0)).unwrap();
        let rep = check_clamped(&ph);
        assert!(rep.max() < 1e-10, "{rep:?}");
        assert!(rep.alpha.is_none());
    }

    #[test]
    fn open_curves_report_end_conditions() {
        let mu = kv(&[0.0, 0.5, 1.2, 2.0, 2.3, 3.1, 4.0, 4.4]);
        let z = [c(1.0, 0.2), c(0.3, -0.4), c(-1.0, 0.5), c(0.2, 0.9), c(0.7, 0.7)];
        let ph = ph_from_preimage(&z, &mu, 2, Mode::Open, c(0.0, 0.0)).unwrap();
        let rep = check_clamped(&ph);
        assert!(rep.position_start > 1e-6);
        let (t0, t1) = ph.domain();
        let a = start_point_bernstein(&ph).unwrap();
        let b = end_point_bernstein(&ph).unwrap();
        assert!((a - ph.curve().eval(t0).unwrap()).norm() < 1e-12);
        assert!((b - ph.curve().eval(t1).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn alpha_vanishes_for_repeated_knot() {
        let mu = kv(&[0.0, 1.0, 1.0, 2.0, 3.0]);
        assert_eq!(bernstein_alpha(&mu, 2), 0.0);
        assert!((bernstein_alpha(&kv(&[0.0, 1.0, 3.0]), 1) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn closed_cubic_table_row() {
        let mu = build_mu(1, &[0.0, 0.7, 1.5], MuLayout::Closed).unwrap();
        let ps = derive_partitions(&mu, 1, Mode::Closed).unwrap();
        let z0 = c(0.8, -0.3);
        let z = [z0, z0 * c(-0.5, -(3f64.sqrt()) / 2.0), z0];
        let rep = check_closed(&z, &ps).unwrap();
        assert!(rep.max_residual() < 1e-10, "{rep:?}");
        assert!(rep.knots_ok && rep.z_wrapped);
    }

    #[test]
    fn closed_knot_flag() {
        let mu = build_mu(1, &[0.0, 0.7, 1.5], MuLayout::Closed).unwrap();
        let ps = derive_partitions(&mu, 1, Mode::Closed).unwrap();
        let mut flat = mu.flat().to_vec();
        flat[4] += 0.1;
        let ps2 = derive_partitions(&kv(&flat), 1, Mode::Open).unwrap();
        let z = [c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)];
        assert!(check_closed(&z, &ps).unwrap().knots_ok);
        assert!(check_closed(&z, &ps2).is_err());
    }

    #[test]
    fn translation_covariance() {
        let mu = kv(&[0.0, 0.0, 0.6, 1.0, 1.0]);
        let z = [c(1.0, 0.3), c(0.2, 1.0), c(-0.5, 0.5)];
        let ph = ph_from_preimage(&z, &mu, 1, Mode::Clamped, c(0.0, 0.0)).unwrap();
        let moved = ph.translated(c(2.0, -3.0)).unwrap();
        assert_eq!(arc_length(&ph).total, arc_length(&moved).total);
        let sigma = ph.speed();
        let o1 = offset(&ph, &sigma, 0.3).unwrap();
        let o2 = offset(&moved, &sigma, 0.3).unwrap();
        for t in [0.0, 0.3, 0.6, 0.99] {
            let d = o2.eval(t).unwrap() - o1.eval(t).unwrap();
            assert!((d - c(2.0, -3.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_distance_offset_is_the_curve() {
        let mu = kv(&[0.0, 0.0, 0.6, 1.0, 1.0]);
        let z = [c(1.0, 0.3), c(0.2, 1.0), c(-0.5, 0.5)];
        let ph = ph_from_preimage(&z, &mu, 1, Mode::Clamped, c(0.0, 0.0)).unwrap();
        let o = offset(&ph, &ph.speed(), 0.0).unwrap();
        for j in 0..=50 {
            let t = j as f64 / 50.0;
            assert!((o.eval(t).unwrap() - ph.curve().eval(t).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn offset_requires_regular_curve() {
        let mu = kv(&[0.0, 0.0, 1.0, 1.0]);
        let z = [c(1.0, 0.0), c(-1.0, 0.0)];
        let ph = ph_from_preimage(&z, &mu, 1, Mode::Clamped, c(0.0, 0.0)).unwrap();
        assert!(matches!(offset(&ph, &ph.speed(), 0.1), Err(Error::NonRegular { .. })));
    }
}
