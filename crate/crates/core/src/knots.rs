//! Knot vectors and the four knot partitions of a PH B-spline construction.
//!
//! A preimage `z(t)` of degree `n` lives on `mu`. Its square, the hodograph,
//! lives on `nu` (degree `2n`), the integrated curve on `rho` (degree `2n+1`)
//! and offset numerators/weights on `tau` (degree `4n+1`).

use crate::error::{Error, Result};
use std::ops::Index;

/// How the preimage knot vector is structured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Open,
    Clamped,
    Closed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Open => "open",
            Mode::Clamped => "clamped",
            Mode::Closed => "closed",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(Mode::Open),
            "clamped" => Ok(Mode::Clamped),
            "closed" => Ok(Mode::Closed),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// A non-decreasing knot sequence stored as `(value, multiplicity)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    breaks: Vec<(f64, usize)>,
    flat: Vec<f64>,
}

impl KnotVector {
    /// Builds a knot vector from its flat form.
    pub fn new(flat: Vec<f64>) -> Result<Self> {
        if flat.len() < 2 {
            return Err(Error::TooFewKnots(format!("{} knots", flat.len())));
        }
        let mut breaks: Vec<(f64, usize)> = Vec::new();
        for (i, &t) in flat.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidInput(format!("knot {i} is not finite")));
            }
            match breaks.last_mut() {
                Some((v, m)) if *v == t => *m += 1,
                Some((v, _)) if *v > t => return Err(Error::NonIncreasing(i)),
                _ => breaks.push((t, 1)),
            }
        }
        if breaks.len() < 2 {
            return Err(Error::EmptyDomain);
        }
        Ok(KnotVector { breaks, flat })
    }

    /// Builds a knot vector from distinct values and their multiplicities.
    pub fn from_breaks(breaks: &[(f64, usize)]) -> Result<Self> {
        let mut flat = Vec::new();
        for &(v, m) in breaks {
            flat.extend(std::iter::repeat_n(v, m));
        }
        Self::new(flat)
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn breaks(&self) -> &[(f64, usize)] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.flat[0]
    }

    pub fn last(&self) -> f64 {
        self.flat[self.flat.len() - 1]
    }

    /// Multiplicity of `value` (exact comparison); zero if absent.
    pub fn multiplicity(&self, value: f64) -> usize {
        self.breaks.iter().find(|(v, _)| *v == value).map_or(0, |&(_, m)| m)
    }

    pub fn max_multiplicity(&self) -> usize {
        self.breaks.iter().map(|&(_, m)| m).max().unwrap_or(0)
    }

    /// Rejects multiplicities above `limit`.
    pub fn check_multiplicity(&self, limit: usize) -> Result<()> {
        for &(value, mult) in &self.breaks {
            if mult > limit {
                return Err(Error::MultiplicityTooHigh { value, mult, limit });
            }
        }
        Ok(())
    }

    /// Number of basis functions of the given degree.
    pub fn basis_count(&self, degree: usize) -> usize {
        self.flat.len().saturating_sub(degree + 1)
    }
}

impl Index<usize> for KnotVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.flat[i]
    }
}

/// Structure requested from [`build_mu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuLayout {
    /// The given knots are used verbatim.
    Open,
    /// End knots of multiplicity `n+1` at `start` and `end` around the interior.
    Clamped { start: f64, end: f64 },
    /// The given knots form one period `t_0..t_{m+1}`; `2n` spans are appended periodically.
    Closed,
}

fn strictly_increasing(knots: &[f64]) -> Result<()> {
    for (i, w) in knots.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            return Err(Error::NonIncreasing(i + 1));
        }
    }
    if let Some(i) = knots.iter().position(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(format!("knot {i} is not finite")));
    }
    Ok(())
}

/// Builds the preimage knot vector `mu` for a degree-`n` preimage.
pub fn build_mu(n: usize, knots: &[f64], layout: MuLayout) -> Result<KnotVector> {
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    strictly_increasing(knots)?;
    match layout {
        MuLayout::Open => {
            if knots.len() < 2 * n + 2 {
                return Err(Error::TooFewKnots(format!(
                    "open mode needs at least {} knots",
                    2 * n + 2
                )));
            }
            KnotVector::new(knots.to_vec())
        }
        MuLayout::Clamped { start, end } => {
            if !(start < end) {
                return Err(Error::NonIncreasing(0));
            }
            if knots.first().is_some_and(|&t| t <= start) || knots.last().is_some_and(|&t| t >= end) {
                return Err(Error::NonIncreasing(0));
            }
            let mut breaks = vec![(start, n + 1)];
            breaks.extend(knots.iter().map(|&t| (t, 1)));
            breaks.push((end, n + 1));
            KnotVector::from_breaks(&breaks)
        }
        MuLayout::Closed => {
            if knots.len() < 3 {
                return Err(Error::TooFewKnots(
                    "closed mode needs a period of at least 3 knots".into(),
                ));
            }
            let period = knots.len() - 1;
            let spans: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
            let mut flat = knots.to_vec();
            for j in 0..2 * n {
                let last = flat[flat.len() - 1];
                flat.push(last + spans[j % period]);
            }
            KnotVector::new(flat)
        }
    }
}

/// How the two extra knots of `rho` and `tau` are chosen in open and closed mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ExtraKnots {
    /// `t_{-1} = 2 t_0 - t_1` and `t_{p+n+2} = 2 t_{p+n+1} - t_{p+n}`.
    #[default]
    Mirror,
    /// Caller supplied values; must lie strictly outside `mu`.
    Explicit(f64, f64),
}

/// Tolerance used when comparing mirrored knot spans of closed knot vectors.
pub fn span_tolerance(mu: &KnotVector) -> f64 {
    let scale = mu.first().abs().max(mu.last().abs()).max(mu.last() - mu.first());
    1e-12 * scale.max(1.0)
}

/// All knot partitions used by the construction together with index bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSet {
    mu: KnotVector,
    nu: KnotVector,
    rho: KnotVector,
    tau: KnotVector,
    n: usize,
    mode: Mode,
    p: usize,
    q: usize,
    w: usize,
    m: usize,
}

impl PartitionSet {
    pub fn mu(&self) -> &KnotVector {
        &self.mu
    }
    pub fn nu(&self) -> &KnotVector {
        &self.nu
    }
    pub fn rho(&self) -> &KnotVector {
        &self.rho
    }
    pub fn tau(&self) -> &KnotVector {
        &self.tau
    }
    /// Degree of the preimage.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    /// Highest preimage coefficient index.
    pub fn p(&self) -> usize {
        self.p
    }
    /// Highest hodograph coefficient index.
    pub fn q(&self) -> usize {
        self.q
    }
    /// Highest offset coefficient index.
    pub fn w(&self) -> usize {
        self.w
    }
    /// Segment parameter `m` (equal to `p` except in closed mode, where `p = m + n`).
    pub fn m(&self) -> usize {
        self.m
    }
    /// Parameter interval `[t_n, t_{p+1}]` on which the curve is defined.
    pub fn domain(&self) -> (f64, f64) {
        (self.mu[self.n], self.mu[self.p + 1])
    }
}

/// Derives `nu`, `rho` and `tau` from `mu` using mirrored extra knots.
pub fn derive_partitions(mu: &KnotVector, n: usize, mode: Mode) -> Result<PartitionSet> {
    derive_partitions_with(mu, n, mode, ExtraKnots::Mirror)
}

/// Derives all partitions, choosing the extra knots of open and closed mode as requested.
pub fn derive_partitions_with(mu: &KnotVector, n: usize, mode: Mode, extra: ExtraKnots) -> Result<PartitionSet> {
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    let br = mu.breaks();
    let nb = br.len();
    let p = mu
        .len()
        .checked_sub(n + 2)
        .ok_or_else(|| Error::TooFewKnots(format!("{} knots for degree {n}", mu.len())))?;
    match mode {
        Mode::Clamped => {
            if br[0].1 != n + 1 || br[nb - 1].1 != n + 1 {
                return Err(Error::ModeMismatch(format!("clamped ends need multiplicity {}", n + 1)));
            }
            if br[1..nb - 1].iter().any(|&(_, m)| m != 1) {
                return Err(Error::ModeMismatch("clamped interior knots must be simple".into()));
            }
            let m = p;
            let mut nu = vec![(br[0].0, 2 * n + 1)];
            let mut rho = vec![(br[0].0, 2 * n + 2)];
            let mut tau = vec![(br[0].0, 4 * n + 2)];
            for &(v, _) in &br[1..nb - 1] {
                nu.push((v, n + 1));
                rho.push((v, n + 1));
                tau.push((v, 3 * n + 2));
            }
            nu.push((br[nb - 1].0, 2 * n + 1));
            rho.push((br[nb - 1].0, 2 * n + 2));
            tau.push((br[nb - 1].0, 4 * n + 2));
            Ok(PartitionSet {
                mu: mu.clone(),
                nu: KnotVector::from_breaks(&nu)?,
                rho: KnotVector::from_breaks(&rho)?,
                tau: KnotVector::from_breaks(&tau)?,
                n,
                mode,
                p,
                q: 2 * n + (n + 1) * (m - n),
                w: 4 * n + 1 + (m - n) * (3 * n + 2),
                m,
            })
        }
        Mode::Open | Mode::Closed => {
            if br.iter().any(|&(_, m)| m != 1) {
                return Err(Error::ModeMismatch(format!("{} mode needs simple knots", mode.name())));
            }
            if mu.len() < 2 * n + 2 {
                return Err(Error::TooFewKnots(format!(
                    "need at least {} knots for degree {n}",
                    2 * n + 2
                )));
            }
            let m = if mode == Mode::Closed {
                let m = p
                    .checked_sub(n)
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| Error::TooFewKnots(format!("closed mode needs at least {} knots", 3 * n + 3)))?;
                let tol = span_tolerance(mu);
                for k in [n, n + 1] {
                    let lhs = mu[m + 1 + k] - mu[m + k];
                    let rhs = mu[k] - mu[k - 1];
                    if (lhs - rhs).abs() > tol {
                        return Err(Error::ModeMismatch(format!(
                            "closed knot spans differ at k={k}: {lhs} vs {rhs}"
                        )));
                    }
                }
                m
            } else {
                p
            };
            let (lo, hi) = match extra {
                ExtraKnots::Mirror => {
                    let l = mu.len();
                    (2.0 * mu[0] - mu[1], 2.0 * mu[l - 1] - mu[l - 2])
                }
                ExtraKnots::Explicit(lo, hi) => (lo, hi),
            };
            if !(lo < mu.first() && hi > mu.last()) {
                return Err(Error::InvalidInput("extra knots must lie outside mu".into()));
            }
            let mut nu = Vec::with_capacity(nb);
            let mut tau = vec![(lo, 2 * n + 1)];
            for &(v, _) in br {
                nu.push((v, n + 1));
                tau.push((v, 3 * n + 2));
            }
            tau.push((hi, 2 * n + 1));
            let mut rho = vec![(lo, 1)];
            rho.extend_from_slice(&nu);
            rho.push((hi, 1));
            Ok(PartitionSet {
                mu: mu.clone(),
                nu: KnotVector::from_breaks(&nu)?,
                rho: KnotVector::from_breaks(&rho)?,
                tau: KnotVector::from_breaks(&tau)?,
                n,
                mode,
                p,
                q: (n + 1) * (p + n),
                w: (3 * n + 2) * (p + n + 2) - 1,
                m,
            })
        }
    }
}
