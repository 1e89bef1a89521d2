//! Conic fixtures shared by the conic and acceptance suites.

use ph_bspline::hermite::Conic;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `s·R(x - x0)` applied to a conic given in canonical form.
pub fn moved(canon: Conic, rng: &mut ChaCha8Rng) -> Conic {
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    let (tx, ty) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let s = rng.gen_range(0.2..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (co, si) = (th.cos(), th.sin());
    // homogeneous substitution (1, x, y) -> T (1, x, y)
    let t = nalgebra::Matrix3::new(1.0, 0.0, 0.0, tx, co, -si, ty, si, co);
    let tinv = t.try_inverse().unwrap();
    Conic::from_matrix(&(tinv.transpose() * canon.matrix() * tinv * s))
}

/// Parameter range and map of one branch.
pub type Branch<'a> = (f64, f64, Box<dyn Fn(f64) -> (f64, f64) + 'a>);

/// A random ellipse or hyperbola with an explicit parametrisation.
pub struct Param {
    pub hyperbola: bool,
    pub center: (f64, f64),
    pub axes: (f64, f64),
    pub angle: f64,
}

impl Param {
    pub fn random(rng: &mut ChaCha8Rng) -> Param {
        Param {
            hyperbola: rng.gen_bool(0.5),
            center: (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            axes: (rng.gen_range(0.3..2.0), rng.gen_range(0.3..2.0)),
            angle: rng.gen_range(0.0..std::f64::consts::PI),
        }
    }

    pub fn conic(&self) -> Conic {
        let (a, b) = self.axes;
        let sb = if self.hyperbola { -1.0 } else { 1.0 };
        let canon = nalgebra::Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0 / (a * a), 0.0, 0.0, 0.0, sb / (b * b));
        let (co, si) = (self.angle.cos(), self.angle.sin());
        let t = nalgebra::Matrix3::new(1.0, 0.0, 0.0, self.center.0, co, -si, self.center.1, si, co);
        let ti = t.try_inverse().unwrap();
        Conic::from_matrix(&(ti.transpose() * canon * ti))
    }

    pub fn place(&self, x: f64, y: f64) -> (f64, f64) {
        let (co, si) = (self.angle.cos(), self.angle.sin());
        (self.center.0 + co * x - si * y, self.center.1 + si * x + co * y)
    }

    /// Parameter of a point on a hyperbola branch.
    pub fn parameter(&self, p: (f64, f64)) -> f64 {
        let (co, si) = (self.angle.cos(), self.angle.sin());
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        ((-si * dx + co * dy) / self.axes.1).asinh()
    }

    /// Branches as functions of one parameter, with their parameter ranges.
    pub fn branches(&self) -> Vec<Branch<'_>> {
        let (a, b) = self.axes;
        if self.hyperbola {
            vec![
                (
                    -SPAN,
                    SPAN,
                    Box::new(move |t: f64| self.place(a * t.cosh(), b * t.sinh())),
                ),
                (
                    -SPAN,
                    SPAN,
                    Box::new(move |t: f64| self.place(-a * t.cosh(), b * t.sinh())),
                ),
            ]
        } else {
            vec![(
                0.0,
                std::f64::consts::TAU,
                Box::new(move |t: f64| self.place(a * t.cos(), b * t.sin())),
            )]
        }
    }
}

pub const SPAN: f64 = 6.0;

/// Sign changes of `B` along each branch of `A`, refined by bisection. `None` when a
/// near-tangency makes the count ambiguous.
pub fn grid_oracle(pa: &Param, b: &Conic) -> Option<Vec<(f64, f64)>> {
    let n = 20000;
    let mut out = Vec::new();
    for (lo, hi, f) in pa.branches() {
        let g = |t: f64| {
            let (x, y) = f(t);
            b.eval(x, y) / (1.0 + x * x + y * y)
        };
        let ts: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let gs: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
        for i in 0..n {
            if (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
                let (mut l, mut r) = (ts[i], ts[i + 1]);
                for _ in 0..80 {
                    let m = 0.5 * (l + r);
                    if (g(m) < 0.0) == (gs[i] < 0.0) {
                        l = m;
                    } else {
                        r = m;
                    }
                }
                out.push(f(0.5 * (l + r)));
            } else if i > 0 && gs[i].abs() < gs[i - 1].abs() && gs[i].abs() < gs[i + 1].abs() && gs[i].abs() < 1e-5 {
                return None;
            }
        }
    }
    Some(out)
}
