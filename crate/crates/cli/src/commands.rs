use crate::doc::*;
use crate::error::{CliError, CliResult};
use crate::svg::{Figure, Marker, PALETTE};
use ph_bspline::explicit::ExplicitCurve;
use ph_bspline::hermite::{hermite_report, HermiteReport};
use ph_bspline::{
    arc_length, derive_partitions, explicit_chi, explicit_curve, explicit_offset, feasibility, offset,
    ph_from_preimage, solve_hermite, Complex64, Error, ExplicitCase, HermiteProblem, KnotVector, Mode, PHCurve,
    RationalSpline, SignCase,
};

pub struct Built {
    pub ph: PHCurve,
    pub explicit: Option<(ExplicitCase, ExplicitCurve)>,
}

pub fn parse_mode(s: &str) -> CliResult<Mode> {
    match s.to_ascii_lowercase().as_str() {
        "open" => Ok(Mode::Open),
        "clamped" => Ok(Mode::Clamped),
        "closed" => Ok(Mode::Closed),
        other => Err(CliError::Input(format!("unknown mode '{other}'"))),
    }
}

pub fn build(req: &CurveRequest) -> CliResult<Built> {
    let mode = parse_mode(&req.mode)?;
    let mu = KnotVector::new(req.mu.clone())?;
    let z: Vec<Complex64> = req.z.iter().map(|&p| cx(p)).collect();
    let r0 = cx(req.r0);
    match req.engine {
        Engine::General => Ok(Built {
            ph: ph_from_preimage(&z, &mu, req.n, mode, r0)?,
            explicit: None,
        }),
        Engine::Explicit => {
            let ps = derive_partitions(&mu, req.n, mode)?;
            let case = ExplicitCase::new(ps.clone())?;
            let ex = explicit_curve(&case, &z, r0)?;
            let ph = PHCurve::from_tensor(&z, ps, explicit_chi(&case), r0)?;
            Ok(Built {
                ph,
                explicit: Some((case, ex)),
            })
        }
    }
}

pub fn curve_out(b: &Built) -> CurveOut {
    let ps = b.ph.partitions();
    let n = ps.n();
    let (lo, hi) = ps.domain();
    let (r, p, sigma, l, total) = match &b.explicit {
        Some((_, ex)) => (ex.r.clone(), ex.p.clone(), ex.sigma.clone(), ex.l.clone(), ex.length),
        None => {
            let al = arc_length(&b.ph);
            (
                b.ph.control_points().to_vec(),
                b.ph.hodograph().coeffs().to_vec(),
                b.ph.speed().coeffs().to_vec(),
                al.spline.coeffs().to_vec(),
                al.total,
            )
        }
    };
    CurveOut {
        source: b.explicit.as_ref().map(|_| "explicit".to_string()),
        domain: [lo, hi],
        nu: ps.nu().flat().to_vec(),
        rho: ps.rho().flat().to_vec(),
        tau: ps.tau().flat().to_vec(),
        r: r.into_iter().map(pt).collect(),
        p: p.into_iter().map(pt).collect(),
        sigma: SplineOut {
            degree: 2 * n,
            knots: ps.nu().flat().to_vec(),
            coeffs: sigma,
        },
        arclength: ArcLengthOut {
            degree: 2 * n + 1,
            knots: ps.rho().flat().to_vec(),
            coeffs: l,
            total,
        },
    }
}

pub fn params(domain: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = domain;
    let k = count.max(2) - 1;
    (0..=k)
        .map(|i| {
            if i == k {
                hi
            } else {
                lo + (hi - lo) * i as f64 / k as f64
            }
        })
        .collect()
}

pub fn sample_curve(ph: &PHCurve, ts: &[f64]) -> Vec<Point> {
    ts.iter().map(|&t| pt(ph.curve().value(t))).collect()
}

pub fn construct(req: &CurveRequest) -> CliResult<(Document<CurveRequest, CurveOut>, Built)> {
    let built = build(req)?;
    Ok((Document::new(req.clone(), curve_out(&built)), built))
}

pub fn construct_svg(b: &Built, samples: usize) -> String {
    let mut fig = Figure::default();
    fig.dashed(b.ph.control_points().iter().map(|&c| pt(c)).collect(), "#888888", 1.0);
    fig.polyline(sample_curve(&b.ph, &params(b.ph.domain(), samples)), PALETTE[0], 2.0);
    fig.render()
}

fn offset_spline(b: &Built, h: f64) -> CliResult<RationalSpline> {
    Ok(match &b.explicit {
        Some((case, ex)) => explicit_offset(case, ex, h)?,
        None => offset(&b.ph, &b.ph.speed(), h)?,
    })
}

pub fn offsets(b: &Built, hs: &[f64], samples: usize) -> CliResult<OffsetResults> {
    let ts = params(b.ph.domain(), samples);
    let mut out = Vec::with_capacity(hs.len());
    for &h in hs {
        let rs = offset_spline(b, h)?;
        let pts = ts
            .iter()
            .map(|&t| rs.eval(t).map(pt))
            .collect::<Result<Vec<_>, Error>>()?;
        out.push(OffsetOut {
            h,
            degree: rs.degree(),
            knots: rs.knots().flat().to_vec(),
            numerator: rs.numerator().coeffs().iter().map(|&c| pt(c)).collect(),
            weights: rs.weights().coeffs().to_vec(),
            samples: pts,
        });
    }
    Ok(OffsetResults {
        base: sample_curve(&b.ph, &ts),
        params: ts,
        offsets: out,
    })
}

pub fn offset_svg(res: &OffsetResults) -> String {
    let mut fig = Figure::default();
    fig.polyline(res.base.clone(), PALETTE[0], 2.0);
    for (i, o) in res.offsets.iter().enumerate() {
        fig.polyline(o.samples.clone(), PALETTE[1 + i % (PALETTE.len() - 1)], 1.0);
    }
    fig.render()
}

pub fn arclength(b: &Built, at: &[f64]) -> CliResult<ArcLengthResults> {
    let al = arc_length(&b.ph);
    let out = curve_out(b).arclength;
    let mut values = Vec::with_capacity(at.len());
    for &t in at {
        values.push(LengthAt { t, s: al.at(t)? });
    }
    Ok(ArcLengthResults {
        total: out.total,
        arclength: out,
        at: values,
    })
}

pub fn hermite_problem(req: &HermiteRequest) -> CliResult<HermiteProblem> {
    Ok(HermiteProblem::new(
        cx(req.p0),
        cx(req.p1),
        cx(req.d0),
        cx(req.d1),
        req.k0,
        req.k1,
        req.a,
    )?)
}

fn case_out(report: &HermiteReport) -> Vec<CaseOut> {
    report
        .cases
        .iter()
        .map(|c| CaseOut {
            sign_case: c.sign_case.name().to_string(),
            rotation: c.rotation,
            invariants_a: c.invariants_a,
            invariants_b: c.invariants_b,
            kind_a: format!("{:?}", c.kind_a),
            kind_b: format!("{:?}", c.kind_b),
            feasible: c.feasible,
            imaginary: c.imaginary().into_iter().map(String::from).collect(),
            intersections: c.intersections,
        })
        .collect()
}

pub struct HermiteRun {
    pub results: HermiteResults,
    pub curves: Vec<PHCurve>,
}

pub fn hermite(req: &HermiteRequest, bbox: Option<[f64; 4]>, resolution: usize) -> CliResult<HermiteRun> {
    let pr = hermite_problem(req)?;
    let (sols, report) = match solve_hermite(&pr) {
        Ok(s) => (s, hermite_report(&pr)?),
        Err(Error::NoSolutions(report)) => (Vec::new(), *report),
        Err(e) => return Err(e.into()),
    };
    let mut boundary = Vec::new();
    if let Some(b) = bbox {
        for sign in SignCase::ALL {
            let f = feasibility(&pr, sign)?;
            boundary.push(BoundaryOut {
                sign_case: sign.name().to_string(),
                bbox: b,
                segments: f
                    .boundary(b, resolution)
                    .into_iter()
                    .map(|[p, q]| [[p.0, p.1], [q.0, q.1]])
                    .collect(),
            });
        }
    }
    let solutions = sols
        .iter()
        .map(|s| SolutionOut {
            sign_case: s.sign_case.name().to_string(),
            z: s.z.iter().map(|&c| pt(c)).collect(),
            control_points: s.control_points.iter().map(|&c| pt(c)).collect(),
            rabs: s.rabs,
            bend: s.bend,
            residuals: s.residuals,
        })
        .collect();
    Ok(HermiteRun {
        results: HermiteResults {
            solutions,
            feasibility: case_out(&report),
            boundary,
        },
        curves: sols.into_iter().map(|s| s.curve).collect(),
    })
}

pub fn hermite_svg(req: &HermiteRequest, run: &HermiteRun, samples: usize) -> String {
    let mut fig = Figure::default();
    for (i, ph) in run.curves.iter().enumerate() {
        let w = if i == 0 { 2.0 } else { 1.0 };
        fig.polyline(
            sample_curve(ph, &params(ph.domain(), samples)),
            PALETTE[i % PALETTE.len()],
            w,
        );
    }
    for (p, d) in [(req.p0, req.d0), (req.p1, req.d1)] {
        fig.markers.push(Marker {
            at: p,
            dir: Some(d),
            color: "#000000",
        });
    }
    fig.render()
}
