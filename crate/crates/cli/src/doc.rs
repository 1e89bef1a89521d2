//! JSON documents read and written by the commands.

use crate::error::{CliError, CliResult};
use ph_bspline::Complex64;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub type Point = [f64; 2];

pub fn pt(c: Complex64) -> Point {
    [c.re, c.im]
}

pub fn cx(p: Point) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    General,
    Explicit,
}

/// Input of `construct`, echoed in every curve document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRequest {
    pub mode: String,
    pub n: usize,
    pub mu: Vec<f64>,
    pub z: Vec<Point>,
    #[serde(default)]
    pub r0: Point,
    #[serde(default)]
    pub engine: Engine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineOut<T> {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub coeffs: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcLengthOut {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveOut {
    /// Set to "explicit" when the closed-form tables produced the curve.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<String>,
    pub domain: [f64; 2],
    pub nu: Vec<f64>,
    pub rho: Vec<f64>,
    pub tau: Vec<f64>,
    /// Curve control points.
    pub r: Vec<Point>,
    /// Hodograph control points.
    pub p: Vec<Point>,
    pub sigma: SplineOut<f64>,
    pub arclength: ArcLengthOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetOut {
    pub h: f64,
    pub degree: usize,
    pub knots: Vec<f64>,
    pub numerator: Vec<Point>,
    pub weights: Vec<f64>,
    pub samples: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetResults {
    pub params: Vec<f64>,
    pub base: Vec<Point>,
    pub offsets: Vec<OffsetOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthAt {
    pub t: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcLengthResults {
    pub total: f64,
    pub arclength: ArcLengthOut,
    pub at: Vec<LengthAt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteRequest {
    pub p0: Point,
    pub p1: Point,
    pub d0: Point,
    pub d1: Point,
    pub k0: f64,
    pub k1: f64,
    #[serde(default = "half")]
    pub a: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionOut {
    pub sign_case: String,
    pub z: Vec<Point>,
    pub control_points: Vec<Point>,
    pub rabs: f64,
    pub bend: f64,
    pub residuals: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOut {
    pub sign_case: String,
    pub rotation: f64,
    pub invariants_a: [f64; 3],
    pub invariants_b: [f64; 3],
    pub kind_a: String,
    pub kind_b: String,
    pub feasible: bool,
    pub imaginary: Vec<String>,
    pub intersections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOut {
    pub sign_case: String,
    pub bbox: [f64; 4],
    pub segments: Vec<[Point; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteResults {
    pub solutions: Vec<SolutionOut>,
    pub feasibility: Vec<CaseOut>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub boundary: Vec<BoundaryOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<Q, R> {
    pub schema_version: u32,
    pub request: Q,
    pub results: R,
}

impl<Q, R> Document<Q, R> {
    pub fn new(request: Q, results: R) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            request,
            results,
        }
    }
}

/// Accepts either a bare curve request or any document whose request is one.
pub fn parse_curve_request(text: &str) -> CliResult<CurveRequest> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("request") {
        Some(r) => r.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| CliError::Input(format!("curve request: {e}")))
}

pub fn parse_hermite_request(text: &str) -> CliResult<HermiteRequest> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("request") {
        Some(r) => r.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| CliError::Input(format!("hermite problem: {e}")))
}
