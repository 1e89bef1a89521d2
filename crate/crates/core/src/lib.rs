//! Planar Pythagorean-hodograph B-spline curves.
//!
//! A PH curve is the integral of the square of a complex B-spline `z(t)`:
//! `r'(t) = z(t)²`. Its parametric speed `σ(t) = |z(t)|²` is again a spline,
//! which gives exact arc lengths and rational offsets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod bspline;
pub mod error;
pub mod explicit;
pub mod hermite;
pub mod knots;
pub mod ph;
pub mod product;
pub mod quadrature;

pub use banded::{cholesky_banded, BandedCholesky, BandedSymMatrix};
pub use bspline::{basis_eval, ComplexSpline, RealSpline, Spline};
pub use error::{Error, Result};
pub use explicit::{
    closed_cubic_preimage, closed_preimage_newton, explicit_chi, explicit_curve, explicit_offset, explicit_zeta,
    ClosedPreimageData, ExplicitCase, ExplicitCurve, NewtonSolution, PreimageVariant,
};
pub use hermite::{
    classify_conic, curve_quality, feasibility, intersect_conics, pencil_degenerate_lambdas, solve_hermite, Conic,
    ConicKind, HermiteProblem, HermiteSolution, SignCase,
};
pub use knots::{
    build_mu, derive_partitions, derive_partitions_with, ExtraKnots, KnotVector, Mode, MuLayout, PartitionSet,
};
pub use num_complex::Complex64;
pub use ph::{
    arc_length, check_clamped, check_closed, frame_and_curvature, offset, offset_with, parametric_speed,
    ph_from_preimage, ArcLength, ClampedReport, ClosedReport, Frame, PHCurve, RationalSpline,
};
pub use product::{assemble_gramian, inner_product, solve_chi, solve_zeta, ProductTensor};
