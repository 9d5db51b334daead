//! Open triangles: comparison triangles in the model, thinness, gluing into
//! generalized open triangles, and verification of the comparison
//! inequalities.
//!
//! Angles at the vertices are measured against the downward vertical, the
//! direction of the segment realizing the distance to the boundary.

mod glue;
mod report;
mod shorten;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{connect, jacobi_first_zero, GeodesicPath, GeodesicState, ModelPoint};
use crate::model::{miss_residual, shooting_roots};
use crate::tolerance::{DISTANCE, INTEGRATOR_RTOL};
use crate::warping::WarpingFunction;

pub use glue::{glue_generalized_triangle, glue_generalized_triangle_with, GeneralizedOpenTriangle, Scaffold, TrianglePiece};
pub use report::{verify_toponogov, Check, ComparisonModel, ComparisonReport};
pub use shorten::{shortest_arc_in_domain, ShortestArc, MAX_SWEEPS};

/// Side lengths (and optionally angles and foot gap) of an open triangle
/// `OT(∂X, p, q)` measured on some surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleMeasurements {
    /// `d(∂X, p)`.
    pub a: f64,
    /// `d(p, q)`.
    pub b: f64,
    /// `d(∂X, q)`.
    pub c: f64,
    pub angle_p: Option<f64>,
    pub angle_q: Option<f64>,
    /// Distance between the feet of the two boundary segments.
    pub footgap: Option<f64>,
}

impl TriangleMeasurements {
    /// Check `a, c > 0`, `b > 0` and `|c - a| <= b`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0) {
            return Err(Error::Precondition(format!("vertices must lie off the boundary (a = {a}, c = {c})")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Precondition(format!("side b must be positive, got {b}")));
        }
        if (c - a).abs() > b * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!("|c - a| = {} exceeds b = {b}", (c - a).abs())));
        }
        Ok(TriangleMeasurements { a, b, c, angle_p: None, angle_q: None, footgap: None })
    }

    pub fn with_angles(mut self, angle_p: f64, angle_q: f64) -> Self {
        self.angle_p = Some(angle_p);
        self.angle_q = Some(angle_q);
        self
    }

    pub fn with_footgap(mut self, footgap: f64) -> Self {
        self.footgap = Some(footgap);
        self
    }
}

/// Angle at the start of `path` against the downward vertical.
pub fn angle_at_start(path: &GeodesicPath) -> f64 {
    PI - path.start().angle.abs()
}

/// Angle at the end of `path` between the reversed tangent and the downward
/// vertical.
pub fn angle_at_end(path: &GeodesicPath) -> f64 {
    path.end().angle.abs()
}

/// A comparison triangle in the model: `p̃ = (a, 0)`, `q̃ = (c, ỹ)` with
/// `ỹ > 0`, joined by a minimal geodesic of length `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOpenTriangle {
    pub p: ModelPoint,
    pub q: ModelPoint,
    pub opposite_side: GeodesicPath,
    pub angle_p: f64,
    pub angle_q: f64,
    /// Model distance between the feet `(0, 0)` and `(0, ỹ)`.
    pub footgap: f64,
    /// `ỹ`-coordinates of the two vertical sides.
    pub feet: (f64, f64),
    /// Initial angles of other geodesics from `p̃` of length `b` ending at
    /// height `c`, discarded because they are longer or not minimal.
    pub other_solutions: Vec<f64>,
}

/// Build the model triangle with the measured side lengths `(a, b, c)`.
///
/// Shoots from `p̃ = (a, 0)` over initial angles for an arc of length `b`
/// ending at height `c`. Among the solutions only arcs that are minimal in
/// the model qualify; the first of them is kept.
pub fn solve_comparison_triangle(w: &WarpingFunction, t: &TriangleMeasurements) -> Result<ModelOpenTriangle> {
    let (a, b, c) = (t.a, t.b, t.c);
    TriangleMeasurements::new(a, b, c)?;
    for h in [a, c] {
        if h > w.domain_max() {
            return Err(Error::Domain { t: h, domain_max: w.domain_max() });
        }
    }
    let not_realizable = |reason: String| Error::NotRealizable { a, b, c, reason };
    let start = |theta: f64| GeodesicState::new(a, 0.0, theta);
    let residual = |theta: f64, rtol: f64| -> f64 {
        match crate::model::trace_length(w, &start(theta), b, rtol) {
            Ok(tr) => miss_residual(&tr, c),
            Err(_) => f64::NAN,
        }
    };
    let roots = shooting_roots(
        &crate::model::angle_nodes(),
        |th| residual(th, crate::tolerance::SCAN_RTOL),
        |th| Some(residual(th, INTEGRATOR_RTOL)).filter(|v| v.is_finite()),
    );
    if roots.is_empty() {
        return Err(not_realizable("no shooting bracket".into()));
    }
    let mut chosen = None;
    let mut others = Vec::new();
    for theta in roots {
        let Ok(path) = crate::model::integrate_geodesic(w, &start(theta), b) else { continue };
        let end = path.end().point;
        if path.truncated || (end.x - c).abs() > DISTANCE || end.y <= 0.0 {
            others.push(theta);
            continue;
        }
        if chosen.is_some() {
            others.push(theta);
            continue;
        }
        match connect(w, path.start().point, end) {
            Ok(conn) if (conn.length - b).abs() <= 1e-7 => chosen = Some(path),
            _ => others.push(theta),
        }
    }
    let side = chosen.ok_or_else(|| not_realizable("no minimal arc of the requested length".into()))?;
    let q = side.end().point;
    let (footgap, _) = crate::model::model_distance(w, ModelPoint::new(0.0, 0.0), ModelPoint::new(0.0, q.y))?;
    Ok(ModelOpenTriangle {
        p: side.start().point,
        q,
        angle_p: angle_at_start(&side),
        angle_q: angle_at_end(&side),
        footgap,
        feet: (0.0, q.y),
        opposite_side: side,
        other_solutions: others,
    })
}

/// As [`solve_comparison_triangle`], rejecting triangles whose foot gap
/// reaches the width `theta0` of the sector assumed free of cut pairs.
pub fn solve_comparison_triangle_in_sector(
    w: &WarpingFunction,
    t: &TriangleMeasurements,
    theta0: f64,
) -> Result<ModelOpenTriangle> {
    let tri = solve_comparison_triangle(w, t)?;
    if tri.footgap >= theta0 {
        return Err(Error::Precondition(format!(
            "foot gap {} is not inside the sector of width {theta0}",
            tri.footgap
        )));
    }
    Ok(tri)
}

/// Lower bound for the injectivity radius of the model at a given height.
pub trait InjectivityProbe {
    fn lower_bound(&self, w: &WarpingFunction, height: f64) -> f64;
}

/// `π / sqrt(sup G)` over the whole truncated domain, `+∞` when `G <= 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurvatureBoundProbe;

impl InjectivityProbe for CurvatureBoundProbe {
    fn lower_bound(&self, w: &WarpingFunction, _height: f64) -> f64 {
        let n = 2000;
        let sup = (0..=n)
            .map(|i| w.curvature_unchecked(w.domain_max() * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        if sup <= 0.0 {
            f64::INFINITY
        } else {
            PI / sup.sqrt()
        }
    }
}

/// Shortest first conjugate distance over a fan of `directions` geodesics
/// from the point at the given height, searched up to `reach`.
#[derive(Debug, Clone, Copy)]
pub struct JacobiFanProbe {
    pub directions: usize,
    pub reach: f64,
}

impl Default for JacobiFanProbe {
    fn default() -> Self {
        JacobiFanProbe { directions: 16, reach: 10.0 }
    }
}

impl InjectivityProbe for JacobiFanProbe {
    fn lower_bound(&self, w: &WarpingFunction, height: f64) -> f64 {
        (0..self.directions)
            .map(|k| {
                let theta = -PI + 2.0 * PI * (k as f64 + 0.5) / self.directions as f64;
                jacobi_first_zero(w, &GeodesicState::new(height, 0.0, theta), self.reach)
                    .ok()
                    .flatten()
                    .unwrap_or(f64::INFINITY)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Result of a thinness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thinness {
    pub thin: bool,
    /// Smallest injectivity bound over the side heights.
    pub bound: f64,
    /// `bound - b`.
    pub margin: f64,
}

/// A triangle is thin when `b` stays below the injectivity bound of the
/// model at every height `d(∂X, γ(s))` sampled along its opposite side.
pub fn validate_thinness(
    w: &WarpingFunction,
    t: &TriangleMeasurements,
    side_heights: &[f64],
    probe: &dyn InjectivityProbe,
) -> Result<Thinness> {
    if !(t.b > 0.0) {
        return Err(Error::Precondition(format!("side b must be positive, got {}", t.b)));
    }
    if side_heights.is_empty() {
        return Err(Error::Precondition("no side heights sampled".into()));
    }
    let bound = side_heights.iter().map(|&h| probe.lower_bound(w, h)).fold(f64::INFINITY, f64::min);
    Ok(Thinness { thin: t.b < bound, bound, margin: bound - t.b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn flat_rectangle() {
        let w = WarpingFunction::flat();
        let tri = solve_comparison_triangle(&w, &TriangleMeasurements::new(1.0, 2.0, 1.0).unwrap()).unwrap();
        close(tri.footgap, 2.0, 1e-9);
        close(tri.angle_p, FRAC_PI_2, 1e-9);
        close(tri.angle_q, FRAC_PI_2, 1e-9);
    }

    #[test]
    fn flat_slanted() {
        let w = WarpingFunction::flat();
        let tri = solve_comparison_triangle(&w, &TriangleMeasurements::new(1.0, 2f64.sqrt(), 2.0).unwrap()).unwrap();
        close(tri.angle_p, 3.0 * FRAC_PI_4, 1e-9);
        close(tri.angle_q, FRAC_PI_4, 1e-9);
        close(tri.footgap, 1.0, 1e-9);
        close(tri.q.x, 2.0, 1e-8);
    }

    #[test]
    fn hyperbolic_symmetric() {
        let w = WarpingFunction::cosh();
        let tri = solve_comparison_triangle(&w, &TriangleMeasurements::new(1.0, 2.0, 1.0).unwrap()).unwrap();
        close(tri.angle_p, tri.angle_q, 1e-8);
        assert!(tri.angle_p < FRAC_PI_2);
        // cosh b = cosh² a cosh ỹ - sinh² a fixes the foot gap
        let y = ((2f64.cosh() + 1f64.sinh().powi(2)) / 1f64.cosh().powi(2)).acosh();
        close(tri.footgap, y, 1e-8);
    }

    #[test]
    fn unrealizable_triangle() {
        let w = WarpingFunction::cos_truncated(1.5).unwrap();
        let err = solve_comparison_triangle(&w, &TriangleMeasurements::new(1.4, 20.0, 1.4).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotRealizable { .. }), "{err}");
    }

    #[test]
    fn measurement_preconditions() {
        assert!(TriangleMeasurements::new(0.0, 1.0, 1.0).is_err());
        assert!(TriangleMeasurements::new(1.0, 0.0, 1.0).is_err());
        assert!(TriangleMeasurements::new(1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn thinness_probes() {
        let t = TriangleMeasurements::new(1.0, 4.0, 1.0).unwrap();
        let flat = validate_thinness(&WarpingFunction::flat(), &t, &[1.0, 1.2], &CurvatureBoundProbe).unwrap();
        assert!(flat.thin && flat.bound.is_infinite());
        let cos = WarpingFunction::cos_truncated(1.5).unwrap();
        let r = validate_thinness(&cos, &t, &[1.0, 1.2], &CurvatureBoundProbe).unwrap();
        assert!(!r.thin);
        close(r.bound, PI, 1e-9);
        let r = validate_thinness(&cos, &t, &[1.0], &JacobiFanProbe::default()).unwrap();
        assert!(!r.thin && r.bound < 4.0);
        let mut bad = t;
        bad.b = 0.0;
        assert!(validate_thinness(&cos, &bad, &[1.0], &CurvatureBoundProbe).is_err());
    }

    fn piece(a: f64, b: f64, c: f64) -> TrianglePiece {
        TrianglePiece::new(TriangleMeasurements::new(a, b, c).unwrap(), vec![a, c])
    }

    #[test]
    fn flat_chain_is_straightened() {
        let w = WarpingFunction::flat();
        let s5 = 5f64.sqrt();
        let got = glue_generalized_triangle(&w, &[piece(1.0, s5, 3.0), piece(3.0, s5, 1.0)]).unwrap();
        close(got.feet.1, 2.0, 1e-9);
        close(got.shortest_arc.path.total_length, 2.0, 1e-8);
        close(got.chord, 2.0, 1e-8);
        close(got.angle_p, FRAC_PI_2, 1e-7);
        close(got.hinge_angles[0], 2.0 * 0.5f64.atan(), 1e-8);
        assert!(got.shortest_arc.lengths.windows(2).all(|l| l[1] <= l[0] + 1e-12));
        assert!(!got.shortest_arc.contact);
    }

    #[test]
    fn reflex_hinge_is_a_violation() {
        let w = WarpingFunction::flat();
        let s5 = 5f64.sqrt();
        let err = glue_generalized_triangle(&w, &[piece(3.0, s5, 1.0), piece(1.0, s5, 3.0)]).unwrap_err();
        assert!(matches!(err, Error::ComparisonViolation(_)), "{err}");
    }

    #[test]
    fn broken_model_geodesic_glues_back() {
        let w = WarpingFunction::cosh();
        let path = crate::model::integrate_geodesic(&w, &GeodesicState::new(0.6, 0.0, 1.2), 3.0).unwrap();
        let cuts = [0.0, 1.1, 2.0, 3.0];
        let pts: Vec<_> = cuts.iter().map(|&s| path.point_at(s)).collect();
        let chain: Vec<_> = pts
            .windows(2)
            .zip(cuts.windows(2))
            .map(|(p, s)| piece(p[0].x, s[1] - s[0], p[1].x))
            .collect();
        let got = glue_generalized_triangle(&w, &chain).unwrap();
        close(got.shortest_arc.path.total_length, 3.0, 1e-7);
        close(got.chord, 3.0, 1e-7);
        close(got.feet.1, pts[3].y, 1e-7);
        for h in &got.hinge_angles {
            close(*h, PI, 1e-6);
        }
        let measured = TriangleMeasurements::new(0.6, 3.0, pts[3].x)
            .unwrap()
            .with_angles(angle_at_start(&path), angle_at_end(&path));
        let report = verify_toponogov(&measured, &ComparisonModel::Generalized(Box::new(got))).unwrap();
        assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
        assert!(report.worst_residual() > -1e-6);
    }

    #[test]
    fn open_report_equality_case() {
        let w = WarpingFunction::cosh();
        let t = TriangleMeasurements::new(1.0, 2.0, 1.0).unwrap();
        let tri = solve_comparison_triangle(&w, &t).unwrap();
        let exact = t.with_angles(tri.angle_p, tri.angle_q).with_footgap(tri.footgap);
        let r = verify_toponogov(&exact, &ComparisonModel::Open(tri.clone())).unwrap();
        assert!(r.equality_case && r.passed());
        let bent = t.with_angles(tri.angle_p + 1e-3, tri.angle_q).with_footgap(tri.footgap);
        let r = verify_toponogov(&bent, &ComparisonModel::Open(tri.clone())).unwrap();
        assert!(r.equality_case && !r.passed());
        let small = t.with_angles(tri.angle_p - 1e-3, tri.angle_q);
        let r = verify_toponogov(&small, &ComparisonModel::Open(tri.clone())).unwrap();
        assert!(!r.passed() && r.worst_residual() < -9e-4);
        assert!(verify_toponogov(&t, &ComparisonModel::Open(tri)).is_err());
    }
}
