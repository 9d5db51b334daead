use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{integrate_geodesic, ModelPoint};
use crate::tolerance::{EQUALITY_ANGLE, EQUALITY_FOOTGAP};
use crate::triangle::{
    glue_generalized_triangle, solve_comparison_triangle, solve_comparison_triangle_in_sector, validate_thinness,
    verify_toponogov, ComparisonModel, ComparisonReport, GeneralizedOpenTriangle, InjectivityProbe, TriangleMeasurements,
    TrianglePiece,
};
use crate::warping::WarpingFunction;

use super::{case_rng, extract_triangle, surface_geodesic_bvp, SyntheticSurface, Topology, TriangleSampler};

pub(crate) const RIGIDITY_STREAM: u64 = 3;

/// Measure the triangle `p, q` on the testbed and compare it with its
/// comparison triangle in the model, inside the sector of width `theta0`.
pub fn toponogov_case(
    testbed: &SyntheticSurface,
    model: &WarpingFunction,
    p: ModelPoint,
    q: ModelPoint,
    theta0: f64,
) -> Result<ComparisonReport> {
    let measured = extract_triangle(testbed, p, q)?;
    let tri = solve_comparison_triangle_in_sector(model, &measured, theta0)?;
    verify_toponogov(&measured, &ComparisonModel::Open(tri))
}

/// A measured triangle cut into consecutive sub-triangles along its
/// opposite side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subdivision {
    pub overall: TriangleMeasurements,
    /// Heights along the whole opposite side.
    pub side_heights: Vec<f64>,
    pub pieces: Vec<TrianglePiece>,
}

/// Cut the minimal geodesic from `p` to `q` on a half-plane testbed into
/// `k` arcs of equal length. The angles at each interior cut are
/// supplementary by construction.
pub fn subdivide(s: &SyntheticSurface, p: ModelPoint, q: ModelPoint, k: usize) -> Result<Subdivision> {
    if s.topology() != Topology::HalfPlane {
        return Err(Error::Precondition("subdivision needs a half-plane testbed".into()));
    }
    if k == 0 {
        return Err(Error::Precondition("at least one piece is needed".into()));
    }
    let overall = extract_triangle(s, p, q)?;
    let g = surface_geodesic_bvp(s, p, q)?;
    let step = g.length / k as f64;
    let mut state = g.path.start().state();
    let mut pieces = Vec::with_capacity(k);
    for _ in 0..k {
        let arc = integrate_geodesic(s.warping(), &state, step)?;
        let (start, end) = (arc.start(), arc.end());
        let measured = TriangleMeasurements::new(start.point.x, step, end.point.x)?
            .with_angles(PI - start.angle.abs(), end.angle.abs());
        pieces.push(TrianglePiece::new(measured, arc.heights()));
        state = end.state();
    }
    Ok(Subdivision { overall, side_heights: g.path.heights(), pieces })
}

/// Fewest equal pieces whose length stays below half the thinness bound.
pub fn subdivision_count(
    w: &WarpingFunction,
    measured: &TriangleMeasurements,
    side_heights: &[f64],
    probe: &dyn InjectivityProbe,
) -> Result<usize> {
    let t = validate_thinness(w, measured, side_heights, probe)?;
    if t.bound.is_infinite() {
        return Ok(1);
    }
    Ok((measured.b / (0.5 * t.bound)).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingOutcome {
    pub subdivision: Subdivision,
    pub got: GeneralizedOpenTriangle,
    pub report: ComparisonReport,
    /// Largest difference between the single-piece glued triangle and the
    /// comparison triangle of the whole measured triangle.
    pub single_piece_deviation: f64,
}

/// Subdivide the triangle `p, q` into `k` pieces, glue their comparison
/// triangles in the model and check the comparison statements for the
/// result. Also glues the undivided triangle as a single piece.
pub fn gluing_case(
    testbed: &SyntheticSurface,
    model: &WarpingFunction,
    p: ModelPoint,
    q: ModelPoint,
    k: usize,
) -> Result<GluingOutcome> {
    let subdivision = subdivide(testbed, p, q, k)?;
    let got = glue_generalized_triangle(model, &subdivision.pieces)?;
    let report = verify_toponogov(&subdivision.overall, &ComparisonModel::Generalized(Box::new(got.clone())))?;
    let whole = TrianglePiece::new(subdivision.overall, subdivision.side_heights.clone());
    let single = glue_generalized_triangle(model, std::slice::from_ref(&whole))?;
    let tri = solve_comparison_triangle(model, &subdivision.overall)?;
    let single_piece_deviation = [
        single.angle_p - tri.angle_p,
        single.angle_q - tri.angle_q,
        single.footgap - tri.footgap,
        single.shortest_arc.path.total_length - tri.opposite_side.total_length,
        single.vertex_q.y - tri.q.y,
    ]
    .iter()
    .fold(0.0, |m: f64, d| m.max(d.abs()));
    Ok(GluingOutcome { subdivision, got, report, single_piece_deviation })
}

/// One triangle of the equality-case check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityCase {
    pub measured: TriangleMeasurements,
    pub model_footgap: f64,
    pub footgap_residual: f64,
    pub angle_residual: f64,
    pub report: ComparisonReport,
    /// The same triangle with its measured foot gap enlarged.
    pub perturbed: ComparisonReport,
}

impl RigidityCase {
    pub fn new(w: &WarpingFunction, p: ModelPoint, q: ModelPoint, perturbation: f64) -> Result<Self> {
        let measured = extract_triangle(&SyntheticSurface::half_plane(w.clone()), p, q)?;
        let tri = solve_comparison_triangle(w, &measured)?;
        let gap = measured.footgap.unwrap_or(f64::NAN);
        let report = verify_toponogov(&measured, &ComparisonModel::Open(tri.clone()))?;
        let perturbed = verify_toponogov(&measured.with_footgap(gap + perturbation), &ComparisonModel::Open(tri.clone()))?;
        let angle_residual = (measured.angle_p.unwrap_or(f64::NAN) - tri.angle_p)
            .abs()
            .max((measured.angle_q.unwrap_or(f64::NAN) - tri.angle_q).abs());
        Ok(RigidityCase {
            measured,
            model_footgap: tri.footgap,
            footgap_residual: (gap - tri.footgap).abs(),
            angle_residual,
            report,
            perturbed,
        })
    }

    /// Equality case detected with agreeing angles, and the perturbed copy
    /// leaves the equality case while keeping the inequalities.
    pub fn passed(&self) -> bool {
        self.report.equality_case
            && self.report.passed()
            && self.footgap_residual <= EQUALITY_FOOTGAP
            && self.angle_residual <= EQUALITY_ANGLE
            && !self.perturbed.equality_case
            && self.perturbed.passed()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub cases: Vec<RigidityCase>,
    pub max_angle_residual: f64,
    pub max_footgap_residual: f64,
}

impl RigidityReport {
    pub fn all_equal(&self) -> bool {
        self.cases.iter().all(|c| c.report.equality_case)
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(RigidityCase::passed)
    }
}

/// Testbed warping equal to the model warping: every random triangle must
/// be in the equality case with matching angles. Each triangle is also
/// rechecked with its foot gap enlarged by `perturbation`.
pub fn rigidity_equality_check(w: &WarpingFunction, n_triangles: usize, seed: u64, perturbation: f64) -> Result<RigidityReport> {
    let s = SyntheticSurface::half_plane(w.clone());
    let sampler = TriangleSampler::new(&s, w, f64::INFINITY);
    let cases = (0..n_triangles)
        .into_par_iter()
        .map(|i| {
            let (p, q) = sampler.sample(&mut case_rng(seed, RIGIDITY_STREAM, i as u64));
            RigidityCase::new(w, p, q, perturbation)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_angle_residual = cases.iter().map(|c| c.angle_residual).fold(0.0, f64::max);
    let max_footgap_residual = cases.iter().map(|c| c.footgap_residual).fold(0.0, f64::max);
    Ok(RigidityReport { cases, max_angle_residual, max_footgap_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangle::CurvatureBoundProbe;

    #[test]
    fn flat_testbed_against_hyperbolic_model() {
        let s = SyntheticSurface::half_plane(WarpingFunction::flat());
        let r = toponogov_case(&s, &WarpingFunction::cosh(), ModelPoint::new(1.0, 0.0), ModelPoint::new(1.0, 2.0), f64::INFINITY)
            .unwrap();
        assert!(r.passed() && !r.equality_case);
        assert!(r.worst_residual() > 0.0);
    }

    #[test]
    fn flat_against_flat_is_equality() {
        let s = SyntheticSurface::half_plane(WarpingFunction::flat());
        let r = toponogov_case(&s, &WarpingFunction::flat(), ModelPoint::new(0.4, 0.0), ModelPoint::new(1.7, 1.1), f64::INFINITY)
            .unwrap();
        assert!(r.equality_case && r.passed());
        assert!(r.worst_residual() >= -1e-6);
    }

    #[test]
    fn subdivided_flat_triangle_glues_in_hyperbolic_model() {
        let s = SyntheticSurface::half_plane(WarpingFunction::flat());
        let out = gluing_case(&s, &WarpingFunction::cosh(), ModelPoint::new(0.8, 0.0), ModelPoint::new(1.5, 2.0), 3).unwrap();
        assert!(out.report.passed(), "{:?}", out.report.failures().collect::<Vec<_>>());
        assert!(out.got.hinge_angles.iter().all(|&h| h < PI));
        assert!(out.single_piece_deviation == 0.0);
        let total: f64 = out.subdivision.pieces.iter().map(|p| p.measured.b).sum();
        assert!((total - out.subdivision.overall.b).abs() < 1e-12);
    }

    #[test]
    fn subdivision_count_follows_thinness() {
        let cos = WarpingFunction::cos_truncated(1.5).unwrap();
        let t = TriangleMeasurements::new(1.0, 4.0, 1.0).unwrap();
        assert_eq!(subdivision_count(&cos, &t, &[1.0], &CurvatureBoundProbe).unwrap(), 3);
        assert_eq!(subdivision_count(&WarpingFunction::flat(), &t, &[1.0], &CurvatureBoundProbe).unwrap(), 1);
    }

    #[test]
    fn rigidity_with_perturbation() {
        let r = rigidity_equality_check(&WarpingFunction::cosh(), 6, 11, 1e-2).unwrap();
        assert!(r.all_equal() && r.passed(), "{:?}", r.max_angle_residual);
        assert!(r.cases.iter().all(|c| !c.perturbed.equality_case && c.perturbed.passed()));
    }
}
