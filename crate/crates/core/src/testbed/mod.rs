//! Synthetic surfaces with boundary on which both sides of the comparison
//! statements can be computed: warped half-planes `dx² + n(x)² dy²` and the
//! flat cylinder `[0, ℓ] × S¹`.

mod cylinder;
mod experiments;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{connect, integrate_geodesic, GeodesicPath, GeodesicState, ModelPoint};
use crate::tolerance::{DISTANCE, LENGTH_TIE};
use crate::triangle::TriangleMeasurements;
use crate::warping::WarpingFunction;

pub use cylinder::{cylinder_splitting_experiment, CutLocusSample, CylinderCheck, CylinderReport};
pub use experiments::{
    gluing_case, rigidity_equality_check, subdivide, subdivision_count, toponogov_case, GluingOutcome,
    RigidityCase, RigidityReport, Subdivision,
};

/// Largest winding number tried when unrolling the cylinder.
pub const MAX_WINDING: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// `{x >= 0}`, boundary `x = 0`.
    HalfPlane,
    /// `[0, height] × (ℝ / circumference ℤ)`, flat, boundary circles at
    /// `x = 0` and `x = height`.
    Cylinder { circumference: f64, height: f64 },
}

/// A boundary component of a testbed surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    /// `x = 0`.
    Inner,
    /// `x = ℓ` on the cylinder.
    Outer,
}

#[derive(Debug, Clone)]
pub struct SyntheticSurface {
    n: WarpingFunction,
    topology: Topology,
}

impl SyntheticSurface {
    pub fn half_plane(n: WarpingFunction) -> Self {
        SyntheticSurface { n, topology: Topology::HalfPlane }
    }

    pub fn cylinder(circumference: f64, height: f64) -> Result<Self> {
        if !(circumference > 0.0 && circumference.is_finite() && height > 0.0 && height.is_finite()) {
            return Err(Error::Precondition(format!(
                "cylinder needs positive circumference and height, got {circumference} and {height}"
            )));
        }
        Ok(SyntheticSurface { n: WarpingFunction::flat(), topology: Topology::Cylinder { circumference, height } })
    }

    /// A warping spec (see [`WarpingFunction::from_spec`]) for a half-plane,
    /// or `cylinder:C:L`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("cylinder:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Precondition(format!("bad number `{s}` in testbed spec `{spec}`")))
            };
            if parts.len() != 2 {
                return Err(Error::Precondition(format!("expected cylinder:CIRCUMFERENCE:HEIGHT, got `{spec}`")));
            }
            return Self::cylinder(parse(parts[0])?, parse(parts[1])?);
        }
        Ok(Self::half_plane(WarpingFunction::from_spec(spec)?))
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Largest height a point may have.
    pub fn max_height(&self) -> f64 {
        match self.topology {
            Topology::HalfPlane => self.n.domain_max(),
            Topology::Cylinder { height, .. } => height,
        }
    }

    pub fn contains(&self, p: ModelPoint) -> bool {
        p.x >= 0.0 && p.x <= self.max_height() && p.y.is_finite()
    }

    /// `d(∂X, p)`.
    pub fn boundary_distance(&self, p: ModelPoint) -> f64 {
        match self.topology {
            Topology::HalfPlane => p.x,
            Topology::Cylinder { height, .. } => p.x.min(height - p.x),
        }
    }

    /// Distance from `p` to one boundary component.
    pub fn component_distance(&self, p: ModelPoint, c: Component) -> Result<f64> {
        match (self.topology, c) {
            (_, Component::Inner) => Ok(p.x),
            (Topology::Cylinder { height, .. }, Component::Outer) => Ok(height - p.x),
            (Topology::HalfPlane, Component::Outer) => {
                Err(Error::Precondition("the half-plane has a single boundary component".into()))
            }
        }
    }

    /// Foot of the `∂X`-segment from component `c` to `p`.
    pub fn foot(&self, p: ModelPoint, c: Component) -> ModelPoint {
        match (self.topology, c) {
            (Topology::Cylinder { height, .. }, Component::Outer) => ModelPoint::new(height, p.y),
            _ => ModelPoint::new(0.0, p.y),
        }
    }

    /// Nearest boundary component; `Inner` on ties.
    pub fn nearest_component(&self, p: ModelPoint) -> Component {
        match self.topology {
            Topology::Cylinder { height, .. } if height - p.x < p.x => Component::Outer,
            _ => Component::Inner,
        }
    }
}

/// A minimal geodesic on a testbed surface.
///
/// On the cylinder the path lives in the universal cover: its end has
/// `y = y(q) + winding · circumference`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGeodesic {
    pub length: f64,
    pub path: GeodesicPath,
    /// Unit tangent `(dx, m dy)` components at the start, in the
    /// orthonormal frame `(∂x, ∂y / n)`.
    pub start_tangent: (f64, f64),
    pub end_tangent: (f64, f64),
    pub multiple_minimizers: bool,
    pub winding: i32,
}

fn frame_tangent(n: &WarpingFunction, path: &GeodesicPath, end: bool) -> (f64, f64) {
    let s = if end { path.end() } else { path.start() };
    (s.dx, n.m(s.point.x) * s.dy)
}

/// Minimal geodesic between two points of a testbed surface.
///
/// Half-planes reuse the model shooting solver on the metric of `n`. On the
/// cylinder every winding `|w| <= 3` of the unrolled segment is a
/// candidate and the shortest wins; candidates tied within `1e-6` are
/// reported as multiple minimizers.
pub fn surface_geodesic_bvp(s: &SyntheticSurface, p: ModelPoint, q: ModelPoint) -> Result<SurfaceGeodesic> {
    for pt in [p, q] {
        if !s.contains(pt) {
            return Err(Error::Domain { t: pt.x, domain_max: s.max_height() });
        }
    }
    match s.topology {
        Topology::HalfPlane => {
            let c = connect(&s.n, p, q)?;
            Ok(SurfaceGeodesic {
                length: c.length,
                start_tangent: frame_tangent(&s.n, &c.path, false),
                end_tangent: frame_tangent(&s.n, &c.path, true),
                path: c.path,
                multiple_minimizers: c.multiple_minimizers,
                winding: 0,
            })
        }
        Topology::Cylinder { circumference, .. } => {
            let dx = q.x - p.x;
            let mut best: Vec<(f64, i32)> = (-MAX_WINDING..=MAX_WINDING)
                .map(|w| (dx.hypot(q.y + w as f64 * circumference - p.y), w))
                .collect();
            best.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.abs().cmp(&b.1.abs())).then(a.1.cmp(&b.1)));
            let (length, winding) = best[0];
            let multiple = best[1].0 - length <= LENGTH_TIE;
            if length == 0.0 {
                return Ok(SurfaceGeodesic {
                    length,
                    path: GeodesicPath::point(p),
                    start_tangent: (1.0, 0.0),
                    end_tangent: (1.0, 0.0),
                    multiple_minimizers: multiple,
                    winding,
                });
            }
            let dy = q.y + winding as f64 * circumference - p.y;
            let theta = dy.atan2(dx);
            let mut path = integrate_geodesic(&s.n, &GeodesicState::new(p.x, p.y, theta), length)?;
            path.total_length = length;
            let t = (dx / length, dy / length);
            Ok(SurfaceGeodesic { length, path, start_tangent: t, end_tangent: t, multiple_minimizers: multiple, winding })
        }
    }
}

/// Angle between an outgoing unit tangent at a vertex and the direction of
/// the `∂X`-segment back to its foot on component `c`.
fn angle_to_foot(c: Component, tangent: (f64, f64)) -> f64 {
    let toward = match c {
        Component::Inner => -1.0,
        Component::Outer => 1.0,
    };
    (toward * tangent.0).clamp(-1.0, 1.0).acos()
}

/// Measure the open triangle with vertices `p`, `q`, using the `∂X`-segments
/// to the nearest boundary component.
pub fn extract_triangle(s: &SyntheticSurface, p: ModelPoint, q: ModelPoint) -> Result<TriangleMeasurements> {
    extract_triangle_with(s, p, q, (s.nearest_component(p), s.nearest_component(q)))
}

/// As [`extract_triangle`] with chosen boundary components for the two
/// `∂X`-segments. Each chosen component must realize `d(∂X, ·)`.
pub fn extract_triangle_with(
    s: &SyntheticSurface,
    p: ModelPoint,
    q: ModelPoint,
    feet: (Component, Component),
) -> Result<TriangleMeasurements> {
    let a = s.component_distance(p, feet.0)?;
    let c = s.component_distance(q, feet.1)?;
    for (d, pt) in [(a, p), (c, q)] {
        if (d - s.boundary_distance(pt)).abs() > DISTANCE {
            return Err(Error::Precondition(format!(
                "component at distance {d} from ({}, {}) does not realize the boundary distance",
                pt.x, pt.y
            )));
        }
    }
    let g = surface_geodesic_bvp(s, p, q)?;
    let angle_p = angle_to_foot(feet.0, g.start_tangent);
    let angle_q = angle_to_foot(feet.1, (-g.end_tangent.0, -g.end_tangent.1));
    let footgap = surface_geodesic_bvp(s, s.foot(p, feet.0), s.foot(q, feet.1))?.length;
    Ok(TriangleMeasurements::new(a, g.length, c)?.with_angles(angle_p, angle_q).with_footgap(footgap))
}

/// Worst value of `K_X - G` over a height grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBound {
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_height: f64,
}

/// Check `-n''/n >= -m''/m` on `grid`, with slack `1e-8`.
pub fn radial_bound_check(s: &SyntheticSurface, w: &WarpingFunction, grid: &[f64]) -> RadialBound {
    let mut worst = RadialBound { holds: true, worst_margin: f64::INFINITY, worst_height: f64::NAN };
    for &t in grid {
        let margin = s.n.curvature_unchecked(t) - w.curvature_unchecked(t);
        if margin < worst.worst_margin || worst.worst_height.is_nan() {
            worst.worst_margin = margin;
            worst.worst_height = t;
        }
    }
    worst.holds = worst.worst_margin >= -DISTANCE;
    worst
}

/// `points + 1` evenly spaced heights on the range shared by the surface and
/// the model.
pub fn height_grid(s: &SyntheticSurface, w: &WarpingFunction, points: usize) -> Vec<f64> {
    let top = s.max_height().min(w.domain_max());
    (0..=points).map(|i| top * i as f64 / points as f64).collect()
}

/// Gaussian curvature of the surface metric at height `x`, from central
/// differences of `√g_yy` alone.
pub fn metric_curvature_fd(s: &SyntheticSurface, x: f64) -> f64 {
    let h = 1e-4 * x.abs().max(1.0);
    let root = |t: f64| {
        let g_yy = s.n.m(t).powi(2);
        g_yy.sqrt()
    };
    let (l, c, r) = (root(x - h), root(x), root(x + h));
    -(l - 2.0 * c + r) / (h * h) / c
}

/// Random vertex pairs `p = (a, 0)`, `q = (c, gap)` with heights
/// log-uniform in `[min_height, max_height]` and `gap` uniform in
/// `[min_footgap, max_footgap]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSampler {
    pub min_height: f64,
    pub max_height: f64,
    pub min_footgap: f64,
    pub max_footgap: f64,
}

/// Heights of generated triangles stay below this, whatever the domains.
pub const GENERATION_HORIZON: f64 = 5.0;

impl TriangleSampler {
    /// Heights up to `0.8 · min(domain_max, 5)`, gaps up to `min(θ₀, 4)`.
    pub fn new(s: &SyntheticSurface, w: &WarpingFunction, theta0: f64) -> Self {
        let horizon = s.max_height().min(w.domain_max()).min(GENERATION_HORIZON);
        TriangleSampler { min_height: 0.1, max_height: 0.8 * horizon, min_footgap: 0.05, max_footgap: theta0.min(4.0) }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> (ModelPoint, ModelPoint) {
        let (lo, hi) = (self.min_height.ln(), self.max_height.ln());
        let a = rng.gen_range(lo..=hi).exp();
        let c = rng.gen_range(lo..=hi).exp();
        let gap = rng.gen_range(self.min_footgap..=self.max_footgap);
        (ModelPoint::new(a, 0.0), ModelPoint::new(c, gap))
    }
}

/// Independent random stream for case `case` of experiment `stream`.
pub fn case_rng(seed: u64, stream: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | case);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn flat_half_plane_triangles() {
        let s = SyntheticSurface::half_plane(WarpingFunction::flat());
        let t = extract_triangle(&s, ModelPoint::new(1.0, 0.0), ModelPoint::new(1.0, 2.0)).unwrap();
        close(t.b, 2.0, 1e-9);
        close(t.angle_p.unwrap(), FRAC_PI_2, 1e-9);
        close(t.angle_q.unwrap(), FRAC_PI_2, 1e-9);
        close(t.footgap.unwrap(), 2.0, 1e-9);
        let t = extract_triangle(&s, ModelPoint::new(1.0, 0.0), ModelPoint::new(2.0, 1.0)).unwrap();
        close(t.b, 2f64.sqrt(), 1e-9);
        close(t.angle_p.unwrap(), 3.0 * FRAC_PI_4, 1e-9);
        close(t.angle_q.unwrap(), FRAC_PI_4, 1e-9);
        close(t.footgap.unwrap(), 1.0, 1e-9);
    }

    #[test]
    fn cosh_symmetric_triangle() {
        let s = SyntheticSurface::half_plane(WarpingFunction::cosh());
        let t = extract_triangle(&s, ModelPoint::new(0.7, 0.3), ModelPoint::new(0.7, 1.6)).unwrap();
        close(t.angle_p.unwrap(), t.angle_q.unwrap(), 1e-8);
        let oracle = (0.7f64.cosh().powi(2) * 1.3f64.cosh() - 0.7f64.sinh().powi(2)).acosh();
        close(t.b, oracle, 1e-8);
    }

    #[test]
    fn cylinder_windings() {
        let s = SyntheticSurface::cylinder(2.0 * PI, 2.0).unwrap();
        let g = surface_geodesic_bvp(&s, ModelPoint::new(1.0, 0.0), ModelPoint::new(1.0, PI)).unwrap();
        close(g.length, PI, 1e-12);
        assert!(g.multiple_minimizers);
        let g = surface_geodesic_bvp(&s, ModelPoint::new(0.5, 0.1), ModelPoint::new(1.5, 6.0)).unwrap();
        close(g.length, 1f64.hypot(2.0 * PI - 5.9), 1e-12);
        assert_eq!(g.winding, -1);
        close(g.path.end().point.y, 6.0 - 2.0 * PI, 1e-9);
        assert_eq!(s.nearest_component(ModelPoint::new(1.5, 0.0)), Component::Outer);
    }

    #[test]
    fn radial_bounds() {
        let flat = SyntheticSurface::half_plane(WarpingFunction::flat());
        let cosh = WarpingFunction::cosh();
        let grid = height_grid(&flat, &cosh, 100);
        let r = radial_bound_check(&flat, &cosh, &grid);
        assert!(r.holds);
        close(r.worst_margin, 1.0, 1e-9);
        let same = radial_bound_check(&SyntheticSurface::half_plane(cosh.clone()), &cosh, &grid);
        assert!(same.holds);
        close(same.worst_margin, 0.0, 1e-9);
        let bad = radial_bound_check(&SyntheticSurface::half_plane(cosh), &WarpingFunction::flat(), &grid);
        assert!(!bad.holds);
        close(bad.worst_margin, -1.0, 1e-9);
    }

    #[test]
    fn metric_curvature_matches_warping() {
        for n in [WarpingFunction::flat(), WarpingFunction::cosh(), WarpingFunction::exp_decay()] {
            let s = SyntheticSurface::half_plane(n.clone());
            for i in 0..=40 {
                let x = 0.1 * i as f64;
                let k = n.gaussian_curvature(x).unwrap();
                let fd = metric_curvature_fd(&s, x);
                assert!((fd - k).abs() <= 1e-4 * k.abs().max(1.0), "{} at {x}: {fd} vs {k}", n.name());
            }
        }
    }

    #[test]
    fn specs() {
        assert!(matches!(
            SyntheticSurface::from_spec("cylinder:6.5:2").unwrap().topology(),
            Topology::Cylinder { height, .. } if height == 2.0
        ));
        assert!(SyntheticSurface::from_spec("cylinder:6.5").is_err());
        assert!(SyntheticSurface::from_spec("cylinder:-1:2").is_err());
        assert!(SyntheticSurface::from_spec("cosh").is_ok());
    }

    #[test]
    fn sampler_ranges() {
        let s = SyntheticSurface::half_plane(WarpingFunction::flat());
        let sampler = TriangleSampler::new(&s, &WarpingFunction::cosh(), f64::INFINITY);
        let mut rng = case_rng(7, 0, 0);
        for _ in 0..200 {
            let (p, q) = sampler.sample(&mut rng);
            assert!((0.1..=4.0).contains(&p.x) && (0.1..=4.0).contains(&q.x));
            assert!((0.05..=4.0).contains(&q.y));
        }
    }
}
