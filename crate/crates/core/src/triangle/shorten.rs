use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{integrate_geodesic, shoot_between, trace_length, GeodesicPath, GeodesicState, ModelPoint};
use crate::tolerance::{DISTANCE, INTEGRATOR_RTOL};
use crate::warping::WarpingFunction;

use super::glue::Scaffold;

/// Sweep limit of the curve shortening.
pub const MAX_SWEEPS: usize = 10_000;

const SWEEP_RTOL: f64 = 1e-10;
const CONTAINMENT: f64 = 1e-7;

/// Output of [`shortest_arc_in_domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortestArc {
    pub path: GeodesicPath,
    pub sweeps: usize,
    /// Length of the polygon of local geodesics after each sweep, starting
    /// with the broken side itself.
    pub lengths: Vec<f64>,
    /// Worst of the endpoint error and the conservation residuals.
    pub geodesic_residual: f64,
    /// The arc touches the broken side away from its endpoints.
    pub contact: bool,
}

/// Shortest arc from `p` to `q` in the closure of the domain bounded by the
/// two extreme vertical sides, the boundary and the broken side.
///
/// Birkhoff-style curve shortening: vertices placed along the broken side
/// are repeatedly moved to the midpoint of the local geodesic joining their
/// neighbours (odd vertices, then even ones) until a sweep shortens the
/// polygon by less than `1e-10`. The limit is polished into a single
/// geodesic, which must lie in the domain.
pub fn shortest_arc_in_domain(w: &WarpingFunction, domain: &Scaffold, p: ModelPoint, q: ModelPoint) -> Result<ShortestArc> {
    let broken = domain.length();
    let n = (2 * domain.arcs.len()).max(8);
    let mut v: Vec<ModelPoint> = (0..=n).map(|j| domain.point_at(broken * j as f64 / n as f64)).collect();
    v[0] = p;
    v[n] = q;
    let mut seg: Vec<(f64, f64)> = Vec::with_capacity(n);
    for j in 0..n {
        seg.push(shoot_between(w, v[j], v[j + 1], None, SWEEP_RTOL)?);
    }
    let mut lengths = vec![broken];
    let mut prev = broken;
    let mut sweeps = 0;
    loop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Iteration(format!("curve shortening did not settle in {MAX_SWEEPS} sweeps")));
        }
        sweeps += 1;
        for parity in [1, 0] {
            for i in (1..n).filter(|i| i % 2 == parity) {
                let guess = (seg[i - 1].0, seg[i - 1].1 + seg[i].1);
                let (theta, len) = shoot_between(w, v[i - 1], v[i + 1], Some(guess), SWEEP_RTOL)?;
                let start = GeodesicState::new(v[i - 1].x, v[i - 1].y, theta);
                let mid = trace_length(w, &start, 0.5 * len, SWEEP_RTOL)?;
                let m = w.m(mid.end[0]);
                v[i] = ModelPoint::new(mid.end[0], mid.end[1]);
                seg[i - 1] = (theta, 0.5 * len);
                seg[i] = ((m * mid.end[3]).atan2(mid.end[2]), 0.5 * len);
            }
        }
        let total: f64 = seg.iter().map(|s| s.1).sum();
        lengths.push(total);
        if prev - total < 1e-10 {
            break;
        }
        prev = total;
    }

    let total = *lengths.last().expect("non-empty");
    let (theta, len) = shoot_between(w, p, q, Some((seg[0].0, total)), INTEGRATOR_RTOL)?;
    let path = integrate_geodesic(w, &GeodesicState::new(p.x, p.y, theta), len)?;
    let end = path.end().point;
    let r = path.residuals(w);
    let residual = (end.x - q.x).abs().max((end.y - q.y).abs()).max(r.clairaut).max(r.speed);
    if residual > DISTANCE {
        return Err(Error::Iteration(format!("polished shortest arc has geodesic residual {residual:e}")));
    }

    let mut contact = false;
    for s in &path.samples {
        let (x, y) = (s.point.x, s.point.y);
        let inside_strip = y >= domain.y_left - CONTAINMENT && y <= domain.y_right + CONTAINMENT && x >= -CONTAINMENT;
        let cap = domain.eta(y.clamp(domain.y_left, domain.y_right));
        let below = cap.map_or(false, |h| x <= h + CONTAINMENT);
        if !(inside_strip && below) {
            return Err(Error::ConvexityViolation(format!(
                "shortest arc passes through ({x}, {y}) outside the domain"
            )));
        }
        let interior = s.s > CONTAINMENT && s.s < len - CONTAINMENT;
        if interior && cap.map_or(false, |h| h - x < CONTAINMENT) {
            contact = true;
        }
    }
    Ok(ShortestArc { path, sweeps, lengths, geodesic_residual: residual, contact })
}
