//! The model half-plane `{x >= 0}` with metric `dx² + m(x)² dy²`.
//!
//! Tangent directions are described by the angle `θ` they make with
//! `∂/∂x`: the unit tangent is `(cos θ, sin θ / m(x))`. The angle is signed
//! so that directions with decreasing `y` are representable; the Clairaut
//! constant `ν = m(x) |sin θ|` is conserved along every geodesic.

mod geodesic;
mod length;
mod probe;
mod shooting;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::warping::WarpingFunction;

pub use geodesic::{integrate_geodesic, jacobi_first_zero, GeodesicPath, PathSample, Residuals};
pub use length::{length_lower_bound, quadrature_length};
pub use probe::{sector_cut_pair_probe, sector_cut_pair_probe_seeded, ProbeVerdict, SectorProbeReport, ViolationKind};
pub use shooting::{connect, model_distance, Connection};

pub(crate) use geodesic::{settings, trace, Outcome, Stop, Trace};
pub(crate) use shooting::{angle_nodes, miss_residual, shoot_between, shooting_roots};

/// A point `(x, y)` of the half-plane: height above the boundary and
/// coordinate along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub x: f64,
    pub y: f64,
}

impl ModelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        ModelPoint { x, y }
    }
}

/// Position and direction of a unit-speed geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub point: ModelPoint,
    /// Angle to `∂/∂x` in `(-π, π]`; positive angles move towards larger `y`.
    pub angle: f64,
}

impl GeodesicState {
    pub fn new(x: f64, y: f64, angle: f64) -> Self {
        GeodesicState { point: ModelPoint::new(x, y), angle: normalize_angle(angle) }
    }

    /// `[x, y, x', y']` for the geodesic system.
    pub(crate) fn phase(&self, w: &WarpingFunction) -> [f64; 4] {
        let m = w.m(self.point.x);
        let (s, c) = direction(self.angle);
        [self.point.x, self.point.y, c, s / m]
    }
}

/// `(sin θ, cos θ)` with `cos(±π/2)` exactly zero, so that geodesics
/// launched along the boundary stay on it.
pub(crate) fn direction(theta: f64) -> (f64, f64) {
    if theta.abs() == std::f64::consts::FRAC_PI_2 {
        (theta.signum(), 0.0)
    } else {
        theta.sin_cos()
    }
}

pub(crate) fn normalize_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = a % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

/// Trace the geodesic from `init` for length `len` without recording samples.
pub(crate) fn trace_length(w: &WarpingFunction, init: &GeodesicState, len: f64, rtol: f64) -> Result<Trace> {
    trace(w, init.phase(w), Stop::Length(len), len, &settings(rtol), false)
}

/// `G(t) = -m''(t)/m(t)`.
pub fn gaussian_curvature(w: &WarpingFunction, t: f64) -> Result<f64> {
    w.gaussian_curvature(t)
}

/// `ν = m(x) |sin θ|`; zero exactly for directions along `∂/∂x`.
pub fn clairaut_constant(w: &WarpingFunction, s: &GeodesicState) -> f64 {
    w.m(s.point.x) * s.angle.sin().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn clairaut_examples() {
        let flat = WarpingFunction::flat();
        assert!((clairaut_constant(&flat, &GeodesicState::new(4.0, 0.0, PI / 6.0)) - 0.5).abs() < 1e-15);
        let cosh = WarpingFunction::cosh();
        let x = 2f64.acosh();
        assert!((clairaut_constant(&cosh, &GeodesicState::new(x, 0.0, PI / 2.0)) - 2.0).abs() < 1e-15);
        assert_eq!(clairaut_constant(&cosh, &GeodesicState::new(1.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn angles_are_normalized() {
        assert!((GeodesicState::new(0.0, 0.0, 3.0 * PI / 2.0).angle + PI / 2.0).abs() < 1e-15);
        assert_eq!(GeodesicState::new(0.0, 0.0, -PI).angle, PI);
    }
}
