use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Settings;
use crate::roots::brent;
use crate::tolerance::{DISTANCE, INTEGRATOR_RTOL, LENGTH_TIE, SCAN_RTOL, SHOOTING_ANGLE, SHOOTING_BRACKETS};
use crate::warping::WarpingFunction;

use super::geodesic::settings;
use super::{integrate_geodesic, trace, GeodesicPath, GeodesicState, ModelPoint, Outcome, Stop};

/// Shooting angles: a uniform grid over `(0, π)` with geometrically refined
/// nodes towards both ends, where nearly vertical geodesics live.
pub(crate) fn angle_nodes() -> Vec<f64> {
    let n = SHOOTING_BRACKETS;
    let step = PI / n as f64;
    let mut nodes: Vec<f64> = (1..n).map(|k| PI * k as f64 / n as f64).collect();
    for j in 1..=20 {
        let h = step * 0.5f64.powi(j);
        nodes.push(h);
        nodes.push(PI - h);
    }
    nodes.sort_by(f64::total_cmp);
    nodes
}

pub(crate) fn scan_settings() -> Settings<4> {
    settings(SCAN_RTOL).with_h_max(1.0)
}

/// Roots of a shooting residual over the angle `nodes`.
///
/// `scan` is a cheap low-accuracy residual used for bracketing. Shots that
/// miss the target altogether report `±∞` according to the side on which
/// they miss (`NaN` if unknown); such bracket ends are bisected until both
/// are finite. `tight` is the production-accuracy residual used for
/// refinement.
pub(crate) fn shooting_roots<S, T>(nodes: &[f64], mut scan: S, mut tight: T) -> Vec<f64>
where
    S: FnMut(f64) -> f64,
    T: FnMut(f64) -> Option<f64>,
{
    let values: Vec<f64> = nodes.iter().map(|&t| scan(t)).collect();
    let mut brackets = Vec::new();
    let mut node_roots = Vec::new();
    for i in 0..nodes.len() {
        if values[i].abs() <= 1e-9 {
            node_roots.push(nodes[i]);
        }
        if i + 1 == nodes.len() || !(values[i] * values[i + 1] < 0.0) {
            continue;
        }
        let (mut a, mut b, mut va, mut vb) = (nodes[i], nodes[i + 1], values[i], values[i + 1]);
        while !(va.is_finite() && vb.is_finite()) && b - a > 1e-13 {
            let mid = 0.5 * (a + b);
            let vm = scan(mid);
            if vm.is_nan() {
                break;
            }
            if vm.abs() <= 1e-9 {
                node_roots.push(mid);
            }
            if vm * va > 0.0 {
                a = mid;
                va = vm;
            } else {
                b = mid;
                vb = vm;
            }
        }
        if va.is_finite() && vb.is_finite() {
            brackets.push((a, b));
        }
    }

    let mut roots: Vec<f64> = Vec::new();
    for (a, b) in brackets {
        let (Some(fa), Some(fb)) = (tight(a), tight(b)) else { continue };
        if fa * fb <= 0.0 {
            if let Some((r, _)) = brent(&mut tight, a, b, fa, fb, SHOOTING_ANGLE * 1e-2, 200) {
                roots.push(r);
            }
        } else {
            roots.push(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    for t in node_roots {
        if let Some(v) = tight(t) {
            if v.abs() <= 1e-10 {
                roots.push(t);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-10);
    roots
}

/// Residual of a shot aimed at height `target` on reaching its stop
/// condition; misses are signed infinities.
pub(crate) fn miss_residual(tr: &super::geodesic::Trace, target: f64) -> f64 {
    match tr.outcome {
        Outcome::Reached => tr.end[0] - target,
        Outcome::ExitedTop => f64::INFINITY,
        Outcome::ExitedBoundary => f64::NEG_INFINITY,
        Outcome::TooLong => f64::INFINITY.copysign(tr.end[0] - target),
    }
}

/// A geodesic between two points, chosen as the shortest of all connecting
/// geodesics the angle scan finds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub length: f64,
    pub path: GeodesicPath,
    /// Another connecting geodesic has the same length within the tie
    /// tolerance.
    pub multiple_minimizers: bool,
    /// Lengths of every connecting geodesic found, ascending.
    pub candidates: Vec<f64>,
}

/// Shortest connecting geodesic from `p` to `q`.
///
/// Points on a common vertical line are joined by the vertical segment of
/// length `|x(p) - x(q)|`, which no other curve can beat. Otherwise the
/// initial angle at `p` is scanned for sign changes of the height at which
/// the geodesic reaches the `y`-coordinate of `q`.
pub fn connect(w: &WarpingFunction, p: ModelPoint, q: ModelPoint) -> Result<Connection> {
    for pt in [p, q] {
        if !(0.0..=w.domain_max()).contains(&pt.x) || !pt.y.is_finite() {
            return Err(Error::Domain { t: pt.x, domain_max: w.domain_max() });
        }
    }
    if p == q {
        return Ok(Connection { length: 0.0, path: GeodesicPath::point(p), multiple_minimizers: false, candidates: vec![0.0] });
    }
    let dy = q.y - p.y;
    if dy.abs() <= 1e-12 {
        let len = (q.x - p.x).abs();
        let angle = if q.x > p.x { 0.0 } else { PI };
        let mut path = integrate_geodesic(w, &GeodesicState::new(p.x, p.y, angle), len)?;
        path.total_length = len;
        return Ok(Connection { length: len, path, multiple_minimizers: false, candidates: vec![len] });
    }
    let sign = dy.signum();
    let dy = dy.abs();
    let (x1, x2) = (p.x, q.x);
    let m1 = w.m(x1);
    // down to the boundary, along it, and back up; or across at the lower
    // of the two heights
    let upper = (x1 + x2 + dy).min((x1 - x2).abs() + dy * m1.min(w.m(x2)));
    let max_len = 1.5 * upper + 1e-3;
    let start = |theta: f64| {
        let (s, c) = super::direction(theta);
        [x1, 0.0, c, s / m1]
    };
    let residual = |theta: f64, settings: &Settings<4>| -> f64 {
        match trace(w, start(theta), Stop::Column(dy), max_len, settings, false) {
            Ok(tr) => miss_residual(&tr, x2),
            Err(_) => f64::NAN,
        }
    };
    let scan = scan_settings();
    let tight = settings(INTEGRATOR_RTOL);
    let roots = shooting_roots(
        &angle_nodes(),
        |t| residual(t, &scan),
        |t| Some(residual(t, &tight)).filter(|v| v.is_finite()),
    );

    let mut found: Vec<GeodesicPath> = Vec::new();
    for theta in roots {
        let Ok(tr) = trace(w, start(theta), Stop::Column(dy), max_len, &tight, true) else { continue };
        if tr.outcome != Outcome::Reached {
            continue;
        }
        if (tr.end[0] - x2).abs() > DISTANCE || (tr.end[1] - dy).abs() > DISTANCE {
            continue;
        }
        let mut path = GeodesicPath {
            total_length: tr.s,
            clairaut: m1 * theta.sin(),
            truncated: false,
            samples: tr.samples,
        };
        path.transform_y(sign, p.y);
        found.push(path);
    }
    if found.is_empty() {
        return Err(Error::Connectivity(p.x, p.y, q.x, q.y));
    }
    found.sort_by(|a, b| a.total_length.total_cmp(&b.total_length));
    let candidates: Vec<f64> = found.iter().map(|c| c.total_length).collect();
    let multiple = candidates.len() > 1 && candidates[1] - candidates[0] <= LENGTH_TIE;
    let path = found.swap_remove(0);
    Ok(Connection { length: path.total_length, path, multiple_minimizers: multiple, candidates })
}

/// Distance between `p` and `q` in the model together with a minimizing
/// geodesic.
pub fn model_distance(w: &WarpingFunction, p: ModelPoint, q: ModelPoint) -> Result<(f64, GeodesicPath)> {
    connect(w, p, q).map(|c| (c.length, c.path))
}

/// Initial angle and length of a short geodesic from `a` to `b` by Newton
/// iteration on the shooting map, starting from `guess` or from the
/// coordinate chord. Meant for nearby points, where the geodesic is unique.
pub(crate) fn shoot_between(
    w: &WarpingFunction,
    a: ModelPoint,
    b: ModelPoint,
    guess: Option<(f64, f64)>,
    rtol: f64,
) -> Result<(f64, f64)> {
    let mb = w.m(b.x);
    let (mut theta, mut len) = guess.unwrap_or_else(|| {
        let mbar = w.m(0.5 * (a.x + b.x));
        let (dx, dy) = (b.x - a.x, mbar * (b.y - a.y));
        (dy.atan2(dx), dx.hypot(dy))
    });
    if len == 0.0 {
        return Ok((0.0, 0.0));
    }
    let st = settings(rtol);
    let shoot = |theta: f64, len: f64| -> Result<[f64; 4]> {
        let m = w.m(a.x);
        let (s, c) = super::direction(theta);
        let tr = trace(w, [a.x, a.y, c, s / m], Stop::Length(len), len, &st, false)?;
        if tr.outcome != Outcome::Reached {
            return Err(Error::Iteration(format!(
                "local geodesic from ({}, {}) left the domain",
                a.x, a.y
            )));
        }
        Ok(tr.end)
    };
    let tol = 1e-13 * (1.0 + len);
    for _ in 0..40 {
        let z = shoot(theta, len)?;
        let f = [z[0] - b.x, mb * (z[1] - b.y)];
        if f[0].abs().max(f[1].abs()) <= tol {
            return Ok((theta, len));
        }
        let h = 1e-7;
        let zt = shoot(theta + h, len)?;
        let j = [
            [(zt[0] - z[0]) / h, z[2]],
            [mb * (zt[1] - z[1]) / h, mb * z[3]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Iteration("singular shooting Jacobian".into()));
        }
        let dt = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dl = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        // damp large corrections
        let scale = 1f64.min(0.5 / dt.abs()).min(0.5 * len / dl.abs());
        theta -= dt * scale;
        len -= dl * scale;
        if len <= 0.0 {
            return Err(Error::Iteration("shooting length collapsed".into()));
        }
    }
    Err(Error::Iteration(format!(
        "Newton shooting from ({}, {}) to ({}, {}) did not converge",
        a.x, a.y, b.x, b.y
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fermi(x1: f64, x2: f64, dy: f64) -> f64 {
        (x1.cosh() * x2.cosh() * dy.cosh() - x1.sinh() * x2.sinh()).acosh()
    }

    #[test]
    fn euclidean_distance() {
        let w = WarpingFunction::flat();
        let (d, path) = model_distance(&w, ModelPoint::new(1.0, 0.0), ModelPoint::new(2.0, 1.0)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-10, "{d}");
        assert!((path.end().point.x - 2.0).abs() < 1e-10);
        assert!((path.end().point.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_distance_matches_fermi_coordinates() {
        let w = WarpingFunction::cosh();
        let (d, _) = model_distance(&w, ModelPoint::new(1.0, 0.0), ModelPoint::new(1.0, 1.0)).unwrap();
        assert!((d - fermi(1.0, 1.0, 1.0)).abs() < 1e-9, "{d} vs {}", fermi(1.0, 1.0, 1.0));
        let (d, path) = model_distance(&w, ModelPoint::new(0.3, 2.0), ModelPoint::new(2.2, -1.0)).unwrap();
        assert!((d - fermi(0.3, 2.2, 3.0)).abs() < 1e-9);
        assert!((path.end().point.y + 1.0).abs() < 1e-10);
    }

    #[test]
    fn vertical_and_boundary_cases() {
        let w = WarpingFunction::exp_decay();
        let (d, _) = model_distance(&w, ModelPoint::new(0.2, 5.0), ModelPoint::new(1.2, 5.0)).unwrap();
        assert_eq!(d, 1.0);
        let cosh = WarpingFunction::cosh();
        let (d, path) = model_distance(&cosh, ModelPoint::new(0.0, 0.0), ModelPoint::new(0.0, 2.5)).unwrap();
        assert!((d - 2.5).abs() < 1e-10);
        assert!(path.samples.iter().all(|s| s.point.x == 0.0));
    }

    #[test]
    fn newton_shooting_matches_scan() {
        let w = WarpingFunction::cosh();
        let (a, b) = (ModelPoint::new(0.4, 0.1), ModelPoint::new(0.9, 0.6));
        let conn = connect(&w, a, b).unwrap();
        let (theta, len) = shoot_between(&w, a, b, None, 1e-12).unwrap();
        assert!((len - conn.length).abs() < 1e-10);
        assert!((theta - conn.path.start().angle).abs() < 1e-9);
    }

    #[test]
    fn translation_invariance() {
        let w = WarpingFunction::cosh();
        let (d1, _) = model_distance(&w, ModelPoint::new(0.5, 0.0), ModelPoint::new(1.5, 2.0)).unwrap();
        let (d2, _) = model_distance(&w, ModelPoint::new(0.5, 7.3), ModelPoint::new(1.5, 9.3)).unwrap();
        assert!((d1 - d2).abs() < 1e-8);
    }
}
