use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Control, Settings, Step, System};
use crate::tolerance::{BOUNDARY_SLACK, INTEGRATOR_ATOL, INTEGRATOR_RTOL};
use crate::warping::WarpingFunction;

use super::{GeodesicState, ModelPoint};

/// `x'' = m m' y'², y'' = -2 (m'/m) x' y'` on the state `[x, y, x', y']`.
pub(crate) struct GeodesicSystem<'a>(pub &'a WarpingFunction);

impl System<4> for GeodesicSystem<'_> {
    #[inline]
    fn rhs(&self, _s: f64, z: &[f64; 4]) -> [f64; 4] {
        let (m, dm) = self.0.m_dm(z[0]);
        [z[2], z[3], m * dm * z[3] * z[3], -2.0 * dm / m * z[2] * z[3]]
    }
}

/// Geodesic system plus the scalar Jacobi equation `J'' = -G(x(s)) J`.
struct JacobiSystem<'a>(&'a WarpingFunction);

impl System<6> for JacobiSystem<'_> {
    fn rhs(&self, _s: f64, z: &[f64; 6]) -> [f64; 6] {
        let (m, dm, d2m) = self.0.eval3(z[0]);
        [
            z[2],
            z[3],
            m * dm * z[3] * z[3],
            -2.0 * dm / m * z[2] * z[3],
            z[5],
            d2m / m * z[4],
        ]
    }
}

/// Error control for geodesics. `y'` is controlled purely relatively: it
/// equals `ν/m²`, which is tiny high up on expanding models, and the
/// Clairaut relation needs it to full relative accuracy.
pub(crate) fn settings(rtol: f64) -> Settings<4> {
    Settings::with_rtol(rtol).with_atol(3, 1e-300)
}

/// One point of a sampled geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    /// Arc length from the start.
    pub s: f64,
    pub point: ModelPoint,
    /// Signed angle of the tangent to `∂/∂x`.
    pub angle: f64,
    /// `x'(s)`.
    pub dx: f64,
    /// `y'(s)`.
    pub dy: f64,
}

impl PathSample {
    fn from_phase(w: &WarpingFunction, s: f64, z: &[f64; 4]) -> Self {
        let m = w.m(z[0]);
        PathSample {
            s,
            point: ModelPoint::new(z[0], z[1]),
            angle: (m * z[3]).atan2(z[2]),
            dx: z[2],
            dy: z[3],
        }
    }

    pub fn state(&self) -> GeodesicState {
        GeodesicState { point: self.point, angle: self.angle }
    }
}

/// A unit-speed geodesic sampled at every accepted integrator step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub samples: Vec<PathSample>,
    pub total_length: f64,
    /// `ν >= 0`.
    pub clairaut: f64,
    /// The path hit `x = 0` before its requested length and was cut there.
    pub truncated: bool,
}

/// Worst conservation residuals along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max | |m² y'| - ν |`.
    pub clairaut: f64,
    /// `max | x'² + m² y'² - 1 |`.
    pub speed: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> &PathSample {
        &self.samples[0]
    }

    pub fn end(&self) -> &PathSample {
        self.samples.last().expect("paths have at least one sample")
    }

    /// A path of length zero sitting at `p`.
    pub fn point(p: ModelPoint) -> Self {
        GeodesicPath {
            samples: vec![PathSample { s: 0.0, point: p, angle: 0.0, dx: 1.0, dy: 0.0 }],
            total_length: 0.0,
            clairaut: 0.0,
            truncated: false,
        }
    }

    pub fn residuals(&self, w: &WarpingFunction) -> Residuals {
        let mut r = Residuals { clairaut: 0.0, speed: 0.0 };
        for p in &self.samples {
            let m = w.m(p.point.x);
            let m2 = m * m;
            r.clairaut = r.clairaut.max(((m2 * p.dy).abs() - self.clairaut).abs());
            r.speed = r.speed.max((p.dx * p.dx + m2 * p.dy * p.dy - 1.0).abs());
        }
        r
    }

    /// Apply `y -> sign * y + shift` (an isometry of the model).
    pub(crate) fn transform_y(&mut self, sign: f64, shift: f64) {
        for p in &mut self.samples {
            p.point.y = sign * p.point.y + shift;
            p.dy *= sign;
            p.angle *= sign;
        }
    }

    /// The same geodesic traversed backwards.
    pub fn reversed(&self) -> GeodesicPath {
        let total = self.total_length;
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|p| PathSample {
                s: total - p.s,
                point: p.point,
                angle: super::normalize_angle(p.angle + std::f64::consts::PI),
                dx: -p.dx,
                dy: -p.dy,
            })
            .collect();
        GeodesicPath { samples, total_length: total, clairaut: self.clairaut, truncated: self.truncated }
    }

    /// Point at arc length `s`, by cubic Hermite interpolation between
    /// samples.
    pub fn point_at(&self, s: f64) -> ModelPoint {
        let k = &self.samples;
        let i = k.partition_point(|p| p.s <= s).clamp(1, k.len().max(2) - 1);
        if k.len() < 2 {
            return k[0].point;
        }
        let (a, b) = (&k[i - 1], &k[i]);
        let h = b.s - a.s;
        let tau = ((s - a.s) / h).clamp(0.0, 1.0);
        ModelPoint::new(
            hermite(a.point.x, a.dx, b.point.x, b.dx, h, tau),
            hermite(a.point.y, a.dy, b.point.y, b.dy, h, tau),
        )
    }

    /// Height at which the path crosses the column `y`, for paths along
    /// which `y` increases.
    pub fn x_at_y(&self, y: f64) -> Option<f64> {
        let k = &self.samples;
        if k.len() < 2 || y < k[0].point.y || y > self.end().point.y {
            return None;
        }
        let i = k.partition_point(|p| p.point.y <= y).clamp(1, k.len() - 1);
        let (a, b) = (&k[i - 1], &k[i]);
        let h = b.s - a.s;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hermite(a.point.y, a.dy, b.point.y, b.dy, h, mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hermite(a.point.x, a.dx, b.point.x, b.dx, h, 0.5 * (lo + hi)))
    }

    /// Heights `x` of all samples.
    pub fn heights(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.point.x).collect()
    }
}

fn hermite(p0: f64, d0: f64, p1: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * h * d1
}

/// Where a traced geodesic should stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop {
    Length(f64),
    /// First time `y` reaches this value (`y` is monotone along a geodesic).
    Column(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Reached,
    ExitedBoundary,
    ExitedTop,
    TooLong,
}

pub(crate) struct Trace {
    pub outcome: Outcome,
    pub s: f64,
    pub end: [f64; 4],
    pub samples: Vec<PathSample>,
}

#[derive(Clone, Copy)]
enum Event {
    Boundary,
    Target,
}

/// Move to the zero of `g` inside `step` with Newton iterations on fifth-order
/// single steps from the step start.
fn land<S: System<4>>(sys: &S, step: &Step<4>, guess: f64, g: impl Fn(&[f64; 4]) -> (f64, f64)) -> (f64, [f64; 4]) {
    let mut s = guess.clamp(step.t0, step.t1());
    let mut z = ode::single_step(sys, step.t0, &step.y0, s - step.t0);
    for _ in 0..6 {
        let (val, slope) = g(&z);
        if val == 0.0 || slope == 0.0 {
            break;
        }
        let next = (s - val / slope).clamp(step.t0, step.t1());
        if next == s {
            break;
        }
        s = next;
        z = ode::single_step(sys, step.t0, &step.y0, s - step.t0);
        if val.abs() < 1e-15 {
            break;
        }
    }
    (s, z)
}

/// Locate the first zero of `g` (which is positive at the start of the step
/// and non-positive at the end) on the dense output.
fn first_crossing(step: &Step<4>, g: impl Fn(&[f64; 4]) -> f64) -> f64 {
    let (mut lo, mut hi) = (step.t0, step.t1());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(&step.interpolate(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integrate from `start` until `stop` is met, the path leaves through the
/// boundary or above `domain_max`, or its length exceeds `max_len`.
pub(crate) fn trace(
    w: &WarpingFunction,
    start: [f64; 4],
    stop: Stop,
    max_len: f64,
    settings: &Settings<4>,
    record: bool,
) -> Result<Trace> {
    let sys = GeodesicSystem(w);
    let top = w.domain_max();
    let t_end = match stop {
        Stop::Length(l) => l,
        _ => max_len,
    };
    let mut samples = Vec::new();
    if record {
        samples.push(PathSample::from_phase(w, 0.0, &start));
    }
    let mut outcome = None;
    let mut end = (0.0, start);
    let below = |z: &[f64; 4]| z[0] + BOUNDARY_SLACK;
    let (s_final, z_final) = ode::integrate(&sys, 0.0, start, t_end, settings, |step| {
        let mut best: Option<(f64, Event)> = None;
        if step.y1[0] < -BOUNDARY_SLACK {
            best = Some((first_crossing(step, below), Event::Boundary));
        }
        let target = match stop {
            Stop::Length(_) => None,
            Stop::Column(yt) => {
                if step.y1[1] >= yt {
                    Some(first_crossing(step, |z| yt - z[1]))
                } else {
                    None
                }
            }
        };
        if let Some(s) = target {
            if best.map_or(true, |(b, _)| s < b) {
                best = Some((s, Event::Target));
            }
        }
        match best {
            Some((guess, Event::Boundary)) => {
                end = land(&sys, step, guess, |z| (z[0], z[2]));
                outcome = Some(Outcome::ExitedBoundary);
            }
            Some((guess, Event::Target)) => {
                end = match stop {
                    Stop::Column(yt) => land(&sys, step, guess, |z| (z[1] - yt, z[3])),
                    Stop::Length(_) => unreachable!(),
                };
                outcome = Some(Outcome::Reached);
            }
            None => {
                if step.y1[0] > top {
                    end = (step.t1(), step.y1);
                    outcome = Some(Outcome::ExitedTop);
                } else if record {
                    samples.push(PathSample::from_phase(w, step.t1(), &step.y1));
                }
            }
        }
        if outcome.is_some() { Control::Stop } else { Control::Continue }
    })?;
    let (s, z) = match outcome {
        Some(_) => end,
        None => (s_final, z_final),
    };
    let outcome = outcome.unwrap_or(match stop {
        Stop::Length(_) => Outcome::Reached,
        _ => Outcome::TooLong,
    });
    if record && outcome != Outcome::ExitedTop {
        if let Some(last) = samples.last() {
            if last.s >= s {
                samples.pop();
            }
        }
        if samples.is_empty() || s > 0.0 {
            let mut z = z;
            if outcome == Outcome::ExitedBoundary {
                z[0] = 0.0;
            }
            samples.push(PathSample::from_phase(w, s, &z));
        }
    }
    Ok(Trace { outcome, s, end: z, samples })
}

/// Follow the geodesic with initial data `init` for arc length `length`.
///
/// A path that reaches `x = 0` is cut at the crossing and flagged
/// `truncated`; one that rises above `domain_max` is an error.
pub fn integrate_geodesic(w: &WarpingFunction, init: &GeodesicState, length: f64) -> Result<GeodesicPath> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Precondition(format!("geodesic length must be positive, got {length}")));
    }
    let x0 = init.point.x;
    if !(0.0..=w.domain_max()).contains(&x0) {
        return Err(Error::Domain { t: x0, domain_max: w.domain_max() });
    }
    let start = init.phase(w);
    let tr = trace(w, start, Stop::Length(length), length, &settings(INTEGRATOR_RTOL), true)?;
    match tr.outcome {
        Outcome::ExitedTop => Err(Error::Truncation { height: tr.end[0], domain_max: w.domain_max() }),
        outcome => Ok(GeodesicPath {
            total_length: tr.s,
            clairaut: super::clairaut_constant(w, init),
            truncated: outcome == Outcome::ExitedBoundary,
            samples: tr.samples,
        }),
    }
}

/// First zero in `(0, length]` of the normal Jacobi field `J(0) = 0,
/// J'(0) = 1` along the geodesic with initial data `init`: the first
/// conjugate point. A zero within `1e-9` of the end counts.
pub fn jacobi_first_zero(w: &WarpingFunction, init: &GeodesicState, length: f64) -> Result<Option<f64>> {
    let z = init.phase(w);
    let start = [z[0], z[1], z[2], z[3], 0.0, 1.0];
    let sys = JacobiSystem(w);
    let settings = Settings::with_rtol(1e-10).with_atol(3, 1e-300).with_atol(4, INTEGRATOR_ATOL);
    let mut zero = None;
    let (_, end) = ode::integrate(&sys, 0.0, start, length, &settings, |step| {
        if step.t0 > 0.0 && step.y0[4] > 0.0 && step.y1[4] <= 0.0 {
            let (mut lo, mut hi) = (step.t0, step.t1());
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if step.interpolate(mid)[4] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zero = Some(0.5 * (lo + hi));
            return Control::Stop;
        }
        Control::Continue
    })?;
    if zero.is_none() && end[4].abs() <= 1e-9 {
        zero = Some(length);
    }
    Ok(zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn flat_line() {
        let w = WarpingFunction::flat();
        let p = integrate_geodesic(&w, &GeodesicState::new(1.0, 0.0, FRAC_PI_4), 2f64.sqrt()).unwrap();
        close(p.end().point.x, 2.0, 1e-12);
        close(p.end().point.y, 1.0, 1e-12);
        close(p.total_length, 2f64.sqrt(), 1e-14);
        assert!(!p.truncated);
    }

    #[test]
    fn vertical_ray_has_zero_clairaut() {
        for w in [WarpingFunction::flat(), WarpingFunction::cosh(), WarpingFunction::exp_decay()] {
            let p = integrate_geodesic(&w, &GeodesicState::new(0.5, 2.0, 0.0), 1.0).unwrap();
            close(p.end().point.x, 1.5, 1e-12);
            assert_eq!(p.end().point.y, 2.0);
            assert_eq!(p.clairaut, 0.0);
        }
    }

    #[test]
    fn boundary_is_a_geodesic() {
        let w = WarpingFunction::cosh();
        let p = integrate_geodesic(&w, &GeodesicState::new(0.0, 0.0, FRAC_PI_2), 1.0).unwrap();
        assert_eq!(p.end().point.x, 0.0);
        close(p.end().point.y, 1.0, 1e-12);
    }

    #[test]
    fn downward_path_is_cut_at_the_boundary() {
        let w = WarpingFunction::flat();
        let p = integrate_geodesic(&w, &GeodesicState::new(1.0, 0.0, 3.0 * FRAC_PI_4), 5.0).unwrap();
        assert!(p.truncated);
        close(p.total_length, 2f64.sqrt(), 1e-12);
        close(p.end().point.y, 1.0, 1e-12);
    }

    #[test]
    fn rising_above_domain_is_an_error() {
        let w = WarpingFunction::flat().with_domain_max(2.0).unwrap();
        let err = integrate_geodesic(&w, &GeodesicState::new(1.0, 0.0, 0.0), 5.0).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn conservation_through_turning_point() {
        let w = WarpingFunction::cosh();
        // starts downward with nu = cosh(2) sin(2.5) > 1, so it turns above the boundary
        let init = GeodesicState::new(2.0, 0.0, 2.5);
        let p = integrate_geodesic(&w, &init, 8.0).unwrap();
        assert!(!p.truncated);
        let r = p.residuals(&w);
        assert!(r.clairaut < 1e-9 && r.speed < 1e-9, "{r:?}");
        let turn = p.samples.iter().min_by(|a, b| a.point.x.total_cmp(&b.point.x)).unwrap();
        close(w.m(turn.point.x), p.clairaut, 1e-3);
    }

    #[test]
    fn reversal_swaps_ends() {
        let w = WarpingFunction::cosh();
        let p = integrate_geodesic(&w, &GeodesicState::new(1.0, 0.0, 1.0), 2.0).unwrap();
        let r = p.reversed();
        assert_eq!(r.start().point, p.end().point);
        close(r.end().s, 2.0, 1e-14);
        let back = integrate_geodesic(&w, &r.start().state(), 2.0).unwrap();
        close(back.end().point.x, 1.0, 1e-9);
        close(back.end().point.y, 0.0, 1e-9);
    }

    #[test]
    fn conjugate_points() {
        let cos = WarpingFunction::cos_truncated(1.5).unwrap();
        let z = jacobi_first_zero(&cos, &GeodesicState::new(0.0, 0.0, FRAC_PI_2), 4.0).unwrap();
        close(z.unwrap(), PI, 1e-8);
        let flat = WarpingFunction::flat();
        assert_eq!(jacobi_first_zero(&flat, &GeodesicState::new(1.0, 0.0, 1.0), 4.0).unwrap(), None);
    }
}
