use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{integrate_geodesic, GeodesicState, ModelPoint};
use crate::tolerance::{DISTANCE, INEQUALITY};
use crate::triangle::Check;
use crate::warping::WarpingFunction;

use super::{case_rng, extract_triangle_with, surface_geodesic_bvp, Component, SyntheticSurface};

pub(crate) const CYLINDER_STREAM: u64 = 4;

const EXTENSION: f64 = 1e-6;
const PULLBACK: f64 = 1e-10;

/// One probe point of the flat cylinder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutLocusSample {
    pub point: ModelPoint,
    /// Distances to the components `x = 0` and `x = ℓ`.
    pub distances_to_components: (f64, f64),
    /// Number of components realizing `d(∂X, p)`.
    pub n_minimizers: usize,
    pub is_midpoint: bool,
    /// The `∂X`-segment to `p` stops minimizing right after `p`.
    pub is_cut: bool,
}

/// One of the five checks of the cylinder experiment, over all probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderCheck {
    pub name: String,
    pub pass: bool,
    pub worst_residual: f64,
    pub cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderReport {
    pub circumference: f64,
    pub height: f64,
    pub samples: Vec<CutLocusSample>,
    /// Rows per probe.
    pub cases: Vec<Vec<Check>>,
    pub checks: Vec<CylinderCheck>,
    /// No probes were run; the checks pass vacuously.
    pub no_evidence: bool,
}

impl CylinderReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

const CHECKS: [&str; 5] = ["cut-locus", "half-height", "right-angles", "footgap-constant", "pullback"];

fn group(name: &str) -> &'static str {
    match name {
        "cut_locus" | "minimizers" => CHECKS[0],
        "half_height" => CHECKS[1],
        "footgap_constant" => CHECKS[3],
        "pullback" => CHECKS[4],
        _ => CHECKS[2],
    }
}

fn probe_point<R: Rng>(rng: &mut R, i: usize, circumference: f64, height: f64) -> ModelPoint {
    let y = rng.gen_range(0.0..circumference);
    if i % 2 == 0 {
        return ModelPoint::new(0.5 * height, y);
    }
    loop {
        let x = rng.gen_range(0.01 * height..0.99 * height);
        if (x - 0.5 * height).abs() > 1e-4 * height {
            return ModelPoint::new(x, y);
        }
    }
}

fn sample(s: &SyntheticSurface, p: ModelPoint, height: f64) -> Result<CutLocusSample> {
    let d1 = surface_geodesic_bvp(s, p, s.foot(p, Component::Inner))?.length;
    let d2 = surface_geodesic_bvp(s, p, s.foot(p, Component::Outer))?.length;
    let d = d1.min(d2);
    let n_minimizers = [d1, d2].iter().filter(|&&v| v - d <= DISTANCE).count();
    let is_midpoint = (d1 - d2).abs() <= DISTANCE && (d1 + d2 - height).abs() <= DISTANCE;
    let beyond = match s.nearest_component(p) {
        Component::Inner => ModelPoint::new(p.x + EXTENSION, p.y),
        Component::Outer => ModelPoint::new(p.x - EXTENSION, p.y),
    };
    let is_cut = s.boundary_distance(beyond) < d + EXTENSION - 1e-12;
    Ok(CutLocusSample { point: p, distances_to_components: (d1, d2), n_minimizers, is_midpoint, is_cut })
}

/// `Φ(t, θ)`: follow the inward normal geodesic from `(0, θ)` for time `t`.
fn normal_exponential(n: &WarpingFunction, t: f64, theta: f64) -> Result<ModelPoint> {
    Ok(integrate_geodesic(n, &GeodesicState::new(0.0, theta, 0.0), t)?.end().point)
}

fn pullback_residual(n: &WarpingFunction, t: f64, theta: f64) -> Result<f64> {
    let h = 1e-4;
    let diff = |a: ModelPoint, b: ModelPoint| ((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h));
    let jt = diff(normal_exponential(n, t + h, theta)?, normal_exponential(n, t - h, theta)?);
    let jth = diff(normal_exponential(n, t, theta + h)?, normal_exponential(n, t, theta - h)?);
    let g11 = jt.0 * jt.0 + jt.1 * jt.1;
    let g12 = jt.0 * jth.0 + jt.1 * jth.1;
    let g22 = jth.0 * jth.0 + jth.1 * jth.1;
    Ok((g11 - 1.0).abs().max(g12.abs()).max((g22 - 1.0).abs()))
}

fn probe_rows(s: &SyntheticSurface, sm: &CutLocusSample, partner: Option<ModelPoint>, height: f64) -> Result<Vec<Check>> {
    let p = sm.point;
    let mut rows = vec![
        Check::equal("cut_locus", sm.is_cut as u8 as f64, sm.is_midpoint as u8 as f64, 0.0),
        Check::at_least("half_height", 0.5 * height, s.boundary_distance(p), DISTANCE),
    ];
    if sm.is_midpoint {
        rows.push(Check::at_least("minimizers", sm.n_minimizers as f64, 2.0, 0.0));
    }
    if let Some(q) = partner {
        for (name, feet) in [
            ("inner_inner", (Component::Inner, Component::Inner)),
            ("outer_outer", (Component::Outer, Component::Outer)),
        ] {
            let t = extract_triangle_with(s, p, q, feet)?;
            rows.push(Check::equal(&format!("angle_p_{name}"), t.angle_p.unwrap_or(f64::NAN), FRAC_PI_2, INEQUALITY));
            rows.push(Check::equal(&format!("angle_q_{name}"), t.angle_q.unwrap_or(f64::NAN), FRAC_PI_2, INEQUALITY));
        }
        let gaps = (0..=20)
            .map(|k| {
                let t = 0.5 * height * k as f64 / 20.0;
                surface_geodesic_bvp(s, ModelPoint::new(t, p.y), ModelPoint::new(t, q.y)).map(|g| g.length)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (lo, hi) = gaps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &g| (l.min(g), h.max(g)));
        rows.push(Check::equal("footgap_constant", hi, lo, DISTANCE));
    }
    let r = pullback_residual(s.warping(), p.x, p.y)?;
    rows.push(Check::equal("pullback", r, 0.0, PULLBACK));
    Ok(rows)
}

/// Probe the flat cylinder `[0, ℓ] × S¹` with `n_probes` points.
///
/// Even probes sit on the mid-level circle, odd ones at random heights away
/// from it. Per probe: the cut test (the `∂X`-segment stops minimizing
/// right after `p`) agrees with `d₁ = d₂ = ℓ/2`; `d(∂X, p) <= ℓ/2`;
/// midpoints have two minimizing `∂X`-segments; the pullback of the metric
/// under `Φ(t, θ) = exp(t ν(θ))` is the product metric. Each mid-level probe
/// also forms a triangle with the next one, whose four angles must be `π/2`
/// and whose `t ↦ d(μ₁(t), μ₂(t))` must be constant.
pub fn cylinder_splitting_experiment(circumference: f64, height: f64, n_probes: usize, seed: u64) -> Result<CylinderReport> {
    let s = SyntheticSurface::cylinder(circumference, height)?;
    let points: Vec<ModelPoint> = (0..n_probes)
        .map(|i| probe_point(&mut case_rng(seed, CYLINDER_STREAM, i as u64), i, circumference, height))
        .collect();
    let samples = points.par_iter().map(|&p| sample(&s, p, height)).collect::<Result<Vec<_>>>()?;
    let cases = (0..n_probes)
        .into_par_iter()
        .map(|i| {
            let partner = (i % 2 == 0 && i + 2 < n_probes).then(|| points[i + 2]);
            probe_rows(&s, &samples[i], partner, height)
        })
        .collect::<Result<Vec<_>>>()?;
    let checks = CHECKS
        .iter()
        .map(|&name| {
            let rows: Vec<&Check> = cases.iter().flatten().filter(|c| group(&c.name) == name).collect();
            CylinderCheck {
                name: name.into(),
                pass: rows.iter().all(|c| c.pass),
                worst_residual: rows.iter().map(|c| c.residual).fold(0.0, f64::min),
                cases: rows.len(),
            }
        })
        .collect();
    Ok(CylinderReport { circumference, height, samples, cases, checks, no_evidence: n_probes == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_cylinder_passes_all_checks() {
        let r = cylinder_splitting_experiment(2.0 * PI, 2.0, 40, 3).unwrap();
        for c in &r.checks {
            assert!(c.pass && c.cases > 0, "{c:?}");
        }
        assert!(r.samples.iter().step_by(2).all(|s| s.is_midpoint && s.n_minimizers == 2));
        assert!(r.samples.iter().skip(1).step_by(2).all(|s| !s.is_midpoint && !s.is_cut));
    }

    #[test]
    fn off_mid_probe() {
        let s = SyntheticSurface::cylinder(2.0 * PI, 2.0).unwrap();
        let sm = sample(&s, ModelPoint::new(0.5, 1.0), 2.0).unwrap();
        assert!(!sm.is_midpoint && !sm.is_cut);
        assert!((s.boundary_distance(sm.point) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_probes_is_vacuous() {
        let r = cylinder_splitting_experiment(2.0 * PI, 2.0, 0, 3).unwrap();
        assert!(r.no_evidence && r.passed());
    }
}
