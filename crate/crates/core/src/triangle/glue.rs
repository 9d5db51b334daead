use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{model_distance, GeodesicPath, ModelPoint};
use crate::tolerance::{DISTANCE, HINGE, INEQUALITY};
use crate::warping::WarpingFunction;

use super::shorten::{shortest_arc_in_domain, ShortestArc};
use super::{
    angle_at_end, angle_at_start, solve_comparison_triangle, validate_thinness, CurvatureBoundProbe,
    InjectivityProbe, ModelOpenTriangle, Thinness, TriangleMeasurements,
};

/// One triangle `OT(∂X, p_i, q_i)` of a chain, with the heights
/// `d(∂X, γ_i(s))` sampled along its opposite side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrianglePiece {
    pub measured: TriangleMeasurements,
    pub side_heights: Vec<f64>,
}

impl TrianglePiece {
    pub fn new(measured: TriangleMeasurements, side_heights: Vec<f64>) -> Self {
        TrianglePiece { measured, side_heights }
    }
}

/// The broken side of a glued chain: the opposite sides of the comparison
/// triangles placed next to each other, read as a graph `x = η(y)` over
/// `y_left <= y <= y_right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaffold {
    pub arcs: Vec<GeodesicPath>,
    pub y_left: f64,
    pub y_right: f64,
}

impl Scaffold {
    pub fn length(&self) -> f64 {
        self.arcs.iter().map(|a| a.total_length).sum()
    }

    /// Point at arc length `s` along the concatenated arcs.
    pub fn point_at(&self, s: f64) -> ModelPoint {
        let mut rest = s;
        for arc in &self.arcs {
            if rest <= arc.total_length {
                return arc.point_at(rest.max(0.0));
            }
            rest -= arc.total_length;
        }
        self.arcs.last().expect("non-empty scaffold").end().point
    }

    /// `η(y)`, or `None` outside `[y_left, y_right]`.
    pub fn eta(&self, y: f64) -> Option<f64> {
        self.arcs.iter().find_map(|a| a.x_at_y(y))
    }
}

/// A chain of comparison triangles glued along their shared vertical sides,
/// with the shortest arc joining the extreme vertices inside the glued
/// domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedOpenTriangle {
    /// `y`-coordinates of the two extreme vertical sides.
    pub feet: (f64, f64),
    pub vertex_p: ModelPoint,
    pub vertex_q: ModelPoint,
    /// The comparison triangles, each in its own position (`p̃ = (a, 0)`).
    pub pieces: Vec<ModelOpenTriangle>,
    /// Shift in `y` applied to each piece.
    pub offsets: Vec<f64>,
    pub broken_side: Scaffold,
    pub shortest_arc: ShortestArc,
    pub angle_p: f64,
    pub angle_q: f64,
    /// `∠q̃_i + ∠p̃_{i+1}` at each interior vertical side.
    pub hinge_angles: Vec<f64>,
    /// Sum of the `b_i`.
    pub broken_length: f64,
    /// Model distance between the extreme vertices.
    pub chord: f64,
    /// Model distance between the extreme feet.
    pub footgap: f64,
    pub thinness: Vec<Thinness>,
}

/// Glue the comparison triangles of a chain of thin open triangles.
pub fn glue_generalized_triangle(w: &WarpingFunction, chain: &[TrianglePiece]) -> Result<GeneralizedOpenTriangle> {
    glue_generalized_triangle_with(w, chain, &CurvatureBoundProbe)
}

/// As [`glue_generalized_triangle`] with a chosen injectivity probe for the
/// thinness test.
pub fn glue_generalized_triangle_with(
    w: &WarpingFunction,
    chain: &[TrianglePiece],
    probe: &dyn InjectivityProbe,
) -> Result<GeneralizedOpenTriangle> {
    if chain.is_empty() {
        return Err(Error::Precondition("empty chain".into()));
    }
    for (i, pair) in chain.windows(2).enumerate() {
        let (l, r) = (&pair[0].measured, &pair[1].measured);
        if (l.c - r.a).abs() > DISTANCE {
            return Err(Error::Precondition(format!(
                "pieces {i} and {} do not share a vertex: heights {} and {}",
                i + 1,
                l.c,
                r.a
            )));
        }
        if let (Some(q), Some(p)) = (l.angle_q, r.angle_p) {
            if (q + p - PI).abs() > INEQUALITY {
                return Err(Error::Precondition(format!(
                    "angles {q} and {p} at vertex {} are not supplementary",
                    i + 1
                )));
            }
        }
    }

    let mut pieces = Vec::with_capacity(chain.len());
    let mut thinness = Vec::with_capacity(chain.len());
    for (i, piece) in chain.iter().enumerate() {
        let t = validate_thinness(w, &piece.measured, &piece.side_heights, probe)?;
        if !t.thin {
            return Err(Error::Precondition(format!(
                "piece {i} is not thin: b = {} against injectivity bound {}",
                piece.measured.b, t.bound
            )));
        }
        thinness.push(t);
        pieces.push(solve_comparison_triangle(w, &piece.measured)?);
    }

    let hinge_angles: Vec<f64> = pieces.windows(2).map(|p| p[0].angle_q + p[1].angle_p).collect();
    if let Some((i, s)) = hinge_angles.iter().enumerate().find(|(_, &s)| s > PI + HINGE) {
        return Err(Error::ComparisonViolation(format!(
            "comparison angles at vertex {} sum to {s} > π",
            i + 1
        )));
    }

    let mut offsets = Vec::with_capacity(pieces.len());
    let mut arcs = Vec::with_capacity(pieces.len());
    let mut y = 0.0;
    for tri in &pieces {
        offsets.push(y);
        let mut arc = tri.opposite_side.clone();
        arc.transform_y(1.0, y);
        arcs.push(arc);
        y += tri.feet.1;
    }
    let broken_side = Scaffold { arcs, y_left: 0.0, y_right: y };
    let vertex_p = ModelPoint::new(chain[0].measured.a, 0.0);
    let vertex_q = ModelPoint::new(chain[chain.len() - 1].measured.c, y);

    let shortest_arc = if pieces.len() == 1 {
        let path = broken_side.arcs[0].clone();
        let r = path.residuals(w);
        ShortestArc {
            sweeps: 0,
            lengths: vec![path.total_length],
            geodesic_residual: r.clairaut.max(r.speed),
            contact: false,
            path,
        }
    } else {
        shortest_arc_in_domain(w, &broken_side, vertex_p, vertex_q)?
    };
    let (chord, _) = model_distance(w, vertex_p, vertex_q)?;
    let (footgap, _) = model_distance(w, ModelPoint::new(0.0, 0.0), ModelPoint::new(0.0, y))?;

    Ok(GeneralizedOpenTriangle {
        feet: (0.0, y),
        vertex_p,
        vertex_q,
        angle_p: angle_at_start(&shortest_arc.path),
        angle_q: angle_at_end(&shortest_arc.path),
        broken_length: chain.iter().map(|p| p.measured.b).sum(),
        pieces,
        offsets,
        broken_side,
        shortest_arc,
        hinge_angles,
        chord,
        footgap,
        thinness,
    })
}
