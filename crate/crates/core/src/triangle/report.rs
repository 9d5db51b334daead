use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::{EQUALITY_ANGLE, EQUALITY_FOOTGAP, HINGE, INEQUALITY};

use super::{GeneralizedOpenTriangle, ModelOpenTriangle, TriangleMeasurements};

/// What the measured triangle is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ComparisonModel {
    Open(ModelOpenTriangle),
    Generalized(Box<GeneralizedOpenTriangle>),
}

/// One inequality `lhs >= rhs`, or one equality `lhs == rhs` in the
/// equality case, with the residual actually computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs` for inequalities, `-|lhs - rhs|` for equalities.
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    /// `lhs >= rhs - tol`.
    pub fn at_least(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let residual = lhs - rhs;
        Check { name: name.into(), lhs, rhs, residual, pass: residual >= -tol }
    }

    /// `|lhs - rhs| <= tol`.
    pub fn equal(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let residual = -(lhs - rhs).abs();
        Check { name: name.into(), lhs, rhs, residual, pass: residual >= -tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub measured: TriangleMeasurements,
    pub checks: Vec<Check>,
    /// Measured and model foot gaps agree, so the angles must agree too.
    pub equality_case: bool,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Smallest residual over all checks.
    pub fn worst_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(f64::INFINITY, f64::min)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Compare the measured angles (and foot gap) of a triangle with its
/// comparison triangle.
///
/// Against an open comparison triangle: `∠p >= ∠p̃`, `∠q >= ∠q̃` and, when
/// a measured foot gap is given, `|ξ(p) ξ(q)| >= |ξ(p̃) ξ(q̃)|`. Equal foot
/// gaps put the triangle in the equality case, where the angles must agree.
///
/// Against a generalized triangle: the angle inequalities at the extreme
/// vertices, the chain `c - a <= d(p̂, q̂) <= L(γ̂) <= Σ b_i`, `L(γ̂) <= b` and
/// the hinge sums `∠q̃_i + ∠p̃_{i+1} <= π`.
pub fn verify_toponogov(measured: &TriangleMeasurements, model: &ComparisonModel) -> Result<ComparisonReport> {
    let (Some(angle_p), Some(angle_q)) = (measured.angle_p, measured.angle_q) else {
        return Err(Error::Precondition("measured angles are required".into()));
    };
    let mut checks = Vec::new();
    let mut equality_case = false;
    match model {
        ComparisonModel::Open(tri) => {
            checks.push(Check::at_least("angle_p", angle_p, tri.angle_p, INEQUALITY));
            checks.push(Check::at_least("angle_q", angle_q, tri.angle_q, INEQUALITY));
            if let Some(gap) = measured.footgap {
                checks.push(Check::at_least("footgap", gap, tri.footgap, INEQUALITY));
                if (gap - tri.footgap).abs() <= EQUALITY_FOOTGAP {
                    equality_case = true;
                    checks.push(Check::equal("equal_angle_p", angle_p, tri.angle_p, EQUALITY_ANGLE));
                    checks.push(Check::equal("equal_angle_q", angle_q, tri.angle_q, EQUALITY_ANGLE));
                }
            }
        }
        ComparisonModel::Generalized(got) => {
            let arc = got.shortest_arc.path.total_length;
            checks.push(Check::at_least("angle_p", angle_p, got.angle_p, INEQUALITY));
            checks.push(Check::at_least("angle_q", angle_q, got.angle_q, INEQUALITY));
            checks.push(Check::at_least("chain_lower", got.chord, (measured.c - measured.a).abs(), INEQUALITY));
            checks.push(Check::at_least("chain_arc", arc, got.chord, INEQUALITY));
            checks.push(Check::at_least("chain_upper", got.broken_length, arc, INEQUALITY));
            checks.push(Check::at_least("arc_vs_b", measured.b, arc, INEQUALITY));
            for (i, &s) in got.hinge_angles.iter().enumerate() {
                checks.push(Check::at_least(&format!("hinge_{}", i + 1), PI, s, HINGE));
            }
        }
    }
    Ok(ComparisonReport { measured: *measured, checks, equality_case })
}
