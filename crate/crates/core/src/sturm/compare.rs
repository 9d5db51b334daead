use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::splitting::{splitting_classify_default, Divergence};
use super::{first_zero, solve_scalar_jacobi, CurvatureProfile, FirstZero, SturmProblem};

/// Status of one of the two comparison implications on a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Implication {
    /// Its hypotheses do not hold (or cannot be established).
    NotApplicable,
    /// Hypotheses hold and the conclusion is observed on the horizon.
    Consistent,
    /// Hypotheses hold on the horizon but the conclusion is not observed.
    /// For the rigidity implication this only means "not yet": a field that
    /// stays positive up to the horizon may still vanish beyond it.
    Inconsistent,
}

/// Outcome of comparing `f'' + K f = 0` against `g'' + G g = 0`, both with
/// `f(0) = 1, f'(0) = -λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SturmDiagnosis {
    pub lambda: f64,
    pub horizon: f64,
    /// `max |K - G|` on the sampling grid.
    pub max_curvature_gap: f64,
    /// `K ≡ G` within `1e-8`.
    pub curvatures_agree: bool,
    pub f_zero: Option<FirstZero>,
    pub g_zero: Option<FirstZero>,
    /// `max |f - g|` on the samples of `f`.
    pub max_deviation: f64,
    /// Divergence of `∫ dt/m²` for the model solution `m'' + G m = 0,
    /// m(0) = 1, m'(0) = 0`.
    pub divergence: Divergence,
    /// `λ = 0`, `f > 0` and divergence imply `K ≡ G`.
    pub rigidity: Implication,
    /// `λ > 0` and divergence imply that `f` has a zero.
    pub focal: Implication,
}

fn model_divergence(g: &CurvatureProfile, horizon: f64) -> Result<Divergence> {
    let m = solve_scalar_jacobi(&SturmProblem::new(g.clone(), 1.0, 0.0, horizon)?)?;
    if first_zero(&m).is_some() {
        // 1/m² is not integrable across a zero of m
        return Ok(Divergence::Divergent);
    }
    Ok(match g {
        CurvatureProfile::Constant(c) if *c >= 0.0 => Divergence::Divergent,
        CurvatureProfile::Constant(_) => Divergence::Convergent,
        CurvatureProfile::FromWarping(w) => splitting_classify_default(w)?.divergence_flag,
        _ => Divergence::Undetermined,
    })
}

/// Compare the boundary Jacobi fields of curvatures `K >= G` on `[0, horizon]`.
pub fn sturm_compare(k: &CurvatureProfile, g: &CurvatureProfile, lambda: f64, horizon: f64) -> Result<SturmDiagnosis> {
    let n = 2000;
    let mut gap: f64 = 0.0;
    for i in 0..=n {
        let t = horizon * i as f64 / n as f64;
        let (kv, gv) = (k.eval(t), g.eval(t));
        if kv < gv - 1e-12 * gv.abs().max(1.0) {
            return Err(Error::Ordering(format!("K({t}) = {kv} < G({t}) = {gv}")));
        }
        gap = gap.max(kv - gv);
    }
    let f = solve_scalar_jacobi(&SturmProblem::boundary(k.clone(), lambda, horizon)?)?;
    let gf = solve_scalar_jacobi(&SturmProblem::boundary(g.clone(), lambda, horizon)?)?;
    let f_zero = first_zero(&f);
    let g_zero = first_zero(&gf);
    let max_deviation = f.samples.iter().map(|&(t, v, _)| (v - gf.eval(t).0).abs()).fold(0.0, f64::max);
    let divergence = model_divergence(g, horizon)?;
    let agree = gap <= 1e-8;
    let rigidity = if lambda != 0.0 || f_zero.is_some() || divergence != Divergence::Divergent {
        Implication::NotApplicable
    } else if agree {
        Implication::Consistent
    } else {
        Implication::Inconsistent
    };
    let focal = if lambda <= 0.0 || divergence != Divergence::Divergent {
        Implication::NotApplicable
    } else if f_zero.is_some() {
        Implication::Consistent
    } else {
        Implication::Inconsistent
    };
    Ok(SturmDiagnosis {
        lambda,
        horizon,
        max_curvature_gap: gap,
        curvatures_agree: agree,
        f_zero,
        g_zero,
        max_deviation,
        divergence,
        rigidity,
        focal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warping::WarpingFunction;

    #[test]
    fn flat_focal_point() {
        let z = CurvatureProfile::Constant(0.0);
        let d = sturm_compare(&z, &z, 0.5, 5.0).unwrap();
        assert!((d.f_zero.unwrap().t - 2.0).abs() < 1e-10);
        assert_eq!(d.focal, Implication::Consistent);
    }

    #[test]
    fn hyperbolic_model_is_not_rigid() {
        let d = sturm_compare(&CurvatureProfile::Constant(0.0), &CurvatureProfile::Constant(-1.0), 0.0, 5.0).unwrap();
        assert!(d.f_zero.is_none());
        assert!(!d.curvatures_agree);
        assert_eq!(d.divergence, Divergence::Convergent);
        assert_eq!(d.rigidity, Implication::NotApplicable);
    }

    #[test]
    fn identical_profiles_give_identical_fields() {
        let g = CurvatureProfile::FromWarping(WarpingFunction::cosh());
        let d = sturm_compare(&g, &g, 0.0, 3.0).unwrap();
        assert_eq!(d.max_deviation, 0.0);
        assert!(d.curvatures_agree);
        let k = CurvatureProfile::Cosine { offset: 0.2, amplitude: 0.1, frequency: 3.0 };
        let d = sturm_compare(&k, &k, 0.0, 3.0).unwrap();
        assert!(d.max_deviation <= 1e-8);
    }

    #[test]
    fn ordering_violation() {
        let err = sturm_compare(&CurvatureProfile::Constant(-1.0), &CurvatureProfile::Constant(0.0), 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Ordering(_)));
    }
}
