use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::tolerance::LIMINF_THRESHOLD;
use crate::warping::{TailTag, WarpingFunction};

/// Whether `∫_0^∞ dt/m²` diverges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Divergence {
    Divergent,
    Convergent,
    Undetermined,
}

/// Which splitting conclusion the model supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Splitting {
    /// `∫ dt/m² = ∞`: isometric warped-product splitting.
    ST1,
    /// `liminf m = 0`: diffeomorphic product splitting.
    ST2,
    /// Neither hypothesis holds.
    #[serde(rename = "none")]
    None,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl Splitting {
    pub fn as_str(self) -> &'static str {
        match self {
            Splitting::ST1 => "ST1",
            Splitting::ST2 => "ST2",
            Splitting::None => "none",
            Splitting::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingThresholds {
    /// A tail minimum of `m` at or below this counts as `liminf m = 0`.
    pub liminf: f64,
    /// Relative growth of `∫ dt/m²` over the tail window below this counts as
    /// a plateau.
    pub plateau: f64,
}

impl Default for SplittingThresholds {
    fn default() -> Self {
        SplittingThresholds { liminf: LIMINF_THRESHOLD, plateau: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingVerdict {
    /// `∫_0^T dt/m²` with `T` the end of the tail window.
    pub integral_estimate: f64,
    /// Growth of the partial integral across the tail window, relative to
    /// its value at the end.
    pub tail_growth: f64,
    pub divergence_flag: Divergence,
    /// Minimum of `m` over the tail window.
    pub liminf_estimate: f64,
    pub tail: TailTag,
    pub verdict: Splitting,
}

fn inverse_square_integral(w: &WarpingFunction, a: f64, b: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut t = a;
    while t < b {
        let next = (t + 1.0).min(b);
        total += quadrature::integrate(
            |s| {
                let m = w.m(s);
                1.0 / (m * m)
            },
            t,
            next,
            1e-14,
            1e-12,
        )?;
        t = next;
    }
    Ok(total)
}

/// Classify a model by the splitting hypotheses, combining the declared tail
/// tag with evidence from the window `[t_a, t_b]`.
///
/// Finite data cannot decide an improper integral: without a tag the
/// answer is `Undetermined`, and a tag contradicted by the data (a plateau
/// for a bounded profile, say) also yields `Undetermined`.
pub fn splitting_classify(
    w: &WarpingFunction,
    tail_window: (f64, f64),
    thresholds: &SplittingThresholds,
) -> Result<SplittingVerdict> {
    let (ta, tb) = tail_window;
    if !(0.0 <= ta && ta < tb && tb <= w.domain_max()) {
        return Err(Error::Precondition(format!(
            "tail window [{ta}, {tb}] must lie inside [0, {}]",
            w.domain_max()
        )));
    }
    let head = inverse_square_integral(w, 0.0, ta)?;
    let tail = inverse_square_integral(w, ta, tb)?;
    let integral = head + tail;
    let growth = tail / integral;
    let n = 1000;
    let liminf = (0..=n)
        .map(|i| w.m(ta + (tb - ta) * i as f64 / n as f64))
        .fold(f64::INFINITY, f64::min);
    let plateau = growth <= thresholds.plateau;
    let tag = w.tail();
    let divergence = match tag {
        TailTag::BoundedAbove | TailTag::DecaysToZero if !plateau => Divergence::Divergent,
        TailTag::GrowsUnbounded if plateau => Divergence::Convergent,
        _ => Divergence::Undetermined,
    };
    let decayed = liminf <= thresholds.liminf;
    let verdict = if tag == TailTag::DecaysToZero && decayed {
        Splitting::ST2
    } else if divergence == Divergence::Divergent {
        Splitting::ST1
    } else if divergence == Divergence::Convergent && !decayed {
        Splitting::None
    } else {
        Splitting::Undetermined
    };
    Ok(SplittingVerdict {
        integral_estimate: integral,
        tail_growth: growth,
        divergence_flag: divergence,
        liminf_estimate: liminf,
        tail: tag,
        verdict,
    })
}

/// [`splitting_classify`] over `[0.8 domain_max, domain_max]` with default
/// thresholds.
pub fn splitting_classify_default(w: &WarpingFunction) -> Result<SplittingVerdict> {
    let d = w.domain_max();
    splitting_classify(w, (0.8 * d, d), &SplittingThresholds::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_models() {
        assert_eq!(splitting_classify_default(&WarpingFunction::flat()).unwrap().verdict, Splitting::ST1);
        let v = splitting_classify_default(&WarpingFunction::exp_decay()).unwrap();
        assert_eq!(v.verdict, Splitting::ST2);
        assert!(v.liminf_estimate < 1e-3);
        let v = splitting_classify_default(&WarpingFunction::cosh()).unwrap();
        assert_eq!(v.verdict, Splitting::None);
        assert!((v.integral_estimate - 1.0).abs() < 1e-10);
    }

    #[test]
    fn untagged_is_undetermined() {
        for w in [
            WarpingFunction::cosh().with_tail(TailTag::Unknown),
            WarpingFunction::exp_decay().with_tail(TailTag::Unknown),
            WarpingFunction::flat().with_tail(TailTag::Unknown),
        ] {
            let v = splitting_classify_default(&w).unwrap();
            assert_eq!(v.verdict, Splitting::Undetermined);
            assert_eq!(v.divergence_flag, Divergence::Undetermined);
        }
    }

    #[test]
    fn contradicted_tag_is_undetermined() {
        let v = splitting_classify_default(&WarpingFunction::cosh().with_tail(TailTag::BoundedAbove)).unwrap();
        assert_eq!(v.verdict, Splitting::Undetermined);
    }

    #[test]
    fn bad_window() {
        let w = WarpingFunction::flat();
        assert!(splitting_classify(&w, (10.0, 5.0), &SplittingThresholds::default()).is_err());
    }
}
