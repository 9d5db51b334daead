use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warping::WarpingFunction;

use super::{connect, jacobi_first_zero, ModelPoint};

/// Seed used by [`sector_cut_pair_probe`].
pub const PROBE_SEED: u64 = 0x5ec7_0b0e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    /// No violating pair among the samples. Evidence, not proof.
    NoViolationFound,
    Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Two connecting geodesics of equal minimal length.
    MultipleMinimizers,
    /// The minimizer carries a conjugate point at this arc length.
    ConjugatePoint(f64),
}

/// Outcome of sampling point pairs in the sector `0 < y < θ₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorProbeReport {
    pub theta0: f64,
    pub pairs_tested: usize,
    /// Pairs for which no connecting geodesic was found (not violations).
    pub unconnected: usize,
    pub violating_pair: Option<(ModelPoint, ModelPoint)>,
    pub violation: Option<ViolationKind>,
    pub verdict: ProbeVerdict,
}

/// Look for pairs of cut points in the sector of width `theta0`, sampling
/// `n_samples` pairs with a fixed seed.
pub fn sector_cut_pair_probe(w: &WarpingFunction, theta0: f64, n_samples: usize) -> Result<SectorProbeReport> {
    sector_cut_pair_probe_seeded(w, theta0, n_samples, PROBE_SEED)
}

/// As [`sector_cut_pair_probe`] with an explicit seed.
///
/// Heights are uniform in `[0, min(domain_max, 3)]`; every fourth pair is
/// placed on the boundary, where conjugate points along the boundary
/// geodesic show up first. Sampling stops at the first violation.
pub fn sector_cut_pair_probe_seeded(
    w: &WarpingFunction,
    theta0: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SectorProbeReport> {
    if !(theta0 > 0.0) {
        return Err(Error::Precondition(format!("sector width must be positive, got {theta0}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = w.domain_max().min(3.0);
    let mut report = SectorProbeReport {
        theta0,
        pairs_tested: 0,
        unconnected: 0,
        violating_pair: None,
        violation: None,
        verdict: ProbeVerdict::NoViolationFound,
    };
    for i in 0..n_samples {
        let (x1, x2) = if i % 4 == 3 { (0.0, 0.0) } else { (rng.gen_range(0.0..=h), rng.gen_range(0.0..=h)) };
        let p = ModelPoint::new(x1, rng.gen_range(0.0..theta0));
        let q = ModelPoint::new(x2, rng.gen_range(0.0..theta0));
        report.pairs_tested += 1;
        let conn = match connect(w, p, q) {
            Ok(c) => c,
            Err(Error::Connectivity(..)) => {
                report.unconnected += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let kind = if conn.multiple_minimizers {
            Some(ViolationKind::MultipleMinimizers)
        } else if conn.length > 0.0 {
            jacobi_first_zero(w, &conn.path.start().state(), conn.length)?.map(ViolationKind::ConjugatePoint)
        } else {
            None
        };
        if let Some(kind) = kind {
            report.violating_pair = Some((p, q));
            report.violation = Some(kind);
            report.verdict = ProbeVerdict::Violation;
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sector_has_no_cut_pairs() {
        let r = sector_cut_pair_probe(&WarpingFunction::flat(), 10.0, 40).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::NoViolationFound);
        assert_eq!(r.pairs_tested, 40);
        assert!(r.violating_pair.is_none());
    }

    #[test]
    fn spherical_band_has_conjugate_points() {
        let w = WarpingFunction::cos_truncated(1.5).unwrap();
        let r = sector_cut_pair_probe(&w, 6.0, 500).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Violation);
        assert!(r.violating_pair.is_some());
    }

    #[test]
    fn rejects_empty_sector() {
        assert!(sector_cut_pair_probe(&WarpingFunction::flat(), 0.0, 10).is_err());
    }
}
