use crate::error::{Error, Result};
use crate::quadrature;
use crate::warping::WarpingFunction;

/// `m(a + δ) - m(a)` without cancellation for tiny `δ`.
fn increment(w: &WarpingFunction, a: f64, delta: f64) -> f64 {
    if delta.abs() < 1e-6 * a.abs().max(1.0) {
        let (_, d1, d2) = w.eval3(a);
        d1 * delta + 0.5 * d2 * delta * delta
    } else {
        w.m(a + delta) - w.m(a)
    }
}

/// `∫_a^b f(m, sqrt(m² - ν²)) dt` on a monotone branch, where the square root
/// may vanish at either endpoint like `sqrt(t - a)`. Each half is
/// integrated after `t = a + u²` (resp. `t = b - u²`), which removes the
/// inverse square-root singularity.
fn branch_integral(w: &WarpingFunction, nu: f64, a: f64, b: f64, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    for t in [a, b] {
        if !(0.0..=w.domain_max()).contains(&t) {
            return Err(Error::Domain { t, domain_max: w.domain_max() });
        }
    }
    let n = 256;
    for i in 1..n {
        let t = a + (b - a) * i as f64 / n as f64;
        let m = w.m(t);
        if m <= nu {
            return Err(Error::Branch { t, m, nu });
        }
    }
    let mut ends = [(a, 1.0), (b, -1.0)];
    for (t, _) in &mut ends {
        let m = w.m(*t);
        if m < nu * (1.0 - 1e-12) {
            return Err(Error::Branch { t: *t, m, nu });
        }
        if (m - nu).abs() <= 1e-12 * nu.max(1.0) && w.dm(*t).abs() <= 1e-9 {
            return Err(Error::Quadrature(format!(
                "non-integrable singularity at t = {t}: m = nu with m' = 0"
            )));
        }
    }
    let c = 0.5 * (a + b);
    let half = (c - a).sqrt();
    let mut total = 0.0;
    for (end, dir) in ends {
        let gap = w.m(end) - nu;
        let piece = quadrature::integrate(
            |u| {
                let delta = dir * u * u;
                let diff = gap + increment(w, end, delta);
                let m = nu + diff;
                let root = (diff * (m + nu)).max(0.0).sqrt();
                2.0 * u * f(m, root)
            },
            0.0,
            half,
            1e-14,
            1e-12,
        )?;
        total += piece;
    }
    Ok(total)
}

/// Length of a geodesic branch with Clairaut constant `ν` between heights
/// `x1` and `x2`: `∫ m / sqrt(m² - ν²) dt`.
///
/// The branch must be monotone: `m > ν` strictly inside the interval. A
/// turning point `m = ν` is allowed at an endpoint.
pub fn quadrature_length(w: &WarpingFunction, nu: f64, x1: f64, x2: f64) -> Result<f64> {
    let (a, b) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    if a == b {
        return Ok(0.0);
    }
    if nu == 0.0 {
        branch_integral(w, nu, a, b, |_, _| 0.0)?;
        return Ok(b - a);
    }
    branch_integral(w, nu, a, b, |m, root| m / root)
}

/// The lower bound `t2 - t1 + (ν²/2) ∫ dt / (m sqrt(m² - ν²))` for the length
/// of a geodesic branch between heights `t1 <= t2`.
pub fn length_lower_bound(w: &WarpingFunction, nu: f64, t1: f64, t2: f64) -> Result<f64> {
    if t2 < t1 {
        return Err(Error::Precondition(format!("length bound needs t1 <= t2, got {t1} > {t2}")));
    }
    if t1 == t2 {
        return Ok(0.0);
    }
    if nu == 0.0 {
        branch_integral(w, nu, t1, t2, |_, _| 0.0)?;
        return Ok(t2 - t1);
    }
    let i = branch_integral(w, nu, t1, t2, |m, root| 1.0 / (m * root))?;
    Ok(t2 - t1 + 0.5 * nu * nu * i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_closed_forms() {
        let w = WarpingFunction::flat();
        assert!((quadrature_length(&w, 0.6, 0.0, 1.0).unwrap() - 1.25).abs() < 1e-12);
        assert!((length_lower_bound(&w, 0.6, 0.0, 1.0).unwrap() - 1.225).abs() < 1e-12);
        assert!((quadrature_length(&w, 0.6, 1.0, 0.0).unwrap() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn vertical_segments() {
        let w = WarpingFunction::cosh();
        assert_eq!(quadrature_length(&w, 0.0, 1.0, 3.0).unwrap(), 2.0);
        assert_eq!(length_lower_bound(&w, 0.0, 0.0, 5.0).unwrap(), 5.0);
        assert_eq!(length_lower_bound(&w, 0.7, 2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn turning_point_at_endpoint_is_integrable() {
        // ∫ cosh t / sqrt(cosh² t - ν²) dt = acosh(sinh t / sqrt(ν² - 1))
        let w = WarpingFunction::cosh();
        let nu = 0.5f64.cosh();
        let k = (nu * nu - 1.0).sqrt();
        let exact = (1.5f64.sinh() / k).acosh();
        let v = quadrature_length(&w, nu, 0.5, 1.5).unwrap();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn branch_and_singularity_errors() {
        let w = WarpingFunction::cosh();
        assert!(matches!(quadrature_length(&w, 2.0, 0.0, 3.0), Err(Error::Branch { .. })));
        assert!(matches!(quadrature_length(&w, 1.0, 0.0, 1.0), Err(Error::Quadrature(_))));
        assert!(matches!(length_lower_bound(&w, 0.5, 2.0, 1.0), Err(Error::Precondition(_))));
    }
}
