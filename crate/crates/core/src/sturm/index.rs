use crate::error::{Error, Result};
use crate::quadrature;

use super::{CurvatureProfile, ScalarField};

/// A scalar field along a geodesic, as seen by the index form.
pub trait Field {
    /// `(f(t), f'(t))`.
    fn value(&self, t: f64) -> (f64, f64);
    fn horizon(&self) -> f64;
    /// Points where `f'` may be discontinuous or the integrand changes
    /// character; the index form is integrated piecewise between them.
    fn breakpoints(&self) -> Vec<f64>;
}

impl Field for ScalarField {
    fn value(&self, t: f64) -> (f64, f64) {
        self.eval(t)
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }
}

/// Continuous piecewise-linear trial field through `(t_i, v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearField {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinearField {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 || knots[0].0 != 0.0 {
            return Err(Error::Precondition("a trial field needs at least two knots starting at t = 0".into()));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Precondition("trial field knots must increase".into()));
        }
        Ok(PiecewiseLinearField { knots })
    }
}

impl Field for PiecewiseLinearField {
    fn value(&self, t: f64) -> (f64, f64) {
        let k = &self.knots;
        let i = k.partition_point(|p| p.0 <= t).clamp(1, k.len() - 1) - 1;
        let ((t0, v0), (t1, v1)) = (k[i], k[i + 1]);
        let slope = (v1 - v0) / (t1 - t0);
        (v0 + slope * (t - t0), slope)
    }

    fn horizon(&self) -> f64 {
        self.knots.last().expect("non-empty").0
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots.iter().map(|p| p.0).collect()
    }
}

/// `I = ∫_0^ℓ (f'² - K f²) dt` and `I_boundary = I - λ f(0)²`.
pub fn index_form_value<F: Field>(k: &CurvatureProfile, f: &F, lambda: f64, ell: f64) -> Result<(f64, f64)> {
    if !(ell >= 0.0 && ell <= f.horizon() * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("index form length {ell} exceeds the horizon {}", f.horizon())));
    }
    let mut cuts: Vec<f64> = f.breakpoints().into_iter().filter(|&t| t > 0.0 && t < ell).collect();
    cuts.insert(0, 0.0);
    cuts.push(ell);
    let integrand = |t: f64| {
        let (v, d) = f.value(t);
        d * d - k.eval(t) * v * v
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += quadrature::integrate(integrand, w[0], w[1], 1e-15, 1e-13)?;
    }
    let f0 = f.value(0.0).0;
    if !total.is_finite() {
        return Err(Error::Quadrature("index form is not finite".into()));
    }
    Ok((total, total - lambda * f0 * f0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturm::{solve_scalar_jacobi, SturmProblem};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn focal_cancellation() {
        let k = CurvatureProfile::Constant(0.0);
        let f = solve_scalar_jacobi(&SturmProblem::boundary(k.clone(), 0.5, 2.0).unwrap()).unwrap();
        let (i, ib) = index_form_value(&k, &f, 0.5, 2.0).unwrap();
        assert!((i - 0.5).abs() < 1e-12);
        assert!(ib.abs() < 1e-12);
    }

    #[test]
    fn constant_field_has_zero_index() {
        let k = CurvatureProfile::Constant(0.0);
        let f = solve_scalar_jacobi(&SturmProblem::boundary(k.clone(), 0.0, 3.0).unwrap()).unwrap();
        assert_eq!(index_form_value(&k, &f, 0.0, 3.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn cosine_up_to_its_zero() {
        let k = CurvatureProfile::Constant(1.0);
        let f = solve_scalar_jacobi(&SturmProblem::boundary(k.clone(), 0.0, FRAC_PI_2).unwrap()).unwrap();
        let (i, _) = index_form_value(&k, &f, 0.0, FRAC_PI_2).unwrap();
        assert!(i.abs() < 1e-10, "{i}");
    }

    #[test]
    fn piecewise_linear_trial_field() {
        // tent on [0, 2] with K = 0: ∫ f'² = 1 + 1
        let f = PiecewiseLinearField::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        let (i, _) = index_form_value(&CurvatureProfile::Constant(0.0), &f, 0.0, 2.0).unwrap();
        assert!((i - 2.0).abs() < 1e-13);
        assert!(index_form_value(&CurvatureProfile::Constant(0.0), &f, 0.0, 3.0).is_err());
    }
}
