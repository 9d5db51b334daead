//! Scalar Jacobi equations `f'' + K f = 0`: solutions, first zeros, index
//! forms, curvature comparison and the splitting classifier.

mod compare;
mod index;
mod splitting;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::{self, Control, Settings, System};
use crate::roots::brent;
use crate::spline::{read_table, CubicSpline, EndCondition};
use crate::tolerance::{FIRST_ZERO, GRAZING_VALUE};
use crate::warping::WarpingFunction;

pub use compare::{sturm_compare, Implication, SturmDiagnosis};
pub use index::{index_form_value, Field, PiecewiseLinearField};
pub use splitting::{splitting_classify, Divergence, splitting_classify_default, Splitting, SplittingThresholds, SplittingVerdict};

/// A curvature profile `K(t)` on `t >= 0`.
#[derive(Clone)]
pub enum CurvatureProfile {
    Constant(f64),
    /// `offset + amplitude * cos(frequency * t)`.
    Cosine { offset: f64, amplitude: f64, frequency: f64 },
    /// `G = -m''/m` of a warping function.
    FromWarping(WarpingFunction),
    /// Natural cubic spline through sampled values.
    Table(Arc<CubicSpline>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureProfile::Constant(k) => write!(f, "Constant({k})"),
            CurvatureProfile::Cosine { offset, amplitude, frequency } => {
                write!(f, "Cosine({offset} + {amplitude} cos({frequency} t))")
            }
            CurvatureProfile::FromWarping(w) => write!(f, "FromWarping({})", w.name()),
            CurvatureProfile::Table(s) => write!(f, "Table({} knots)", s.knots().len()),
            CurvatureProfile::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl CurvatureProfile {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(k: F) -> Self {
        CurvatureProfile::Custom(Arc::new(k))
    }

    /// Two-column CSV table `(t, K(t))`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let (ts, ks) = read_table(path)?;
        Ok(CurvatureProfile::Table(Arc::new(CubicSpline::new(ts, ks, EndCondition::Natural, EndCondition::Natural)?)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CurvatureProfile::Constant(k) => *k,
            CurvatureProfile::Cosine { offset, amplitude, frequency } => offset + amplitude * (frequency * t).cos(),
            CurvatureProfile::FromWarping(w) => w.curvature_unchecked(t),
            CurvatureProfile::Table(s) => s.eval(t),
            CurvatureProfile::Custom(k) => k(t),
        }
    }
}

/// `f'' + K f = 0` with `f(0) = f0`, `f'(0) = df0` on `[0, horizon]`.
///
/// A boundary Jacobi field with shape-operator eigenvalue `λ` has
/// `f0 = 1`, `df0 = -λ`.
#[derive(Debug, Clone)]
pub struct SturmProblem {
    pub k: CurvatureProfile,
    pub f0: f64,
    pub df0: f64,
    pub horizon: f64,
}

impl SturmProblem {
    pub fn new(k: CurvatureProfile, f0: f64, df0: f64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Precondition(format!("horizon must be positive, got {horizon}")));
        }
        if !(f0.is_finite() && df0.is_finite()) {
            return Err(Error::Precondition("initial data must be finite".into()));
        }
        for i in 0..=1000 {
            let t = horizon * i as f64 / 1000.0;
            let v = k.eval(t);
            if !v.is_finite() {
                return Err(Error::Precondition(format!("curvature profile is unbounded near t = {t}")));
            }
        }
        Ok(SturmProblem { k, f0, df0, horizon })
    }

    /// The boundary Jacobi problem `f(0) = 1, f'(0) = -λ`.
    pub fn boundary(k: CurvatureProfile, lambda: f64, horizon: f64) -> Result<Self> {
        Self::new(k, 1.0, -lambda, horizon)
    }
}

struct Jacobi<'a>(&'a CurvatureProfile);

impl System<2> for Jacobi<'_> {
    fn rhs(&self, t: f64, z: &[f64; 2]) -> [f64; 2] {
        [z[1], -self.0.eval(t) * z[0]]
    }
}

/// A solution of a scalar Jacobi equation, sampled at every accepted step
/// and evaluable anywhere on `[0, horizon]` to integrator accuracy.
#[derive(Debug, Clone)]
pub struct ScalarField {
    /// `(t, f(t), f'(t))`, strictly increasing in `t`.
    pub samples: Vec<(f64, f64, f64)>,
    pub horizon: f64,
    k: CurvatureProfile,
}

/// First zero of a scalar field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstZero {
    pub t: f64,
    /// `f` touches zero without changing sign.
    pub grazing: bool,
}

const BLOW_UP: f64 = 1e150;

/// Integrate `f'' + K f = 0` over the horizon.
pub fn solve_scalar_jacobi(p: &SturmProblem) -> Result<ScalarField> {
    let sys = Jacobi(&p.k);
    let settings = Settings::with_rtol(1e-12)
        .with_atol(0, 1e-24)
        .with_atol(1, 1e-24)
        .with_h_max((p.horizon / 64.0).min(0.25));
    let mut samples = vec![(0.0, p.f0, p.df0)];
    let mut blown = None;
    ode::integrate(&sys, 0.0, [p.f0, p.df0], p.horizon, &settings, |step| {
        let [f, df] = step.y1;
        if !(f.abs() < BLOW_UP && df.abs() < BLOW_UP) {
            blown = Some(step.t1());
            return Control::Stop;
        }
        samples.push((step.t1(), f, df));
        Control::Continue
    })
    .map_err(|e| Error::Solver(e.to_string()))?;
    if let Some(t) = blown {
        return Err(Error::Solver(format!("solution exceeded {BLOW_UP:e} near t = {t}")));
    }
    if let Some(last) = samples.last_mut() {
        last.0 = p.horizon;
    }
    Ok(ScalarField { samples, horizon: p.horizon, k: p.k.clone() })
}

impl ScalarField {
    /// `(f(t), f'(t))`, by one fifth-order step from the nearest sample on
    /// the left.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = match self.samples.binary_search_by(|s| s.0.total_cmp(&t)) {
            Ok(i) => return (self.samples[i].1, self.samples[i].2),
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let (t0, f, df) = self.samples[i];
        let z = ode::single_step(&Jacobi(&self.k), t0, &[f, df], t - t0);
        (z[0], z[1])
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.k
    }
}

/// First zero of `f` on its horizon: a sign change refined by bracketing to
/// `1e-10`, or a grazing touch `|f| < 1e-9` at a minimum of `f`.
pub fn first_zero(f: &ScalarField) -> Option<FirstZero> {
    let s = &f.samples;
    if s[0].1 <= 0.0 {
        return Some(FirstZero { t: 0.0, grazing: false });
    }
    for w in s.windows(2) {
        let ((t0, f0, d0), (t1, f1, d1)) = (w[0], w[1]);
        if f1 <= 0.0 {
            if f1 == 0.0 && d1 == 0.0 {
                return Some(FirstZero { t: t1, grazing: true });
            }
            let (t, _) = brent(|t| Some(f.eval(t).0), t0, t1, f0, f1, FIRST_ZERO * 1e-2, 200)?;
            return Some(FirstZero { t, grazing: false });
        }
        // interior minimum of a positive stretch
        if d0 < 0.0 && d1 > 0.0 {
            if let Some((tm, _)) = brent(|t| Some(f.eval(t).1), t0, t1, d0, d1, 1e-14, 200) {
                if f.eval(tm).0 < GRAZING_VALUE {
                    return Some(FirstZero { t: tm, grazing: true });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn solve(k: CurvatureProfile, f0: f64, df0: f64, horizon: f64) -> ScalarField {
        solve_scalar_jacobi(&SturmProblem::new(k, f0, df0, horizon).unwrap()).unwrap()
    }

    #[test]
    fn closed_form_solutions() {
        let f = solve(CurvatureProfile::Constant(0.0), 1.0, 0.0, 5.0);
        assert!(f.samples.iter().all(|s| s.1 == 1.0));
        let f = solve(CurvatureProfile::Constant(1.0), 1.0, 0.0, 3.0);
        assert!((f.eval(1.0).0 - 1f64.cos()).abs() < 1e-11);
        let f = solve(CurvatureProfile::Constant(0.0), 1.0, -0.5, 3.0);
        assert!((f.eval(1.7).0 - 0.15).abs() < 1e-13);
    }

    #[test]
    fn first_zeros() {
        let f = solve(CurvatureProfile::Constant(1.0), 1.0, 0.0, 3.0);
        let z = first_zero(&f).unwrap();
        assert!((z.t - FRAC_PI_2).abs() < 1e-10 && !z.grazing);
        let f = solve(CurvatureProfile::Constant(0.0), 1.0, -0.5, 3.0);
        assert!((first_zero(&f).unwrap().t - 2.0).abs() < 1e-12);
        assert_eq!(first_zero(&solve(CurvatureProfile::Constant(0.0), 1.0, 0.0, 3.0)), None);
    }

    #[test]
    fn grazing_zero_is_reported() {
        // f = 2e-10 cosh t - 1.9e-10 sinh t dips to about 6e-11 without crossing
        let f = solve(CurvatureProfile::Constant(-1.0), 2e-10, -1.9e-10, 4.0);
        let z = first_zero(&f).unwrap();
        assert!(z.grazing);
        assert!((z.t - 0.95f64.atanh()).abs() < 1e-4);
    }

    #[test]
    fn blow_up_is_a_solver_error() {
        let p = SturmProblem::new(CurvatureProfile::Constant(-40000.0), 1.0, 0.0, 2.0).unwrap();
        assert!(matches!(solve_scalar_jacobi(&p), Err(Error::Solver(_))));
    }

    #[test]
    fn rejects_unbounded_profile() {
        let k = CurvatureProfile::custom(|t: f64| 1.0 / (t - 1.0));
        assert!(SturmProblem::new(k, 1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn warping_profile_reproduces_warping() {
        let w = WarpingFunction::cosh();
        let f = solve(CurvatureProfile::FromWarping(w), 1.0, 0.0, 3.0);
        assert!((f.eval(2.5).0 - 2.5f64.cosh()).abs() < 1e-10 * 2.5f64.cosh());
    }
}
