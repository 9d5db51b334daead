//! Warping functions `m` of the model half-plane `dx² + m(x)² dy²`.
//!
//! Every warping function satisfies `m(0) = 1` and `m'(0) = 0`, so the
//! boundary `x = 0` is totally geodesic. Profiles that violate this are
//! rejected when they are built.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{read_table, CubicSpline, EndCondition};
use crate::tolerance::DEFAULT_DOMAIN_MAX;

/// Declared behaviour of `m(t)` as `t -> infinity`.
///
/// Finite data cannot decide improper integrals, so the splitting
/// classifier leans on this tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailTag {
    BoundedAbove,
    GrowsUnbounded,
    DecaysToZero,
    Unknown,
}

impl TailTag {
    pub fn as_str(self) -> &'static str {
        match self {
            TailTag::BoundedAbove => "bounded-above",
            TailTag::GrowsUnbounded => "grows-unbounded",
            TailTag::DecaysToZero => "decays-to-zero",
            TailTag::Unknown => "unknown",
        }
    }
}

impl std::str::FromStr for TailTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded-above" => Ok(TailTag::BoundedAbove),
            "grows-unbounded" => Ok(TailTag::GrowsUnbounded),
            "decays-to-zero" => Ok(TailTag::DecaysToZero),
            "unknown" => Ok(TailTag::Unknown),
            other => Err(Error::InvalidWarping {
                name: other.to_string(),
                reason: "unknown tail tag".into(),
            }),
        }
    }
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Profile {
    Flat,
    Cosh,
    /// `exp(1 - sqrt(1 + t²))`: decays like `e^{1-t}` with a flat start.
    ExpDecay,
    Cos,
    Spline(Arc<CubicSpline>),
    /// Derivatives by central differences.
    Custom(ProfileFn),
}

/// The profile `m` together with its truncation height and tail tag.
#[derive(Clone)]
pub struct WarpingFunction {
    name: String,
    profile: Profile,
    domain_max: f64,
    tail: TailTag,
}

impl fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingFunction")
            .field("name", &self.name)
            .field("domain_max", &self.domain_max)
            .field("tail", &self.tail)
            .finish()
    }
}

/// Names accepted by [`WarpingFunction::from_spec`].
pub const FAMILIES: &[(&str, &str)] = &[
    ("const:1", "m(t) = 1, the flat half-plane (G = 0)"),
    ("cosh", "m(t) = cosh t, the hyperbolic half-plane (G = -1)"),
    ("exp-decay", "m(t) = exp(1 - sqrt(1 + t^2)), decays like e^{1-t} with m'(0) = 0"),
    ("cos-truncated[:H]", "m(t) = cos t on [0, H], H < pi/2 (default 1.5), G = +1"),
    ("spline:PATH", "clamped cubic spline through a two-column CSV table (t, m(t))"),
];

impl WarpingFunction {
    fn build(name: &str, profile: Profile, domain_max: f64, tail: TailTag) -> Result<Self> {
        let w = WarpingFunction { name: name.to_string(), profile, domain_max, tail };
        w.validate()?;
        Ok(w)
    }

    /// `m ≡ 1`.
    pub fn flat() -> Self {
        Self::build("const:1", Profile::Flat, DEFAULT_DOMAIN_MAX, TailTag::BoundedAbove).expect("flat is valid")
    }

    /// `m = cosh`.
    pub fn cosh() -> Self {
        Self::build("cosh", Profile::Cosh, DEFAULT_DOMAIN_MAX, TailTag::GrowsUnbounded).expect("cosh is valid")
    }

    /// A decaying profile with `liminf m = 0`.
    pub fn exp_decay() -> Self {
        Self::build("exp-decay", Profile::ExpDecay, DEFAULT_DOMAIN_MAX, TailTag::DecaysToZero)
            .expect("exp-decay is valid")
    }

    /// `m = cos` on `[0, domain_max]`, `domain_max < pi/2`.
    pub fn cos_truncated(domain_max: f64) -> Result<Self> {
        if !(domain_max > 0.0 && domain_max < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidWarping {
                name: "cos-truncated".into(),
                reason: format!("domain_max {domain_max} must lie in (0, pi/2)"),
            });
        }
        Self::build("cos-truncated", Profile::Cos, domain_max, TailTag::Unknown)
    }

    /// Cubic spline through `(t_i, m_i)` with `m'(0) = 0` imposed at the
    /// left end. The table must start at `(0, 1)`; its last abscissa is the
    /// truncation height.
    pub fn from_table(name: &str, ts: Vec<f64>, ms: Vec<f64>) -> Result<Self> {
        if ts.first() != Some(&0.0) {
            return Err(Error::InvalidWarping { name: name.into(), reason: "table must start at t = 0".into() });
        }
        let spline = CubicSpline::new(ts, ms, EndCondition::Clamped(0.0), EndCondition::Natural)
            .map_err(|e| Error::InvalidWarping { name: name.into(), reason: e.to_string() })?;
        let domain_max = spline.last();
        Self::build(name, Profile::Spline(Arc::new(spline)), domain_max, TailTag::Unknown)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let (ts, ms) = read_table(path)?;
        Self::from_table(&format!("spline:{}", path.display()), ts, ms)
    }

    /// Arbitrary profile; derivatives are taken by central differences with
    /// step `1e-5 * max(1, t)`. `m` must be defined slightly below zero.
    pub fn from_fn<F>(name: &str, m: F, domain_max: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(name, Profile::Custom(Arc::new(m)), domain_max, TailTag::Unknown)
    }

    /// Parse a family name as listed in [`FAMILIES`].
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (spec, None),
        };
        let bad = |reason: &str| Error::InvalidWarping { name: spec.to_string(), reason: reason.to_string() };
        match (head, arg) {
            ("const" | "flat", None) => Ok(Self::flat()),
            ("const", Some(v)) => match v.parse::<f64>() {
                Ok(c) if c == 1.0 => Ok(Self::flat()),
                _ => Err(bad("only const:1 satisfies m(0) = 1")),
            },
            ("cosh", None) => Ok(Self::cosh()),
            ("exp-decay", None) => Ok(Self::exp_decay()),
            ("cos-truncated", None) => Self::cos_truncated(1.5),
            ("cos-truncated", Some(h)) => Self::cos_truncated(h.parse().map_err(|_| bad("bad height"))?),
            ("spline", Some(path)) => Self::from_csv(Path::new(path)),
            _ => Err(bad("unknown warping family")),
        }
    }

    /// Same profile with a different truncation height.
    pub fn with_domain_max(mut self, domain_max: f64) -> Result<Self> {
        if matches!(self.profile, Profile::Cos) {
            return Self::cos_truncated(domain_max).map(|w| w.with_tail(self.tail));
        }
        if matches!(self.profile, Profile::Spline(_)) && domain_max > self.domain_max {
            return Err(Error::InvalidWarping {
                name: self.name,
                reason: "cannot extend a spline beyond its table".into(),
            });
        }
        self.domain_max = domain_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tail(mut self, tail: TailTag) -> Self {
        self.tail = tail;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn tail(&self) -> TailTag {
        self.tail
    }

    /// `true` when `m ≡ 1`.
    pub fn is_flat(&self) -> bool {
        matches!(self.profile, Profile::Flat)
    }

    /// `true` when `m = cosh`.
    pub fn is_cosh(&self) -> bool {
        matches!(self.profile, Profile::Cosh)
    }

    /// Value, first and second derivative of `m` at `t`. Negative heights
    /// use the even reflection, which `m'(0) = 0` makes C¹.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        match &self.profile {
            Profile::Flat => (1.0, 0.0, 0.0),
            Profile::Cosh => {
                let c = t.cosh();
                (c, t.sinh(), c)
            }
            Profile::Cos => {
                let c = t.cos();
                (c, -t.sin(), -c)
            }
            Profile::ExpDecay => {
                let r = (1.0 + t * t).sqrt();
                let m = (1.0 - r).exp();
                (m, -t / r * m, m * (t * t / (r * r) - 1.0 / (r * r * r)))
            }
            Profile::Spline(s) => {
                let (v, d1, d2) = s.eval3(t.abs());
                (v, d1 * t.signum(), d2)
            }
            Profile::Custom(f) => {
                let h = 1e-5 * t.abs().max(1.0);
                let (lo, mid, hi) = (f(t - h), f(t), f(t + h));
                (mid, (hi - lo) / (2.0 * h), (hi - 2.0 * mid + lo) / (h * h))
            }
        }
    }

    /// `m` and `m'` at `t` (the geodesic right-hand side needs no more).
    #[inline]
    pub fn m_dm(&self, t: f64) -> (f64, f64) {
        match &self.profile {
            Profile::Flat => (1.0, 0.0),
            Profile::Cosh => (t.cosh(), t.sinh()),
            Profile::Cos => (t.cos(), -t.sin()),
            _ => {
                let (m, d, _) = self.eval3(t);
                (m, d)
            }
        }
    }

    #[inline]
    pub fn m(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Flat => 1.0,
            Profile::Cosh => t.cosh(),
            Profile::Cos => t.cos(),
            Profile::Custom(f) => f(t),
            _ => self.eval3(t).0,
        }
    }

    pub fn dm(&self, t: f64) -> f64 {
        self.m_dm(t).1
    }

    pub fn d2m(&self, t: f64) -> f64 {
        self.eval3(t).2
    }

    /// Gaussian (radial) curvature `G(t) = -m''(t) / m(t)`.
    pub fn gaussian_curvature(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.domain_max).contains(&t) {
            return Err(Error::Domain { t, domain_max: self.domain_max });
        }
        let (m, _, d2) = self.eval3(t);
        Ok(-d2 / m)
    }

    /// Curvature without the domain check, for internal integrators that
    /// may sample marginally outside `[0, domain_max]`.
    pub(crate) fn curvature_unchecked(&self, t: f64) -> f64 {
        let (m, _, d2) = self.eval3(t);
        -d2 / m
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidWarping { name: self.name.clone(), reason };
        if !(self.domain_max.is_finite() && self.domain_max > 0.0) {
            return Err(bad(format!("domain_max {} must be positive", self.domain_max)));
        }
        let (m0, dm0, _) = self.eval3(0.0);
        if (m0 - 1.0).abs() > 1e-12 {
            return Err(bad(format!("m(0) = {m0}, expected 1")));
        }
        if dm0.abs() > 1e-12 {
            return Err(bad(format!("m'(0) = {dm0}; the boundary must be totally geodesic")));
        }
        let n = 2000;
        for i in 0..=n {
            let t = self.domain_max * i as f64 / n as f64;
            let m = self.m(t);
            if !(m.is_finite() && m > 0.0) {
                return Err(bad(format!("m({t}) = {m} is not positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn curvature_of_named_models() {
        assert_eq!(WarpingFunction::flat().gaussian_curvature(3.0).unwrap(), 0.0);
        assert!((WarpingFunction::cosh().gaussian_curvature(1.0).unwrap() + 1.0).abs() < 1e-15);
        let cos = WarpingFunction::cos_truncated(1.5).unwrap();
        assert!((cos.gaussian_curvature(0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn curvature_outside_domain_is_an_error() {
        let w = WarpingFunction::cosh();
        assert!(matches!(w.gaussian_curvature(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(w.gaussian_curvature(50.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn rejects_non_geodesic_boundary() {
        let err = WarpingFunction::from_fn("exp", |t: f64| (-t).exp(), 10.0).unwrap_err();
        assert!(err.to_string().contains("totally geodesic"), "{err}");
        assert!(WarpingFunction::from_fn("two", |_| 2.0, 10.0).is_err());
        assert!(WarpingFunction::cos_truncated(FRAC_PI_2).is_err());
    }

    #[test]
    fn finite_difference_fallback_matches_analytic() {
        let w = WarpingFunction::from_fn("cosh-fd", f64::cosh, 5.0).unwrap();
        for t in [0.0, 0.3, 1.7, 4.0] {
            assert!((w.dm(t) - t.sinh()).abs() < 1e-8 * t.cosh());
            assert!((w.d2m(t) - t.cosh()).abs() < 1e-4 * t.cosh());
        }
    }

    #[test]
    fn exp_decay_derivatives_are_consistent() {
        let w = WarpingFunction::exp_decay();
        for i in 0..200 {
            let t = i as f64 * 0.2 + 0.05;
            let h = 1e-5 * t.max(1.0);
            let fd1 = (w.m(t + h) - w.m(t - h)) / (2.0 * h);
            let fd2 = (w.dm(t + h) - w.dm(t - h)) / (2.0 * h);
            assert!((fd1 - w.dm(t)).abs() <= 1e-6 * w.dm(t).abs().max(w.m(t)));
            assert!((fd2 - w.d2m(t)).abs() <= 1e-6 * w.d2m(t).abs().max(w.m(t)));
        }
        assert!(w.m(45.0) < 1e-3);
    }

    #[test]
    fn spline_table_reproduces_cosh() {
        let ts: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let ms: Vec<f64> = ts.iter().map(|t| t.cosh()).collect();
        let w = WarpingFunction::from_table("tab", ts, ms).unwrap();
        assert_eq!(w.domain_max(), 4.0);
        assert!((w.m(1.234) - 1.234f64.cosh()).abs() < 1e-7);
        assert!((w.gaussian_curvature(1.0).unwrap() + 1.0).abs() < 1e-3);
        // even reflection below the boundary
        assert_eq!(w.m(-0.3), w.m(0.3));
    }

    #[test]
    fn parses_specs() {
        assert!(WarpingFunction::from_spec("const:1").unwrap().is_flat());
        assert!(WarpingFunction::from_spec("cosh").unwrap().is_cosh());
        assert_eq!(WarpingFunction::from_spec("cos-truncated:1.2").unwrap().domain_max(), 1.2);
        assert!(WarpingFunction::from_spec("const:2").is_err());
        assert!(WarpingFunction::from_spec("sinh").is_err());
    }
}
