//! Cubic interpolating splines for sampled profiles, and the two-column CSV
//! tables they are read from.

use std::path::Path;

use crate::error::{Error, Result};

/// End condition of a cubic spline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndCondition {
    /// Zero second derivative.
    Natural,
    /// Prescribed first derivative.
    Clamped(f64),
}

/// A C² piecewise-cubic interpolant through `(t_i, v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, left: EndCondition, right: EndCondition) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::Table(format!(
                "need at least two (t, value) rows of equal length, got {} and {}",
                n,
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Table("abscissae must be strictly increasing".into()));
        }
        if knots.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Table("non-finite entry".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / h[i]).collect();

        // tridiagonal system sub[i] M[i-1] + diag[i] M[i] + sup[i] M[i+1] = rhs[i]
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        match left {
            EndCondition::Natural => diag[0] = 1.0,
            EndCondition::Clamped(s) => {
                diag[0] = 2.0 * h[0];
                sup[0] = h[0];
                rhs[0] = 6.0 * (slope[0] - s);
            }
        }
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
        }
        match right {
            EndCondition::Natural => diag[n - 1] = 1.0,
            EndCondition::Clamped(s) => {
                sub[n - 1] = h[n - 2];
                diag[n - 1] = 2.0 * h[n - 2];
                rhs[n - 1] = 6.0 * (s - slope[n - 2]);
            }
        }
        // Thomas algorithm
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut moments = vec![0.0; n];
        moments[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            moments[i] = (rhs[i] - sup[i] * moments[i + 1]) / diag[i];
        }
        Ok(CubicSpline { knots, values, moments })
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        *self.knots.last().expect("non-empty")
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value, first and second derivative at `t`. Outside the knot range the
    /// end cubics are extended.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let value = a * v0 + b * v1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (v1 - v0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        (value, d1, d2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval3(t).0
    }
}

/// Read a two-column numeric CSV table `(t, value)`. A non-numeric first row
/// is treated as a header.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        if record.len() < 2 {
            return Err(Error::Table(format!("{}: row {} has fewer than two columns", path.display(), row + 1)));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(t), Ok(v)) => {
                ts.push(t);
                vs.push(v);
            }
            _ if row == 0 => continue,
            _ => {
                return Err(Error::Table(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    row + 1
                )))
            }
        }
    }
    Ok((ts, vs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_matching_clamps() {
        // p(t) = t^3 - t, p'(0) = -1, p'(2) = 11
        let ts: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let vs: Vec<f64> = ts.iter().map(|t| t * t * t - t).collect();
        let s = CubicSpline::new(ts, vs, EndCondition::Clamped(-1.0), EndCondition::Clamped(11.0)).unwrap();
        for j in 0..40 {
            let t = j as f64 * 0.05;
            let (v, d1, d2) = s.eval3(t);
            assert!((v - (t * t * t - t)).abs() < 1e-12);
            assert!((d1 - (3.0 * t * t - 1.0)).abs() < 1e-11);
            assert!((d2 - 6.0 * t).abs() < 1e-10);
        }
    }

    #[test]
    fn natural_ends_have_zero_curvature() {
        let s = CubicSpline::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0, 1.0], EndCondition::Natural, EndCondition::Natural)
            .unwrap();
        assert!(s.eval3(0.0).2.abs() < 1e-14);
        assert!(s.eval3(3.0).2.abs() < 1e-14);
        assert_eq!(s.eval(1.0), 1.0);
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(CubicSpline::new(vec![0.0, 0.0], vec![1.0, 1.0], EndCondition::Natural, EndCondition::Natural).is_err());
    }

    #[test]
    fn reads_table_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "t,m\n0,1\n0.5,1.1\n1.0,1.4\n").unwrap();
        let (t, v) = read_table(&path).unwrap();
        assert_eq!(t, vec![0.0, 0.5, 1.0]);
        assert_eq!(v, vec![1.0, 1.1, 1.4]);
    }
}
