use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{connect, integrate_geodesic, GeodesicPath, GeodesicState, ModelPoint};
use crate::sturm::{
    first_zero, index_form_value, solve_scalar_jacobi, splitting_classify_default, CurvatureProfile, Divergence,
    Splitting, SturmProblem, SplittingThresholds,
};
use crate::testbed::{
    case_rng, cylinder_splitting_experiment, gluing_case, height_grid, radial_bound_check, subdivide,
    subdivision_count, toponogov_case, RigidityCase, SyntheticSurface, Topology, TriangleSampler,
};
use crate::triangle::{Check, CurvatureBoundProbe, TriangleMeasurements};
use crate::warping::{TailTag, WarpingFunction};

use super::{ExperimentConfig, Row, Suite, SuiteResult, TraceRow};

const TOPONOGOV_STREAM: u64 = 1;
const GLUING_STREAM: u64 = 2;
const RIGIDITY_STREAM: u64 = 3;
const ORACLE_STREAM: u64 = 5;
const STURM_STREAM: u64 = 6;

fn rows_of(case: usize, checks: impl IntoIterator<Item = Check>, inputs: &str) -> Vec<Row> {
    checks
        .into_iter()
        .map(|c| Row { case, check: c.name, lhs: c.lhs, rhs: c.rhs, residual: c.residual, pass: c.pass, inputs: inputs.into() })
        .collect()
}

fn error_row(case: usize, e: &Error) -> Row {
    Row {
        case,
        check: "error".into(),
        lhs: f64::NAN,
        rhs: f64::NAN,
        residual: f64::NEG_INFINITY,
        pass: false,
        inputs: e.to_string(),
    }
}

fn triangle_inputs(t: &TriangleMeasurements) -> String {
    format!("a={};b={};c={}", t.a, t.b, t.c)
}

fn points_inputs(p: ModelPoint, q: ModelPoint) -> String {
    format!("p=({},{});q=({},{})", p.x, p.y, q.x, q.y)
}

fn collect_cases<F>(n: usize, f: F) -> Vec<Row>
where
    F: Fn(usize) -> Result<Vec<Row>> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(i).unwrap_or_else(|e| vec![error_row(i, &e)]))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Run one suite without writing anything.
pub fn run_suite(config: &ExperimentConfig, suite: Suite) -> Result<SuiteResult> {
    config.validate_for(suite)?;
    let seed = config.seed.unwrap_or(0);
    let mut result = match suite {
        Suite::GeodesicOracle => geodesic_oracle(config, seed)?,
        Suite::Toponogov => toponogov(config, seed)?,
        Suite::Gluing => gluing(config, seed)?,
        Suite::Sturm => sturm(config, seed)?,
        Suite::Splitting => splitting(config)?,
        Suite::Cylinder => cylinder(config, seed)?,
        Suite::Rigidity => rigidity(config, seed)?,
    };
    for r in &mut result.rows {
        if let Some(tol) = config.tolerances.for_check(&r.check) {
            r.pass = r.residual >= -tol;
        }
    }
    let passes = {
        let mut ok = vec![true; result.summary.cases];
        for r in &result.rows {
            ok[r.case] &= r.pass;
        }
        ok.iter().filter(|&&p| p).count()
    };
    result.summary.passes = passes;
    Ok(result)
}

impl ExperimentConfig {
    /// Check the curvature ordering for every requested suite that compares
    /// a testbed with the model, before anything runs.
    pub fn preflight(&self) -> Result<()> {
        for &suite in &self.suites {
            if matches!(suite, Suite::Toponogov | Suite::Gluing) {
                checked_pair(self, suite)?;
            }
        }
        Ok(())
    }

    fn validate_for(&self, suite: Suite) -> Result<()> {
        if suite.randomized() && self.seed.is_none() {
            return Err(Error::Config(format!("seed: required by the randomized suite `{suite}`")));
        }
        Ok(())
    }

    fn half_plane_testbed(&self, suite: Suite) -> Result<SyntheticSurface> {
        let s = self.testbed_surface()?;
        if s.topology() != Topology::HalfPlane {
            return Err(Error::Config(format!("testbed: suite `{suite}` needs a half-plane testbed")));
        }
        Ok(s)
    }
}

fn fermi_oracle(w: &WarpingFunction, p: ModelPoint, q: ModelPoint) -> Option<f64> {
    if w.is_flat() {
        Some((q.x - p.x).hypot(q.y - p.y))
    } else if w.is_cosh() {
        let c = p.x.cosh() * q.x.cosh() * (q.y - p.y).cosh() - p.x.sinh() * q.x.sinh();
        Some(c.max(1.0).acosh())
    } else {
        None
    }
}

fn trace_rows(w: &WarpingFunction, id: &str, path: &GeodesicPath) -> Vec<TraceRow> {
    path.samples
        .iter()
        .map(|s| {
            let m = w.m(s.point.x);
            TraceRow {
                path: id.into(),
                s: s.s,
                x: s.point.x,
                y: s.point.y,
                nu_residual: (m * m * s.dy).abs() - path.clairaut,
            }
        })
        .collect()
}

fn geodesic_oracle(config: &ExperimentConfig, seed: u64) -> Result<SuiteResult> {
    let w = config.model_warping()?;
    if fermi_oracle(&w, ModelPoint::new(0.0, 0.0), ModelPoint::new(0.0, 0.0)).is_none() {
        return Err(Error::Config(format!(
            "model: no closed-form distance oracle for `{}`; use const:1 or cosh",
            config.model
        )));
    }
    let pairs = config.counts.oracle_pairs;
    let geodesics = config.counts.geodesics;
    let results: Vec<Result<(Vec<Row>, Vec<TraceRow>)>> = (0..pairs + geodesics)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, ORACLE_STREAM, i as u64);
            if i < pairs {
                let p = ModelPoint::new(rng.gen_range(0.0..3.0), rng.gen_range(-2.0..2.0));
                let q = ModelPoint::new(rng.gen_range(0.0..3.0), rng.gen_range(-2.0..2.0));
                let c = connect(&w, p, q)?;
                let oracle = fermi_oracle(&w, p, q).unwrap_or(f64::NAN);
                let end = c.path.end().point;
                let endpoint = (end.x - q.x).abs().max((end.y - q.y).abs());
                let checks = [
                    Check::equal("distance", c.length, oracle, 0.0),
                    Check::equal("endpoint", endpoint, 0.0, 0.0),
                ];
                Ok((rows_of(i, checks, &points_inputs(p, q)), trace_rows(&w, &i.to_string(), &c.path)))
            } else {
                let x = rng.gen_range(0.0..2.0);
                let theta = rng.gen_range(-PI..PI);
                let len = rng.gen_range(0.5..20.0);
                let path = integrate_geodesic(&w, &GeodesicState::new(x, 0.0, theta), len)?;
                let r = path.residuals(&w);
                let turns = path.samples.windows(2).filter(|s| s[0].dx * s[1].dx < 0.0).count();
                let inputs = format!("x={x};theta={theta};length={len};turning_points={turns}");
                let checks = [Check::equal("clairaut", r.clairaut, 0.0, 0.0), Check::equal("speed", r.speed, 0.0, 0.0)];
                Ok((rows_of(i, checks, &inputs), Vec::new()))
            }
        })
        .collect();
    let boundary = integrate_geodesic(&w, &GeodesicState::new(0.0, 0.0, PI / 2.0), 1.0)?;
    let mut traces = trace_rows(&w, "boundary", &boundary);
    let mut rows = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((case_rows, case_traces)) => {
                rows.extend(case_rows);
                traces.extend(case_traces);
            }
            Err(e) => rows.push(error_row(i, &e)),
        }
    }
    Ok(SuiteResult::new(Suite::GeodesicOracle, pairs + geodesics, rows, Some(traces)))
}

fn checked_pair(config: &ExperimentConfig, suite: Suite) -> Result<(SyntheticSurface, WarpingFunction)> {
    let s = config.half_plane_testbed(suite)?;
    let w = config.model_warping()?;
    let bound = radial_bound_check(&s, &w, &height_grid(&s, &w, 1000));
    if !bound.holds {
        return Err(Error::Ordering(format!(
            "testbed `{}` has curvature below model `{}` by {} at height {}",
            config.testbed, config.model, -bound.worst_margin, bound.worst_height
        )));
    }
    Ok((s, w))
}

fn toponogov(config: &ExperimentConfig, seed: u64) -> Result<SuiteResult> {
    let (s, w) = checked_pair(config, Suite::Toponogov)?;
    let theta0 = config.sector_width.unwrap_or(f64::INFINITY);
    let sampler = TriangleSampler::new(&s, &w, theta0);
    let n = config.counts.triangles;
    let rows = collect_cases(n, |i| {
        let (p, q) = sampler.sample(&mut case_rng(seed, TOPONOGOV_STREAM, i as u64));
        let report = toponogov_case(&s, &w, p, q, theta0)?;
        Ok(rows_of(i, report.checks, &triangle_inputs(&report.measured)))
    });
    Ok(SuiteResult::new(Suite::Toponogov, n, rows, None))
}

fn gluing(config: &ExperimentConfig, seed: u64) -> Result<SuiteResult> {
    let (s, w) = checked_pair(config, Suite::Gluing)?;
    let sampler = TriangleSampler::new(&s, &w, config.sector_width.unwrap_or(f64::INFINITY));
    let n = config.counts.gluing;
    let rows = collect_cases(n, |i| {
        let (p, q) = sampler.sample(&mut case_rng(seed, GLUING_STREAM, i as u64));
        let whole = subdivide(&s, p, q, 1)?;
        let k = (2 + i % 3).max(subdivision_count(&w, &whole.overall, &whole.side_heights, &CurvatureBoundProbe)?);
        let out = gluing_case(&s, &w, p, q, k)?;
        let inputs = format!("{};pieces={k};sweeps={}", triangle_inputs(&out.subdivision.overall), out.got.shortest_arc.sweeps);
        let mut checks = out.report.checks;
        checks.push(Check::equal("single_piece", out.single_piece_deviation, 0.0, 0.0));
        Ok(rows_of(i, checks, &inputs))
    });
    Ok(SuiteResult::new(Suite::Gluing, n, rows, None))
}

fn boundary_field_rows(k: &CurvatureProfile, lambda: f64, horizon: f64, config: &ExperimentConfig) -> Result<Vec<Check>> {
    let f = solve_scalar_jacobi(&SturmProblem::boundary(k.clone(), lambda, horizon)?)?;
    let zero = first_zero(&f).filter(|z| !z.grazing && z.t > 0.0);
    let ell = zero.map_or(horizon, |z| z.t);
    let (i, ib) = index_form_value(k, &f, lambda, ell)?;
    let (f0, df0) = f.eval(0.0);
    let (fl, dfl) = f.eval(ell);
    let ibp = fl * dfl - f0 * df0;
    let tol = config.tolerances.index_identity * (1.0 + i.abs());
    let mut checks = vec![Check::equal("index_identity", i, ibp, tol)];
    if zero.is_some() {
        checks.push(Check::equal("cancellation", ib, 0.0, 0.0));
    }
    Ok(checks)
}

fn sturm(config: &ExperimentConfig, seed: u64) -> Result<SuiteResult> {
    const LAMBDAS: [f64; 3] = [0.1, 0.5, 2.0];
    let n = LAMBDAS.len() + config.counts.sturm_profiles;
    let rows = collect_cases(n, |i| {
        if i < LAMBDAS.len() {
            let lambda = LAMBDAS[i];
            let k = CurvatureProfile::Constant(0.0);
            let f = solve_scalar_jacobi(&SturmProblem::boundary(k.clone(), lambda, 2.0 / lambda)?)?;
            let t0 = first_zero(&f).map_or(f64::NAN, |z| z.t);
            let mut checks = vec![Check::equal("first_zero", t0, 1.0 / lambda, 0.0)];
            checks.extend(boundary_field_rows(&k, lambda, 2.0 / lambda, config)?);
            return Ok(rows_of(i, checks, &format!("K=0;lambda={lambda}")));
        }
        let mut rng = case_rng(seed, STURM_STREAM, i as u64);
        let (offset, amplitude, frequency) = (rng.gen_range(-0.5..1.5), rng.gen_range(0.0..1.0), rng.gen_range(0.2..3.0));
        let lambda = rng.gen_range(0.0..2.0);
        let shift = rng.gen_range(0.0..1.0);
        let k = CurvatureProfile::Cosine { offset, amplitude, frequency };
        let mut checks = boundary_field_rows(&k, lambda, 6.0, config)?;
        // K >= G: the K-solution from (1, 0) vanishes first
        let g = CurvatureProfile::Cosine { offset: offset - shift, amplitude, frequency };
        let zero = |p: &CurvatureProfile| -> Result<Option<f64>> {
            Ok(first_zero(&solve_scalar_jacobi(&SturmProblem::new(p.clone(), 1.0, 0.0, 6.0)?)?).map(|z| z.t))
        };
        if let (Some(tk), Some(tg)) = (zero(&k)?, zero(&g)?) {
            checks.push(Check::at_least("sturm_ordering", tg, tk, 1e-10));
        }
        let inputs = format!("K={offset}+{amplitude}cos({frequency}t);lambda={lambda};G=K-{shift}");
        Ok(rows_of(i, checks, &inputs))
    });
    Ok(SuiteResult::new(Suite::Sturm, n, rows, None))
}

fn consistent(v: &crate::sturm::SplittingVerdict, th: &SplittingThresholds) -> bool {
    let rule = match v.verdict {
        Splitting::ST1 => v.divergence_flag == Divergence::Divergent,
        Splitting::ST2 => v.liminf_estimate <= th.liminf,
        Splitting::None | Splitting::Undetermined => true,
    };
    rule && (v.tail != TailTag::Unknown || v.verdict == Splitting::Undetermined)
}

fn splitting(config: &ExperimentConfig) -> Result<SuiteResult> {
    let w = config.model_warping()?;
    let th = SplittingThresholds::default();
    let mine = splitting_classify_default(&w)?;
    let mut rows = rows_of(
        0,
        [Check::equal("consistency", consistent(&mine, &th) as u8 as f64, 1.0, 0.0)],
        &format!(
            "model={};tail={};integral={};liminf={};verdict={}",
            config.model,
            mine.tail.as_str(),
            mine.integral_estimate,
            mine.liminf_estimate,
            mine.verdict.as_str()
        ),
    );
    let references = [
        (WarpingFunction::flat(), Splitting::ST1),
        (WarpingFunction::exp_decay(), Splitting::ST2),
        (WarpingFunction::cosh(), Splitting::None),
        (WarpingFunction::exp_decay().with_tail(TailTag::Unknown), Splitting::Undetermined),
    ];
    for (i, (rw, expected)) in references.iter().enumerate() {
        let v = splitting_classify_default(rw)?;
        let inputs = format!("model={};tail={};verdict={}", rw.name(), rw.tail().as_str(), v.verdict.as_str());
        rows.extend(rows_of(
            i + 1,
            [Check::equal(&format!("reference_{}", expected.as_str()), (v.verdict == *expected) as u8 as f64, 1.0, 0.0)],
            &inputs,
        ));
    }
    let mut result = SuiteResult::new(Suite::Splitting, 1 + references.len(), rows, None);
    result.summary.verdict = Some(mine.verdict.as_str().into());
    Ok(result)
}

fn cylinder(config: &ExperimentConfig, seed: u64) -> Result<SuiteResult> {
    let c = &config.cylinder;
    let report = cylinder_splitting_experiment(c.circumference, c.height, config.counts.cylinder_probes, seed)?;
    let mut rows = Vec::new();
    for (i, (checks, sample)) in report.cases.iter().zip(&report.samples).enumerate() {
        let inputs = format!(
            "x={};y={};d1={};d2={};minimizers={}",
            sample.point.x,
            sample.point.y,
            sample.distances_to_components.0,
            sample.distances_to_components.1,
            sample.n_minimizers
        );
        rows.extend(rows_of(i, checks.iter().cloned(), &inputs));
    }
    let mut result = SuiteResult::new(Suite::Cylinder, report.cases.len(), rows, None);
    if report.no_evidence {
        result.summary.verdict = Some("no-evidence".into());
        result.summary.notes.push("no probes were run; the checks pass vacuously".into());
    }
    for check in &report.checks {
        result.summary.notes.push(format!(
            "{}: {} ({} rows, worst residual {:e})",
            check.name,
            if check.pass { "pass" } else { "fail" },
            check.cases,
            check.worst_residual
        ));
    }
    Ok(result)
}

fn rigidity(config: &ExperimentConfig, seed: u64) -> Result<SuiteResult> {
    let w = config.model_warping()?;
    let s = SyntheticSurface::half_plane(w.clone());
    let sampler = TriangleSampler::new(&s, &w, f64::INFINITY);
    let n = config.counts.rigidity;
    let rows = collect_cases(n, |i| {
        let (p, q) = sampler.sample(&mut case_rng(seed, RIGIDITY_STREAM, i as u64));
        let case = RigidityCase::new(&w, p, q, config.footgap_perturbation)?;
        let mut checks = case.report.checks.clone();
        checks.push(Check::equal("equality_case", case.report.equality_case as u8 as f64, 1.0, 0.0));
        for c in &case.perturbed.checks {
            let mut c = c.clone();
            c.name = format!("perturbed_{}", c.name);
            checks.push(c);
        }
        checks.push(Check::equal("perturbed_equality_case", case.perturbed.equality_case as u8 as f64, 0.0, 0.0));
        Ok(rows_of(i, checks, &triangle_inputs(&case.measured)))
    });
    Ok(SuiteResult::new(Suite::Rigidity, n, rows, None))
}
