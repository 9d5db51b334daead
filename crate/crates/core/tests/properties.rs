use std::f64::consts::PI;

use proptest::prelude::*;

use toponogov::model::{
    integrate_geodesic, length_lower_bound, model_distance, quadrature_length, GeodesicState, ModelPoint,
};
use toponogov::sturm::{first_zero, solve_scalar_jacobi, CurvatureProfile, SturmProblem};
use toponogov::testbed::{gluing_case, SyntheticSurface};
use toponogov::triangle::{solve_comparison_triangle, TriangleMeasurements};
use toponogov::WarpingFunction;

fn family(i: usize) -> WarpingFunction {
    match i {
        0 => WarpingFunction::flat(),
        1 => WarpingFunction::cosh(),
        2 => WarpingFunction::exp_decay(),
        _ => WarpingFunction::cos_truncated(1.5).unwrap(),
    }
}

fn zero_of(k: CurvatureProfile) -> Option<f64> {
    let f = solve_scalar_jacobi(&SturmProblem::new(k, 1.0, 0.0, 8.0).unwrap()).unwrap();
    first_zero(&f).map(|z| z.t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distance_is_invariant_under_model_isometries(
        model in 0usize..2,
        x1 in 0.0f64..2.5, y1 in -2.0f64..2.0, x2 in 0.0f64..2.5, y2 in -2.0f64..2.0, shift in -5.0f64..5.0,
    ) {
        let w = family(model);
        let (d, _) = model_distance(&w, ModelPoint::new(x1, y1), ModelPoint::new(x2, y2)).unwrap();
        let (moved, _) = model_distance(&w, ModelPoint::new(x1, y1 + shift), ModelPoint::new(x2, y2 + shift)).unwrap();
        let (mirrored, _) = model_distance(&w, ModelPoint::new(x1, -y1), ModelPoint::new(x2, -y2)).unwrap();
        let (swapped, _) = model_distance(&w, ModelPoint::new(x2, y2), ModelPoint::new(x1, y1)).unwrap();
        for other in [moved, mirrored, swapped] {
            prop_assert!((d - other).abs() <= 1e-8, "{d} vs {other}");
        }
        prop_assert!(d + 1e-12 >= (x2 - x1).abs());
    }

    #[test]
    fn geodesics_conserve_clairaut_and_speed(
        model in 0usize..4, x in 0.0f64..1.4, theta in -PI..PI, len in 0.1f64..20.0,
    ) {
        let w = family(model);
        let path = integrate_geodesic(&w, &GeodesicState::new(x, 0.0, theta), len).unwrap();
        let r = path.residuals(&w);
        prop_assert!(r.clairaut <= 1e-8 && r.speed <= 1e-8, "{r:?}");
        prop_assert!(path.samples.iter().all(|s| s.point.x >= -1e-12));
        prop_assert!(path.truncated || (path.total_length - len).abs() <= 1e-9);
    }

    #[test]
    fn length_bound_stays_below_length(
        model in 0usize..4, u in 0.0f64..1.0, v in 0.0f64..1.0, fraction in 0.0f64..0.999,
    ) {
        let w = family(model);
        let top = w.domain_max().min(5.0);
        let (t1, t2) = ((u.min(v)) * top, (u.max(v)) * top);
        let nu = fraction * w.m(t1).min(w.m(t2));
        let lower = length_lower_bound(&w, nu, t1, t2).unwrap();
        let length = quadrature_length(&w, nu, t1, t2).unwrap();
        prop_assert!(lower <= length + 1e-9, "{lower} > {length}");
        prop_assert!(lower >= t2 - t1 - 1e-12);
    }

    #[test]
    fn larger_curvature_reaches_zero_first(
        offset in 0.2f64..1.5, amplitude in 0.0f64..0.2, frequency in 0.2f64..3.0, shift in 0.0f64..0.19,
    ) {
        let k = CurvatureProfile::Cosine { offset, amplitude, frequency };
        let g = CurvatureProfile::Cosine { offset: offset - shift, amplitude, frequency };
        if let (Some(tk), Some(tg)) = (zero_of(k), zero_of(g)) {
            prop_assert!(tk <= tg + 1e-10, "{tk} > {tg}");
        }
    }

    #[test]
    fn symmetric_triangles_have_equal_angles(model in 0usize..2, a in 0.1f64..3.0, b in 0.1f64..4.0) {
        let w = family(model);
        let t = solve_comparison_triangle(&w, &TriangleMeasurements::new(a, b, a).unwrap()).unwrap();
        prop_assert!((t.angle_p - t.angle_q).abs() <= 1e-8, "{} vs {}", t.angle_p, t.angle_q);
        prop_assert!(t.angle_p > 0.0 && t.angle_p < PI);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn curve_shortening_never_lengthens(a in 0.2f64..2.0, c in 0.2f64..2.0, gap in 0.5f64..3.0, k in 2usize..5) {
        let s = SyntheticSurface::half_plane(WarpingFunction::flat());
        let out = gluing_case(&s, &WarpingFunction::cosh(), ModelPoint::new(a, 0.0), ModelPoint::new(c, gap), k).unwrap();
        let lengths = &out.got.shortest_arc.lengths;
        prop_assert!(lengths.windows(2).all(|l| l[1] <= l[0] + 1e-12), "{lengths:?}");
        prop_assert!(out.got.shortest_arc.path.total_length <= out.got.broken_length + 1e-9);
    }
}
