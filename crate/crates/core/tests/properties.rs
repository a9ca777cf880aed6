use std::sync::Arc;

use grushin_mvf::analysis::eta_flatness;
use grushin_mvf::field::{Constant, PowerProfile, SurfaceField, Term};
use grushin_mvf::gauge::{dilate, rho, AmbientPoint, GrushinParams};
use grushin_mvf::identities::{rel_err, test_field};
use grushin_mvf::quadrature::{constant_profile, integrate_ball, kernel_value, mean_value};
use grushin_mvf::solver::{solve_dirichlet, BoundaryFn, SolveDomain, SolveProblem};
use grushin_mvf::surface::{make_surface, Domain, GraphSurface, SurfaceSpec};
use grushin_mvf::tangential::{
    kernel, laplacian_at, q_sigma, tangential_gradient, FieldRef, Frame, LaplacianMethod, QVariant, RadialField,
};
use proptest::prelude::*;

fn params(alpha: f64) -> GrushinParams {
    GrushinParams::new(2, alpha).unwrap()
}

fn radial_surface(alpha: f64, c: f64, m: f64) -> GraphSurface {
    make_surface(params(alpha), &SurfaceSpec::RadialPower { c, m }, Domain::ball(1.0)).unwrap()
}

fn point(r: f64, t: f64) -> Vec<f64> {
    vec![r * t.cos(), r * t.sin()]
}

fn alpha() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.0, 2.0, 3.0])
}

fn exponent() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![2.0, 3.0, 4.0, 5.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tangential_gradient_is_orthogonal_to_the_normal(
        a in alpha(), c in -1.0..1.0f64, m in exponent(), r in 0.05..0.9f64, t in 0.0..6.3f64,
    ) {
        let s = radial_surface(a, c, m);
        let x = point(r, t);
        let f = test_field(2);
        let d = tangential_gradient(&s, FieldRef::Surface(&f), &x).unwrap();
        let nu = Frame::new(&s, &x).unwrap().normal();
        let dot = d[0] * nu.nu_bar[0] + d[1] * nu.nu_bar[1] + d[2] * nu.nu_last;
        let scale = d.iter().map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert!(dot.abs() <= 1e-12 * scale);
    }

    #[test]
    fn kernel_lies_in_the_unit_interval(
        a in alpha(), c in -1.0..1.0f64, m in exponent(), r in 0.01..0.95f64, t in 0.0..6.3f64,
    ) {
        let k = kernel(&radial_surface(a, c, m), &point(r, t)).unwrap();
        prop_assert!((-1e-15..=1.0 + 1e-12).contains(&k));
    }

    #[test]
    fn laplacian_methods_agree(
        a in alpha(), c in -1.0..1.0f64, m in exponent(), r in 0.05..0.9f64, t in 0.0..6.3f64,
        k in 1.0..4.0f64,
    ) {
        let s = radial_surface(a, c, m);
        let x = point(r, t);
        let frame = Frame::new(&s, &x).unwrap();
        let radial = RadialField::new(s.clone(), Arc::new(PowerProfile { coeff: 1.0, k }));
        let smooth = test_field(2);
        for jet in [radial.jet(&x), smooth.jet(&x)] {
            let v: Vec<f64> = LaplacianMethod::ALL.iter().map(|m| laplacian_at(&frame, &jet, *m)).collect();
            prop_assert!(rel_err(v[0], v[1]) <= 1e-8, "{v:?}");
            prop_assert!(rel_err(v[0], v[2]) <= 1e-8, "{v:?}");
        }
    }

    #[test]
    fn q_sigma_forms_agree(
        a in alpha(), c in -1.0..1.0f64, m in exponent(), r in 0.05..0.9f64, t in 0.0..6.3f64,
    ) {
        let s = radial_surface(a, c, m);
        let x = point(r, t);
        let compact = q_sigma(&s, &x, QVariant::Compact).unwrap();
        let expanded = q_sigma(&s, &x, QVariant::Expanded).unwrap();
        prop_assert!(rel_err(compact, expanded) <= 1e-9, "{compact} vs {expanded}");
    }

    #[test]
    fn gauge_is_homogeneous_under_dilation(
        a in alpha(), x0 in -2.0..2.0f64, x1 in -2.0..2.0f64, y in -2.0..2.0f64, lambda in 0.1..10.0f64,
    ) {
        let p = params(a);
        let q = AmbientPoint::new(vec![x0, x1], y);
        let scaled = rho(&p, &dilate(&p, &q, lambda).unwrap());
        prop_assert!(rel_err(scaled, lambda * rho(&p, &q)) <= 1e-12);
    }

    #[test]
    fn eta_is_dilation_invariant_on_homogeneous_graphs(
        c0 in -1.0..1.0f64, c1 in -1.0..1.0f64, c2 in -1.0..1.0f64,
        r in 0.05..0.9f64, t in 0.0..6.3f64, lambda in 0.1..1.0f64,
    ) {
        prop_assume!(c0.abs() + c1.abs() + c2.abs() > 1e-3);
        let terms = vec![
            Term { coeff: c0, powers: vec![3, 0] },
            Term { coeff: c1, powers: vec![1, 2] },
            Term { coeff: c2, powers: vec![0, 3] },
        ];
        let s = make_surface(params(1.0), &SurfaceSpec::Monomial { terms }, Domain::ball(1.0)).unwrap();
        let x = point(r, t);
        let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let e = eta_flatness(&s, &[x]);
        let es = eta_flatness(&s, &[xs]);
        prop_assert!(e == es || rel_err(e, es) <= 1e-12, "{e} vs {es}");
        if e.is_finite() && e > 0.0 {
            prop_assert!(rel_err(e, 2.0 / 3.0) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ball_integral_of_the_kernel_grows_with_r(
        c in -1.0..1.0f64, m in exponent(), r in 0.05..0.4f64, dr in 0.01..0.2f64,
    ) {
        let s = radial_surface(1.0, c, m);
        let g = |p: &_| kernel_value(&s, p);
        let small = integrate_ball(&s, &g, r, 1e-10).unwrap().value;
        let large = integrate_ball(&s, &g, r + dr, 1e-10).unwrap().value;
        prop_assert!(small > 0.0 && large > small);
    }

    #[test]
    fn normalized_mean_of_one_is_one(c in -1.0..1.0f64, m in exponent(), r in 0.05..0.5f64) {
        let s = radial_surface(1.0, c, m);
        let prof = constant_profile(&s, &[r], 1e-11).unwrap();
        let one = Constant { n: 2, c: 1.0 };
        let v = mean_value(&s, &one, r, 1.0 / prof.entries[0].c, 1e-11).unwrap();
        prop_assert!((v - 1.0).abs() <= 1e-8, "{v}");
    }

    #[test]
    fn flat_annulus_solutions_are_ordered(
        inner in -2.0..2.0f64, outer in -2.0..2.0f64, d_in in 0.0..1.0f64, d_out in 0.0..1.0f64,
    ) {
        let flat = make_surface(params(1.0), &SurfaceSpec::Flat, Domain::ball(1.5)).unwrap();
        let solve = |a: f64, b: f64| {
            let g: BoundaryFn = Arc::new(move |x: &[f64]| if x[0].hypot(x[1]) < 0.6 { a } else { b });
            let problem = SolveProblem::new(
                flat.clone(),
                SolveDomain::Annulus { inner: 0.2, outer: 1.0 },
                1.0 / 16.0,
                g,
            )
            .unwrap();
            solve_dirichlet(&problem).unwrap()
        };
        let low = solve(inner, outer);
        let high = solve(inner + d_in, outer + d_out);
        let (lo, hi) = (inner.min(outer), inner.max(outer));
        for ((_, f), (_, h)) in low.interior().zip(high.interior()) {
            prop_assert!(f <= h + 1e-10);
            prop_assert!(f >= lo - 1e-10 && f <= hi + 1e-10);
        }
    }
}
