//! Frozen reference values. The high-precision constants were computed
//! independently with 50-digit adaptive quadrature of the polar-reduced
//! integrals, not with this crate.

use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use grushin_mvf::ad::HyperDual;
use grushin_mvf::analysis::{eta_flatness, growth_envelope_check, subharmonicity_certificate, unit_directions};
use grushin_mvf::cubature::Region;
use grushin_mvf::error::Error;
use grushin_mvf::field::{Constant, PowerProfile, SurfaceField, Term};
use grushin_mvf::gauge::{
    dilate, fundamental_solution, grushin_operator, rho, x_gradient, AmbientFn, AmbientPoint, GrushinParams,
};
use grushin_mvf::identities::random_points;
use grushin_mvf::quadrature::{constant_profile, integrate_ball, mean_value};
use grushin_mvf::surface::{catalog_spec, make_surface, Domain, GraphSurface, SurfaceSpec};
use grushin_mvf::tangential::{
    adjoint_tangential, kernel, q_sigma, radial_surface_laplacian, tangential_gradient, FieldRef, QVariant,
    RadialField,
};

fn p21() -> GrushinParams {
    GrushinParams::new(2, 1.0).unwrap()
}

fn catalog(name: &str) -> GraphSurface {
    make_surface(p21(), &catalog_spec(name, &p21()).unwrap(), Domain::ball(1.0)).unwrap()
}

fn radial(c: f64, m: f64) -> GraphSurface {
    make_surface(p21(), &SurfaceSpec::RadialPower { c, m }, Domain::ball(1.0)).unwrap()
}

fn pt(x: [f64; 2], y: f64) -> AmbientPoint {
    AmbientPoint::new(x.to_vec(), y)
}

// Gauge

#[test]
fn gauge_values() {
    assert_eq!(rho(&p21(), &pt([0.5, 0.0], 0.0)), 0.5);
    assert_relative_eq!(rho(&p21(), &pt([0.0, 0.0], 0.5)), 1.0, epsilon = 1e-15);
}

#[test]
fn gauge_gradient_values() {
    let g = x_gradient(&p21(), &pt([1.0, 0.0], 0.0)).unwrap();
    assert_relative_eq!(g.as_slice(), &[1.0, 0.0, 0.0][..], epsilon = 1e-14);
    assert_relative_eq!(g.norm_squared(), 1.0, epsilon = 1e-14);
    let g = x_gradient(&p21(), &pt([0.0, 0.0], 0.3)).unwrap();
    assert!(g.iter().all(|c| *c == 0.0));
    assert!(matches!(x_gradient(&p21(), &pt([0.0, 0.0], 0.0)), Err(Error::Domain(_))));
}

#[test]
fn gauge_gradient_matches_central_differences() {
    let p = p21();
    let at = pt([0.4, -0.7], 0.3);
    let g = x_gradient(&p, &at).unwrap();
    let h = 1e-6;
    let f = |x0: f64, x1: f64, y: f64| rho(&p, &pt([x0, x1], y));
    let d0 = (f(0.4 + h, -0.7, 0.3) - f(0.4 - h, -0.7, 0.3)) / (2.0 * h);
    let d1 = (f(0.4, -0.7 + h, 0.3) - f(0.4, -0.7 - h, 0.3)) / (2.0 * h);
    let dy = (f(0.4, -0.7, 0.3 + h) - f(0.4, -0.7, 0.3 - h)) / (2.0 * h) * at.horizontal_norm();
    assert_relative_eq!(g[0], d0, epsilon = 1e-8);
    assert_relative_eq!(g[1], d1, epsilon = 1e-8);
    assert_relative_eq!(g[2], dy, epsilon = 1e-8);
}

#[test]
fn operator_values() {
    let p = p21();
    let y2 = AmbientFn::new(2, Arc::new(|v: &[HyperDual]| v[2] * v[2]));
    let at = pt([0.6, -0.3], 0.8);
    assert_relative_eq!(grushin_operator(&p, &y2, &at), 2.0 * 0.45, epsilon = 1e-13);

    let g = AmbientFn::gauge(p);
    let xg = x_gradient(&p, &at).unwrap();
    let expected = 3.0 * xg.norm_squared() / rho(&p, &at);
    assert_relative_eq!(grushin_operator(&p, &g, &at), expected, max_relative = 1e-12);

    let gamma = AmbientFn::fundamental(p);
    for q in random_points(3, 50, 3, 0.3, 2.0) {
        let at = AmbientPoint::new(q[..2].to_vec(), q[2]);
        let r = rho(&p, &at);
        if (0.5..=2.0).contains(&r) {
            assert!(grushin_operator(&p, &gamma, &at).abs() < 1e-8);
        }
    }
}

#[test]
fn fundamental_solution_values() {
    let p = p21();
    assert_relative_eq!(fundamental_solution(&p, &pt([1.0, 0.0], 0.0)).unwrap(), 1.0);
    assert_relative_eq!(fundamental_solution(&p, &pt([2.0, 0.0], 0.0)).unwrap(), 0.25);
    assert!(fundamental_solution(&p, &pt([0.0, 0.0], 0.0)).is_err());
}

#[test]
fn dilation_values() {
    let p = p21();
    let q = dilate(&p, &pt([1.0, 0.0], 1.0), 2.0).unwrap();
    assert_eq!((q.x.as_slice(), q.y), (&[2.0, 0.0][..], 4.0));
    let q = dilate(&p, &pt([0.3, 0.2], -0.5), 1.0).unwrap();
    assert_eq!((q.x.as_slice(), q.y), (&[0.3, 0.2][..], -0.5));
    assert!(matches!(dilate(&p, &q, 0.0), Err(Error::Argument(_))));
}

// Surfaces

#[test]
fn normal_and_area_element() {
    let flat = catalog("flat");
    let nu = flat.alpha_normal(&[0.3, -0.2]).unwrap();
    assert_eq!((nu.nu_bar.as_slice(), nu.nu_last), (&[0.0, 0.0][..], 1.0));
    assert_relative_eq!(flat.area_element(&[0.5, 0.0]).unwrap(), 0.5);

    let bowl = radial(1.0, 2.0);
    let nu = bowl.alpha_normal(&[1.0, 0.0]).unwrap();
    let r5 = 5f64.sqrt();
    assert_relative_eq!(nu.nu_bar.as_slice(), &[-2.0 / r5, 0.0][..], epsilon = 1e-15);
    assert_relative_eq!(nu.nu_last, 1.0 / r5, epsilon = 1e-15);
    assert_relative_eq!(bowl.area_element(&[1.0, 0.0]).unwrap(), r5, epsilon = 1e-15);
    assert!(matches!(bowl.alpha_normal(&[0.0, 0.0]), Err(Error::Domain(_))));
}

#[test]
fn mean_curvature_values() {
    assert_eq!(catalog("flat").mean_curvature(&[0.4, 0.1]).unwrap(), 0.0);

    let p1 = GrushinParams::new(1, 1.0).unwrap();
    let line = make_surface(
        p1,
        &SurfaceSpec::Monomial { terms: vec![Term { coeff: 0.35, powers: vec![2] }] },
        Domain::ball(1.0),
    )
    .unwrap();
    for x in [-0.8, -0.1, 0.3, 0.9] {
        assert!(line.mean_curvature(&[x]).unwrap().abs() < 1e-14);
    }

    let quartic = catalog("quartic");
    for s in [1e-2, 1e-3] {
        let h = quartic.mean_curvature(&[s * 0.6, s * 0.8]).unwrap();
        assert_relative_eq!(h, 6.0 * s, max_relative = 1e-3);
    }
}

#[test]
fn euler_residual_values() {
    for name in ["paraboloid", "saddle", "flat"] {
        for x in random_points(2, 20, 4, 0.1, 0.9) {
            assert!(catalog(name).euler_residual(&x).unwrap().abs() < 1e-14);
        }
    }
    let tilt = make_surface(
        p21(),
        &SurfaceSpec::Monomial { terms: vec![Term { coeff: 1.0, powers: vec![1, 0] }] },
        Domain::ball(1.0),
    )
    .unwrap();
    assert_relative_eq!(tilt.euler_residual(&[0.7, 0.2]).unwrap(), -0.7, epsilon = 1e-15);
}

#[test]
fn surface_integral_of_one_on_the_plane() {
    let flat = catalog("flat");
    for r in [0.25, 0.5, 0.9] {
        let region = Region::ball(vec![0.0, 0.0], r).unwrap();
        let i = flat.integrate_surface(&|_| 1.0, &region, 1e-12).unwrap();
        assert_relative_eq!(i.value, 2.0 * PI * r.powi(3) / 3.0, max_relative = 1e-10);
        let z = flat.integrate_surface(&|_| 0.0, &region, 1e-12).unwrap();
        assert_eq!(z.value, 0.0);
    }
}

#[test]
fn catalog_rejects_marginal_regularity() {
    assert!(matches!(
        make_surface(p21(), &SurfaceSpec::RadialPower { c: 1.0, m: 1.5 }, Domain::ball(1.0)),
        Err(Error::Spec(_))
    ));
}

// Tangential calculus

#[test]
fn flat_gradient_is_euclidean() {
    let flat = catalog("flat");
    let f = grushin_mvf::identities::test_field(2);
    let x = [0.3, -0.45];
    let d = tangential_gradient(&flat, FieldRef::Surface(&f), &x).unwrap();
    let g = f.jet(&x).g;
    assert_relative_eq!(d.as_slice(), &[g[0], g[1], 0.0][..], epsilon = 1e-15);
}

#[test]
fn kernel_values() {
    for x in random_points(2, 30, 8, 0.05, 0.95) {
        assert_relative_eq!(kernel(&catalog("flat"), &x).unwrap(), 1.0, epsilon = 1e-14);
        let s = catalog("paraboloid");
        let u = s.height(&x);
        let r2 = rho(&p21(), &AmbientPoint::new(x.clone(), u)).powi(2);
        let s2 = x[0] * x[0] + x[1] * x[1];
        assert_relative_eq!(kernel(&s, &x).unwrap(), s2 / r2, max_relative = 1e-13);
    }
}

#[test]
fn adjoint_values() {
    let flat = catalog("flat");
    let zero = Constant { n: 2, c: 0.0 };
    let one = Constant { n: 2, c: 1.0 };
    let x = [0.3, -0.4];
    for i in 0..=2 {
        assert_eq!(adjoint_tangential(&flat, &zero, &x, i).unwrap(), 0.0);
    }
    assert_relative_eq!(adjoint_tangential(&flat, &one, &x, 0).unwrap(), -0.3 / 0.25, epsilon = 1e-14);
    assert_relative_eq!(adjoint_tangential(&flat, &one, &x, 1).unwrap(), 0.4 / 0.25, epsilon = 1e-14);
    assert!(adjoint_tangential(&flat, &one, &x, 3).is_err());
}

#[test]
fn radial_laplacian_values() {
    let flat = catalog("flat");
    let constant = PowerProfile { coeff: 3.0, k: 0.0 };
    let square = PowerProfile { coeff: 1.0, k: 2.0 };
    for x in random_points(2, 20, 9, 0.05, 0.9) {
        assert_eq!(radial_surface_laplacian(&flat, &constant, &x).unwrap(), 0.0);
        assert_relative_eq!(radial_surface_laplacian(&flat, &square, &x).unwrap(), 6.0, max_relative = 1e-13);
    }
}

#[test]
fn q_sigma_values() {
    for name in ["paraboloid", "saddle", "flat"] {
        for x in random_points(2, 50, 10, 0.1, 1.0) {
            assert!(q_sigma(&catalog(name), &x, QVariant::Compact).unwrap().abs() <= 1e-9);
        }
    }
    let quartic = catalog("quartic");
    for (s, rel) in [(1e-1, 2e-2), (1e-2, 1e-4)] {
        let q = q_sigma(&quartic, &[s * 0.8, -s * 0.6], QVariant::Compact).unwrap();
        assert!(q < 0.0);
        assert_relative_eq!(q, -20.0 * s.powi(3), max_relative = rel);
    }
}

// Mean-value constants

const C_SADDLE: f64 = 1.938_543_665_011_139_35;
const C_PARABOLOID: f64 = 1.663_046_652_326_845_67;
const C_QUARTIC: [(f64, f64); 4] = [
    (0.05, 2.094_367_054_120_926_17),
    (0.1, 2.093_946_728_414_585_41),
    (0.2, 2.087_320_971_472_028_24),
    (0.4, 2.000_460_965_967_702_52),
];
const M_QUARTIC_NEG_RHO2_AT_02: f64 = -0.023_895_375_322_459_91;

#[test]
fn ball_integral_of_the_kernel_on_the_plane() {
    let flat = catalog("flat");
    let i = integrate_ball(&flat, &|p| grushin_mvf::quadrature::kernel_value(&flat, p), 0.5, 1e-12).unwrap();
    assert_relative_eq!(i.value, 2.0 * PI * 0.125 / 3.0, max_relative = 1e-10);
    assert_relative_eq!(i.value, 0.261799, epsilon = 1e-6);
}

#[test]
fn flat_constant() {
    let p = constant_profile(&catalog("flat"), &[0.1, 0.3, 0.5], 1e-10).unwrap();
    for e in &p.entries {
        assert_relative_eq!(e.c, 2.0 * PI / 3.0, max_relative = 1e-9);
    }
    assert_relative_eq!(p.constant, 3.0 / (2.0 * PI), max_relative = 1e-9);
}

#[test]
fn homogeneous_constants() {
    let grid = [0.05, 0.2, 0.5];
    let p = constant_profile(&catalog("saddle"), &grid, 1e-10).unwrap();
    for e in &p.entries {
        assert_relative_eq!(e.c, C_SADDLE, max_relative = 1e-8);
    }
    let p = constant_profile(&catalog("paraboloid"), &grid, 1e-10).unwrap();
    for e in &p.entries {
        assert_relative_eq!(e.c, C_PARABOLOID, max_relative = 1e-8);
    }
    assert_relative_eq!(C_PARABOLOID, 2.0 * PI / (3.0 * 1.36f64.powf(0.75)), max_relative = 1e-15);
}

#[test]
fn quartic_profile() {
    let radii: Vec<f64> = C_QUARTIC.iter().map(|(r, _)| *r).collect();
    let p = constant_profile(&catalog("quartic"), &radii, 1e-10).unwrap();
    for (e, (r, c)) in p.entries.iter().zip(C_QUARTIC) {
        assert_eq!(e.r, r);
        assert_relative_eq!(e.c, c, max_relative = 1e-8);
    }
    assert!(!p.is_constant);
}

#[test]
fn quartic_mean_of_negative_rho_squared() {
    let s = catalog("quartic");
    let f = RadialField::new(s.clone(), Arc::new(PowerProfile { coeff: -1.0, k: 2.0 }));
    let m = mean_value(&s, &f, 0.2, 1.0 / C_QUARTIC[0].1, 1e-11).unwrap();
    assert_relative_eq!(m, M_QUARTIC_NEG_RHO2_AT_02, max_relative = 1e-7);
}

#[test]
fn flat_means() {
    let s = catalog("flat");
    let c = 3.0 / (2.0 * PI);
    let one = Constant { n: 2, c: 1.0 };
    let rho2 = RadialField::new(s.clone(), Arc::new(PowerProfile { coeff: 1.0, k: 2.0 }));
    let odd = grushin_mvf::field::Polynomial::new(2, vec![Term { coeff: 1.0, powers: vec![1, 2] }]).unwrap();
    for r in [0.1, 0.3, 0.5] {
        assert_relative_eq!(mean_value(&s, &one, r, c, 1e-11).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(mean_value(&s, &rho2, r, c, 1e-11).unwrap(), 0.6 * r * r, max_relative = 1e-9);
        assert!(mean_value(&s, &odd, r, c, 1e-11).unwrap().abs() < 1e-10);
    }
    assert_relative_eq!(mean_value(&s, &rho2, 0.5, c, 1e-11).unwrap(), 0.15, max_relative = 1e-9);
}

// Flatness

#[test]
fn eta_values() {
    let pts = random_points(2, 40, 12, 0.05, 0.95);
    assert_eq!(eta_flatness(&catalog("flat"), &pts), 0.0);
    assert_relative_eq!(eta_flatness(&catalog("paraboloid"), &pts), 1.0, epsilon = 1e-14);
    assert_relative_eq!(eta_flatness(&catalog("quartic"), &pts), 0.5, epsilon = 1e-14);
}

#[test]
fn growth_envelope_values() {
    let pts = random_points(2, 40, 13, 0.05, 0.95);
    let q = growth_envelope_check(&catalog("quartic"), 0.5, &pts).unwrap();
    assert!(q.holds);
    assert_relative_eq!(q.worst_ratio, 1.0, epsilon = 1e-12);
    assert!(growth_envelope_check(&catalog("flat"), 0.0, &pts).unwrap().holds);
    let p = growth_envelope_check(&catalog("paraboloid"), 1.0, &pts).unwrap();
    assert!(p.holds);
    assert_relative_eq!(p.worst_ratio, 1.0, epsilon = 1e-12);
}

#[test]
fn certificate_values() {
    let flat = subharmonicity_certificate(&catalog("flat"), 1e-6).unwrap();
    assert!(flat.condition_i && flat.condition_ii && flat.overall);
    let quartic = subharmonicity_certificate(&catalog("quartic"), 1e-6).unwrap();
    assert!(quartic.condition_i && !quartic.condition_ii && !quartic.overall);
    let last = quartic.condition_ii_samples.last().unwrap();
    assert_relative_eq!(last.ratio, -1.5, max_relative = 1e-3);
    let para = subharmonicity_certificate(&catalog("paraboloid"), 1e-6).unwrap();
    assert!(!para.condition_i && !para.overall);
}

#[test]
fn unit_directions_are_unit() {
    for d in unit_directions(3, 25, 1) {
        assert_relative_eq!(d.iter().map(|v| v * v).sum::<f64>(), 1.0, epsilon = 1e-14);
    }
}
