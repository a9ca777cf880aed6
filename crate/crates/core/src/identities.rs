//! Pointwise identity checks of the tangential calculus at seeded random
//! points of a surface.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ad::{HyperDual, Scalar};
use crate::error::{Error, Result};
use crate::field::{DualField, PowerProfile, SurfaceField};
use crate::gauge::{gauge_derivatives, gauge_derivatives_ad, hessian_form, AmbientField, AmbientFn};
use crate::surface::GraphSurface;
use crate::tangential::{
    laplacian_at, q_sigma_at, radial_surface_laplacian, x_rho_nu_factored, Frame, GaugeOnSurface, LaplacianMethod,
    QVariant, RadialField, Restriction,
};

/// `|a - b| / (1 + max(|a|, |b|))`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// `count` points with `r_min ≤ |x| ≤ r_max`, uniform in direction and radius.
pub fn random_points(n: usize, count: usize, seed: u64, r_min: f64, r_max: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(0.1..=1.0).contains(&norm) {
            continue;
        }
        let r = rng.random_range(r_min..=r_max);
        out.push(d.iter().map(|v| v * r / norm).collect());
    }
    out
}

/// Points for a surface: `|x| ∈ [0.1, 0.9·inradius]`.
pub fn surface_points(surface: &GraphSurface, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let r_max = 0.9 * surface.domain().inradius();
    random_points(surface.n(), count, seed, 0.1f64.min(0.5 * r_max), r_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: &'static str,
    pub max_err: f64,
    pub points: usize,
    pub tol: f64,
    pub pass: bool,
}

pub const IDENTITY_NAMES: [&str; 11] = [
    "tangent_projection",
    "mean_curvature_trace",
    "weighted_laplacian_split",
    "ambient_laplacian",
    "gauge_gradient_norm",
    "gauge_sublaplacian",
    "gauge_hessian_form",
    "q_sigma_forms",
    "x_rho_nu_factorization",
    "radial_laplacian",
    "laplacian_methods",
];

/// A smooth non-polynomial test field in `n` graph variables.
pub fn test_field(n: usize) -> DualField {
    DualField::new(
        n,
        Arc::new(move |v: &[HyperDual]| {
            let mut s = (v[0] * 0.3 - v[n - 1] * 0.2).exp() + v[0] * v[0] * v[0];
            for x in v {
                s = s + *x * *x * 0.5;
            }
            s
        }),
    )
}

/// A test field on the ambient space, genuinely dependent on `y`.
pub fn test_ambient_field(n: usize) -> AmbientFn {
    AmbientFn::new(n, Arc::new(move |v: &[HyperDual]| v[0] * v[n] * v[n] + (v[n - 1] - v[n]).exp()))
}

fn errors_at(surface: &GraphSurface, x: &[f64]) -> Result<[f64; 11]> {
    let params = surface.params();
    let n = surface.n();
    let nf = n as f64;
    let alpha = params.alpha();
    let fr = Frame::new(surface, x)?;
    let nu = fr.normal();
    let pt = fr.point().clone();
    let p = pt.ambient();

    let field = test_field(n);
    let jet = field.jet(x);
    let d = fr.delta_graph(&jet.g);
    let tangent = d.iter().enumerate().map(|(i, di)| di * fr.nu(i)).sum::<f64>().abs();

    let trace = rel_err(fr.delta_nu_trace(), -nf * fr.mean_curvature());

    let dla = fr.delta_log_a();
    let dot: f64 = d.iter().zip(&dla).map(|(a, b)| a * b).sum();
    let split = fr.nested_laplacian(&jet) + nu.nu_last * nu.nu_last * dot + d[n] * dla[n];
    let adjoint = laplacian_at(&fr, &jet, LaplacianMethod::Adjoint);
    let split_err = rel_err(adjoint, split);

    let phi: Arc<dyn AmbientField> = Arc::new(test_ambient_field(n));
    let restricted = Restriction::new(surface.clone(), phi.clone());
    let ambient_err = rel_err(fr.nested_laplacian(&restricted.jet(x)), fr.laplacian_from_ambient(surface, phi.as_ref()));

    let g = GaugeOnSurface::new(surface, &fr)?;
    let ad = gauge_derivatives_ad(params, &p)?;
    let closed = gauge_derivatives(params, &p)?;
    let expected = (pt.s / g.rho).powf(2.0 * alpha);
    let norm_err = rel_err(ad.x_gradient.norm_squared(), expected)
        .max(rel_err(g.kernel() + g.x_rho_nu * g.x_rho_nu, expected));
    let sub_err = rel_err(ad.l_rho, params.homogeneous_dim() * expected / g.rho).max(rel_err(closed.l_rho, ad.l_rho));

    let nu_full: Vec<f64> = (0..=n).map(|i| fr.nu(i)).collect();
    let mut form_ad = 0.0;
    for i in 0..=n {
        for k in 0..=n {
            form_ad += nu_full[i] * ad.x_hessian[(i, k)] * nu_full[k];
        }
    }
    let form_err = rel_err(hessian_form(params, &p, &nu.nu_bar, nu.nu_last)?, form_ad);

    let q_err = rel_err(
        q_sigma_at(surface, &fr, QVariant::Compact)?,
        q_sigma_at(surface, &fr, QVariant::Expanded)?,
    );
    let fact_err = rel_err(x_rho_nu_factored(surface, &fr), g.x_rho_nu);

    let mut radial_err = 0.0f64;
    for k in [2.0, 3.0] {
        let profile = PowerProfile { coeff: 1.0, k };
        let rf = RadialField::new(surface.clone(), Arc::new(profile));
        let nested = laplacian_at(&fr, &rf.jet(x), LaplacianMethod::Adjoint);
        radial_err = radial_err.max(rel_err(radial_surface_laplacian(surface, &profile, x)?, nested));
    }

    let methods: Vec<f64> = LaplacianMethod::ALL.iter().map(|m| laplacian_at(&fr, &jet, *m)).collect();
    let three = rel_err(methods[0], methods[1]).max(rel_err(methods[0], methods[2])).max(rel_err(methods[1], methods[2]));

    Ok([
        tangent,
        trace,
        split_err,
        ambient_err,
        norm_err,
        sub_err,
        form_err,
        q_err,
        fact_err,
        radial_err,
        three,
    ])
}

/// Every identity at `count` seeded points, each judged against `tol`.
pub fn identity_suite(surface: &GraphSurface, count: usize, seed: u64, tol: f64) -> Result<Vec<IdentityResult>> {
    if count == 0 {
        return Err(Error::Argument("identity suite needs at least one point".into()));
    }
    let points = surface_points(surface, count, seed);
    let per_point: Result<Vec<[f64; 11]>> = points.par_iter().map(|x| errors_at(surface, x)).collect();
    let per_point = per_point?;
    Ok(IDENTITY_NAMES
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let max_err = per_point.iter().map(|e| e[k]).fold(0.0, f64::max);
            IdentityResult {
                name,
                max_err,
                points: count,
                tol,
                pass: max_err <= tol,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GrushinParams;
    use crate::surface::{catalog_spec, make_surface, Domain};

    #[test]
    fn points_are_seeded_and_in_range() {
        let a = random_points(3, 50, 7, 0.1, 0.8);
        assert_eq!(a, random_points(3, 50, 7, 0.1, 0.8));
        assert_ne!(a, random_points(3, 50, 8, 0.1, 0.8));
        for x in &a {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((0.1 - 1e-12..=0.8 + 1e-12).contains(&r));
        }
    }

    #[test]
    fn suite_passes_on_catalog() {
        for alpha in [1.0, 2.0] {
            let params = GrushinParams::new(2, alpha).unwrap();
            for name in ["flat", "paraboloid", "quartic", "saddle"] {
                let spec = catalog_spec(name, &params).unwrap();
                let s = make_surface(params, &spec, Domain::ball(1.0)).unwrap();
                for r in identity_suite(&s, 20, 3, 1e-8).unwrap() {
                    assert!(r.pass, "{name} α={alpha}: {} = {:e}", r.name, r.max_err);
                }
            }
        }
    }

    #[test]
    fn suite_in_three_dimensions() {
        let params = GrushinParams::new(3, 1.0).unwrap();
        let spec = catalog_spec("quartic", &params).unwrap();
        let s = make_surface(params, &spec, Domain::ball(1.0)).unwrap();
        assert!(identity_suite(&s, 10, 1, 1e-8).unwrap().iter().all(|r| r.pass));
    }
}
