//! Graph hypersurfaces `Σ = {(x, u(x)) : x ∈ Ω}` in Grushin space.
//!
//! With `a = |x|^α` the σ-area element is `v = √(|∇u|² + a²)`, the upward
//! α-normal is `ν = (-∇u, a)/v`, and the α-mean curvature is
//! `H = (1/n) div(∇u/v)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::ad::{hessian_of, DualFn, Grad, Hess, HyperDual, Jet2};
use crate::cubature::{integrate, CubatureOptions, Integral, Region};
use crate::error::{Error, Result};
use crate::field::{Polynomial, SurfaceField, Term};
use crate::gauge::{AmbientJet, AmbientPoint, GrushinParams};

/// The parameter domain `Ω ⊂ ℝⁿ`, which must contain the origin in its
/// interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Domain {
    Ball { radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn ball(radius: f64) -> Self {
        Domain::Ball { radius }
    }

    pub fn cube(n: usize, half_width: f64) -> Self {
        Domain::Box {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Domain::Ball { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Spec(format!("domain radius must be positive, got {radius}")));
                }
            }
            Domain::Box { lo, hi } => {
                if lo.len() != n || hi.len() != n {
                    return Err(Error::Spec(format!("box domain needs {n} bounds per corner")));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && *a < 0.0 && *b > 0.0)) {
                    return Err(Error::Spec("box domain must contain the origin in its interior".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>().sqrt() <= *radius,
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| a <= v && v <= b),
        }
    }

    /// Radius of the largest origin-centred ball inside the domain.
    pub fn inradius(&self) -> f64 {
        match self {
            Domain::Ball { radius } => *radius,
            Domain::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| (-a).min(*b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn bounds(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Ball { radius } => (vec![-radius; n], vec![*radius; n]),
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    /// The domain as an integration region.
    pub fn region(&self, n: usize) -> Result<Region> {
        match self {
            Domain::Ball { radius } => Region::ball(vec![0.0; n], *radius),
            Domain::Box { lo, hi } => Region::cube(lo.clone(), hi.clone()),
        }
    }

    /// Deterministic sample of boundary points.
    pub fn boundary_samples(&self, n: usize, count: usize) -> Vec<Vec<f64>> {
        let count = count.max(4);
        match (self, n) {
            (Domain::Ball { radius }, 1) => vec![vec![-radius], vec![*radius]],
            (Domain::Box { lo, hi }, 1) => vec![vec![lo[0]], vec![hi[0]]],
            (Domain::Ball { radius }, 2) => (0..count)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / count as f64;
                    vec![radius * t.cos(), radius * t.sin()]
                })
                .collect(),
            (Domain::Box { lo, hi }, 2) => {
                let m = count / 4;
                let mut out = Vec::with_capacity(4 * m);
                for k in 0..m {
                    let t = k as f64 / m as f64;
                    let x = lo[0] + t * (hi[0] - lo[0]);
                    let y = lo[1] + t * (hi[1] - lo[1]);
                    out.push(vec![x, lo[1]]);
                    out.push(vec![hi[0], y]);
                    out.push(vec![hi[0] - (x - lo[0]), hi[1]]);
                    out.push(vec![lo[0], hi[1] - (y - lo[1])]);
                }
                out
            }
            (Domain::Ball { radius }, _) => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
                let mut out = Vec::with_capacity(count);
                while out.len() < count {
                    let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 1e-3 && norm <= 1.0 {
                        out.push(d.iter().map(|v| radius * v / norm).collect());
                    }
                }
                out
            }
            (Domain::Box { lo, hi }, _) => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
                (0..count)
                    .map(|k| {
                        let mut p: Vec<f64> = (0..n).map(|i| rng.random_range(lo[i]..hi[i])).collect();
                        let axis = k % n;
                        p[axis] = if (k / n) % 2 == 0 { lo[axis] } else { hi[axis] };
                        p
                    })
                    .collect()
            }
        }
    }
}

/// Catalog description of `u`, as written in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceSpec {
    /// `u ≡ 0`.
    Flat,
    /// `u = c|x|^m`.
    RadialPower { c: f64, m: f64 },
    /// A polynomial given as a list of monomials.
    Monomial { terms: Vec<Term> },
}

#[derive(Clone)]
enum Shape {
    Flat,
    RadialPower { c: f64, m: f64 },
    Polynomial(Polynomial),
    Custom(DualFn),
}

#[derive(Clone)]
pub struct GraphSurface {
    params: GrushinParams,
    domain: Domain,
    shape: Shape,
    label: String,
}

impl std::fmt::Debug for GraphSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphSurface")
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("label", &self.label)
            .finish()
    }
}

/// Geometric data of `Σ` over one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoint {
    pub x: Grad,
    pub u: f64,
    pub grad: Grad,
    /// `∇²u`, row-major.
    pub hess: Hess,
    /// `|x|`.
    pub s: f64,
    /// `|x|^α`.
    pub a: f64,
    /// `√(|∇u|² + a²)`.
    pub v: f64,
}

impl SurfacePoint {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn ambient(&self) -> AmbientPoint {
        AmbientPoint::new(self.x.to_vec(), self.u)
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn is_pole(&self) -> bool {
        self.s == 0.0
    }

    pub fn normal(&self) -> Result<Normal> {
        if self.is_pole() {
            return Err(Error::Domain("the α-normal is undefined at x = 0".into()));
        }
        Ok(Normal {
            nu_bar: self.grad.iter().map(|g| -g / self.v).collect(),
            nu_last: self.a / self.v,
        })
    }

    /// `⟨∇u, x⟩ - (α+1) u`.
    pub fn euler_residual(&self, alpha: f64) -> f64 {
        let dot: f64 = self.grad.iter().zip(&self.x).map(|(g, x)| g * x).sum();
        dot - (alpha + 1.0) * self.u
    }

    /// `∇a = α|x|^{α-2} x`, zero at the pole.
    pub fn grad_a(&self, alpha: f64) -> Grad {
        if self.is_pole() {
            return SmallVec::from_elem(0.0, self.dim());
        }
        let f = alpha * self.s.powf(alpha - 2.0);
        self.x.iter().map(|xi| f * xi).collect()
    }

    pub fn mean_curvature(&self, alpha: f64) -> Result<f64> {
        if self.is_pole() {
            return Err(Error::Domain("the α-mean curvature is undefined at x = 0".into()));
        }
        let n = self.dim();
        let grad_a = self.grad_a(alpha);
        let lap: f64 = (0..n).map(|i| self.hess(i, i)).sum();
        let mut grad_u_dot_grad_v = 0.0;
        for k in 0..n {
            let hv: f64 = (0..n).map(|j| self.hess(k, j) * self.grad[j]).sum();
            grad_u_dot_grad_v += self.grad[k] * (hv + self.a * grad_a[k]) / self.v;
        }
        Ok((lap / self.v - grad_u_dot_grad_v / (self.v * self.v)) / n as f64)
    }
}

/// The upward α-normal `(ν̄, ν_{n+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normal {
    pub nu_bar: Grad,
    pub nu_last: f64,
}

impl Normal {
    pub fn dim(&self) -> usize {
        self.nu_bar.len() + 1
    }

    /// Component `i` of the full `(n+1)`-vector.
    pub fn component(&self, i: usize) -> f64 {
        if i < self.nu_bar.len() {
            self.nu_bar[i]
        } else {
            self.nu_last
        }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        (0..self.dim()).map(|i| self.component(i) * w[i]).sum()
    }
}

fn radial_power_rule(params: &GrushinParams, c: f64, m: f64) -> Result<()> {
    if !(c.is_finite() && m.is_finite()) {
        return Err(Error::Spec("radial-power needs finite c and m".into()));
    }
    if m < 2.0 {
        return Err(Error::Spec(format!(
            "radial-power exponent m = {m} < 2: c|x|^m is not C² at the origin"
        )));
    }
    let beta = params.beta();
    if m.fract() != 0.0 && m < beta {
        return Err(Error::Spec(format!(
            "radial-power exponent m = {m} is fractional and below α+1 = {beta}; regularity at the origin is marginal"
        )));
    }
    Ok(())
}

/// Builds a catalog surface over `domain`.
pub fn make_surface(params: GrushinParams, spec: &SurfaceSpec, domain: Domain) -> Result<GraphSurface> {
    domain.validate(params.n())?;
    let (shape, label) = match spec {
        SurfaceSpec::Flat => (Shape::Flat, "flat".to_string()),
        SurfaceSpec::RadialPower { c, m } => {
            radial_power_rule(&params, *c, *m)?;
            (Shape::RadialPower { c: *c, m: *m }, format!("radial-power(c={c},m={m})"))
        }
        SurfaceSpec::Monomial { terms } => {
            let p = Polynomial::new(params.n(), terms.clone())?;
            if p.constant_term() != 0.0 {
                return Err(Error::Spec("u(0) must vanish: drop the constant term".into()));
            }
            let desc: Vec<String> = terms
                .iter()
                .map(|t| {
                    let mono: Vec<String> = t.powers.iter().map(|e| e.to_string()).collect();
                    format!("{}*x^[{}]", t.coeff, mono.join(","))
                })
                .collect();
            (Shape::Polynomial(p), format!("monomial({})", desc.join(" + ")))
        }
    };
    Ok(GraphSurface {
        params,
        domain,
        shape,
        label,
    })
}

impl GraphSurface {
    /// A surface from a user-supplied expression, differentiated by
    /// hyper-duals. The graph must pass through the origin.
    pub fn custom(params: GrushinParams, domain: Domain, label: impl Into<String>, f: DualFn) -> Result<Self> {
        domain.validate(params.n())?;
        let zero: Vec<HyperDual> = vec![HyperDual::constant(0.0); params.n()];
        let u0 = f(&zero).re.re;
        if !u0.is_finite() || u0.abs() > 1e-14 {
            return Err(Error::Spec(format!("u(0) = {u0}, the graph must pass through the origin")));
        }
        Ok(GraphSurface {
            params,
            domain,
            shape: Shape::Custom(f),
            label: label.into(),
        })
    }

    pub fn flat(params: GrushinParams, domain: Domain) -> Result<Self> {
        make_surface(params, &SurfaceSpec::Flat, domain)
    }

    pub fn params(&self) -> &GrushinParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.shape, Shape::Flat)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "expected {} finite coordinates, got {x:?}",
                self.n()
            )));
        }
        Ok(())
    }

    /// `u(x)` alone.
    pub fn height(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Flat => 0.0,
            Shape::RadialPower { c, m } => c * x.iter().map(|v| v * v).sum::<f64>().powf(0.5 * m),
            Shape::Polynomial(p) => p.value(x),
            Shape::Custom(f) => {
                let args: SmallVec<[HyperDual; 4]> = x.iter().map(|v| HyperDual::constant(*v)).collect();
                f(&args).re.re
            }
        }
    }

    /// `u` with its gradient and Hessian.
    pub fn height_jet(&self, x: &[f64]) -> Jet2 {
        let n = self.n();
        match &self.shape {
            Shape::Flat => Jet2::constant(0.0, n),
            Shape::RadialPower { c, m } => {
                let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut j = Jet2::constant(0.0, n);
                if s == 0.0 {
                    if *m == 2.0 {
                        for i in 0..n {
                            j.h[i * n + i] = 2.0 * c;
                        }
                    }
                    return j;
                }
                // profile c s^m: φ'/s and φ'' - φ'/s, both bounded at 0
                let p1_s = c * m * s.powf(m - 2.0);
                let p2 = c * m * (m - 1.0) * s.powf(m - 2.0);
                j.v = c * s.powf(*m);
                for i in 0..n {
                    j.g[i] = p1_s * x[i];
                    for k in 0..n {
                        let delta = if i == k { p1_s } else { 0.0 };
                        j.h[i * n + k] = (p2 - p1_s) * x[i] * x[k] / (s * s) + delta;
                    }
                }
                j
            }
            Shape::Polynomial(p) => p.jet(x),
            Shape::Custom(f) => hessian_of(f, x),
        }
    }

    /// Geometric data at `x`, assuming `x` is a valid parameter point.
    pub(crate) fn point_at(&self, x: &[f64]) -> SurfacePoint {
        let j = self.height_jet(x);
        let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = s.powf(self.alpha());
        let v = (j.g.iter().map(|g| g * g).sum::<f64>() + a * a).sqrt();
        SurfacePoint {
            x: SmallVec::from_slice(x),
            u: j.v,
            grad: j.g,
            hess: j.h,
            s,
            a,
            v,
        }
    }

    pub fn point(&self, x: &[f64]) -> Result<SurfacePoint> {
        self.check_dim(x)?;
        Ok(self.point_at(x))
    }

    pub fn alpha_normal(&self, x: &[f64]) -> Result<Normal> {
        self.point(x)?.normal()
    }

    /// `v(x)`; at the pole this is `|∇u(0)|` by continuity.
    pub fn area_element(&self, x: &[f64]) -> Result<f64> {
        Ok(self.point(x)?.v)
    }

    pub fn mean_curvature(&self, x: &[f64]) -> Result<f64> {
        self.point(x)?.mean_curvature(self.alpha())
    }

    pub fn euler_residual(&self, x: &[f64]) -> Result<f64> {
        Ok(self.point(x)?.euler_residual(self.alpha()))
    }

    /// Jet of `x ↦ φ(x, u(x))` from the Euclidean jet of an ambient `φ`
    /// at `(x, u(x))`.
    pub fn restrict(&self, pt: &SurfacePoint, jet: &AmbientJet) -> Jet2 {
        let n = self.n();
        let fy = jet.grad[n];
        let mut out = Jet2::constant(jet.value, n);
        for i in 0..n {
            out.g[i] = jet.grad[i] + fy * pt.grad[i];
        }
        for i in 0..n {
            for k in 0..n {
                out.h[i * n + k] = jet.hess(i, k)
                    + jet.hess(i, n) * pt.grad[k]
                    + jet.hess(k, n) * pt.grad[i]
                    + jet.hess(n, n) * pt.grad[i] * pt.grad[k]
                    + fy * pt.hess(i, k);
            }
        }
        out
    }

    /// `∫ g v dx` over `region ∩ Ω` to absolute tolerance `tol`.
    pub fn integrate_surface(
        &self,
        g: &(dyn Fn(&SurfacePoint) -> f64 + Sync),
        region: &Region,
        tol: f64,
    ) -> Result<Integral> {
        let region = self.clip_to_domain(region.clone())?;
        integrate(
            &|x: &[f64]| {
                let pt = self.point_at(x);
                g(&pt) * pt.v
            },
            &region,
            &CubatureOptions::with_abs_tol(tol),
        )
    }

    /// `∫ F v dx` for a surface field.
    pub fn integrate_field(&self, f: &dyn SurfaceField, region: &Region, tol: f64) -> Result<Integral> {
        self.integrate_surface(&|pt: &SurfacePoint| f.value(&pt.x), region, tol)
    }

    pub(crate) fn clip_to_domain(&self, region: Region) -> Result<Region> {
        if region.dim() != self.n() {
            return Err(Error::Argument(format!(
                "region has dimension {}, surface has {}",
                region.dim(),
                self.n()
            )));
        }
        let (lo, hi) = self.domain.bounds(self.n());
        let region = region
            .clip_box(&lo, &hi)
            .map_err(|_| Error::Region("integration region misses the surface domain".into()))?;
        Ok(match &self.domain {
            Domain::Ball { radius } => {
                let r = *radius;
                region.with_constraint(Arc::new(move |x: &[f64]| {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt() - r
                }))
            }
            Domain::Box { .. } => region,
        })
    }
}

/// The named catalog entries available for `(n, α)`.
///
/// `paraboloid` is `0.3|x|^{α+1}` (homogeneous, needs `α ≥ 1`), `saddle` is
/// `x₁x₂` (homogeneous for `α = 1`, needs `n ≥ 2`), `quartic` is `|x|⁴`.
pub fn catalog_spec(name: &str, params: &GrushinParams) -> Option<SurfaceSpec> {
    let n = params.n();
    match name {
        "flat" => Some(SurfaceSpec::Flat),
        "paraboloid" => Some(SurfaceSpec::RadialPower {
            c: 0.3,
            m: params.beta(),
        }),
        "quartic" => Some(SurfaceSpec::RadialPower { c: 1.0, m: 4.0 }),
        "saddle" if n >= 2 => {
            let mut powers = vec![0; n];
            powers[0] = 1;
            powers[1] = 1;
            Some(SurfaceSpec::Monomial {
                terms: vec![Term { coeff: 1.0, powers }],
            })
        }
        _ => None,
    }
}
