//! Tangential calculus on a graph surface.
//!
//! For a field `φ` the tangential gradient is `δφ = Xφ - ⟨Xφ, ν⟩ν`. Fields
//! given in graph coordinates are extended constant in `y`, so their
//! X-gradient is `(∇F, 0)`. The normal depends on `x` only and is carried as
//! first-order jets, which makes nested operators such as `δᵢ(δᵢF)` and
//! `δᵢ*ψ` exact.
//!
//! Indices are zero-based: `i = n` is the vertical direction `X_{n+1}`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::ad::{Grad, Jet1, Jet2, Scalar};
use crate::error::{Error, Result};
use crate::field::{Profile, SurfaceField};
use crate::gauge::{gauge_derivatives, gauge_jet, hessian_form, rho, x_frame, AmbientField, AmbientPoint};
use crate::surface::{GraphSurface, Normal, SurfacePoint};

type Jets = SmallVec<[Jet1; 4]>;

/// Normal, mean curvature and log-weight at one point of `Σ*`, with the
/// first derivatives in `x` needed by nested tangential operators.
#[derive(Clone, Debug)]
pub struct Frame {
    pt: SurfacePoint,
    nu: Jets,
    /// σ-area element.
    v: Jet1,
    mean_curvature: f64,
    /// `log a = α log|x|`.
    log_a: Jet1,
}

impl Frame {
    pub fn new(surface: &GraphSurface, x: &[f64]) -> Result<Self> {
        let pt = surface.point(x)?;
        Self::from_point(surface, pt)
    }

    pub fn from_point(surface: &GraphSurface, pt: SurfacePoint) -> Result<Self> {
        if pt.is_pole() {
            return Err(Error::Domain("tangential operators are undefined at x = 0".into()));
        }
        let n = pt.dim();
        let alpha = surface.alpha();
        let s2 = Jet1::from_parts(pt.s * pt.s, &pt.x.iter().map(|v| 2.0 * v).collect::<Grad>());
        let a = s2.clone().powf(0.5 * alpha);
        let log_a = s2.ln() * (0.5 * alpha);
        let du: Jets = (0..n)
            .map(|i| Jet1::from_parts(pt.grad[i], &pt.hess[i * n..(i + 1) * n]))
            .collect();
        let v = du
            .iter()
            .fold(a.clone().square(), |acc, d| acc + d.clone().square())
            .sqrt();
        let mut nu: Jets = du.iter().map(|d| -(d.clone() / v.clone())).collect();
        nu.push(a / v.clone());
        let mean_curvature = pt.mean_curvature(alpha)?;
        Ok(Frame {
            pt,
            nu,
            v,
            mean_curvature,
            log_a,
        })
    }

    pub fn point(&self) -> &SurfacePoint {
        &self.pt
    }

    pub fn n(&self) -> usize {
        self.pt.dim()
    }

    pub fn normal(&self) -> Normal {
        let n = self.n();
        Normal {
            nu_bar: self.nu[..n].iter().map(|j| j.v).collect(),
            nu_last: self.nu[n].v,
        }
    }

    pub fn nu(&self, i: usize) -> f64 {
        self.nu[i].v
    }

    pub fn mean_curvature(&self) -> f64 {
        self.mean_curvature
    }

    /// Projection of a full X-gradient onto the tangent space.
    pub fn project(&self, w: &[f64]) -> Grad {
        let dot: f64 = (0..=self.n()).map(|i| w[i] * self.nu[i].v).sum();
        (0..=self.n()).map(|i| w[i] - dot * self.nu[i].v).collect()
    }

    /// `δG` for a function of the graph coordinates with gradient `grad`.
    pub fn delta_graph(&self, grad: &[f64]) -> Grad {
        let n = self.n();
        let dot: f64 = (0..n).map(|k| grad[k] * self.nu[k].v).sum();
        (0..=n)
            .map(|i| {
                let gi = if i < n { grad[i] } else { 0.0 };
                gi - dot * self.nu[i].v
            })
            .collect()
    }

    /// `δᵢF` for every `i`, each as a first-order jet in `x`.
    pub fn delta_jets(&self, f: &Jet2) -> Jets {
        let n = self.n();
        let partials: Jets = (0..n).map(|k| f.partial(k)).collect();
        let dot = (0..n).fold(Jet1::constant(0.0, n), |acc, k| {
            acc + partials[k].clone() * self.nu[k].clone()
        });
        (0..=n)
            .map(|i| {
                let proj = dot.clone() * self.nu[i].clone();
                if i < n {
                    partials[i].clone() - proj
                } else {
                    -proj
                }
            })
            .collect()
    }

    /// `δ_i ν_j` for all `i, j`, row-major `(n+1)²`.
    pub fn delta_nu(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; (n + 1) * (n + 1)];
        for j in 0..=n {
            let d = self.delta_graph(&self.nu[j].g);
            for i in 0..=n {
                out[i * (n + 1) + j] = d[i];
            }
        }
        out
    }

    /// `δ log a`.
    pub fn delta_log_a(&self) -> Grad {
        self.delta_graph(&self.log_a.g)
    }

    /// The bracket `δᵢ log a + (δ_{n+1}νᵢ - δᵢν_{n+1})/ν_{n+1} + nHνᵢ` of the
    /// adjoint, for every `i`.
    pub fn adjoint_bracket(&self) -> Grad {
        let n = self.n();
        let dnu = self.delta_nu();
        let dla = self.delta_log_a();
        let nl = self.nu[n].v;
        let nh = n as f64 * self.mean_curvature;
        (0..=n)
            .map(|i| {
                let d_last_nu_i = dnu[n * (n + 1) + i];
                let d_i_nu_last = dnu[i * (n + 1) + n];
                dla[i] + (d_last_nu_i - d_i_nu_last) / nl + nh * self.nu[i].v
            })
            .collect()
    }

    /// `δᵢ*ψ` for a field with jet `psi`, every `i`.
    pub fn adjoint(&self, psi: &Jet2) -> Grad {
        let d = self.delta_graph(&psi.g);
        self.adjoint_bracket()
            .iter()
            .zip(&d)
            .map(|(b, di)| -di - psi.v * b)
            .collect()
    }

    /// `Δ_Σ F = Σᵢ δᵢ(δᵢF)` by nested differentiation.
    pub fn nested_laplacian(&self, f: &Jet2) -> f64 {
        self.delta_jets(f)
            .iter()
            .enumerate()
            .map(|(i, di)| self.delta_graph(&di.g)[i])
            .sum()
    }

    /// `Σᵢ δᵢνᵢ`, which equals `-nH`.
    pub fn delta_nu_trace(&self) -> f64 {
        let n = self.n();
        let dnu = self.delta_nu();
        (0..=n).map(|i| dnu[i * (n + 1) + i]).sum()
    }

    /// `Δ_Σφ = 𝓛φ - ⟨(X²φ)ν, ν⟩ + nH⟨Xφ, ν⟩` for an ambient field.
    pub fn laplacian_from_ambient(&self, surface: &GraphSurface, field: &dyn AmbientField) -> f64 {
        let p = self.pt.ambient();
        let jet = field.jet(&p);
        let (xg, xh) = x_frame(surface.params(), &p, &jet);
        let n = self.n();
        let nu = DVector::from_iterator(n + 1, self.nu.iter().map(|j| j.v));
        let l: f64 = (0..=n).map(|i| xh[(i, i)]).sum();
        let form = nu.dot(&(&xh * &nu));
        l - form + n as f64 * self.mean_curvature * xg.dot(&nu)
    }
}

/// Either kind of field the tangential operators accept.
#[derive(Clone, Copy)]
pub enum FieldRef<'a> {
    Surface(&'a dyn SurfaceField),
    Ambient(&'a dyn AmbientField),
}

/// `δφ` at `(x, u(x))`.
pub fn tangential_gradient(surface: &GraphSurface, field: FieldRef<'_>, x: &[f64]) -> Result<Grad> {
    let fr = Frame::new(surface, x)?;
    Ok(match field {
        FieldRef::Surface(f) => fr.delta_graph(&f.jet(x).g),
        FieldRef::Ambient(f) => {
            let p = fr.point().ambient();
            let (xg, _) = x_frame(surface.params(), &p, &f.jet(&p));
            fr.project(xg.as_slice())
        }
    })
}

/// Gauge quantities along `Σ` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeOnSurface {
    pub rho: f64,
    pub x_rho: DVector<f64>,
    /// `⟨Xρ, ν⟩`.
    pub x_rho_nu: f64,
    /// `δρ`.
    pub delta_rho: Grad,
}

impl GaugeOnSurface {
    pub fn new(surface: &GraphSurface, frame: &Frame) -> Result<Self> {
        let p = frame.point().ambient();
        let d = gauge_derivatives(surface.params(), &p)?;
        let nu = DVector::from_iterator(frame.n() + 1, (0..=frame.n()).map(|i| frame.nu(i)));
        let x_rho_nu = d.x_gradient.dot(&nu);
        let delta_rho = frame.project(d.x_gradient.as_slice());
        Ok(GaugeOnSurface {
            rho: rho(surface.params(), &p),
            x_rho: d.x_gradient,
            x_rho_nu,
            delta_rho,
        })
    }

    /// `|δρ|²`, the mean-value kernel.
    pub fn kernel(&self) -> f64 {
        self.delta_rho.iter().map(|d| d * d).sum()
    }
}

/// `|δρ|²` at `(x, u(x))`.
pub fn kernel(surface: &GraphSurface, x: &[f64]) -> Result<f64> {
    let fr = Frame::new(surface, x)?;
    Ok(GaugeOnSurface::new(surface, &fr)?.kernel())
}

/// `δᵢ*ψ` (zero-based `i`, `i = n` is the vertical direction).
pub fn adjoint_tangential(surface: &GraphSurface, psi: &dyn SurfaceField, x: &[f64], i: usize) -> Result<f64> {
    if i > surface.n() {
        return Err(Error::Argument(format!("index {i} out of range 0..={}", surface.n())));
    }
    let fr = Frame::new(surface, x)?;
    Ok(fr.adjoint(&psi.jet(x))[i])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianMethod {
    /// `-Σᵢ δᵢ*(δᵢF)`.
    Adjoint,
    /// `Δ_Σ F + ν_{n+1}²⟨δF, δ log a⟩ + δ_{n+1}F δ_{n+1} log a`.
    Corrected,
    /// `(1/v) div(A∇F)` with `A = vI - ∇u∇uᵀ/v`.
    Divergence,
}

impl LaplacianMethod {
    pub const ALL: [LaplacianMethod; 3] = [
        LaplacianMethod::Adjoint,
        LaplacianMethod::Corrected,
        LaplacianMethod::Divergence,
    ];
}

/// `L_Σ F` from the jet of `F` at the frame point.
pub fn laplacian_at(frame: &Frame, f: &Jet2, method: LaplacianMethod) -> f64 {
    let n = frame.n();
    match method {
        LaplacianMethod::Adjoint => {
            let bracket = frame.adjoint_bracket();
            frame
                .delta_jets(f)
                .iter()
                .enumerate()
                .map(|(i, di)| frame.delta_graph(&di.g)[i] + di.v * bracket[i])
                .sum()
        }
        LaplacianMethod::Corrected => {
            // Δ_Σ from the ambient identity applied to the y-constant extension:
            // 𝓛F = ΔF, the X-Hessian is ∇²F padded with zeros, XF = (∇F, 0).
            let nu = frame.normal();
            let lap: f64 = (0..n).map(|i| f.hess(i, i)).sum();
            let mut form = 0.0;
            for i in 0..n {
                for k in 0..n {
                    form += nu.nu_bar[i] * nu.nu_bar[k] * f.hess(i, k);
                }
            }
            let grad_nu: f64 = (0..n).map(|i| f.g[i] * nu.nu_bar[i]).sum();
            let delta_sigma = lap - form + n as f64 * frame.mean_curvature() * grad_nu;
            let df = frame.delta_graph(&f.g);
            let dla = frame.delta_log_a();
            let dot: f64 = df.iter().zip(&dla).map(|(a, b)| a * b).sum();
            delta_sigma + nu.nu_last * nu.nu_last * dot + df[n] * dla[n]
        }
        LaplacianMethod::Divergence => {
            let pt = frame.point();
            let v = frame.v.clone();
            let du: Jets = (0..n)
                .map(|i| Jet1::from_parts(pt.grad[i], &pt.hess[i * n..(i + 1) * n]))
                .collect();
            let df: Jets = (0..n).map(|k| f.partial(k)).collect();
            let dot = (0..n).fold(Jet1::constant(0.0, n), |acc, k| acc + du[k].clone() * df[k].clone());
            let flux_div: f64 = (0..n)
                .map(|k| {
                    let w = v.clone() * df[k].clone() - du[k].clone() * dot.clone() / v.clone();
                    w.g[k]
                })
                .sum();
            flux_div / pt.v
        }
    }
}

/// `L_Σ F` at `(x, u(x))`.
pub fn surface_laplacian(
    surface: &GraphSurface,
    f: &dyn SurfaceField,
    x: &[f64],
    method: LaplacianMethod,
) -> Result<f64> {
    let fr = Frame::new(surface, x)?;
    Ok(laplacian_at(&fr, &f.jet(x), method))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QVariant {
    /// `⟨Xρ,ν⟩[(n+3α)⟨X log ρ, ν⟩ - 2α⟨∇ log|x|, ν̄⟩ + nH]`.
    #[default]
    Compact,
    /// `L_Σρ - (n+α-1)|δρ|²/ρ` with `L_Σρ` written through `𝓛ρ`,
    /// `⟨(X²ρ)ν, ν⟩` and the log-weight corrections.
    Expanded,
}

/// `q_Σ` from a prepared frame.
pub fn q_sigma_at(surface: &GraphSurface, frame: &Frame, variant: QVariant) -> Result<f64> {
    let params = surface.params();
    let n = frame.n();
    let nf = n as f64;
    let alpha = params.alpha();
    let g = GaugeOnSurface::new(surface, frame)?;
    let nu = frame.normal();
    let pt = frame.point();
    let h = frame.mean_curvature();
    match variant {
        QVariant::Compact => {
            let x_nu: f64 = pt.x.iter().zip(&nu.nu_bar).map(|(x, v)| x * v).sum();
            let log_x_nu = x_nu / (pt.s * pt.s);
            Ok(g.x_rho_nu * ((nf + 3.0 * alpha) * g.x_rho_nu / g.rho - 2.0 * alpha * log_x_nu + nf * h))
        }
        QVariant::Expanded => {
            let p = pt.ambient();
            let form = hessian_form(params, &p, &nu.nu_bar, nu.nu_last)?;
            let x_rho_sq = g.x_rho.norm_squared();
            let l_rho = params.homogeneous_dim() * x_rho_sq / g.rho;
            let delta_sigma = l_rho - form + nf * h * g.x_rho_nu;
            let dla = frame.delta_log_a();
            let dot: f64 = g.delta_rho.iter().zip(&dla).map(|(a, b)| a * b).sum();
            let l_sigma = delta_sigma + nu.nu_last * nu.nu_last * dot + g.delta_rho[n] * dla[n];
            Ok(l_sigma - (params.homogeneous_dim() - 1.0) / g.rho * g.kernel())
        }
    }
}

/// The structural function `q_Σ` at `(x, u(x))`.
pub fn q_sigma(surface: &GraphSurface, x: &[f64], variant: QVariant) -> Result<f64> {
    let fr = Frame::new(surface, x)?;
    q_sigma_at(surface, &fr, variant)
}

/// `{φ'' + φ'(n+α-1)/ρ}|δρ|² + q_Σ φ'` at `(x, u(x))`.
pub fn radial_surface_laplacian(surface: &GraphSurface, profile: &dyn Profile, x: &[f64]) -> Result<f64> {
    let fr = Frame::new(surface, x)?;
    let g = GaugeOnSurface::new(surface, &fr)?;
    let q = q_sigma_at(surface, &fr, QVariant::Compact)?;
    let (_, d1, d2) = profile.eval(g.rho);
    let hd = surface.params().homogeneous_dim();
    Ok((d2 + d1 * (hd - 1.0) / g.rho) * g.kernel() + q * d1)
}

/// `(|Xρ|/ρ^{α+1})(|x|^α⟨x, ν̄⟩ + (α+1) y ν_{n+1})`, which equals `⟨Xρ, ν⟩`.
pub fn x_rho_nu_factored(surface: &GraphSurface, frame: &Frame) -> f64 {
    let params = surface.params();
    let pt = frame.point();
    let nu = frame.normal();
    let r = rho(params, &pt.ambient());
    let x_rho_norm = pt.a * r.powf(-params.alpha());
    let x_nu: f64 = pt.x.iter().zip(&nu.nu_bar).map(|(x, v)| x * v).sum();
    x_rho_norm / r.powf(params.beta()) * (pt.a * x_nu + params.beta() * pt.u * nu.nu_last)
}

/// `x ↦ φ(x, u(x))` for an ambient field `φ`.
#[derive(Clone)]
pub struct Restriction {
    surface: GraphSurface,
    field: Arc<dyn AmbientField>,
}

impl Restriction {
    pub fn new(surface: GraphSurface, field: Arc<dyn AmbientField>) -> Self {
        Restriction { surface, field }
    }
}

impl SurfaceField for Restriction {
    fn dim(&self) -> usize {
        self.surface.n()
    }

    fn jet(&self, x: &[f64]) -> Jet2 {
        let pt = self.surface.point_at(x);
        let jet = self.field.jet(&pt.ambient());
        self.surface.restrict(&pt, &jet)
    }
}

/// `x ↦ φ(ρ(x, u(x)))` for a radial profile `φ`.
#[derive(Clone)]
pub struct RadialField {
    surface: GraphSurface,
    profile: Arc<dyn Profile>,
}

impl RadialField {
    pub fn new(surface: GraphSurface, profile: Arc<dyn Profile>) -> Self {
        RadialField { surface, profile }
    }

    pub fn profile(&self) -> &dyn Profile {
        self.profile.as_ref()
    }

    fn rho_at(&self, x: &[f64]) -> f64 {
        let p = AmbientPoint::new(x.to_vec(), self.surface.height(x));
        rho(self.surface.params(), &p)
    }
}

impl SurfaceField for RadialField {
    fn dim(&self) -> usize {
        self.surface.n()
    }

    /// Not differentiable where `ρ = 0`, i.e. at the pole.
    fn jet(&self, x: &[f64]) -> Jet2 {
        let pt = self.surface.point_at(x);
        let p = pt.ambient();
        let r = self.surface.restrict(&pt, &gauge_jet(self.surface.params(), &p));
        let (f0, f1, f2) = self.profile.eval(r.v);
        let n = r.dim();
        let mut out = Jet2::constant(f0, n);
        for i in 0..n {
            out.g[i] = f1 * r.g[i];
            for k in 0..n {
                out.h[i * n + k] = f2 * r.g[i] * r.g[k] + f1 * r.h[i * n + k];
            }
        }
        out
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.profile.eval(self.rho_at(x)).0
    }
}
