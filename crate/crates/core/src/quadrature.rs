//! Integration over gauge balls on `Σ` and the mean-value functional.
//!
//! `B_r ∩ Σ` is the parameter set `{x : ρ(x, u(x)) < r}`; since `ρ ≥ |x|`
//! it lies in the cube `[-r, r]ⁿ`, and the cubature clips every quadrature
//! line at the level set `ρ(x, u(x)) = r`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cubature::{Integral, Region};
use crate::error::{Error, Result};
use crate::field::SurfaceField;
use crate::gauge::{rho, AmbientPoint};
use crate::surface::{GraphSurface, SurfacePoint};

/// `B_r ∩ Σ` in graph coordinates, validated against the surface domain.
pub fn ball_region(surface: &GraphSurface, r: f64) -> Result<Region> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Argument(format!("radius must be positive, got {r}")));
    }
    let n = surface.n();
    let domain = surface.domain();
    if r > domain.inradius() {
        // The ball may still fit if Σ climbs out of it before the domain edge.
        for x in domain.boundary_samples(n, 2048) {
            let p = AmbientPoint::new(x.clone(), surface.height(&x));
            if rho(surface.params(), &p) < r {
                return Err(Error::Region(format!(
                    "gauge ball of radius {r} reaches the domain boundary near {x:?}"
                )));
            }
        }
    }
    let s = surface.clone();
    let params = *surface.params();
    let region = Region::cube(vec![-r; n], vec![r; n])?.with_constraint(Arc::new(move |x: &[f64]| {
        let p = AmbientPoint::new(x.to_vec(), s.height(x));
        rho(&params, &p) - r
    }));
    surface.clip_to_domain(region)
}

/// `|δρ|²` from the closed-form X-gradient of the gauge; zero at the pole.
pub fn kernel_value(surface: &GraphSurface, pt: &SurfacePoint) -> f64 {
    if pt.is_pole() {
        return 0.0;
    }
    let params = surface.params();
    let alpha = params.alpha();
    let beta = params.beta();
    let r = rho(params, &pt.ambient());
    let g = r.powf(-(2.0 * alpha + 1.0));
    let s2a = pt.a * pt.a;
    // Xρ = (x |x|^{2α} g, (α+1) y |x|^α g), ν = (-∇u, a)/v
    let x_grad_u: f64 = pt.x.iter().zip(&pt.grad).map(|(x, d)| x * d).sum();
    let x_rho_sq = s2a * r.powf(-2.0 * alpha);
    let x_rho_nu = g * pt.a * (-pt.a * x_grad_u + beta * pt.u * pt.a) / pt.v;
    (x_rho_sq - x_rho_nu * x_rho_nu).max(0.0)
}

/// `∫_{B_r∩Σ} g dσ` to absolute tolerance `tol`.
pub fn integrate_ball(
    surface: &GraphSurface,
    g: &(dyn Fn(&SurfacePoint) -> f64 + Sync),
    r: f64,
    tol: f64,
) -> Result<Integral> {
    let region = ball_region(surface, r)?;
    surface.integrate_surface(g, &region, tol)
}

/// `r^{n+α}`.
pub fn ball_scale(surface: &GraphSurface, r: f64) -> f64 {
    r.powf(surface.params().homogeneous_dim())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub r: f64,
    /// `c(r) = r^{-(n+α)} ∫_{B_r∩Σ} |δρ|² dσ`.
    pub c: f64,
    pub err: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantProfile {
    pub entries: Vec<ProfileEntry>,
    /// `c` at the smallest radius.
    pub c_min: f64,
    /// Extrapolation of `c(r)` to `r → 0`, when the grid allows one.
    pub c_richardson: Option<f64>,
    /// `1 / c(r_min)`.
    #[serde(rename = "C")]
    pub constant: f64,
    /// Maximum relative deviation of `c(r)` from its mean over the grid.
    pub spread: f64,
    pub is_constant: bool,
    pub tol: f64,
}

impl ConstantProfile {
    /// The limit surrogate used for sub/super verdicts: the extrapolated
    /// value when it departs from `c(r_min)` by more than `10·tol`.
    pub fn limit_constant(&self) -> f64 {
        match self.c_richardson {
            Some(c0) if (c0 - self.c_min).abs() > 10.0 * self.tol && c0 > 0.0 => 1.0 / c0,
            _ => self.constant,
        }
    }
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::Argument("empty radius grid".into()));
    }
    if r_grid.windows(2).any(|w| !(w[0] < w[1])) || !(r_grid[0] > 0.0) {
        return Err(Error::Argument(format!("radius grid must be positive and strictly increasing: {r_grid:?}")));
    }
    Ok(())
}

/// Extrapolates `c(r) ≈ c₀ + k r^p` from the three smallest radii, falling
/// back to a linear fit through two.
fn richardson(rs: &[f64], cs: &[f64]) -> Option<f64> {
    if rs.len() < 2 {
        return None;
    }
    let linear = (rs[1] * cs[0] - rs[0] * cs[1]) / (rs[1] - rs[0]);
    if rs.len() >= 3 {
        let d1 = cs[1] - cs[0];
        let d2 = cs[2] - cs[1];
        let q1 = rs[1] / rs[0];
        let q2 = rs[2] / rs[1];
        if d1 != 0.0 && d2 / d1 > 0.0 && (q1 - q2).abs() < 1e-12 * q1 {
            let p = (d2 / d1).ln() / q1.ln();
            if p.is_finite() && p > 0.25 && p < 8.0 {
                // c₁ - c₀ = k r₀^p (q^p - 1)
                let k_r0p = d1 / (q1.powf(p) - 1.0);
                return Some(cs[0] - k_r0p);
            }
        }
    }
    Some(linear)
}

/// `c(r)` over `r_grid` with each value accurate to about `tol`.
pub fn constant_profile(surface: &GraphSurface, r_grid: &[f64], tol: f64) -> Result<ConstantProfile> {
    check_grid(r_grid)?;
    let kernel = |pt: &SurfacePoint| kernel_value(surface, pt);
    let mut entries = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let scale = ball_scale(surface, r);
        let res = integrate_ball(surface, &kernel, r, tol * scale)?;
        entries.push(ProfileEntry {
            r,
            c: res.value / scale,
            err: res.error / scale,
            converged: res.converged,
        });
    }
    let cs: Vec<f64> = entries.iter().map(|e| e.c).collect();
    if cs.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::Region("gauge ball has empty intersection with the surface".into()));
    }
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let spread = cs.iter().map(|c| (c - mean).abs() / mean).fold(0.0, f64::max);
    let c_min = cs[0];
    Ok(ConstantProfile {
        c_richardson: richardson(r_grid, &cs),
        entries,
        c_min,
        constant: 1.0 / c_min,
        spread,
        is_constant: spread <= 10.0 * tol,
        tol,
    })
}

/// `M(f, r) = C r^{-(n+α)} ∫_{B_r∩Σ} f |δρ|² dσ`, returned with the scaled
/// quadrature error.
pub fn mean_value_with_error(
    surface: &GraphSurface,
    f: &dyn SurfaceField,
    r: f64,
    constant: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let scale = ball_scale(surface, r);
    let g = |pt: &SurfacePoint| {
        let k = kernel_value(surface, pt);
        if k == 0.0 {
            0.0
        } else {
            f.value(&pt.x) * k
        }
    };
    let res = integrate_ball(surface, &g, r, tol * scale / constant.abs().max(1e-300))?;
    Ok((constant * res.value / scale, constant * res.error / scale))
}

pub fn mean_value(surface: &GraphSurface, f: &dyn SurfaceField, r: f64, constant: f64, tol: f64) -> Result<f64> {
    Ok(mean_value_with_error(surface, f, r, constant, tol)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MvfMode {
    Harmonic,
    Subharmonic,
    Superharmonic,
}

/// Observed relation between `f(0)` and `M(f, r)` within the band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// `|f(0) - M| ≤ band`.
    Equal,
    /// `f(0) < M - band`.
    Sub,
    /// `f(0) > M + band`.
    Super,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Equal => "equal",
            Verdict::Sub => "sub",
            Verdict::Super => "super",
        }
    }

    pub fn satisfies(&self, mode: MvfMode) -> bool {
        match mode {
            MvfMode::Harmonic => *self == Verdict::Equal,
            MvfMode::Subharmonic => *self != Verdict::Super,
            MvfMode::Superharmonic => *self != Verdict::Sub,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MvfEntry {
    pub r: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub err: f64,
    pub f0: f64,
    pub verdict: Verdict,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanValueReport {
    pub mode: MvfMode,
    pub profile: ConstantProfile,
    /// The constant actually used for `M`.
    #[serde(rename = "C")]
    pub constant: f64,
    pub f_at_0: f64,
    /// `max|f| + 1` over `B_{r_max}`.
    pub scale: f64,
    pub tol: f64,
    pub entries: Vec<MvfEntry>,
}

impl MeanValueReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn r_grid(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.r).collect()
    }

    /// CSV with columns `r, c_r, C, M_f_r, f0, verdict, err_est`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,c_r,C,M_f_r,f0,verdict,err_est\n");
        for (e, p) in self.entries.iter().zip(&self.profile.entries) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.r,
                p.c,
                self.constant,
                e.m,
                e.f0,
                e.verdict.as_str(),
                e.err
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MvfOptions {
    /// Verdict tolerance, relative to `scale`.
    pub tol: f64,
    /// Cubature tolerance for `c(r)` and `M(f, r)`.
    pub quad_tol: f64,
}

impl MvfOptions {
    pub fn new(tol: f64) -> Self {
        MvfOptions {
            tol,
            quad_tol: (tol * 1e-2).clamp(1e-10, 1e-6),
        }
    }
}

/// `max|f|` over a deterministic sample of `B_{r}∩Σ`.
fn sup_on_ball(surface: &GraphSurface, f: &dyn SurfaceField, r: f64) -> f64 {
    let n = surface.n();
    let per_axis: usize = match n {
        1 => 401,
        2 => 61,
        3 => 17,
        _ => 7,
    };
    let region = match ball_region(surface, r) {
        Ok(reg) => reg,
        Err(_) => return f.value(&vec![0.0; n]).abs(),
    };
    let mut best = f.value(&vec![0.0; n]).abs();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    loop {
        for k in 0..n {
            x[k] = -r + 2.0 * r * idx[k] as f64 / (per_axis - 1) as f64;
        }
        if region.contains(&x) {
            let v = f.value(&x);
            if v.is_finite() {
                best = best.max(v.abs());
            }
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    best
}

/// Mean-value verdicts for `f` over `r_grid`.
pub fn check_mvf(
    surface: &GraphSurface,
    f: &dyn SurfaceField,
    r_grid: &[f64],
    mode: MvfMode,
    tol: f64,
) -> Result<MeanValueReport> {
    check_mvf_with(surface, f, r_grid, mode, &MvfOptions::new(tol))
}

pub fn check_mvf_with(
    surface: &GraphSurface,
    f: &dyn SurfaceField,
    r_grid: &[f64],
    mode: MvfMode,
    opts: &MvfOptions,
) -> Result<MeanValueReport> {
    let profile = constant_profile(surface, r_grid, opts.quad_tol)?;
    mvf_from_profile(surface, f, profile, mode, opts)
}

/// Mean-value verdicts over the radii of an existing profile.
pub fn mvf_from_profile(
    surface: &GraphSurface,
    f: &dyn SurfaceField,
    profile: ConstantProfile,
    mode: MvfMode,
    opts: &MvfOptions,
) -> Result<MeanValueReport> {
    let r_grid: Vec<f64> = profile.entries.iter().map(|e| e.r).collect();
    let constant = match mode {
        MvfMode::Harmonic => profile.constant,
        MvfMode::Subharmonic | MvfMode::Superharmonic => profile.limit_constant(),
    };
    let n = surface.n();
    let f0 = f.value(&vec![0.0; n]);
    let r_max = *r_grid.last().ok_or_else(|| Error::Argument("empty radius grid".into()))?;
    let scale = sup_on_ball(surface, f, r_max) + 1.0;
    let band = opts.tol * scale;
    let mut entries = Vec::with_capacity(r_grid.len());
    for &r in &r_grid {
        let (m, err) = mean_value_with_error(surface, f, r, constant, opts.quad_tol)?;
        let verdict = if (f0 - m).abs() <= band {
            Verdict::Equal
        } else if f0 < m {
            Verdict::Sub
        } else {
            Verdict::Super
        };
        entries.push(MvfEntry {
            r,
            m,
            err,
            f0,
            verdict,
            pass: verdict.satisfies(mode),
        });
    }
    Ok(MeanValueReport {
        mode,
        profile,
        constant,
        f_at_0: f0,
        scale,
        tol: opts.tol,
        entries,
    })
}
