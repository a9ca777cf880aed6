//! Harmonicity classification of surfaces at the origin and the flatness
//! certificate for α-subharmonicity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Term;
use crate::gauge::GrushinParams;
use crate::identities::random_points;
use crate::surface::{make_surface, Domain, GraphSurface, SurfaceSpec};
use crate::tangential::{q_sigma, QVariant};

/// Sample points on spheres `|x| = r`: `directions` per radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub radii: Vec<f64>,
    pub directions: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(radii: Vec<f64>, directions: usize) -> Self {
        SampleSpec { radii, directions, seed: 0 }
    }

    /// `count` radii spread geometrically over `[lo, hi]`.
    pub fn geometric(lo: f64, hi: f64, count: usize, directions: usize) -> Self {
        let radii = if count < 2 {
            vec![hi]
        } else {
            (0..count)
                .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
                .collect()
        };
        SampleSpec::new(radii, directions)
    }

    pub fn points(&self, n: usize) -> Vec<Vec<f64>> {
        let dirs = unit_directions(n, self.directions, self.seed);
        self.radii
            .iter()
            .flat_map(|&r| dirs.iter().map(move |d| d.iter().map(|c| c * r).collect()))
            .collect()
    }
}

/// Equally spaced angles in the plane (offset off the axes), `±1` on the
/// line, seeded random directions otherwise.
pub fn unit_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match n {
        1 => [1.0, -1.0].iter().cycle().take(count.max(1)).map(|&s| vec![s]).collect(),
        2 => (0..count)
            .map(|k| {
                let t = (k as f64 + 0.37) * std::f64::consts::TAU / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => random_points(n, count, seed, 1.0, 1.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Harmonic,
    Subharmonic,
    Superharmonic,
    Indefinite,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicityVerdict {
    pub classification: Classification,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub radii: Vec<f64>,
    pub tol: f64,
}

pub fn classify(min: f64, max: f64, tol: f64) -> Classification {
    if min.abs().max(max.abs()) <= tol {
        Classification::Harmonic
    } else if min >= -tol {
        Classification::Subharmonic
    } else if max <= tol {
        Classification::Superharmonic
    } else {
        Classification::Indefinite
    }
}

/// Sampled range of `q_Σ` over `points`.
pub fn q_range(surface: &GraphSurface, points: &[Vec<f64>]) -> Result<(f64, f64)> {
    let qs: Result<Vec<f64>> = points
        .par_iter()
        .map(|x| q_sigma(surface, x, QVariant::Compact))
        .collect();
    let qs = qs?;
    Ok(qs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(q), hi.max(q))))
}

pub fn classify_harmonicity(surface: &GraphSurface, samples: &SampleSpec, tol: f64) -> Result<HarmonicityVerdict> {
    let points = samples.points(surface.n());
    if points.is_empty() {
        return Err(Error::Argument("no sample points".into()));
    }
    let (min, max) = q_range(surface, &points)?;
    Ok(HarmonicityVerdict {
        classification: classify(min, max, tol),
        min,
        max,
        samples: points.len(),
        radii: samples.radii.clone(),
        tol,
    })
}

/// `sup (α+1)|u| / |⟨x, ∇u⟩|` over `points`; `0/0` counts as `0`, a nonzero
/// `u` with `⟨x, ∇u⟩ = 0` gives `+∞`.
pub fn eta_flatness(surface: &GraphSurface, points: &[Vec<f64>]) -> f64 {
    let beta = surface.params().beta();
    points
        .iter()
        .map(|x| {
            let j = surface.height_jet(x);
            let num = beta * j.v.abs();
            let den = x.iter().zip(&j.g).map(|(a, b)| a * b).sum::<f64>().abs();
            match (num == 0.0, den == 0.0) {
                (true, _) => 0.0,
                (false, true) => f64::INFINITY,
                _ => num / den,
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub holds: bool,
    /// `max |u(x)| / (M |x|^{(α+1)/η})`; at most one when the envelope holds.
    pub worst_ratio: f64,
    /// `max_{|x|=1} |u|`.
    pub sphere_max: f64,
}

/// `|u(x)| ≤ (max_{|x|=1}|u|) |x|^{(α+1)/η}` at every sample.
pub fn growth_envelope_check(surface: &GraphSurface, eta: f64, points: &[Vec<f64>]) -> Result<GrowthCheck> {
    let n = surface.n();
    let sphere = unit_directions(n, if n == 2 { 720 } else { 400 }, 11);
    if sphere.iter().any(|x| !surface.domain().contains(x)) {
        return Err(Error::Region("the growth envelope needs the closed unit ball in the domain".into()));
    }
    if !(eta >= 0.0) {
        return Err(Error::Argument(format!("η must be non-negative, got {eta}")));
    }
    let m = sphere.iter().map(|x| surface.height(x).abs()).fold(0.0, f64::max);
    let p = surface.params().beta() / eta;
    let mut worst = 0.0f64;
    for x in points {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 1.0 + 1e-12 {
            return Err(Error::Argument(format!("sample {x:?} lies outside the unit ball")));
        }
        let u = surface.height(x).abs();
        let env = m * r.powf(p);
        let ratio = if u == 0.0 { 0.0 } else if env == 0.0 { f64::INFINITY } else { u / env };
        worst = worst.max(ratio);
    }
    Ok(GrowthCheck {
        holds: worst <= 1.0 + 1e-10,
        worst_ratio: worst,
        sphere_max: m,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSample {
    pub r: f64,
    /// `|x|² H / ⟨ν̄, x⟩` of largest magnitude over the directions at `r`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessCertificate {
    pub eta_hat: f64,
    pub eta_bound: f64,
    pub condition_i: bool,
    pub condition_ii_samples: Vec<RatioSample>,
    pub condition_ii: bool,
    /// `supported` or `refuted`: numerics cannot prove a limit.
    pub condition_ii_status: &'static str,
    pub overall: bool,
    /// `min q_Σ` over the sweep, sampled when `overall` holds.
    pub q_spot_min: Option<f64>,
    pub q_spot_ok: Option<bool>,
    pub tol: f64,
}

/// `|x|² H / ⟨ν̄, x⟩` at `x`, with `0/0 → 0`.
pub fn curvature_ratio(surface: &GraphSurface, x: &[f64]) -> Result<f64> {
    let pt = surface.point(x)?;
    let h = pt.mean_curvature(surface.alpha())?;
    let nu = pt.normal()?;
    let x_nu: f64 = x.iter().zip(&nu.nu_bar).map(|(a, b)| a * b).sum();
    let s2: f64 = x.iter().map(|v| v * v).sum();
    Ok(match (h == 0.0, x_nu == 0.0) {
        (true, _) => 0.0,
        (false, true) => f64::INFINITY,
        _ => s2 * h / x_nu,
    })
}

pub const DYADIC_LEVELS: u32 = 8;

/// Both flatness hypotheses on dyadic spheres `|x| = R 2^{-k}`, `k = 1..=8`,
/// with `R = min(1, inradius)`.
pub fn subharmonicity_certificate(surface: &GraphSurface, tol: f64) -> Result<FlatnessCertificate> {
    let params = surface.params();
    let n = surface.n();
    let (nf, alpha) = (n as f64, params.alpha());
    let eta_bound = (nf + alpha) / (nf + 3.0 * alpha);
    let top = surface.domain().inradius().min(1.0);
    let radii: Vec<f64> = (1..=DYADIC_LEVELS).map(|k| top * 0.5f64.powi(k as i32)).collect();
    let dirs = unit_directions(n, 16, 5);

    let mut sweep = Vec::new();
    for &r in &radii {
        for d in &dirs {
            sweep.push(d.iter().map(|c| c * r).collect::<Vec<f64>>());
        }
    }
    let eta_hat = eta_flatness(surface, &sweep);
    let condition_i = eta_hat < eta_bound;

    let mut samples = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut best = 0.0f64;
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|c| c * r).collect();
            let q = curvature_ratio(surface, &x)?;
            if q.abs() > best.abs() || q.is_nan() {
                best = q;
            }
        }
        samples.push(RatioSample { r, ratio: best });
    }
    let tail: Vec<f64> = samples.iter().rev().take(3).map(|s| s.ratio.abs()).collect();
    // tail is ordered smallest radius first
    let decreasing = tail.len() == 3 && tail[0] <= tail[1] && tail[1] <= tail[2];
    let condition_ii = decreasing && tail[0] <= tol;
    let overall = condition_i && condition_ii;
    let (q_spot_min, q_spot_ok) = if overall {
        let (min, _) = q_range(surface, &sweep)?;
        (Some(min), Some(min >= -tol))
    } else {
        (None, None)
    };
    Ok(FlatnessCertificate {
        eta_hat,
        eta_bound,
        condition_i,
        condition_ii_samples: samples,
        condition_ii,
        condition_ii_status: if condition_ii { "supported" } else { "refuted" },
        overall,
        q_spot_min,
        q_spot_ok,
        tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchCandidate {
    pub terms: Vec<Term>,
    pub certificate: FlatnessCertificate,
}

/// Best-effort random search over two-term polynomial graphs of degrees
/// `⌈α+2⌉..⌈α+2⌉+2` for a non-flat surface passing the certificate.
/// Finding nothing is an expected outcome.
pub fn search_subharmonic(params: GrushinParams, trials: usize, seed: u64, tol: f64) -> Result<Option<SearchCandidate>> {
    let n = params.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = (params.alpha() + 2.0).ceil() as u32;
    for _ in 0..trials {
        let terms: Vec<Term> = (0..2)
            .map(|_| {
                let deg = base + rng.random_range(0..3u32);
                let mut powers = vec![0u32; n];
                for _ in 0..deg {
                    powers[rng.random_range(0..n)] += 1;
                }
                Term { coeff: rng.random_range(-1.0..1.0), powers }
            })
            .collect();
        let spec = SurfaceSpec::Monomial { terms: terms.clone() };
        let Ok(surface) = make_surface(params, &spec, Domain::ball(1.0)) else { continue };
        let cert = subharmonicity_certificate(&surface, tol)?;
        if cert.overall && cert.q_spot_ok == Some(true) {
            return Ok(Some(SearchCandidate { terms, certificate: cert }));
        }
    }
    Ok(None)
}
