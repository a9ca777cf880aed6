//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Constant, Polynomial, PowerProfile, SurfaceField, Term};
use crate::gauge::GrushinParams;
use crate::quadrature::{ball_region, MvfMode};
use crate::solver::{BoundaryFn, SolveDomain};
use crate::surface::{catalog_spec, make_surface, Domain, GraphSurface, SurfaceSpec};
use crate::tangential::RadialField;

pub const DEFAULT_SEED: u64 = 20240607;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Qsigma,
    Profile,
    Solve,
    Mvf,
    Certificate,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Qsigma => "qsigma",
            Suite::Profile => "profile",
            Suite::Solve => "solve",
            Suite::Mvf => "mvf",
            Suite::Certificate => "certificate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n: usize,
    pub alpha: f64,
}

/// A catalog name or an explicit surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceConfig {
    Catalog { catalog: String },
    Spec(SurfaceSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    /// `coeff · ρ^k` restricted to the surface.
    Radial { coeff: f64, k: f64 },
    Polynomial { terms: Vec<Term> },
    /// The interpolated solution of the `solve` suite.
    Solver,
}

/// `constant + Σ terms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolySpec {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<Term>,
}

impl PolySpec {
    fn build(&self, n: usize) -> Result<(f64, Polynomial)> {
        Ok((self.constant, Polynomial::new(n, self.terms.clone())?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    Constant { value: f64 },
    Polynomial(PolySpec),
    Rational { numerator: PolySpec, denominator: PolySpec },
    /// `inside` for `|x| < split`, `outside` otherwise.
    PiecewiseRadial { split: f64, inside: f64, outside: f64 },
}

impl BoundarySpec {
    pub fn build(&self) -> Result<BoundaryFn> {
        Ok(match self.clone() {
            BoundarySpec::Constant { value } => Arc::new(move |_: &[f64]| value),
            BoundarySpec::Polynomial(p) => {
                let (c, poly) = p.build(2)?;
                Arc::new(move |x: &[f64]| c + poly.value(x))
            }
            BoundarySpec::Rational { numerator, denominator } => {
                let (cn, pn) = numerator.build(2)?;
                let (cd, pd) = denominator.build(2)?;
                Arc::new(move |x: &[f64]| (cn + pn.value(x)) / (cd + pd.value(x)))
            }
            BoundarySpec::PiecewiseRadial { split, inside, outside } => {
                Arc::new(move |x: &[f64]| if x[0].hypot(x[1]) < split { inside } else { outside })
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity: f64,
    pub qsigma: f64,
    pub quadrature: f64,
    pub mvf: f64,
    pub certificate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            qsigma: 1e-9,
            quadrature: 1e-8,
            mvf: 1e-3,
            certificate: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub points: usize,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        IdentitiesConfig { points: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QsigmaConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub directions: usize,
    /// Required classification; without it the suite only reports.
    pub expect: Option<crate::analysis::Classification>,
}

impl Default for QsigmaConfig {
    fn default() -> Self {
        QsigmaConfig {
            r_min: 0.1,
            r_max: 1.0,
            radii: 10,
            directions: 20,
            expect: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Fail the suite unless `c(r)` is flat over the grid.
    pub expect_constant: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { expect_constant: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MvfConfig {
    pub mode: MvfMode,
}

impl Default for MvfConfig {
    fn default() -> Self {
        MvfConfig { mode: MvfMode::Harmonic }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateConfig {
    pub expect_overall: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub domain: SolveDomain,
    pub h: f64,
    pub boundary: BoundarySpec,
    /// Interior points where `L_Σ F` of the interpolant is reported.
    #[serde(default)]
    pub residual_points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub json: String,
    pub profile_csv: String,
    pub solution_csv: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("grushin-mvf-out"),
            json: "report.json".into(),
            profile_csv: "profile.csv".into(),
            solution_csv: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub params: ParamsConfig,
    pub surface: SurfaceConfig,
    #[serde(default = "default_domain")]
    pub domain: Domain,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub r_grid: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub identities: IdentitiesConfig,
    #[serde(default)]
    pub qsigma: QsigmaConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub mvf: MvfConfig,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_domain() -> Domain {
    Domain::ball(1.0)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn params(&self) -> Result<GrushinParams> {
        GrushinParams::new(self.params.n, self.params.alpha).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn surface(&self) -> Result<GraphSurface> {
        let params = self.params()?;
        let spec = match &self.surface {
            SurfaceConfig::Catalog { catalog } => catalog_spec(catalog, &params)
                .ok_or_else(|| Error::Config(format!("unknown catalog surface {catalog:?}")))?,
            SurfaceConfig::Spec(s) => s.clone(),
        };
        make_surface(params, &spec, self.domain.clone())
    }

    /// Suites to execute, in dependency order: a solver-produced field pulls
    /// in `solve` ahead of `mvf`.
    pub fn schedule(&self, requested: &[Suite]) -> Vec<Suite> {
        let mut s: Vec<Suite> = requested.to_vec();
        if s.contains(&Suite::Mvf) && self.field == Some(FieldSpec::Solver) {
            s.push(Suite::Solve);
        }
        s.sort();
        s.dedup();
        s
    }

    /// Checks everything that can be checked before running any suite.
    pub fn validate(&self, suites: &[Suite]) -> Result<GraphSurface> {
        let surface = self.surface().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        let t = &self.tolerances;
        for (name, v) in [
            ("identity", t.identity),
            ("qsigma", t.qsigma),
            ("quadrature", t.quadrature),
            ("mvf", t.mvf),
            ("certificate", t.certificate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        let needs_grid = suites.iter().any(|s| matches!(s, Suite::Profile | Suite::Mvf));
        if needs_grid {
            if self.r_grid.is_empty() {
                return Err(Error::Config("r_grid is required by the profile and mvf suites".into()));
            }
            if self.r_grid[0] <= 0.0 || self.r_grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!("r_grid must be positive and strictly increasing: {:?}", self.r_grid)));
            }
            let r_max = *self.r_grid.last().expect("checked non-empty");
            ball_region(&surface, r_max).map_err(|e| Error::Config(format!("r = {r_max} is not admissible: {e}")))?;
        }
        if suites.contains(&Suite::Mvf) {
            match &self.field {
                None => return Err(Error::Config("the mvf suite needs a [field] section".into())),
                Some(FieldSpec::Polynomial { terms }) => {
                    Polynomial::new(surface.n(), terms.clone()).map_err(|e| Error::Config(e.to_string()))?;
                }
                _ => {}
            }
        }
        if suites.contains(&Suite::Solve) {
            let solve = self
                .solve
                .as_ref()
                .ok_or_else(|| Error::Config("the solve suite needs a [solve] section".into()))?;
            solve.boundary.build().map_err(|e| Error::Config(e.to_string()))?;
            if surface.n() != 2 {
                return Err(Error::Config("the solve suite needs n = 2".into()));
            }
        }
        if suites.contains(&Suite::Qsigma) {
            let q = &self.qsigma;
            if !(q.r_min > 0.0 && q.r_min <= q.r_max && q.radii > 0 && q.directions > 0) {
                return Err(Error::Config(format!("invalid qsigma sampling {q:?}")));
            }
        }
        if suites.contains(&Suite::Identities) && self.identities.points == 0 {
            return Err(Error::Config("identities.points must be positive".into()));
        }
        Ok(surface)
    }
}

/// The field for the profile and mvf suites, except the solver field.
pub fn build_field(spec: &FieldSpec, surface: &GraphSurface) -> Result<Option<Arc<dyn SurfaceField>>> {
    Ok(match spec {
        FieldSpec::Constant { value } => Some(Arc::new(Constant { n: surface.n(), c: *value })),
        FieldSpec::Radial { coeff, k } => Some(Arc::new(RadialField::new(
            surface.clone(),
            Arc::new(PowerProfile { coeff: *coeff, k: *k }),
        ))),
        FieldSpec::Polynomial { terms } => Some(Arc::new(Polynomial::new(surface.n(), terms.clone())?)),
        FieldSpec::Solver => None,
    })
}
