//! JSON and CSV reports of a run.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{Classification, FlatnessCertificate};
use crate::error::{Error, Result};
use crate::quadrature::{ConstantProfile, MeanValueReport, Verdict};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Meta {
    pub n: usize,
    pub alpha: f64,
    pub surface: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRow {
    pub name: &'static str,
    pub max_err: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QsigmaSection {
    pub classification: Classification,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub c_r: f64,
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MvfRow {
    pub r: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub f0: f64,
    pub verdict: Verdict,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSection {
    pub h: f64,
    pub unknowns: usize,
    pub nnz: usize,
    pub residual: f64,
    pub rhs_norm: f64,
    pub f_at_0: Option<f64>,
    /// `max |L_Σ F|` of the interpolant at the configured points.
    pub pointwise_residual: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub meta: Meta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<Vec<IdentityRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qsigma: Option<QsigmaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<ProfileRow>>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mvf: Option<Vec<MvfRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<FlatnessCertificate>,
    /// Not serialized: the CSV source.
    #[serde(skip)]
    pub profile_detail: Option<ConstantProfile>,
    #[serde(skip)]
    pub mvf_detail: Option<MeanValueReport>,
    #[serde(skip)]
    pub solution_csv: Option<String>,
    #[serde(skip)]
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Profile CSV; the mean-value columns are empty when `mvf` did not run.
    pub fn profile_csv(&self) -> Option<String> {
        if let Some(m) = &self.mvf_detail {
            return Some(m.to_csv());
        }
        let p = self.profile_detail.as_ref()?;
        let mut out = String::from("r,c_r,C,M_f_r,f0,verdict,err_est\n");
        for e in &p.entries {
            out.push_str(&format!("{},{},{},,,,{}\n", e.r, e.c, p.constant, e.err));
        }
        Some(out)
    }

    /// Writes the JSON report and whichever CSV files apply; returns the paths.
    pub fn write(&self, dir: &Path, json: &str, profile_csv: &str, solution_csv: Option<&str>) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: &str| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
            written.push(path);
            Ok(())
        };
        put(json, &self.to_json()?)?;
        if let Some(csv) = self.profile_csv() {
            put(profile_csv, &csv)?;
        }
        if let (Some(name), Some(csv)) = (solution_csv, &self.solution_csv) {
            put(name, csv)?;
        }
        Ok(written)
    }
}
