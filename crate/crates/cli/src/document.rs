//! The JSON result document and its determinism hash.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use simplexforge::{PropertyReport, Tolerance, Verdict, Vector};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// The schema shipped with the tool.
pub const SCHEMA: &str = include_str!("../schema/result_document.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Every check passed.
    Ok,
    /// A property failed or the construction refused; the document carries
    /// the diagnostics.
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceEcho {
    pub root_tol: f64,
    pub verify_tol: f64,
    pub margin_tol: f64,
}

impl From<&Tolerance> for ToleranceEcho {
    fn from(t: &Tolerance) -> Self {
        Self {
            root_tol: t.root_tol,
            verify_tol: t.verify_tol,
            margin_tol: t.margin_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub body: Option<String>,
    pub dim: Option<usize>,
    pub tolerance: ToleranceEcho,
    pub seed: u64,
    pub restarts: Option<usize>,
    pub k: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub free: Option<bool>,
    pub lower_bound: Option<bool>,
}

/// A [`PropertyReport`] with non-finite numbers mapped to `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub name: String,
    pub verdict: Verdict,
    pub worst_residual: Option<f64>,
    pub tolerance: f64,
    pub witness: String,
    pub value: Option<f64>,
    pub details: Vec<String>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl From<&PropertyReport> for VerdictRecord {
    fn from(r: &PropertyReport) -> Self {
        Self {
            name: r.name.clone(),
            verdict: r.verdict,
            worst_residual: finite(r.worst_residual),
            tolerance: r.tolerance,
            witness: r.witness.clone(),
            value: r.value.and_then(finite),
            details: r.details.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub label: String,
    /// Spec of the body the claims refer to.
    pub body: String,
    pub vertices: Vec<Vec<f64>>,
    pub diameter: f64,
    pub claims_equilateral: bool,
    pub claims_inscribed: bool,
}

impl SimplexRecord {
    pub fn points(&self) -> simplexforge::Result<Vec<Vector>> {
        self.vertices.iter().map(|v| Vector::new(v.clone())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub level: Option<usize>,
    pub degenerate: Option<bool>,
    pub margin: Option<f64>,
}

impl From<&simplexforge::Error> for ErrorRecord {
    fn from(e: &simplexforge::Error) -> Self {
        use simplexforge::Error as E;
        let (kind, level, degenerate, margin) = match e {
            E::PreconditionViolated {
                level,
                degenerate,
                margin,
                ..
            } => ("PreconditionViolated", Some(*level), Some(*degenerate), finite(*margin)),
            E::NoCrossing { level, .. } => ("NoCrossing", Some(*level), None, None),
            E::NoRoot { .. } => ("NoRoot", None, None, None),
            E::IterationCapExceeded { .. } => ("IterationCapExceeded", None, None, None),
            E::SectionNeverUnit { .. } => ("SectionNeverUnit", None, None, None),
            E::SolverStall { .. } => ("SolverStall", None, None, None),
            E::DegenerateSimplex(_) => ("DegenerateSimplex", None, None, None),
            _ => ("InvalidInput", None, None, None),
        };
        Self {
            kind: kind.into(),
            message: e.to_string(),
            level,
            degenerate,
            margin,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

/// File locations of a run. Excluded from the determinism hash.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Paths {
    pub out: Option<String>,
    pub input: Option<String>,
    pub geometry: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: String,
    pub command: String,
    pub input: InputEcho,
    pub status: Status,
    pub exit_code: i32,
    pub verdicts: Vec<VerdictRecord>,
    pub simplices: Vec<SimplexRecord>,
    /// Per-command diagnostic records (construction trace, search attempts,
    /// shrinkage rows...), non-finite numbers as `null`.
    pub traces: BTreeMap<String, serde_json::Value>,
    pub residuals: BTreeMap<String, Option<f64>>,
    pub error: Option<ErrorRecord>,
    pub timing: Timing,
    pub paths: Paths,
    /// SHA-256 of the document without `timing`, `paths` and this field.
    pub determinism_hash: String,
}

impl ResultDocument {
    pub fn new(command: &str, input: InputEcho) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            input,
            status: Status::Ok,
            exit_code: 0,
            verdicts: Vec::new(),
            simplices: Vec::new(),
            traces: BTreeMap::new(),
            residuals: BTreeMap::new(),
            error: None,
            timing: Timing::default(),
            paths: Paths::default(),
            determinism_hash: String::new(),
        }
    }

    pub fn push_report(&mut self, report: &PropertyReport) {
        self.residuals
            .insert(report.name.clone(), finite(report.worst_residual));
        self.verdicts.push(report.into());
    }

    pub fn add_trace<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.traces.insert(key.into(), v);
    }

    /// `Ok` iff every verdict passed and no error was recorded.
    pub fn settle_status(&mut self) {
        let ok = self.error.is_none() && self.verdicts.iter().all(|v| v.verdict == Verdict::Pass);
        self.status = if ok { Status::Ok } else { Status::Negative };
        self.exit_code = if ok { 0 } else { 1 };
    }

    pub fn compute_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("document serializes");
        if let Some(map) = v.as_object_mut() {
            for key in ["timing", "paths", "determinism_hash"] {
                map.remove(key);
            }
        }
        let canonical = serde_json::to_string(&v).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn seal(&mut self) {
        self.determinism_hash = self.compute_hash();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One CSV row per verdict.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("check,verdict,worst_residual,tolerance,value\n");
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        for v in &self.verdicts {
            out.push_str(&format!(
                "\"{}\",{},{},{},{}\n",
                v.name.replace('"', "\"\""),
                v.verdict,
                opt(v.worst_residual),
                v.tolerance,
                opt(v.value)
            ));
        }
        out
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    // temp files are created 0600; results are meant to be shared
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
