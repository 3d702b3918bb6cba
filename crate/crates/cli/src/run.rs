//! Command-line parsing and the subcommand drivers.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use simplexforge::checks::two_intersection_levels;
use simplexforge::gallery::{build_remark_instances, shrinkage_report, smoothed_shrinkage, verify_remark};
use simplexforge::{
    check_2_intersection, check_intersection_property, construct, diameter_finite, lower_bound_e,
    search_equilateral, verify_equilateral, verify_inscribed, Error, GaugeBody, PropertyReport,
    SearchOptions, SectionGrid, Tolerance, Verdict, Vector,
};

use crate::body_spec::{parse_body_spec, Body, SpecError};
use crate::document::{write_atomic, ErrorRecord, InputEcho, ResultDocument, SimplexRecord};
use crate::export::{render, GeometryFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

const DEFAULT_EPS: [f64; 3] = [0.2, 0.1, 0.05];

#[derive(Debug, Parser)]
#[command(name = "simplexforge", version, about = "Inscribed equilateral simplices in unit balls of normed spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Body spec, e.g. `lp:2:3`, `cone:lp:2:2`, `smoothed:cone:lp:2:2:0.1`.
    #[arg(long)]
    pub body: Option<String>,
    /// Certificate acceptance tolerance (verify_tol).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Root-finder convergence width.
    #[arg(long)]
    pub root_tol: Option<f64>,
    /// Strictness band for `D > 1`.
    #[arg(long)]
    pub margin_tol: Option<f64>,
    #[arg(long, env = "SIMPLEXFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Where to write the result document (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write geometry next to the document.
    #[arg(long, value_enum)]
    pub export: Option<GeometryFormat>,
    /// Print a CSV summary of the verdicts instead of the JSON document.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an inscribed equilateral simplex by the inductive construction.
    Construct {
        #[command(flatten)]
        common: Common,
    },
    /// Re-verify every simplex of a result document.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Search for equilateral point sets by multistart pattern search.
    Search {
        #[command(flatten)]
        common: Common,
        /// Number of points (default: dimension + 1).
        #[arg(long)]
        k: Option<usize>,
        /// Drop the boundary constraint (scale-free search).
        #[arg(long)]
        free: bool,
        /// Try every size 2..=k and report the largest success.
        #[arg(long)]
        lower_bound: bool,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
    },
    /// Check the intersection and 2-intersection properties.
    Check {
        #[command(flatten)]
        common: Common,
        /// Sample layered bodies instead of trusting their construction.
        #[arg(long)]
        sample: bool,
    },
    /// Reproduce the doubled-cone counterexample and the smoothing experiment.
    Gallery {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Distance allowed between the lowest homothet vertex and the
        /// smoothed apex.
        #[arg(long, default_value_t = 1e-3)]
        touch_tol: f64,
    },
    /// Render the geometry of a result document.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m,
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        if e.io {
            CliError::Io(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl Common {
    fn tolerance(&self) -> Result<Tolerance, CliError> {
        let mut t = Tolerance::default();
        if let Some(v) = self.tol {
            t.verify_tol = v;
            t.root_tol = t.root_tol.min(v);
        }
        if let Some(v) = self.root_tol {
            t.root_tol = v;
        }
        if let Some(v) = self.margin_tol {
            t.margin_tol = v;
        }
        t.validate().map_err(usage)?;
        Ok(t)
    }

    fn body(&self) -> Result<(String, Body), CliError> {
        let spec = self.body.clone().ok_or_else(|| usage("--body is required"))?;
        let body = parse_body_spec(&spec)?;
        Ok((spec, body))
    }

    fn echo(&self, tol: &Tolerance, spec: Option<&str>, dim: Option<usize>) -> InputEcho {
        InputEcho {
            body: spec.map(str::to_string),
            dim,
            tolerance: tol.into(),
            seed: self.seed,
            restarts: None,
            k: None,
            eps: None,
            free: None,
            lower_bound: None,
        }
    }
}

fn named(mut r: PropertyReport, name: String) -> PropertyReport {
    r.name = name;
    r
}

fn simplex_record(label: &str, body_spec: &str, body: &dyn GaugeBody, pts: &[Vector], eq: bool, ins: bool) -> SimplexRecord {
    let diameter = diameter_finite(body, pts).map(|d| d.0).unwrap_or(0.0);
    SimplexRecord {
        label: label.into(),
        body: body_spec.into(),
        vertices: pts.iter().map(|p| p.coords().to_vec()).collect(),
        diameter,
        claims_equilateral: eq,
        claims_inscribed: ins,
    }
}

/// Certificate checks of one point set, named after its label.
fn certify(doc: &mut ResultDocument, label: &str, body: &dyn GaugeBody, pts: &[Vector], eq: bool, ins: bool, tol: f64) -> Result<(), CliError> {
    if eq {
        let r = verify_equilateral(pts, body, tol).map_err(usage)?;
        doc.push_report(&named(r, format!("{label}: equilateral")));
    }
    if ins {
        let r = verify_inscribed(pts, body, tol).map_err(usage)?;
        doc.push_report(&named(r, format!("{label}: inscribed")));
    }
    Ok(())
}

fn is_math_refusal(e: &Error) -> bool {
    matches!(
        e,
        Error::PreconditionViolated { .. }
            | Error::NoCrossing { .. }
            | Error::NoRoot { .. }
            | Error::IterationCapExceeded { .. }
            | Error::SectionNeverUnit { .. }
            | Error::SolverStall { .. }
            | Error::DegenerateSimplex(_)
    )
}

fn run_construct(common: &Common) -> Result<ResultDocument, CliError> {
    let tol = common.tolerance()?;
    let (spec, body) = common.body()?;
    let layered = body
        .layered()
        .ok_or_else(|| usage("construct needs a layered body (lp, cone, prism, profile, seg)"))?;
    let mut doc = ResultDocument::new("construct", common.echo(&tol, Some(&spec), Some(body.dim())));
    match construct(layered, &tol) {
        Ok(c) => {
            let pts = c.simplex.vertices().to_vec();
            doc.simplices
                .push(simplex_record("constructed", &spec, layered, &pts, true, true));
            certify(&mut doc, "constructed", layered, &pts, true, true, tol.verify_tol)?;
            let d = c.simplex.diameter();
            let shortfall = (1.0 + tol.margin_tol - d).max(0.0);
            doc.push_report(&PropertyReport {
                name: "constructed: diameter above one".into(),
                verdict: if shortfall == 0.0 { Verdict::Pass } else { Verdict::Degenerate },
                worst_residual: shortfall,
                tolerance: 0.0,
                witness: format!("D = {d}"),
                value: Some(d),
                details: vec![format!("certified when D >= 1 + {}", tol.margin_tol)],
            });
            doc.add_trace("construction", &c.trace);
        }
        Err(f) => {
            if !is_math_refusal(&f.error) {
                return Err(usage(&f.error));
            }
            doc.error = Some(ErrorRecord::from(&f.error));
            doc.add_trace("construction", &f.trace);
            let report = check_2_intersection(layered, &tol);
            let (levels, _) = two_intersection_levels(layered, &tol);
            doc.add_trace("two_intersection", &levels);
            doc.push_report(&report);
        }
    }
    Ok(doc)
}

fn load_document(path: &Path) -> Result<ResultDocument, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ResultDocument::from_json(&text).map_err(|e| usage(format!("{}: not a result document: {e}", path.display())))
}

fn run_verify(common: &Common, input: &Path) -> Result<ResultDocument, CliError> {
    let tol = common.tolerance()?;
    let source = load_document(input)?;
    let mut doc = ResultDocument::new("verify", common.echo(&tol, common.body.as_deref(), None));
    doc.paths.input = Some(input.display().to_string());
    if source.simplices.is_empty() {
        return Err(usage("document has no simplices to verify"));
    }
    for s in &source.simplices {
        let spec = common.body.as_deref().unwrap_or(&s.body);
        let body = parse_body_spec(spec)?;
        let pts = s.points().map_err(usage)?;
        certify(&mut doc, &s.label, body.gauge(), &pts, s.claims_equilateral, s.claims_inscribed, tol.verify_tol)?;
        doc.simplices.push(s.clone());
    }
    Ok(doc)
}

fn run_search(common: &Common, k: Option<usize>, free: bool, lower_bound: bool, max_iters: usize) -> Result<ResultDocument, CliError> {
    let tol = common.tolerance()?;
    let (spec, body) = common.body()?;
    let g = body.gauge();
    let k = k.unwrap_or(body.dim() + 1);
    let opts = SearchOptions {
        restarts: common.restarts,
        max_iters,
        seed: common.seed,
        boundary_constrained: !free,
        ..SearchOptions::default()
    };
    opts.validate().map_err(usage)?;
    let mut echo = common.echo(&tol, Some(&spec), Some(body.dim()));
    echo.restarts = Some(common.restarts);
    echo.k = Some(k);
    echo.free = Some(free);
    echo.lower_bound = Some(lower_bound);
    let mut doc = ResultDocument::new("search", echo);
    let report_of = |name: String, r: &simplexforge::SearchResult| PropertyReport {
        name,
        verdict: if r.success { Verdict::Pass } else { Verdict::Fail },
        worst_residual: r.residual,
        tolerance: opts.residual_tol,
        witness: format!("restart {}", r.restart),
        value: Some(r.common_distance),
        details: vec![format!(
            "{} of {} restarts succeeded; common distance {}",
            r.successful_restarts, opts.restarts, r.common_distance
        )],
    };
    if lower_bound {
        let lb = lower_bound_e(g, k, &opts).map_err(usage)?;
        doc.add_trace("attempts", &lb.attempts);
        doc.residuals.insert("lower_bound".into(), Some(lb.k as f64));
        if let Some(cert) = &lb.certificate {
            let label = format!("equilateral set k={}", lb.k);
            doc.simplices.push(simplex_record(&label, &spec, g, &cert.points, true, !free));
            doc.push_report(&report_of(format!("{label}: search"), cert));
        }
        doc.add_trace("lower_bound", &serde_json::json!({ "k": lb.k, "k_max": k }));
    } else {
        let r = search_equilateral(g, k, &opts).map_err(usage)?;
        let label = format!("equilateral set k={k}");
        doc.simplices.push(simplex_record(&label, &spec, g, &r.points, r.success, r.success && !free));
        doc.push_report(&report_of(format!("{label}: search"), &r));
        doc.add_trace("search", &r);
    }
    Ok(doc)
}

fn run_check(common: &Common, sample: bool) -> Result<ResultDocument, CliError> {
    let tol = common.tolerance()?;
    let (spec, body) = common.body()?;
    let mut doc = ResultDocument::new("check", common.echo(&tol, Some(&spec), Some(body.dim())));
    let grid = SectionGrid {
        exact_shortcut: !sample,
        ..SectionGrid::default()
    };
    let ip = check_intersection_property(body.gauge(), &grid, tol.verify_tol).map_err(usage)?;
    doc.push_report(&ip);
    if let Some(layered) = body.layered() {
        doc.push_report(&check_2_intersection(layered, &tol));
        let (levels, stop) = two_intersection_levels(layered, &tol);
        doc.add_trace("two_intersection", &levels);
        if let Some(stop) = stop {
            doc.add_trace("two_intersection_stop", &stop);
        }
    }
    Ok(doc)
}

fn run_gallery(common: &Common, eps: Option<&[f64]>, touch_tol: f64) -> Result<ResultDocument, CliError> {
    let tol = common.tolerance()?;
    let eps = eps.unwrap_or(&DEFAULT_EPS).to_vec();
    let inst = build_remark_instances(&eps).map_err(usage)?;
    let spec = inst.body.spec_string();
    let mut echo = common.echo(&tol, Some(&spec), Some(3));
    echo.eps = Some(eps);
    let mut doc = ResultDocument::new("gallery", echo);

    let remark = verify_remark(&inst, &tol).map_err(usage)?;
    let b = &inst.body;
    doc.simplices.push(simplex_record("T", &spec, b, &inst.t, true, true));
    doc.simplices.push(simplex_record("T*", &spec, b, &inst.t_star, true, true));
    doc.simplices.push(simplex_record("S", &spec, b, &inst.s, true, false));
    doc.push_report(&remark.report);
    doc.add_trace("remark", &remark.numbers);
    doc.add_trace("remark_homothet_search", &remark.homothet_search);

    let rows = smoothed_shrinkage(&inst, &tol).map_err(usage)?;
    for (row, body) in rows.iter().zip(&inst.smoothed) {
        let bspec = body.descriptor();
        if !row.template.is_empty() {
            doc.simplices
                .push(simplex_record(&format!("S*({})", row.eps), &bspec, body, &row.template, true, false));
        }
        if !row.vertices.is_empty() {
            doc.simplices.push(simplex_record(
                &format!("inscribed homothet of S*({})", row.eps),
                &bspec,
                body,
                &row.vertices,
                true,
                true,
            ));
        }
    }
    let shrink = shrinkage_report(&rows, touch_tol);
    doc.push_report(&shrink);
    doc.add_trace("shrinkage", &rows);
    Ok(doc)
}

fn geometry(doc: &ResultDocument, body_override: Option<&str>, format: GeometryFormat) -> Result<String, CliError> {
    let spec = body_override
        .or(doc.input.body.as_deref())
        .ok_or_else(|| usage("document names no body; pass --body"))?;
    let body = parse_body_spec(spec)?;
    let own: Vec<&SimplexRecord> = doc.simplices.iter().filter(|s| s.body == spec).collect();
    render(body.gauge(), &own, format).map_err(usage)
}

fn geometry_path(out: &Path, format: GeometryFormat) -> PathBuf {
    out.with_extension(format.extension())
}

fn run_export(common: &Common, input: &Path) -> Result<i32, CliError> {
    let format = common.export.ok_or_else(|| usage("--export obj|svg is required"))?;
    let out = common.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let doc = load_document(input)?;
    let text = geometry(&doc, common.body.as_deref(), format)?;
    write_atomic(out, text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(EXIT_OK)
}

/// Runs a parsed command line; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let start = Instant::now();
    let (common, doc) = match &cli.command {
        Command::Construct { common } => (common, run_construct(common)?),
        Command::Verify { common, input } => (common, run_verify(common, input)?),
        Command::Search {
            common,
            k,
            free,
            lower_bound,
            max_iters,
        } => (common, run_search(common, *k, *free, *lower_bound, *max_iters)?),
        Command::Check { common, sample } => (common, run_check(common, *sample)?),
        Command::Gallery { common, eps, touch_tol } => (common, run_gallery(common, eps.as_deref(), *touch_tol)?),
        Command::Export { common, input } => return run_export(common, input),
    };
    let mut doc = doc;
    doc.settle_status();

    let geometry_text = match common.export {
        None => None,
        Some(format) => {
            if common.out.is_none() {
                return Err(usage("--export needs --out to place the geometry file"));
            }
            Some((format, geometry(&doc, None, format)?))
        }
    };
    if let Some(out) = &common.out {
        doc.paths.out = Some(out.display().to_string());
        if let Some((format, _)) = &geometry_text {
            doc.paths.geometry = Some(geometry_path(out, *format).display().to_string());
        }
    }
    doc.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    doc.seal();

    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    if let Some(out) = &common.out {
        write_atomic(out, doc.to_json().as_bytes()).map_err(|e| io(out, e))?;
        if let Some((format, text)) = &geometry_text {
            let p = geometry_path(out, *format);
            write_atomic(&p, text.as_bytes()).map_err(|e| io(&p, e))?;
        }
    }
    let mut stdout = std::io::stdout().lock();
    let printed = if common.summary {
        stdout.write_all(doc.summary_csv().as_bytes())
    } else if common.out.is_none() {
        stdout.write_all(doc.to_json().as_bytes())
    } else {
        Ok(())
    };
    printed.map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    for v in &doc.verdicts {
        eprintln!("{}: {}", v.name, v.verdict);
    }
    if let Some(err) = &doc.error {
        eprintln!("{}: {}", err.kind, err.message);
    }
    Ok(doc.exit_code)
}

/// Parses `args` (program name first) and runs; the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
