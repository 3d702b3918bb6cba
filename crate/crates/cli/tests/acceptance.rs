//! Acceptance suite: one line per criterion, each at its stated tolerance and
//! time budget. Runs without the libtest harness so the lines always reach
//! the test output.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplexforge::checks::two_intersection_levels;
use simplexforge::gallery::{build_remark_instances, doubled_cone, shrinkage_report, smoothed_shrinkage, verify_remark};
use simplexforge::gauge::MembershipBody;
use simplexforge::layered::validate_profile;
use simplexforge::{
    check_2_intersection, construct, diameter_finite, extend_layer, lower_bound_e, make_lp_ball,
    search_equilateral, verify_equilateral, verify_inscribed, Error, GaugeBody, LayeredBody, LpBall,
    Profile, SearchOptions, SmoothedBody, Tolerance, Verdict, Vector,
};
use simplexforge_cli::ResultDocument;

/// Outcome of one criterion: pass flag and the facts behind it.
struct Outcome {
    pass: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.notes.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        self.pass &= ok;
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.check(err <= tol, format!("{what} = {got} (want {want} ± {tol:e}, err {err:e})"));
    }
}

fn s3() -> f64 {
    3f64.sqrt()
}

fn remark() -> Outcome {
    let mut o = Outcome::new();
    let inst = build_remark_instances(&[]).unwrap();
    let b = &inst.body;
    let (d_t, _) = diameter_finite(b, &inst.t).unwrap();
    let (d_ts, _) = diameter_finite(b, &inst.t_star).unwrap();
    o.close("D(T)", d_t, s3(), 1e-12);
    o.close("D(T*)", d_ts, 1.0, 1e-12);
    for (name, pts) in [("T", &inst.t), ("T*", &inst.t_star)] {
        let eq = verify_equilateral(pts, b, 1e-9).unwrap();
        let ins = verify_inscribed(pts, b, 1e-9).unwrap();
        o.check(eq.passed() && ins.passed(), format!("{name} equilateral and inscribed at 1e-9 ({:e}, {:e})", eq.worst_residual, ins.worst_residual));
    }
    let v = verify_remark(&inst, &Tolerance::default()).unwrap();
    let angle = (1.0 / (s3() - 1.0)).atan();
    o.close("edge-vertical angle", v.numbers.edge_vertical_angle, angle, 1e-12);
    o.close("edge-vertical angle vs the paper's 0.938", v.numbers.edge_vertical_angle, 0.938, 1e-3);
    o.close("cone generator angle", v.numbers.generator_angle, std::f64::consts::FRAC_PI_4, 1e-12);
    o.close("cone generator angle vs the paper's 0.785", v.numbers.generator_angle, 0.785, 1e-3);
    o.check(v.numbers.edge_vertical_angle > v.numbers.generator_angle, "edge angle exceeds the generator angle");
    o.check(
        v.numbers.inscribed_scale < 1.0 - 1e-3,
        format!(
            "max inscribed homothet of S = {} < 1 - 1e-3 (largest contained: {})",
            v.numbers.inscribed_scale, v.numbers.contained_scale
        ),
    );
    o
}

fn closed_form_construction() -> Outcome {
    let mut o = Outcome::new();
    let tol = Tolerance::default();
    let disk = construct(&make_lp_ball(2.0, 2).unwrap(), &tol).unwrap();
    let l2 = &disk.trace.levels[0];
    // the chord at height t has length 2√(1 - t²), which is 1 at t* = √3/2;
    // the regular inscribed triangle with a horizontal side has it at 1/2
    o.close("lp:2:2 t*", l2.t_star.unwrap(), s3() / 2.0, 1e-9);
    o.close("lp:2:2 t'", l2.t_prime.unwrap(), 0.5, 1e-8);
    o.close("lp:2:2 D", disk.simplex.diameter(), s3(), 1e-6);
    let ball = construct(&make_lp_ball(2.0, 3).unwrap(), &tol).unwrap();
    let l3 = &ball.trace.levels[1];
    // the regular inscribed tetrahedron has its horizontal face at height 1/3
    o.close("lp:2:3 t'", l3.t_prime.unwrap(), 1.0 / 3.0, 1e-6);
    o.close("lp:2:3 D", ball.simplex.diameter(), 2.0 * 6f64.sqrt() / 3.0, 1e-6);
    o
}

fn counterexample() -> Outcome {
    let mut o = Outcome::new();
    let tol = Tolerance::default();
    let cone = doubled_cone();
    match construct(&cone, &tol) {
        Err(f) => match f.error {
            Error::PreconditionViolated { level, .. } => {
                o.check(level == 3, format!("construct refused with PreconditionViolated at level {level}"))
            }
            other => o.check(false, format!("construct failed with {other}")),
        },
        Ok(_) => o.check(false, "construct succeeded on the doubled cone"),
    }
    let rep = check_2_intersection(&cone, &tol);
    o.check(rep.verdict == Verdict::Fail, format!("check_2_intersection verdict {}", rep.verdict));
    let two_t = rep.value.unwrap_or(f64::NAN);
    o.close("2t*", two_t, 2.0 * (s3() - 1.0) / s3(), 1e-9);
    o.close("2t* vs 0.845", two_t, 0.845, 1e-3);
    let (levels, _) = two_intersection_levels(&cone, &tol);
    let t_max = levels.last().map_or(f64::NAN, |l| l.t_max);
    o.check(two_t < t_max && t_max == 1.0, format!("2t* < t_max = {t_max}"));
    o
}

fn lp_sweep() -> Outcome {
    let mut o = Outcome::new();
    let tol = Tolerance::default();
    for p in [1.5, 2.0, 3.0] {
        for n in 2..=6 {
            let body = make_lp_ball(p, n).unwrap();
            match construct(&body, &tol) {
                Ok(c) => {
                    let pts = c.simplex.vertices();
                    let eq = verify_equilateral(pts, &body, 1e-7).unwrap();
                    let ins = verify_inscribed(pts, &body, 1e-7).unwrap();
                    let d = c.simplex.diameter();
                    o.check(
                        eq.passed() && ins.passed() && d >= 1.0 + 1e-6,
                        format!("p={p} n={n}: simplex D = {d}, residuals {:e} / {:e}", eq.worst_residual, ins.worst_residual),
                    );
                }
                Err(f) => {
                    let rep = check_2_intersection(&body, &tol);
                    let (levels, _) = two_intersection_levels(&body, &tol);
                    let bad = levels.iter().find(|l| l.verdict != Verdict::Pass).map(|l| l.level);
                    let consistent = match f.error {
                        Error::PreconditionViolated { level, .. } => {
                            rep.verdict != Verdict::Pass && bad == Some(level)
                        }
                        _ => false,
                    };
                    o.check(consistent, format!("p={p} n={n}: refused ({}), checker {} at level {bad:?}", f.error, rep.verdict));
                }
            }
        }
    }
    o
}

fn oracle_agreement() -> Outcome {
    let mut o = Outcome::new();
    let opts = SearchOptions {
        restarts: 32,
        seed: 0,
        boundary_constrained: true,
        ..SearchOptions::default()
    };
    for (n, want) in [(2, s3()), (3, 2.0 * 6f64.sqrt() / 3.0)] {
        let r = search_equilateral(&make_lp_ball(2.0, n).unwrap(), n + 1, &opts).unwrap();
        o.check(r.residual < 1e-8, format!("lp:2:{n} residual {:e} < 1e-8", r.residual));
        o.close(&format!("lp:2:{n} common distance"), r.common_distance, want, 1e-4);
    }
    o
}

fn linf_equality() -> Outcome {
    let mut o = Outcome::new();
    for n in 2..=4usize {
        let cube = LpBall::new(f64::INFINITY, n).unwrap();
        let corners: Vec<Vector> = (0..1usize << n)
            .map(|m| Vector::new((0..n).map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()).unwrap())
            .collect();
        let rep = verify_equilateral(&corners, &cube, 1e-12).unwrap();
        o.check(
            rep.passed() && rep.value == Some(2.0),
            format!("{} corners of the {n}-cube equilateral at distance {:?}", corners.len(), rep.value),
        );
    }
    let square = make_lp_ball(f64::INFINITY, 2).unwrap();
    let lb = lower_bound_e(&square, 5, &SearchOptions::default()).unwrap();
    let k5 = lb.attempts.iter().find(|a| a.0 == 5).map(|a| a.1);
    o.check(lb.k == 4, format!("lower_bound_e(l_inf^2, 5) = {}", lb.k));
    o.check(k5 == Some(false), format!("search for k = 5 succeeded: {k5:?}"));
    o
}

fn shrinkage() -> Outcome {
    let mut o = Outcome::new();
    let eps = [0.2, 0.1, 0.05];
    let inst = build_remark_instances(&eps).unwrap();
    let rows = smoothed_shrinkage(&inst, &Tolerance::default()).unwrap();
    for r in &rows {
        let v = r.touching_vertex.as_ref().map(|v| v.coords().to_vec());
        o.check(
            r.error.is_none() && r.touching_error.is_some_and(|e| e <= 1e-3),
            format!("eps {}: scale {}, lowest vertex {v:?}, distance {:?} to (0, 0, {})", r.eps, r.best_scale, r.touching_error, -(1.0 + r.eps)),
        );
    }
    let decreasing = rows.windows(2).all(|w| w[1].best_scale < w[0].best_scale);
    o.check(decreasing, "scales strictly decreasing in eps");
    let rep = shrinkage_report(&rows, 1e-3);
    o.check(rep.passed(), format!("shrinkage report {}", rep.verdict));
    o
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fuzz_bodies() -> Vec<Box<dyn GaugeBody>> {
    let mut v: Vec<Box<dyn GaugeBody>> = Vec::new();
    for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
        for n in 1..=5 {
            v.push(Box::new(make_lp_ball(p, n).unwrap()));
        }
    }
    let disk = make_lp_ball(2.0, 2).unwrap();
    v.push(Box::new(doubled_cone()));
    v.push(Box::new(extend_layer(disk.clone(), Profile::prism()).unwrap()));
    v.push(Box::new(extend_layer(LayeredBody::base(), Profile::cone()).unwrap()));
    for eps in [0.2, 0.1, 0.05] {
        v.push(Box::new(SmoothedBody::new(doubled_cone(), eps).unwrap()));
    }
    v.push(Box::new(MembershipBody::flattening()));
    v
}

fn cli_hash(args: &[&str], out: &Path) -> Result<(String, String), String> {
    let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    full.extend(["--out".into(), out.display().to_string()]);
    let o = Command::new(env!("CARGO_BIN_EXE_simplexforge"))
        .args(&full)
        .env_remove("SIMPLEXFORGE_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !matches!(o.status.code(), Some(0 | 1)) {
        return Err(format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    let doc = ResultDocument::from_json(&std::fs::read_to_string(out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut bare = doc.clone();
    bare.timing = Default::default();
    bare.paths = Default::default();
    Ok((doc.determinism_hash, bare.to_json()))
}

fn fuzz_profiles_determinism() -> Outcome {
    let mut o = Outcome::new();

    let bodies = fuzz_bodies();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_h, mut worst_s) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let body = &bodies[rng.random_range(0..bodies.len())];
        let n = body.dim();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let lam: f64 = rng.random_range(-10.0..10.0);
        let gx = body.eval(&x);
        let lx: Vec<f64> = x.iter().map(|c| lam * c).collect();
        worst_h = worst_h.max((body.eval(&lx) - lam.abs() * gx).abs() / (1.0 + lam.abs() * gx));
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        worst_s = worst_s.max(body.eval(&sum) - gx - body.eval(&y));
    }
    o.check(worst_h <= 1e-9, format!("10^4 homogeneity checks, worst relative defect {worst_h:e}"));
    o.check(worst_s <= 1e-9, format!("10^4 subadditivity checks, worst excess {worst_s:e}"));

    let mut profiles: Vec<(String, Profile)> = vec![
        ("lp(1)".into(), Profile::lp(1.0).unwrap()),
        ("lp(1.5)".into(), Profile::lp(1.5).unwrap()),
        ("lp(2)".into(), Profile::lp(2.0).unwrap()),
        ("lp(3)".into(), Profile::lp(3.0).unwrap()),
        ("lp(inf)".into(), Profile::lp(f64::INFINITY).unwrap()),
        ("cone".into(), Profile::cone()),
        ("prism".into(), Profile::prism()),
    ];
    let mut files: Vec<PathBuf> = std::fs::read_dir(workspace_root().join("profiles"))
        .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    files.sort();
    for f in files.iter().filter(|f| f.extension().is_some_and(|e| e == "json")) {
        match Profile::from_json_file(f) {
            Ok(p) => profiles.push((f.file_name().unwrap().to_string_lossy().into(), p)),
            Err(e) => o.check(false, format!("{}: {e}", f.display())),
        }
    }
    let bad: Vec<&str> = profiles
        .iter()
        .filter(|(_, p)| !validate_profile(p, 257, 1e-9).passed())
        .map(|(n, _)| n.as_str())
        .collect();
    o.check(bad.is_empty(), format!("{} shipped profiles validate; failing: {bad:?}", profiles.len()));

    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 8] = [
        &["construct", "--body", "lp:2:2"],
        &["construct", "--body", "lp:2:3"],
        &["construct", "--body", "cone:lp:2:2"],
        &["check", "--body", "cone:lp:2:2"],
        &["search", "--body", "lp:2:2", "--k", "3", "--restarts", "32", "--seed", "0"],
        &["search", "--body", "lp:2:3", "--k", "4", "--restarts", "32", "--seed", "0"],
        &["search", "--body", "lp:inf:2", "--lower-bound", "--k", "5"],
        &["gallery", "--eps", "0.2,0.1,0.05"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = cli_hash(args, &dir.path().join(format!("{i}a.json")));
        let b = cli_hash(args, &dir.path().join(format!("{i}b.json")));
        match (a, b) {
            (Ok((ha, da)), Ok((hb, db))) => o.check(
                ha == hb && da == db,
                format!("`{}` hash stable: {}", args.join(" "), &ha[..16]),
            ),
            (a, b) => o.check(false, format!("`{}` failed: {:?} {:?}", args.join(" "), a.err(), b.err())),
        }
    }
    o
}

fn main() {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("remark reproduction", 10, remark),
        ("closed-form construction oracles", 5, closed_form_construction),
        ("counterexample refusal", 5, counterexample),
        ("generic lp sweep", 60, lp_sweep),
        ("oracle agreement", 30, oracle_agreement),
        ("l_inf equality case", 60, linf_equality),
        ("smoothed shrinkage", 120, shrinkage),
        ("axiom fuzz, profiles, CLI determinism", 600, fuzz_profiles_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f);
        let elapsed = start.elapsed();
        let (mut pass, notes) = match outcome {
            Ok(o) => (o.pass, o.notes),
            Err(_) => (false, vec!["FAIL panicked".to_string()]),
        };
        let in_time = elapsed <= Duration::from_secs(*budget);
        pass &= in_time;
        println!(
            "criterion {}: {} - {name} ({:.2} s, budget {budget} s{})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
        for n in notes {
            println!("    {n}");
        }
        failed += usize::from(!pass);
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
