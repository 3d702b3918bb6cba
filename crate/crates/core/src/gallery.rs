//! The doubled cone over the Euclidean disk, `conv((B₂² × {0}) ∪ {±e₃})`:
//! the triangles `T`, `T*`, the tetrahedron `S = conv({0} ∪ T*)`, and the
//! smoothed bodies `B + εB₂³` used to show that inscribed homothets of the
//! cone-step tetrahedron shrink with `ε`.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{verify_equilateral, verify_inscribed};
use crate::error::{Error, Result};
use crate::gauge::{boundary_scale, diameter_finite};
use crate::homothet::{max_inscribed_homothet, remark_cone_step, InscribedSearch};
use crate::layered::{extend_layer, make_lp_ball, LayeredBody, Profile};
use crate::report::{PropertyReport, Verdict};
use crate::simplex::Simplex;
use crate::smoothed::SmoothedBody;
use crate::tolerance::Tolerance;
use crate::vector::{euclidean_norm, Vector};

#[derive(Debug, Clone)]
pub struct RemarkInstances {
    pub body: LayeredBody,
    /// `(±√3/2, −1/2, 0)`, `(0, 1, 0)`.
    pub t: Vec<Vector>,
    /// `T/√3 + (0, 0, (√3 − 1)/√3)`.
    pub t_star: Vec<Vector>,
    /// Origin first, then `T*`.
    pub s: Vec<Vector>,
    pub smoothed: Vec<SmoothedBody>,
}

/// The doubled cone `cone:lp:2:2`.
pub fn doubled_cone() -> LayeredBody {
    extend_layer(make_lp_ball(2.0, 2).expect("ℓ2 disk"), Profile::cone()).expect("cone profile is valid")
}

/// `(√3 − 1)/√3`, the height of `T*`.
pub fn t_star_height() -> f64 {
    let s3 = 3f64.sqrt();
    (s3 - 1.0) / s3
}

fn triangle_t(scale: f64) -> Vec<Vector> {
    let h = 3f64.sqrt() / 2.0;
    vec![
        Vector::from_raw(vec![-h * scale, -0.5 * scale, 0.0]),
        Vector::from_raw(vec![h * scale, -0.5 * scale, 0.0]),
        Vector::from_raw(vec![0.0, scale, 0.0]),
    ]
}

pub fn build_remark_instances(eps_list: &[f64]) -> Result<RemarkInstances> {
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::InvalidInput(format!("smoothing radius {e} must lie in (0, 1)")));
    }
    let body = doubled_cone();
    let t = triangle_t(1.0);
    let s3 = 3f64.sqrt();
    let shift = t_star_height();
    let t_star: Vec<Vector> = t
        .iter()
        .map(|p| Vector::from_raw(vec![p[0] / s3, p[1] / s3, shift]))
        .collect();
    let mut s = vec![Vector::zeros(3)];
    s.extend(t_star.iter().cloned());
    let smoothed = eps_list
        .iter()
        .map(|&e| SmoothedBody::new(body.clone(), e))
        .collect::<Result<Vec<_>>>()?;
    Ok(RemarkInstances {
        body,
        t,
        t_star,
        s,
        smoothed,
    })
}

/// The computed quantities behind [`verify_remark`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkNumbers {
    pub diameter_t: f64,
    pub diameter_t_star: f64,
    pub s_edge: f64,
    /// Angle between the vertical and the edges of `S` at the origin.
    pub edge_vertical_angle: f64,
    /// Angle between the vertical and a generator of the cone.
    pub generator_angle: f64,
    /// Largest contained homothet of `S` (not inscribed).
    pub contained_scale: f64,
    /// Largest inscribed homothet of `S`; 0 when there is none.
    pub inscribed_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkVerification {
    pub report: PropertyReport,
    pub numbers: RemarkNumbers,
    pub homothet_search: InscribedSearch,
}

/// Checks (a) `T` equilateral, inscribed, `D(T) = √3`; (b) `T*` equilateral,
/// inscribed, `D(T*) = 1`; (c) `S` equilateral with unit edges; (d) the edge
/// angle `arctan(1/(√3 − 1))` exceeds the generator angle `π/4`; (e) no
/// homothet of `S` of ratio `≥ 1 − margin_tol` is inscribed in the cone.
/// Closed-form constants are compared at `1e-12`, point sets at
/// `verify_tol`.
pub fn verify_remark(inst: &RemarkInstances, tol: &Tolerance) -> Result<RemarkVerification> {
    tol.validate()?;
    const EXACT: f64 = 1e-12;
    let b = &inst.body;
    let s3 = 3f64.sqrt();
    let mut details = Vec::new();
    let mut worst = 0.0f64;
    let mut all_pass = true;
    let mut item = |label: &str, ok: bool, residual: f64, text: String| {
        details.push(format!("({label}) {}: {text}", if ok { "pass" } else { "fail" }));
        all_pass &= ok;
        if residual.is_nan() {
            worst = f64::NAN;
        } else if !worst.is_nan() {
            worst = worst.max(residual);
        }
    };

    let (d_t, _) = diameter_finite(b, &inst.t)?;
    let eq = verify_equilateral(&inst.t, b, tol.verify_tol)?;
    let ins = verify_inscribed(&inst.t, b, tol.verify_tol)?;
    item(
        "a",
        eq.passed() && ins.passed() && (d_t - s3).abs() <= EXACT,
        eq.worst_residual.max(ins.worst_residual).max((d_t - s3).abs()),
        format!("T equilateral and inscribed, D(T) = {d_t}"),
    );

    let (d_ts, _) = diameter_finite(b, &inst.t_star)?;
    let eq = verify_equilateral(&inst.t_star, b, tol.verify_tol)?;
    let ins = verify_inscribed(&inst.t_star, b, tol.verify_tol)?;
    item(
        "b",
        eq.passed() && ins.passed() && (d_ts - 1.0).abs() <= EXACT,
        eq.worst_residual.max(ins.worst_residual).max((d_ts - 1.0).abs()),
        format!("T* equilateral and inscribed, D(T*) = {d_ts}"),
    );

    let eq = verify_equilateral(&inst.s, b, tol.verify_tol)?;
    let s_edge = eq.value.unwrap_or(f64::NAN);
    let s_inscribed = verify_inscribed(&inst.s, b, tol.verify_tol)?;
    item(
        "c",
        eq.passed() && (s_edge - 1.0).abs() <= EXACT,
        eq.worst_residual.max((s_edge - 1.0).abs()),
        format!(
            "S equilateral with edge {s_edge}; inscribed: {} (gauge of vertex 0 is 0)",
            s_inscribed.verdict
        ),
    );

    let v = &inst.s[1];
    let edge_vertical_angle = euclidean_norm(&v[..2]).atan2(v[2]);
    let apex = boundary_scale(b, &[0.0, 0.0, 1.0])?;
    let rim = boundary_scale(b, &[1.0, 0.0, 0.0])?;
    let generator = &rim - &apex;
    let generator_angle = euclidean_norm(&generator[..2]).atan2(generator[2].abs());
    let closed = (1.0 / (s3 - 1.0)).atan();
    let angle_err = (edge_vertical_angle - closed).abs().max((generator_angle - FRAC_PI_4).abs());
    item(
        "d",
        angle_err <= EXACT && edge_vertical_angle > generator_angle,
        angle_err,
        format!("edge angle {edge_vertical_angle} > generator angle {generator_angle}"),
    );

    let search = max_inscribed_homothet(b, &inst.s, tol)?;
    let inscribed_scale = search.scale();
    item(
        "e",
        inscribed_scale < 1.0 - tol.margin_tol,
        0.0,
        format!(
            "largest inscribed homothet of S has ratio {inscribed_scale} ({} found); largest contained ratio {}",
            search.candidates.len(),
            search.contained.scale
        ),
    );

    let report = PropertyReport {
        name: "doubled cone remark".into(),
        verdict: if all_pass { Verdict::Pass } else { Verdict::Fail },
        worst_residual: worst,
        tolerance: tol.verify_tol,
        witness: details.iter().find(|d| d.contains(") fail")).cloned().unwrap_or_default(),
        value: Some(edge_vertical_angle),
        details,
    };
    Ok(RemarkVerification {
        report,
        numbers: RemarkNumbers {
            diameter_t: d_t,
            diameter_t_star: d_ts,
            s_edge,
            edge_vertical_angle,
            generator_angle,
            contained_scale: search.contained.scale,
            inscribed_scale,
        },
        homothet_search: search,
    })
}

/// One smoothing radius of the shrinkage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageRow {
    pub eps: f64,
    /// Height of the facet of the template `S*(ε)`.
    pub template_t_star: Option<f64>,
    /// `S*(ε)`: the cone step over `(1 + ε)T` in `B*(ε)`.
    pub template: Vec<Vector>,
    /// Ratio of the largest inscribed homothet of `S*(ε)`; 0 if none.
    pub best_scale: f64,
    pub vertices: Vec<Vector>,
    /// Lowest vertex of the best homothet.
    pub touching_vertex: Option<Vector>,
    /// Euclidean distance from the lowest vertex to `(0, 0, −(1 + ε))`.
    pub touching_error: Option<f64>,
    pub boundary_residual: Option<f64>,
    pub error: Option<String>,
}

fn shrinkage_row(body: &SmoothedBody, tol: &Tolerance) -> ShrinkageRow {
    let eps = body.epsilon();
    let mut row = ShrinkageRow {
        eps,
        template_t_star: None,
        template: Vec::new(),
        best_scale: 0.0,
        vertices: Vec::new(),
        touching_vertex: None,
        touching_error: None,
        boundary_residual: None,
        error: None,
    };
    // (1 + ε)T is inscribed in the central section of B*(ε)
    let facet = match Simplex::new(body, triangle_t(1.0 + eps)) {
        Ok(f) => f,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let step = match remark_cone_step(body, &facet, 2, tol) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(format!("cone step: {e}"));
            return row;
        }
    };
    row.template_t_star = Some(step.t_star);
    row.template = step.simplex.vertices().to_vec();
    match max_inscribed_homothet(body, &row.template, tol) {
        Ok(search) => {
            if let Some(best) = search.best {
                let low = best
                    .vertices
                    .iter()
                    .min_by(|a, b| a[2].total_cmp(&b[2]))
                    .expect("nonempty")
                    .clone();
                let target = [0.0, 0.0, -(1.0 + eps)];
                let err = euclidean_norm(&low.iter().zip(target).map(|(a, b)| a - b).collect::<Vec<_>>());
                row.best_scale = best.scale;
                row.boundary_residual = Some(best.boundary_residual);
                row.vertices = best.vertices;
                row.touching_vertex = Some(low);
                row.touching_error = Some(err);
            }
        }
        Err(e) => row.error = Some(format!("inscribed homothet search: {e}")),
    }
    row
}

/// For each smoothed body, the largest inscribed homothet of the cone-step
/// tetrahedron `S*(ε)` (horizontal equilateral facet, apex below).
pub fn smoothed_shrinkage(inst: &RemarkInstances, tol: &Tolerance) -> Result<Vec<ShrinkageRow>> {
    tol.validate()?;
    Ok(inst.smoothed.par_iter().map(|b| shrinkage_row(b, tol)).collect())
}

/// Passes when every row succeeded, the ratios decrease strictly along the
/// (decreasing) `ε` list, and each lowest vertex is within `touch_tol` of
/// `(0, 0, −(1 + ε))`.
pub fn shrinkage_report(rows: &[ShrinkageRow], touch_tol: f64) -> PropertyReport {
    let mut details = Vec::new();
    let mut ok = true;
    let mut worst = 0.0f64;
    for (i, r) in rows.iter().enumerate() {
        match (&r.error, r.touching_error) {
            (Some(e), _) => {
                ok = false;
                details.push(format!("eps {}: {e}", r.eps));
            }
            (None, None) => {
                ok = false;
                details.push(format!("eps {}: no inscribed homothet found", r.eps));
            }
            (None, Some(err)) => {
                worst = worst.max(err);
                ok &= err <= touch_tol;
                details.push(format!(
                    "eps {}: best ratio {}, lowest vertex {:?} at distance {err} from (0, 0, {})",
                    r.eps,
                    r.best_scale,
                    r.touching_vertex.as_ref().map(|v| v.coords().to_vec()),
                    -(1.0 + r.eps)
                ));
            }
        }
        if i > 0 {
            let p = &rows[i - 1];
            if !(p.eps > r.eps) {
                ok = false;
                details.push(format!("eps list not decreasing at {}", r.eps));
            }
            if !(r.best_scale < p.best_scale) {
                ok = false;
                details.push(format!("ratio {} at eps {} is not below {}", r.best_scale, r.eps, p.best_scale));
            }
        }
    }
    PropertyReport {
        name: "smoothed shrinkage".into(),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        worst_residual: worst,
        tolerance: touch_tol,
        witness: details.iter().find(|d| !d.contains("best ratio")).cloned().unwrap_or_default(),
        value: rows.last().map(|r| r.best_scale),
        details,
    }
}
