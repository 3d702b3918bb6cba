//! Certificates: equilaterality and inscribedness of point sets, and the
//! intersection and 2-intersection properties of bodies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{apex_outside_margin, base_segment, branch_for, find_t_star, level_step, Branch};
use crate::error::{Error, Result};
use crate::gauge::GaugeBody;
use crate::layered::LayeredBody;
use crate::report::{PropertyReport, Verdict};
use crate::root::bisect_relative;
use crate::tolerance::Tolerance;
use crate::vector::{euclidean_norm, sub, Vector};

fn check_points(points: &[Vector], body: &dyn GaugeBody, min: usize) -> Result<()> {
    if points.len() < min {
        return Err(if points.is_empty() {
            Error::EmptyPointSet
        } else {
            Error::InvalidInput(format!("need at least {min} points, got {}", points.len()))
        });
    }
    for p in points {
        if p.dim() != body.dim() {
            return Err(Error::DimensionMismatch {
                expected: body.dim(),
                found: p.dim(),
            });
        }
    }
    Ok(())
}

/// Passes when every pairwise distance is within `tol` of the mean pairwise
/// distance. The mean is reported as the report's value.
pub fn verify_equilateral(points: &[Vector], body: &dyn GaugeBody, tol: f64) -> Result<PropertyReport> {
    check_points(points, body, 2)?;
    let mut pairs = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            pairs.push(((i, j), body.eval(&sub(&points[i], &points[j]))));
        }
    }
    let mean = pairs.iter().map(|(_, d)| d).sum::<f64>() / pairs.len() as f64;
    let mut worst = (0.0, (0, 1));
    let mut details = Vec::with_capacity(pairs.len());
    for &((i, j), d) in &pairs {
        let dev = (d - mean).abs();
        // NaN distances must not hide behind the comparison
        if dev > worst.0 || dev.is_nan() {
            worst = (dev, (i, j));
        }
        details.push(format!("d({i},{j}) = {d}"));
    }
    let (i, j) = worst.1;
    Ok(PropertyReport::from_residual(
        "equilateral",
        worst.0,
        tol,
        format!("pair ({i},{j}), mean distance {mean}"),
        details,
    )
    .with_value(mean))
}

/// Passes when every point has gauge within `tol` of 1.
pub fn verify_inscribed(points: &[Vector], body: &dyn GaugeBody, tol: f64) -> Result<PropertyReport> {
    check_points(points, body, 1)?;
    let mut worst = (0.0, 0);
    let mut details = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let g = body.eval(p);
        let dev = (g - 1.0).abs();
        if dev > worst.0 || dev.is_nan() {
            worst = (dev, i);
        }
        details.push(format!("gauge(x{i}) = {g}"));
    }
    Ok(PropertyReport::from_residual(
        "inscribed",
        worst.0,
        tol,
        format!("point {}", worst.1),
        details,
    ))
}

/// Sampling used by [`check_intersection_property`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionGrid {
    /// Offsets per sign along each axis outside `H_i`.
    pub offsets_per_axis: usize,
    /// Directions compared within each `H_i`, `i ≥ 2`.
    pub directions: usize,
    /// Let layered bodies pass without sampling.
    pub exact_shortcut: bool,
}

impl Default for SectionGrid {
    fn default() -> Self {
        Self {
            offsets_per_axis: 4,
            directions: 64,
            exact_shortcut: true,
        }
    }
}

const DIRECTION_SEED: u64 = 0x5ec7_1095;

/// Unit directions in `H_i = <e_1, ..., e_i>`, padded to `n` coordinates;
/// the first is always `e_1`.
fn section_directions(i: usize, n: usize, count: usize) -> Vec<Vec<f64>> {
    let embed = |u: &[f64]| {
        let mut v = vec![0.0; n];
        v[..u.len()].copy_from_slice(u);
        v
    };
    match i {
        1 => vec![embed(&[1.0]), embed(&[-1.0])],
        2 => (0..count.max(2))
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count.max(2) as f64;
                embed(&[a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            let mut dirs = Vec::with_capacity(count.max(2 * i));
            for a in 0..i {
                for s in [1.0, -1.0] {
                    let mut u = vec![0.0; i];
                    u[a] = s;
                    dirs.push(embed(&u));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED + i as u64);
            while dirs.len() < count {
                let u: Vec<f64> = (0..i).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = euclidean_norm(&u);
                if norm > 1e-9 {
                    dirs.push(embed(&u.iter().map(|c| c / norm).collect::<Vec<_>>()));
                }
            }
            dirs
        }
    }
}

/// Offsets in `<e_{i+1}, ..., e_n>`: fractions of the axis extents, both
/// signs, plus one diagonal offset when the complement has dimension ≥ 2.
fn section_offsets(body: &dyn GaugeBody, i: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let n = body.dim();
    let mut out = Vec::new();
    let axis_extent = |dir: &[f64]| 1.0 / body.eval(dir);
    for a in i..n {
        let mut e = vec![0.0; n];
        e[a] = 1.0;
        let ext = axis_extent(&e);
        for k in 1..=per_axis {
            let f = k as f64 / (per_axis + 1) as f64;
            for s in [1.0, -1.0] {
                let mut x = vec![0.0; n];
                x[a] = s * f * ext;
                out.push(x);
            }
        }
    }
    if n - i >= 2 {
        let mut d = vec![0.0; n];
        for c in d.iter_mut().skip(i) {
            *c = 1.0;
        }
        let ext = axis_extent(&d);
        out.push(d.iter().map(|c| 0.5 * ext * c).collect());
    }
    out
}

/// `sup{λ ≥ 0 : γ(x + λu) ≤ 1}` for a unit vector `u` and `γ(x) < 1`.
fn radial_extent(body: &dyn GaugeBody, x: &[f64], u: &[f64], reach: f64) -> f64 {
    let outside = |lam: f64| {
        let p: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + lam * b).collect();
        body.eval(&p) > 1.0
    };
    bisect_relative(outside, 0.0, reach, 1e-14)
}

/// Samples translates `B ∩ (x + H_i)` and compares each one's radial
/// extents, normalised by the extent along `e_1`, against those of the
/// central section `B ∩ H_i`. Sections are measured from the offset point
/// `x`, i.e. assumed centred on the complement of `H_i`.
pub fn check_intersection_property(
    body: &dyn GaugeBody,
    grid: &SectionGrid,
    tol: f64,
) -> Result<PropertyReport> {
    let n = body.dim();
    if n < 2 {
        return Err(Error::NotALayer { required: 2, found: n });
    }
    if grid.exact_shortcut && body.as_layered().is_some() {
        return Ok(PropertyReport {
            name: "intersection property".into(),
            verdict: Verdict::Pass,
            worst_residual: 0.0,
            tolerance: tol,
            witness: String::new(),
            value: Some(0.0),
            details: vec!["exact by construction".into()],
        });
    }
    let reach = 2.0 * body.rounding_radii().outer;
    let mut details = Vec::new();
    let mut worst = (0.0f64, String::new());
    let mut failing_levels = Vec::new();
    for i in 1..n {
        let dirs = section_directions(i, n, grid.directions);
        let origin = vec![0.0; n];
        let central: Vec<f64> = dirs.iter().map(|u| radial_extent(body, &origin, u, reach)).collect();
        let offsets = section_offsets(body, i, grid.offsets_per_axis);
        // (offset index, worst deviation, direction index) or None if empty
        let per_offset: Vec<Option<(f64, usize)>> = offsets
            .par_iter()
            .map(|x| {
                if body.eval(x) >= 1.0 - 1e-12 {
                    return None;
                }
                let ext: Vec<f64> = dirs.iter().map(|u| radial_extent(body, x, u, reach)).collect();
                let mut w = (0.0f64, 0);
                for k in 1..dirs.len() {
                    let dev = ((ext[k] / ext[0]) / (central[k] / central[0]) - 1.0).abs();
                    if dev > w.0 || dev.is_nan() {
                        w = (dev, k);
                    }
                }
                Some(w)
            })
            .collect();
        let mut level_worst = 0.0f64;
        for (x, res) in offsets.iter().zip(per_offset) {
            match res {
                None => details.push(format!("level {i}: empty section at offset {x:?}, skipped")),
                Some((dev, k)) => {
                    level_worst = level_worst.max(dev);
                    if dev > worst.0 || dev.is_nan() {
                        worst = (dev, format!("level {i}, offset {x:?}, direction {:?}", dirs[k]));
                    }
                }
            }
        }
        if !(level_worst <= tol) {
            failing_levels.push(i);
        }
        details.push(format!("level {i}: worst relative deviation {level_worst}"));
    }
    if !failing_levels.is_empty() {
        details.push(format!("failing levels: {failing_levels:?}"));
    }
    Ok(PropertyReport::from_residual("intersection property", worst.0, tol, worst.1, details))
}

/// The 2-intersection test at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoIntersectionLevel {
    pub level: usize,
    pub branch: Branch,
    pub t_star: Option<f64>,
    pub t_max: f64,
    /// `γ(-2t* e_level) - 1`, positive when `2t* > t_max`.
    pub margin: Option<f64>,
    pub verdict: Verdict,
}

/// Runs the constructed facet family level by level and classifies each
/// case-1 level by the margin test the construction uses. Case-2 levels
/// never place a facet at `±t*` and pass vacuously. Stops at the first
/// level that does not pass; the second value explains an early stop.
pub fn two_intersection_levels(
    body: &LayeredBody,
    tol: &Tolerance,
) -> (Vec<TwoIntersectionLevel>, Option<String>) {
    let mut out = Vec::new();
    let mut facet = base_segment();
    for level in 2..=body.dim() {
        let sub = body.truncated(level);
        let profile = sub.top_profile().expect("level ≥ 2 has a profile");
        let d0 = facet.diameter();
        let branch = branch_for(d0, profile);
        let mut rec = TwoIntersectionLevel {
            level,
            branch,
            t_star: None,
            t_max: profile.t_max(),
            margin: None,
            verdict: Verdict::Pass,
        };
        if branch == Branch::Case1 {
            let t_star = match find_t_star(d0, profile, tol) {
                Ok(t) => t,
                Err(e) => return (out, Some(format!("level {level}: {e}"))),
            };
            let margin = apex_outside_margin(&sub, t_star);
            rec.t_star = Some(t_star);
            rec.margin = Some(margin);
            rec.verdict = if margin >= tol.margin_tol {
                Verdict::Pass
            } else if margin > -tol.margin_tol {
                Verdict::Degenerate
            } else {
                Verdict::Fail
            };
        }
        let verdict = rec.verdict;
        out.push(rec);
        if verdict != Verdict::Pass {
            return (out, None);
        }
        match level_step(&sub, &facet, tol) {
            Ok((s, _)) => facet = s,
            Err(e) => return (out, Some(format!("construction stopped at level {level}: {e}"))),
        }
    }
    (out, None)
}

/// Necessary-condition check of the 2-intersection property over the
/// constructed facet family: each case-1 level needs `2t* > t_max`.
/// Pass, degenerate and fail follow the band `±margin_tol` around zero
/// margin.
pub fn check_2_intersection(body: &LayeredBody, tol: &Tolerance) -> PropertyReport {
    let (levels, stop) = two_intersection_levels(body, tol);
    let mut details = vec!["necessary-condition check over the constructed facet family".to_string()];
    let mut verdict = Verdict::Pass;
    let mut worst = 0.0f64;
    let mut witness = String::new();
    let mut value = None;
    for l in &levels {
        match (l.t_star, l.margin) {
            (Some(t), Some(m)) => {
                let rel = if 2.0 * t > l.t_max { ">" } else if 2.0 * t < l.t_max { "<" } else { "=" };
                details.push(format!(
                    "level {}: case 1, t* = {t}, 2t* = {} {rel} t_max = {}, margin {m}: {}",
                    l.level,
                    2.0 * t,
                    l.t_max,
                    l.verdict
                ));
                let shortfall = (-m).max(0.0);
                if l.verdict != Verdict::Pass || value.is_none() || shortfall > worst {
                    value = Some(2.0 * t);
                    witness = format!("level {}: 2t* = {}, t_max = {}", l.level, 2.0 * t, l.t_max);
                }
                worst = worst.max(shortfall);
            }
            _ => details.push(format!("level {}: case 2, no t* placement to test", l.level)),
        }
        if l.verdict != Verdict::Pass {
            verdict = l.verdict;
        }
    }
    if let Some(note) = stop {
        details.push(note.clone());
        if verdict == Verdict::Pass {
            verdict = Verdict::Fail;
            worst = f64::INFINITY;
            witness = note;
        }
    }
    PropertyReport {
        name: "2-intersection (necessary condition)".into(),
        verdict,
        worst_residual: worst,
        tolerance: tol.margin_tol,
        witness,
        value,
        details,
    }
}
