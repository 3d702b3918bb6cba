//! Inductive construction of an inscribed equilateral simplex with diameter
//! greater than one.
//!
//! Level 1 is the segment `[-e_1, e_1]`. At level `n` the facet `T_0` found at
//! level `n - 1` is carried through the sections `M_t = r(t)·(B ∩ H_{n-1})`
//! as `T_t = r(t)·T_0`, so its diameter is `φ(t) = r(t)·D(T_0)`, and one of two
//! branches applies:
//!
//! * case 1, `φ(t_max) ≤ 1`: take the smallest `t*` with `φ(t*) = 1`; the cone
//!   `S_{t*} = conv({0} ∪ T_{t*})` has unit edges. Its homothets `S_t` with the
//!   facet inscribed in `M_t` slide from `t = t*` (apex at the origin) down to
//!   `t = -t*` (apex at height `-2t*`, required to lie outside `B`); the apex
//!   crosses `∂B` at some `t'`.
//! * case 2, `φ(t_max) > 1`: shrink the top facet by `ρ0 = 1/φ(t_max)` to unit
//!   diameter, cone it over the origin, and grow the cone, first with the
//!   facet held in the top face and then with the facet inscribed in `M_t` for
//!   decreasing `t`, until the apex reaches `∂B`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::GaugeBody;
use crate::layered::{LayeredBody, Profile};
use crate::root::first_root;
use crate::simplex::Simplex;
use crate::tolerance::{Tolerance, SCAN_POINTS};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Case1,
    Case2,
}

/// The two growth phases of case 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowPhase {
    /// Facet held in the top face, scaled by `s` about the axis.
    TopFace = 1,
    /// Facet inscribed in the section at height `t`.
    Section = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `γ(apex of S_{-t*}) - 1`; case 1 only.
    pub apex_outside_margin: Option<f64>,
    /// `D(S) - 1`.
    pub diameter_margin: f64,
}

/// What happened at one level of the induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub branch: Branch,
    pub t_star: Option<f64>,
    pub t_prime: Option<f64>,
    pub rho0: Option<f64>,
    /// Top of the section range, `t_max` of the level's profile.
    pub t0: f64,
    pub facet_diameter_before: f64,
    pub final_diameter: f64,
    pub grow_phase: Option<GrowPhase>,
    /// Scale `s` (phase 1) or height `t` (phase 2).
    pub grow_parameter: Option<f64>,
    pub margins: Margins,
    /// `D(S) < 1 + margin_tol`: accepted, but not certified strictly above 1.
    pub degenerate_margin: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub levels: Vec<LevelRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub simplex: Simplex,
    pub trace: ConstructionTrace,
}

/// A construction that stopped early, with the levels completed before the
/// failing one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionFailure {
    pub error: Error,
    pub trace: ConstructionTrace,
}

impl fmt::Display for ConstructionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} completed levels)",
            self.error,
            self.trace.levels.len()
        )
    }
}

impl std::error::Error for ConstructionFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// The level-1 simplex `[-e_1, e_1]`, endpoints in ascending order.
pub fn base_segment() -> Simplex {
    let base = LayeredBody::base();
    Simplex::new(
        &base,
        vec![Vector::from_raw(vec![-1.0]), Vector::from_raw(vec![1.0])],
    )
    .expect("segment is a 1-simplex")
}

/// Runs the induction from the base segment up to `body.dim()`.
pub fn construct(
    body: &LayeredBody,
    tol: &Tolerance,
) -> std::result::Result<Construction, ConstructionFailure> {
    let mut trace = ConstructionTrace::default();
    if let Err(error) = tol.validate() {
        return Err(ConstructionFailure { error, trace });
    }
    if body.dim() < 2 {
        return Err(ConstructionFailure {
            error: Error::NotALayer {
                required: 2,
                found: body.dim(),
            },
            trace,
        });
    }
    let mut facet = base_segment();
    for level in 2..=body.dim() {
        let sub = body.truncated(level);
        match level_step(&sub, &facet, tol) {
            Ok((simplex, record)) => {
                trace.levels.push(record);
                facet = simplex;
            }
            Err(error) => return Err(ConstructionFailure { error, trace }),
        }
    }
    Ok(Construction {
        simplex: facet,
        trace,
    })
}

/// The planar base case: an inscribed equilateral triangle with `D > 1` in a
/// 2-dimensional layered body.
pub fn planar_construct(body: &LayeredBody, tol: &Tolerance) -> Result<(Simplex, LevelRecord)> {
    if body.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: body.dim(),
        });
    }
    level_step(body, &base_segment(), tol)
}

fn top_profile(body: &LayeredBody) -> Result<&Profile> {
    body.top_profile().ok_or(Error::NotALayer {
        required: 2,
        found: body.dim(),
    })
}

/// Which branch the level takes for a facet of the given diameter.
pub fn branch_for(facet_diameter: f64, profile: &Profile) -> Branch {
    if profile.ratio(profile.t_max()) * facet_diameter <= 1.0 {
        Branch::Case1
    } else {
        Branch::Case2
    }
}

/// One induction step: `facet` is the simplex of `B ∩ H_{n-1}`, in `n - 1`
/// coordinates; returns the `n`-simplex and its record.
pub fn level_step(
    body: &LayeredBody,
    facet: &Simplex,
    tol: &Tolerance,
) -> Result<(Simplex, LevelRecord)> {
    let profile = top_profile(body)?;
    let level = body.dim();
    if facet.affine_dim() + 1 != level || facet.vertices()[0].dim() + 1 != level {
        return Err(Error::DimensionMismatch {
            expected: level - 1,
            found: facet.affine_dim(),
        });
    }
    let d0 = facet.diameter();
    let t_max = profile.t_max();
    match branch_for(d0, profile) {
        Branch::Case1 => {
            let t_star = find_t_star(d0, profile, tol)?;
            let margin = apex_outside_margin(body, t_star);
            let (simplex, t_prime) = case1_slide(body, facet, t_star, tol)?;
            let d = simplex.diameter();
            Ok((
                simplex,
                LevelRecord {
                    level,
                    branch: Branch::Case1,
                    t_star: Some(t_star),
                    t_prime: Some(t_prime),
                    rho0: None,
                    t0: t_max,
                    facet_diameter_before: d0,
                    final_diameter: d,
                    grow_phase: None,
                    grow_parameter: None,
                    margins: Margins {
                        apex_outside_margin: Some(margin),
                        diameter_margin: d - 1.0,
                    },
                    degenerate_margin: d - 1.0 < tol.margin_tol,
                },
            ))
        }
        Branch::Case2 => {
            let grown = case2_grow(body, facet, tol)?;
            let d = grown.simplex.diameter();
            Ok((
                grown.simplex,
                LevelRecord {
                    level,
                    branch: Branch::Case2,
                    t_star: None,
                    t_prime: None,
                    rho0: Some(grown.rho0),
                    t0: t_max,
                    facet_diameter_before: d0,
                    final_diameter: d,
                    grow_phase: Some(grown.phase),
                    grow_parameter: Some(grown.parameter),
                    margins: Margins {
                        apex_outside_margin: None,
                        diameter_margin: d - 1.0,
                    },
                    degenerate_margin: d - 1.0 < tol.margin_tol,
                },
            ))
        }
    }
}

/// Smallest `t*` in `[0, t_max]` with `r(t*)·facet_diameter = 1`.
pub fn find_t_star(facet_diameter: f64, profile: &Profile, tol: &Tolerance) -> Result<f64> {
    if !(facet_diameter > 1.0) {
        return Err(Error::InvalidInput(format!(
            "facet diameter {facet_diameter} must exceed 1"
        )));
    }
    let t_max = profile.t_max();
    // predicate φ(t) ≤ 1 flips exactly once; scanning from 0 finds the
    // infimum of the root set
    let at_or_below_one = |t: f64| 1.0 - profile.ratio(t) * facet_diameter;
    let (lo, hi) = first_root(at_or_below_one, 0.0, t_max, SCAN_POINTS, tol.root_tol, "φ(t) - 1")?;
    Ok(0.5 * (lo + hi))
}

fn axis_point(dim: usize, height: f64) -> Vec<f64> {
    let mut p = vec![0.0; dim];
    p[dim - 1] = height;
    p
}

/// `γ((0, …, 0, -2t*)) - 1`: how far the apex of the `t = -t*` placement
/// sits outside `B`. Positive margins are what the slide needs.
pub fn apex_outside_margin(body: &LayeredBody, t_star: f64) -> f64 {
    body.eval(&axis_point(body.dim(), -2.0 * t_star)) - 1.0
}

fn lift(facet: &Simplex, scale: f64, height: f64) -> Vec<Vector> {
    facet
        .vertices()
        .iter()
        .map(|v| Vector::from_raw(v.iter().map(|c| c * scale).chain([height]).collect()))
        .collect()
}

/// Case 1: slides the unit cone `S_{t*}` through `t ∈ [-t*, t*]` until its
/// apex meets `∂B`. Returns the inscribed simplex and `t'`.
pub fn case1_slide(
    body: &LayeredBody,
    facet: &Simplex,
    t_star: f64,
    tol: &Tolerance,
) -> Result<(Simplex, f64)> {
    let profile = top_profile(body)?;
    let level = body.dim();
    let t_max = profile.t_max();
    if !(t_star > 0.0 && t_star <= t_max) {
        return Err(Error::OutOfRange { t: t_star, t_max });
    }
    let r_star = profile.ratio(t_star);
    if r_star <= 0.0 {
        return Err(Error::InvalidInput(format!("section at t* = {t_star} is a point")));
    }
    let margin = apex_outside_margin(body, t_star);
    if margin < tol.margin_tol {
        return Err(Error::PreconditionViolated {
            level,
            detail: format!(
                "apex of the t = -t* placement at height {:.6} is not outside B (t* = {:.6}, t_max = {}): the 2-intersection property fails",
                -2.0 * t_star,
                t_star,
                t_max
            ),
            margin,
            degenerate: margin > -tol.margin_tol,
        });
    }
    let dim = body.dim();
    let apex_height = |t: f64| t - profile.ratio(t.abs()) / r_star * t_star;
    let apex_excess = |t: f64| body.eval(&axis_point(dim, apex_height(t))) - 1.0;
    let (a, b) = first_root(
        apex_excess,
        -t_star,
        t_star,
        SCAN_POINTS,
        tol.root_tol,
        "apex gauge - 1 on [-t*, t*]",
    )?;
    let t_prime = 0.5 * (a + b);
    let mut vertices = lift(facet, profile.ratio(t_prime.abs()), t_prime);
    vertices.push(Vector::from_raw(axis_point(dim, apex_height(t_prime))));
    Ok((Simplex::new(body, vertices)?, t_prime))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grown {
    pub simplex: Simplex,
    pub phase: GrowPhase,
    /// `s` in phase 1, `t` in phase 2.
    pub parameter: f64,
    pub rho0: f64,
}

/// Case 2: grows the unit cone over the shrunk top facet until its apex
/// meets `∂B`.
pub fn case2_grow(body: &LayeredBody, facet: &Simplex, tol: &Tolerance) -> Result<Grown> {
    let profile = top_profile(body)?;
    let level = body.dim();
    let dim = body.dim();
    let t_max = profile.t_max();
    let d0 = facet.diameter();
    let r_top = profile.ratio(t_max);
    let phi_top = r_top * d0;
    if !(phi_top > 1.0) {
        return Err(Error::PreconditionViolated {
            level,
            detail: format!("case 2 needs a top-section facet with diameter > 1, got {phi_top}"),
            margin: phi_top - 1.0,
            degenerate: (phi_top - 1.0).abs() < tol.margin_tol,
        });
    }
    let rho0 = 1.0 / phi_top;
    let s_max = phi_top;

    // phase 1: facet stays in the top face, scaled by s about the axis
    let apex_excess_s = |s: f64| body.eval(&axis_point(dim, t_max * (1.0 - s))) - 1.0;
    if apex_excess_s(s_max) >= 0.0 {
        let (a, b) = first_root(apex_excess_s, 1.0, s_max, SCAN_POINTS, tol.root_tol, "phase-1 apex gauge - 1")?;
        let s = 0.5 * (a + b);
        let mut vertices = lift(facet, s * rho0 * r_top, t_max);
        vertices.push(Vector::from_raw(axis_point(dim, t_max * (1.0 - s))));
        return Ok(Grown {
            simplex: Simplex::new(body, vertices)?,
            phase: GrowPhase::TopFace,
            parameter: s,
            rho0,
        });
    }

    // phase 2: facet inscribed in M_t, t decreasing from t_max
    let apex_height = |t: f64| t - profile.ratio(t) * d0 * t_max;
    let apex_excess_t = |t: f64| body.eval(&axis_point(dim, apex_height(t))) - 1.0;
    let (a, b) = first_root(apex_excess_t, t_max, 0.0, SCAN_POINTS, tol.root_tol, "phase-2 apex gauge - 1")
        .map_err(|e| match e {
            Error::NoRoot { .. } => Error::NoCrossing {
                level,
                detail: "apex stayed inside B down to t = 0".into(),
            },
            other => other,
        })?;
    let t = 0.5 * (a + b);
    let mut vertices = lift(facet, profile.ratio(t), t);
    vertices.push(Vector::from_raw(axis_point(dim, apex_height(t))));
    Ok(Grown {
        simplex: Simplex::new(body, vertices)?,
        phase: GrowPhase::Section,
        parameter: t,
        rho0,
    })
}
