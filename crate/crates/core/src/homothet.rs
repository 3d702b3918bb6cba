//! Homothets `c + s·(w_i − w̄)` of a template point set inside a body: the
//! largest contained one, the largest inscribed one (every vertex on `∂B`),
//! the largest dilatation of a facet inside a section `B ∩ (t e_a + H)`, and
//! the cone step `conv({0} ∪ T_{t*})` for smooth strictly convex bodies.
//!
//! The containment problems are solved through homogeneity: if `m` is the
//! minimum over `c` of `max_i γ_p(c + w_i)`, with `γ_p` the gauge of the
//! (section of the) body about an interior point `p`, then the largest
//! contained homothet has ratio `1/m`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::checks::verify_equilateral;
use crate::error::{Error, Result};
use crate::gauge::GaugeBody;
use crate::pattern::PatternSearch;
use crate::root::{bisect, bracketed_root, first_sign_change};
use crate::simplex::{affine_rank, centroid, Simplex};
use crate::tolerance::Tolerance;
use crate::vector::{euclidean_norm, Vector};

/// Sign-change scan resolution of the height sweeps.
const SWEEP_POINTS: usize = 64;
const CONE_SCAN_POINTS: usize = 33;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Homothet {
    pub scale: f64,
    /// Image of the template centroid.
    pub translation: Vector,
    pub vertices: Vec<Vector>,
    /// `max_i |γ(vertex_i) − 1|`.
    pub boundary_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InscribedMethod {
    /// The largest contained homothet already touches `∂B` at every vertex.
    Contained,
    /// Facet orthogonal to `e_axis`, fitted maximally in each section while
    /// the height is root-found for the remaining vertex.
    FacetSweep { axis: usize },
    /// Least-squares solve of `γ(vertex_i) = 1` from several starts.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InscribedSearch {
    /// Largest contained homothet, inscribed or not.
    pub contained: Homothet,
    /// Largest inscribed homothet found, if any.
    pub best: Option<Homothet>,
    pub method: InscribedMethod,
    /// Ratios of every inscribed homothet found.
    pub candidates: Vec<f64>,
}

impl InscribedSearch {
    /// Ratio of the best inscribed homothet; 0 when none exists.
    pub fn scale(&self) -> f64 {
        self.best.as_ref().map_or(0.0, |h| h.scale)
    }
}

/// The cone step output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeStep {
    /// `conv({0} ∪ T_{t*})`, origin first.
    pub simplex: Simplex,
    pub t_star: f64,
    /// Ratio of the facet homothet `T_{t*}`.
    pub facet_scale: f64,
    /// Last height with a nonempty section.
    pub t_top: f64,
}

fn embed(axis: usize, height: f64, free: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(free.len() + 1);
    x.extend_from_slice(&free[..axis]);
    x.push(height);
    x.extend_from_slice(&free[axis..]);
    x
}

fn drop_axis(v: &[f64], axis: usize) -> Vec<f64> {
    v.iter()
        .enumerate()
        .filter(|&(i, _)| i != axis)
        .map(|(_, c)| *c)
        .collect()
}

fn shape_size(shape: &[Vec<f64>]) -> f64 {
    shape.iter().map(|w| euclidean_norm(w)).fold(0.0, f64::max)
}

fn centered(points: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let dim = points[0].len();
    let mut c = vec![0.0; dim];
    for p in points {
        for (a, b) in c.iter_mut().zip(p) {
            *a += b;
        }
    }
    for a in &mut c {
        *a /= points.len() as f64;
    }
    let shape = points
        .iter()
        .map(|p| p.iter().zip(&c).map(|(a, b)| a - b).collect())
        .collect();
    (shape, c)
}

/// `min_c max_i g(c + w_i)` for a positively homogeneous convex `g`, by
/// pattern search from `c = 0` followed by a fine polish.
fn minimax_translation<G>(g: G, shape: &[Vec<f64>], seed: u64) -> Result<(Vec<f64>, f64)>
where
    G: Fn(&[f64]) -> f64,
{
    let size = shape_size(shape);
    let dim = shape[0].len();
    let objective = |c: &[f64]| {
        let mut worst = 0.0f64;
        let mut y = vec![0.0; dim];
        for w in shape {
            for ((yi, ci), wi) in y.iter_mut().zip(c).zip(w) {
                *yi = ci + wi;
            }
            worst = worst.max(g(&y));
        }
        worst
    };
    let coarse = PatternSearch {
        initial_step: 0.25 * size,
        min_step: 1e-13 * size,
        max_iters: 5000,
        seed,
    }
    .minimize(objective, &vec![0.0; dim]);
    let fine = PatternSearch {
        initial_step: 1e-6 * size,
        min_step: 1e-14 * size,
        max_iters: 5000,
        seed: seed.wrapping_add(1),
    }
    .minimize(objective, &coarse.x);
    if !coarse.converged && !fine.converged {
        return Err(Error::SolverStall {
            best_scale: 1.0 / fine.value,
            residual: f64::NAN,
        });
    }
    if fine.value <= coarse.value {
        Ok((fine.x, fine.value))
    } else {
        Ok((coarse.x, coarse.value))
    }
}

/// `sup{μ ≥ 0 : γ(from + μ·dir) ≤ 1}`, with `γ(from) < 1`.
fn radial_reach(body: &dyn GaugeBody, from: &[f64], dir: &[f64], limit: f64) -> f64 {
    let f = |mu: f64| {
        let p: Vec<f64> = from.iter().zip(dir).map(|(a, b)| a + mu * b).collect();
        body.eval(&p) - 1.0
    };
    bracketed_root(f, 0.0, limit, 1e-14)
}

fn validate_template(body: &dyn GaugeBody, template: &[Vector]) -> Result<()> {
    if template.len() < 2 {
        return Err(if template.is_empty() {
            Error::EmptyPointSet
        } else {
            Error::InvalidInput("template needs at least two points".into())
        });
    }
    for p in template {
        if p.dim() != body.dim() {
            return Err(Error::DimensionMismatch {
                expected: body.dim(),
                found: p.dim(),
            });
        }
    }
    if affine_rank(template) == 0 {
        return Err(Error::DegenerateSimplex("template points coincide".into()));
    }
    Ok(())
}

fn make_homothet(body: &dyn GaugeBody, scale: f64, vertices: Vec<Vec<f64>>) -> Homothet {
    let vertices: Vec<Vector> = vertices.into_iter().map(Vector::from_raw).collect();
    let boundary_residual = vertices
        .iter()
        .map(|v| (body.eval(v) - 1.0).abs())
        .fold(0.0, f64::max);
    Homothet {
        scale,
        translation: centroid(&vertices),
        vertices,
        boundary_residual,
    }
}

/// Largest `s` such that some translate of `s·template` lies in `B`.
pub fn max_contained_homothet(body: &dyn GaugeBody, template: &[Vector], tol: &Tolerance) -> Result<Homothet> {
    tol.validate()?;
    validate_template(body, template)?;
    let raw: Vec<Vec<f64>> = template.iter().map(|v| v.to_vec()).collect();
    let (shape, _) = centered(&raw);
    let (c, m) = minimax_translation(|y| body.eval(y), &shape, 0)?;
    let s = 1.0 / m;
    let vertices = shape
        .iter()
        .map(|w| c.iter().zip(w).map(|(a, b)| (a + b) * s).collect())
        .collect();
    Ok(make_homothet(body, s, vertices))
}

/// Where the section `B ∩ (h e_axis + H)` can be measured from.
struct Section<'a> {
    body: &'a dyn GaugeBody,
    axis: usize,
    height: f64,
    /// Interior point of the section (free coordinates) and its gauge.
    center: Vec<f64>,
    center_gauge: f64,
    reach: f64,
}

impl<'a> Section<'a> {
    /// Finds a point of least gauge in the section; the axis point is taken
    /// as soon as it is interior.
    fn new(body: &'a dyn GaugeBody, axis: usize, height: f64) -> Self {
        let free_dim = body.dim() - 1;
        let outer = body.rounding_radii().outer;
        let axis_gauge = body.eval(&embed(axis, height, &vec![0.0; free_dim]));
        let (center, center_gauge) = if axis_gauge < 1.0 || free_dim == 0 {
            (vec![0.0; free_dim], axis_gauge)
        } else {
            let m = PatternSearch {
                initial_step: 0.25 * outer,
                min_step: 1e-14 * outer,
                max_iters: 5000,
                seed: 7,
            }
            .minimize(|y| body.eval(&embed(axis, height, y)), &vec![0.0; free_dim]);
            (m.x, m.value)
        };
        Section {
            body,
            axis,
            height,
            center,
            center_gauge,
            reach: 2.0 * outer,
        }
    }

    fn nonempty(&self) -> bool {
        self.center_gauge <= 1.0
    }

    /// Gauge of the section about its center, in free coordinates.
    fn gauge(&self, y: &[f64]) -> f64 {
        let ny = euclidean_norm(y);
        if ny == 0.0 {
            return 0.0;
        }
        if !(self.center_gauge < 1.0) {
            return f64::INFINITY;
        }
        let from = embed(self.axis, self.height, &self.center);
        let dir = embed(self.axis, 0.0, y);
        let mu = radial_reach(self.body, &from, &dir, self.reach / ny);
        if mu > 0.0 {
            1.0 / mu
        } else {
            f64::INFINITY
        }
    }

    /// Largest contained homothet of the centred free-coordinate `shape`:
    /// `(ratio, image of the shape centroid in free coordinates)`.
    fn fit(&self, shape: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
        if !(self.center_gauge < 1.0) {
            return Ok((0.0, self.center.clone()));
        }
        let (tau, m) = minimax_translation(|y| self.gauge(y), shape, 11)?;
        let s = if m.is_finite() && m > 0.0 { 1.0 / m } else { 0.0 };
        let at = self.center.iter().zip(&tau).map(|(p, t)| p + t * s).collect();
        Ok((s, at))
    }
}

/// Largest `t ≥ 0` with `B ∩ (t e_axis + H)` nonempty, to width `width`.
fn section_top(body: &dyn GaugeBody, axis: usize, width: f64) -> Result<f64> {
    let hi = 2.0 * body.rounding_radii().outer;
    let empty = |t: f64| if Section::new(body, axis, t).nonempty() { -1.0 } else { 1.0 };
    let (lo, _) = bisect(empty, 0.0, hi, width, "section emptiness")?;
    Ok(lo)
}

fn check_axis(body: &dyn GaugeBody, axis: usize) -> Result<()> {
    if body.dim() < 2 {
        return Err(Error::NotALayer { required: 2, found: body.dim() });
    }
    if axis >= body.dim() {
        return Err(Error::InvalidInput(format!("axis {axis} out of range for dimension {}", body.dim())));
    }
    Ok(())
}

/// Largest dilatation of `facet` that fits in `B ∩ (t e_axis + H)`, where
/// `H = e_axis^⊥` and the facet's own `axis` coordinates are ignored. `None`
/// when the section is empty.
pub fn max_section_dilatation(
    body: &dyn GaugeBody,
    facet: &[Vector],
    axis: usize,
    t: f64,
    tol: &Tolerance,
) -> Result<Option<Homothet>> {
    tol.validate()?;
    check_axis(body, axis)?;
    validate_template(body, facet)?;
    let flat: Vec<Vec<f64>> = facet.iter().map(|v| drop_axis(v, axis)).collect();
    let (shape, _) = centered(&flat);
    let section = Section::new(body, axis, t);
    if !section.nonempty() {
        return Ok(None);
    }
    let (s, at) = section.fit(&shape)?;
    let vertices = shape
        .iter()
        .map(|w| {
            let y: Vec<f64> = at.iter().zip(w).map(|(a, b)| a + s * b).collect();
            embed(axis, t, &y)
        })
        .collect();
    Ok(Some(make_homothet(body, s, vertices)))
}

/// `(axis, apex)` such that every template point but `apex` shares its
/// `axis` coordinate and `apex` does not.
fn orthogonal_facet(shape: &[Vec<f64>]) -> Option<(usize, usize)> {
    if shape.len() < 3 {
        return None;
    }
    let size = shape_size(shape);
    let dim = shape[0].len();
    for axis in 0..dim {
        for apex in 0..shape.len() {
            let mut rest = shape.iter().enumerate().filter(|&(i, _)| i != apex).map(|(_, w)| w[axis]);
            let first = rest.next().expect("at least two facet points");
            if rest.all(|c| (c - first).abs() <= 1e-12 * size)
                && (shape[apex][axis] - first).abs() > 1e-9 * size
            {
                return Some((axis, apex));
            }
        }
    }
    None
}

/// Every inscribed homothet whose facet is a maximal dilatation in its
/// section, found as roots in the section height of `γ(apex) − 1`.
fn facet_sweep(
    body: &dyn GaugeBody,
    shape: &[Vec<f64>],
    axis: usize,
    apex: usize,
    tol: &Tolerance,
) -> Result<Vec<Homothet>> {
    let facet_full: Vec<&Vec<f64>> = shape.iter().enumerate().filter(|&(i, _)| i != apex).map(|(_, w)| w).collect();
    let facet_level = facet_full[0][axis];
    let flat: Vec<Vec<f64>> = facet_full.iter().map(|w| drop_axis(w, axis)).collect();
    let (facet_shape, facet_centroid) = centered(&flat);
    let apex_free: Vec<f64> = drop_axis(&shape[apex], axis)
        .iter()
        .zip(&facet_centroid)
        .map(|(a, b)| a - b)
        .collect();
    let apex_rise = shape[apex][axis] - facet_level;

    let place = |h: f64| -> Result<(f64, Vec<Vec<f64>>)> {
        let section = Section::new(body, axis, h);
        let (s, at) = section.fit(&facet_shape)?;
        let mut vertices: Vec<Vec<f64>> = facet_shape
            .iter()
            .map(|w| embed(axis, h, &at.iter().zip(w).map(|(a, b)| a + s * b).collect::<Vec<_>>()))
            .collect();
        let apex_at: Vec<f64> = at.iter().zip(&apex_free).map(|(a, b)| a + s * b).collect();
        vertices.insert(apex, embed(axis, h + s * apex_rise, &apex_at));
        Ok((s, vertices))
    };
    let excess = |h: f64| -> f64 {
        match place(h) {
            Ok((_, v)) => body.eval(&v[apex]) - 1.0,
            Err(_) => f64::NAN,
        }
    };

    let top = section_top(body, axis, tol.root_tol)?;
    let n = SWEEP_POINTS;
    let heights: Vec<f64> = (0..n).map(|j| -top + 2.0 * top * (j as f64 + 0.5) / n as f64).collect();
    let values: Vec<f64> = heights.iter().map(|&h| excess(h)).collect();
    if let Some(j) = values.iter().position(|v| v.is_nan()) {
        // surface the solver failure instead of skipping the height
        place(heights[j])?;
    }
    let mut found = Vec::new();
    for j in 1..n {
        if (values[j - 1] >= 0.0) == (values[j] >= 0.0) {
            continue;
        }
        let (a, b) = bisect(excess, heights[j - 1], heights[j], tol.root_tol, "apex gauge − 1 over section height")?;
        let (s, vertices) = place(0.5 * (a + b))?;
        let h = make_homothet(body, s, vertices);
        if s > 0.0 && h.boundary_residual <= tol.verify_tol {
            found.push(h);
        }
    }
    Ok(found)
}

/// Inscribed homothets from a least-squares solve of `γ(c + s w_i) = 1`,
/// started around the largest contained homothet.
fn joint_inscribed(body: &dyn GaugeBody, shape: &[Vec<f64>], contained: &Homothet, tol: &Tolerance) -> Vec<Homothet> {
    let dim = body.dim();
    let vertices_of = |x: &[f64]| -> Vec<Vec<f64>> {
        let s = x[0].exp();
        shape
            .iter()
            .map(|w| w.iter().zip(&x[1..]).map(|(wi, ci)| ci + s * wi).collect())
            .collect()
    };
    let objective = |x: &[f64]| vertices_of(x).iter().map(|v| (body.eval(v) - 1.0).powi(2)).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a5c);
    let mut found: Vec<Homothet> = Vec::new();
    for (k, frac) in [1.0, 0.8, 0.6, 0.4, 0.2].into_iter().enumerate() {
        let mut x0 = vec![(contained.scale * frac).ln()];
        x0.extend(contained.translation.iter().map(|c| {
            let z: f64 = StandardNormal.sample(&mut rng);
            c + 0.1 * z
        }));
        debug_assert_eq!(x0.len(), dim + 1);
        let m = PatternSearch {
            initial_step: 0.1,
            min_step: 1e-14,
            max_iters: 20_000,
            seed: 100 + k as u64,
        }
        .minimize(objective, &x0);
        let h = make_homothet(body, m.x[0].exp(), vertices_of(&m.x));
        if h.boundary_residual <= tol.verify_tol {
            found.push(h);
        }
    }
    found
}

/// Largest `s` for which some translate of `s·template` is inscribed in `B`
/// (every vertex on `∂B`). When the largest contained homothet is already
/// inscribed it is the answer; otherwise a template with a facet orthogonal
/// to a coordinate axis is swept through the sections along that axis, and
/// any other template falls back to a multistart least-squares solve.
pub fn max_inscribed_homothet(body: &dyn GaugeBody, template: &[Vector], tol: &Tolerance) -> Result<InscribedSearch> {
    let contained = max_contained_homothet(body, template, tol)?;
    if contained.boundary_residual <= tol.verify_tol {
        return Ok(InscribedSearch {
            candidates: vec![contained.scale],
            best: Some(contained.clone()),
            contained,
            method: InscribedMethod::Contained,
        });
    }
    let raw: Vec<Vec<f64>> = template.iter().map(|v| v.to_vec()).collect();
    let (shape, _) = centered(&raw);
    let (found, method) = match orthogonal_facet(&shape) {
        Some((axis, apex)) => (facet_sweep(body, &shape, axis, apex, tol)?, InscribedMethod::FacetSweep { axis }),
        None => (joint_inscribed(body, &shape, &contained, tol), InscribedMethod::Joint),
    };
    let candidates: Vec<f64> = found.iter().map(|h| h.scale).collect();
    let best = found.into_iter().fold(None, |acc: Option<Homothet>, h| match acc {
        Some(b) if b.scale >= h.scale => Some(b),
        _ => Some(h),
    });
    Ok(InscribedSearch {
        contained,
        best,
        method,
        candidates,
    })
}

/// The cone step over an equilateral facet inscribed in the central section
/// `B ∩ H`, `H = e_axis^⊥`: finds the first `t*` at which the largest
/// dilatation of the facet in `B ∩ (t e_axis + H)` has diameter 1, and
/// returns `conv({0} ∪ T_{t*})`. Smoothness and strict convexity of `B` are
/// the caller's responsibility.
pub fn remark_cone_step(body: &dyn GaugeBody, facet: &Simplex, axis: usize, tol: &Tolerance) -> Result<ConeStep> {
    tol.validate()?;
    check_axis(body, axis)?;
    let n = body.dim();
    let verts = facet.vertices();
    if verts[0].dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: verts[0].dim(),
        });
    }
    if facet.affine_dim() != n - 1 {
        return Err(Error::DegenerateSimplex(format!(
            "facet has affine dimension {}, need {}",
            facet.affine_dim(),
            n - 1
        )));
    }
    if let Some(v) = verts.iter().find(|v| v[axis].abs() > tol.verify_tol) {
        return Err(Error::InvalidInput(format!("facet vertex {v:?} is off the central section")));
    }
    let d0 = facet.diameter();
    if !(d0 > 1.0) {
        return Err(Error::InvalidInput(format!("facet diameter {d0} must exceed 1")));
    }
    let eq = verify_equilateral(verts, body, tol.verify_tol)?;
    if !eq.passed() {
        return Err(Error::InvalidInput(format!(
            "facet is not equilateral (residual {})",
            eq.worst_residual
        )));
    }

    let flat: Vec<Vec<f64>> = verts.iter().map(|v| drop_axis(v, axis)).collect();
    let (shape, _) = centered(&flat);
    let fit_at = |t: f64| -> Result<(f64, Vec<f64>)> { Section::new(body, axis, t).fit(&shape) };
    let top = section_top(body, axis, tol.root_tol)?;
    let phi_top = fit_at(top)?.0 * d0;
    if phi_top > 1.0 {
        return Err(Error::SectionNeverUnit { phi: phi_top });
    }
    // φ(t) − 1 ≤ 0 marks the far side of t*
    let below_one = |t: f64| match fit_at(t) {
        Ok((s, _)) => 1.0 - s * d0,
        Err(_) => f64::NAN,
    };
    let (a, b) = first_sign_change(below_one, 0.0, top, CONE_SCAN_POINTS).ok_or(Error::SectionNeverUnit { phi: phi_top })?;
    let (a, b) = bisect(below_one, a, b, tol.root_tol, "φ(t) − 1 over section height")?;
    let t_star = 0.5 * (a + b);
    let (s, at) = fit_at(t_star)?;
    let mut vertices = vec![Vector::zeros(n)];
    vertices.extend(shape.iter().map(|w| {
        let y: Vec<f64> = at.iter().zip(w).map(|(p, q)| p + s * q).collect();
        Vector::from_raw(embed(axis, t_star, &y))
    }));
    let simplex = Simplex::new(body, vertices)?;
    let check = verify_equilateral(simplex.vertices(), body, tol.verify_tol)?;
    if !check.passed() {
        return Err(Error::DegenerateSimplex(format!(
            "cone at t* = {t_star} is not equilateral (residual {})",
            check.worst_residual
        )));
    }
    Ok(ConeStep {
        simplex,
        t_star,
        facet_scale: s,
        t_top: top,
    })
}
