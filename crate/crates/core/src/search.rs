//! Derivative-free search for pairwise equidistant point sets, used as an
//! oracle independent of the inductive construction.
//!
//! With a target distance `c` the objective is `Σ_{i<j} (d_ij − c)²`, plus
//! `Σ_i (γ(x_i) − 1)²` when the points are tied to `∂B`. Without a target,
//! `c` is the mean pairwise distance and the spread is measured relative to
//! it, `Σ (d_ij/c − 1)²`, so that collapsing all points together does not
//! count as equidistant. Points that are neither tied to `∂B` nor given a
//! target only pay `Σ max(0, γ(x_i) − 1)²` for leaving the body, and the
//! result is rescaled so that its largest gauge is 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::GaugeBody;
use crate::pattern::PatternSearch;
use crate::vector::Vector;

/// Common distances below this never count as a success.
pub const MIN_COMMON_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    /// Pattern-search iterations per restart and stage.
    pub max_iters: usize,
    /// Restart `j` draws its start from seed `seed + j`.
    pub seed: u64,
    pub boundary_constrained: bool,
    pub target_distance: Option<f64>,
    pub residual_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 5000,
            seed: 0,
            boundary_constrained: true,
            target_distance: None,
            residual_tol: 1e-8,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidTolerance(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if let Some(t) = self.target_distance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidInput(format!("target distance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    fn scale_free(&self) -> bool {
        !self.boundary_constrained && self.target_distance.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub points: Vec<Vector>,
    pub common_distance: f64,
    /// `max |d_ij − c|`, plus `max |γ(x_i) − 1|` when boundary-constrained.
    pub residual: f64,
    /// `residual ≤ residual_tol` and `common_distance ≥ MIN_COMMON_DISTANCE`.
    pub success: bool,
    /// Restart that produced `points`.
    pub restart: usize,
    pub successful_restarts: usize,
}

/// Common distance and residual of a point set, recomputed from scratch.
pub fn residual(body: &dyn GaugeBody, points: &[Vector], opts: &SearchOptions) -> (f64, f64) {
    let dists = pair_distances(body, points.iter().map(|p| p.coords()));
    let c = opts
        .target_distance
        .unwrap_or_else(|| dists.iter().sum::<f64>() / dists.len() as f64);
    let mut r = dists.iter().map(|d| (d - c).abs()).fold(0.0, nan_max);
    if opts.boundary_constrained {
        r += points.iter().map(|p| (body.eval(p) - 1.0).abs()).fold(0.0, nan_max);
    }
    (c, r)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn pair_distances<'a>(body: &dyn GaugeBody, points: impl Iterator<Item = &'a [f64]> + Clone) -> Vec<f64> {
    let pts: Vec<&[f64]> = points.collect();
    let mut out = Vec::with_capacity(pts.len() * (pts.len() - 1) / 2);
    let mut diff = vec![0.0; pts.first().map_or(0, |p| p.len())];
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            for ((d, a), b) in diff.iter_mut().zip(pts[i]).zip(pts[j]) {
                *d = a - b;
            }
            out.push(body.eval(&diff));
        }
    }
    out
}

fn objective(body: &dyn GaugeBody, n: usize, opts: &SearchOptions, x: &[f64]) -> f64 {
    let dists = pair_distances(body, x.chunks(n));
    let spread: f64 = match opts.target_distance {
        Some(c) => dists.iter().map(|d| (d - c).powi(2)).sum(),
        None => {
            let mean = dists.iter().sum::<f64>() / dists.len() as f64;
            if !(mean > MIN_COMMON_DISTANCE) {
                return f64::INFINITY;
            }
            dists.iter().map(|d| (d / mean - 1.0).powi(2)).sum()
        }
    };
    let boundary: f64 = if opts.boundary_constrained {
        x.chunks(n).map(|p| (body.eval(p) - 1.0).powi(2)).sum()
    } else if opts.scale_free() {
        x.chunks(n).map(|p| (body.eval(p) - 1.0).max(0.0).powi(2)).sum()
    } else {
        0.0
    };
    spread + boundary
}

/// Rescales a scale-free result so that its largest gauge is 1.
fn finalize(body: &dyn GaugeBody, n: usize, opts: &SearchOptions, mut x: Vec<f64>) -> Vec<Vector> {
    if opts.scale_free() {
        let g = x.chunks(n).map(|p| body.eval(p)).fold(0.0, f64::max);
        if g > 0.0 && g.is_finite() {
            for c in &mut x {
                *c /= g;
            }
        }
    }
    x.chunks(n).map(|p| Vector::from_raw(p.to_vec())).collect()
}

fn polish(body: &dyn GaugeBody, opts: &SearchOptions, x0: &[f64], n: usize, seed: u64, first_step: f64) -> Vec<f64> {
    let size = body.rounding_radii().outer;
    let f = |x: &[f64]| objective(body, n, opts, x);
    let coarse = PatternSearch {
        initial_step: first_step * size,
        min_step: 1e-14 * size,
        max_iters: opts.max_iters,
        seed,
    }
    .minimize(f, x0);
    let fine = PatternSearch {
        initial_step: 1e-5 * size,
        min_step: 1e-15 * size,
        max_iters: opts.max_iters,
        seed: seed ^ 0x9e37_79b9_7f4a_7c15,
    }
    .minimize(f, &coarse.x);
    if fine.value <= coarse.value {
        fine.x
    } else {
        coarse.x
    }
}

fn start_point(body: &dyn GaugeBody, k: usize, opts: &SearchOptions, seed: u64) -> Vec<f64> {
    let n = body.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(k * n);
    while x.len() < k * n {
        let d: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g = body.eval(&d);
        if !(g > 0.0) {
            continue;
        }
        let radius = if opts.boundary_constrained {
            1.0
        } else {
            rng.random::<f64>().powf(1.0 / n as f64)
        };
        x.extend(d.iter().map(|c| c / g * radius));
    }
    x
}

fn result_from(body: &dyn GaugeBody, points: Vec<Vector>, opts: &SearchOptions, restart: usize) -> SearchResult {
    let (c, r) = residual(body, &points, opts);
    SearchResult {
        points,
        common_distance: c,
        success: r <= opts.residual_tol && c >= MIN_COMMON_DISTANCE,
        residual: r,
        restart,
        successful_restarts: 0,
    }
}

/// Strictly better: a success beats a failure, then the smaller residual,
/// with NaN last.
fn better(b: &SearchResult, a: &SearchResult) -> bool {
    if a.success != b.success {
        return b.success;
    }
    b.residual < a.residual || a.residual.is_nan() && !b.residual.is_nan()
}

/// Searches for `k` pairwise equidistant points; keeps the best restart
/// (successes first, then smallest residual), the lowest index winning
/// ties. `k = 2` with a free distance is answered by the antipodal pair
/// `±e_1/γ(e_1)`.
pub fn search_equilateral(body: &dyn GaugeBody, k: usize, opts: &SearchOptions) -> Result<SearchResult> {
    opts.validate()?;
    if k < 2 {
        return Err(Error::InvalidInput(format!("need k ≥ 2 points, got {k}")));
    }
    let n = body.dim();
    if k == 2 && opts.target_distance.is_none() {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        let g = body.eval(&e);
        let p = Vector::from_raw(e.iter().map(|c| c / g).collect());
        let q = Vector::from_raw(p.iter().map(|c| -c).collect());
        let mut r = result_from(body, vec![p, q], opts, 0);
        r.successful_restarts = usize::from(r.success);
        return Ok(r);
    }
    let runs: Vec<SearchResult> = (0..opts.restarts)
        .into_par_iter()
        .map(|j| {
            let seed = opts.seed.wrapping_add(j as u64);
            let x0 = start_point(body, k, opts, seed);
            let x = polish(body, opts, &x0, n, seed, 0.25);
            result_from(body, finalize(body, n, opts, x), opts, j)
        })
        .collect();
    let successes = runs.iter().filter(|r| r.success).count();
    let mut best = runs
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("restarts ≥ 1");
    best.successful_restarts = successes;
    Ok(best)
}

/// Polishes a given point set; returns the start unchanged when polishing
/// does not lower the residual.
pub fn search_from(body: &dyn GaugeBody, start: &[Vector], opts: &SearchOptions) -> Result<SearchResult> {
    opts.validate()?;
    if start.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 points, got {}", start.len())));
    }
    let n = body.dim();
    if let Some(p) = start.iter().find(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let x0: Vec<f64> = start.iter().flat_map(|p| p.iter().copied()).collect();
    let before = result_from(body, finalize(body, n, opts, x0.clone()), opts, 0);
    let x = polish(body, opts, &x0, n, opts.seed, 1e-3);
    let after = result_from(body, finalize(body, n, opts, x), opts, 0);
    let mut out = if after.residual < before.residual { after } else { before };
    out.successful_restarts = usize::from(out.success);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// Largest `k ≤ k_max` with a successful search (1 if none).
    pub k: usize,
    /// The successful point set for `k`.
    pub certificate: Option<SearchResult>,
    /// `(k, success, residual)` for every size tried.
    pub attempts: Vec<(usize, bool, f64)>,
}

/// Certified lower bound on the equilateral dimension: every `k` in
/// `2..=k_max` is searched with the same seeds, so the bound is monotone in
/// `k_max`.
pub fn lower_bound_e(body: &dyn GaugeBody, k_max: usize, opts: &SearchOptions) -> Result<LowerBound> {
    if k_max < 2 {
        return Err(Error::InvalidInput(format!("k_max must be at least 2, got {k_max}")));
    }
    let mut bound = LowerBound {
        k: 1,
        certificate: None,
        attempts: Vec::new(),
    };
    for k in 2..=k_max {
        let r = search_equilateral(body, k, opts)?;
        bound.attempts.push((k, r.success, r.residual));
        if r.success {
            bound.k = k;
            bound.certificate = Some(r);
        }
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{LpBall, ScaledBody};
    use crate::layered::{extend_layer, make_lp_ball, Profile};
    use approx::assert_abs_diff_eq;

    fn opts() -> SearchOptions {
        SearchOptions {
            restarts: 8,
            ..SearchOptions::default()
        }
    }

    #[test]
    fn sphere_tetrahedron() {
        let ball = LpBall::new(2.0, 3).unwrap();
        let r = search_equilateral(&ball, 4, &opts()).unwrap();
        assert!(r.success, "residual {}", r.residual);
        assert_abs_diff_eq!(r.common_distance, 2.0 * 6f64.sqrt() / 3.0, epsilon = 1e-4);
    }

    #[test]
    fn cube_ball_corners() {
        let sq = LpBall::new(f64::INFINITY, 2).unwrap();
        let r = search_equilateral(&sq, 4, &opts()).unwrap();
        assert!(r.success, "residual {}", r.residual);
        assert_abs_diff_eq!(r.common_distance, 2.0, epsilon = 1e-6);
        for p in &r.points {
            assert_abs_diff_eq!(p[0].abs(), 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(p[1].abs(), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn antipodal_pair() {
        for body in [LpBall::new(1.5, 3).unwrap(), LpBall::new(1.0, 2).unwrap()] {
            let r = search_equilateral(&body, 2, &opts()).unwrap();
            assert!(r.success);
            assert_abs_diff_eq!(r.common_distance, 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn residual_is_recomputed_post_hoc() {
        let ball = LpBall::new(3.0, 2).unwrap();
        let o = opts();
        let r = search_equilateral(&ball, 3, &o).unwrap();
        let (c, res) = residual(&ball, &r.points, &o);
        assert!((res - r.residual).abs() <= 1e-12);
        assert_eq!(c, r.common_distance);
    }

    #[test]
    fn doubling_the_gauge_halves_the_points() {
        let base = LpBall::new(2.0, 2).unwrap();
        let doubled = ScaledBody::new(LpBall::new(2.0, 2).unwrap(), 2.0);
        let o = SearchOptions { restarts: 3, ..opts() };
        let a = search_equilateral(&base, 3, &o).unwrap();
        let b = search_equilateral(&doubled, 3, &o).unwrap();
        assert_eq!(a.success, b.success);
        for (p, q) in a.points.iter().zip(&b.points) {
            for (x, y) in p.iter().zip(q.iter()) {
                assert_eq!(0.5 * x, *y);
            }
        }
        // distances measured in the doubled gauge are unchanged
        assert_eq!(a.common_distance, b.common_distance);
    }

    #[test]
    fn warm_start_never_worsens() {
        let body = make_lp_ball(2.0, 3).unwrap();
        let c = crate::construction::construct(&body, &Default::default()).unwrap();
        let o = opts();
        let before = residual(&body, c.simplex.vertices(), &o).1;
        let r = search_from(&body, c.simplex.vertices(), &o).unwrap();
        assert!(r.residual <= before);
        assert!(r.success);
    }

    #[test]
    fn lower_bounds() {
        let sq = LpBall::new(f64::INFINITY, 2).unwrap();
        let lb = lower_bound_e(&sq, 5, &opts()).unwrap();
        assert_eq!(lb.k, 4, "{:?}", lb.attempts);
        assert!(!lb.attempts[3].1);

        let disk = LpBall::new(2.0, 2).unwrap();
        assert_eq!(lower_bound_e(&disk, 3, &opts()).unwrap().k, 3);

        let cone = extend_layer(make_lp_ball(2.0, 2).unwrap(), Profile::cone()).unwrap();
        let free = SearchOptions {
            boundary_constrained: false,
            ..opts()
        };
        let lb = lower_bound_e(&cone, 4, &free).unwrap();
        assert_eq!(lb.k, 4, "{:?}", lb.attempts);
        let cert = lb.certificate.unwrap();
        let g = cert.points.iter().map(|p| cone.eval(p)).fold(0.0, f64::max);
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn options_are_validated() {
        let disk = LpBall::new(2.0, 2).unwrap();
        let bad = SearchOptions { restarts: 0, ..opts() };
        assert!(search_equilateral(&disk, 3, &bad).is_err());
        let bad = SearchOptions { residual_tol: 0.0, ..opts() };
        assert!(search_equilateral(&disk, 3, &bad).is_err());
        assert!(search_equilateral(&disk, 1, &opts()).is_err());
    }
}
