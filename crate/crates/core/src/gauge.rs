//! Gauge (Minkowski functional) primitives.
//!
//! Every body in the crate is an origin-symmetric convex body presented by its
//! gauge `γ_B(x) = min{λ ≥ 0 : x ∈ λB}`, which is the norm whose unit ball is
//! `B`. The checked entry points ([`gauge`], [`norm_dist`], [`boundary_scale`],
//! [`diameter_finite`]) validate dimensions and finiteness; the trait method
//! [`GaugeBody::eval`] is the raw evaluator used in inner loops.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layered::LayeredBody;
use crate::root::bisect_relative;
use crate::vector::{check_finite, euclidean_norm, sub, Vector};

/// Radii with `inner·B₂ ⊆ B ⊆ outer·B₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingRadii {
    pub inner: f64,
    pub outer: f64,
}

/// An origin-symmetric convex body given by its gauge.
pub trait GaugeBody: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Raw gauge evaluation. `x` has length `dim()` and finite entries.
    fn eval(&self, x: &[f64]) -> f64;

    fn rounding_radii(&self) -> RoundingRadii;

    fn descriptor(&self) -> String;

    /// The layered representation, when the body has one.
    fn as_layered(&self) -> Option<&LayeredBody> {
        None
    }
}

impl<T: GaugeBody + ?Sized> GaugeBody for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn rounding_radii(&self) -> RoundingRadii {
        (**self).rounding_radii()
    }
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
    fn as_layered(&self) -> Option<&LayeredBody> {
        (**self).as_layered()
    }
}

impl<T: GaugeBody + ?Sized> GaugeBody for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn rounding_radii(&self) -> RoundingRadii {
        (**self).rounding_radii()
    }
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
    fn as_layered(&self) -> Option<&LayeredBody> {
        (**self).as_layered()
    }
}

fn check_dim(body: &dyn GaugeBody, x: &[f64]) -> Result<()> {
    if x.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            found: x.len(),
        });
    }
    check_finite(x)
}

pub fn gauge(body: &dyn GaugeBody, x: &[f64]) -> Result<f64> {
    check_dim(body, x)?;
    Ok(body.eval(x))
}

/// `γ_B(x − y)`.
pub fn norm_dist(body: &dyn GaugeBody, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(body, x)?;
    check_dim(body, y)?;
    Ok(body.eval(&sub(x, y)))
}

/// Radial projection of `direction` onto `∂B`.
pub fn boundary_scale(body: &dyn GaugeBody, direction: &[f64]) -> Result<Vector> {
    check_dim(body, direction)?;
    let g = body.eval(direction);
    if g <= 0.0 {
        return Err(Error::ZeroDirection);
    }
    Ok(Vector::from_raw(direction.iter().map(|c| c / g).collect()))
}

/// Largest pairwise distance of a finite set and one pair attaining it.
/// A single point gives `(0, (0, 0))`.
pub fn diameter_finite(body: &dyn GaugeBody, points: &[Vector]) -> Result<(f64, (usize, usize))> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for p in points {
        check_dim(body, p)?;
    }
    let mut best = (0.0, (0, 0));
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = body.eval(&sub(&points[i], &points[j]));
            if d > best.0 {
                best = (d, (i, j));
            }
        }
    }
    Ok(best)
}

/// The `ℓp` ball evaluated by its closed form. Used as the reference
/// against which layered towers are checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpBall {
    p: f64,
    dim: usize,
}

impl LpBall {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self { p, dim })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

pub(crate) fn lp_norm(p: f64, x: &[f64]) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, c| m.max(c.abs()))
    } else if p == 1.0 {
        x.iter().map(|c| c.abs()).sum()
    } else if p == 2.0 {
        euclidean_norm(x)
    } else {
        // scale by the max entry to avoid overflow in |x|^p
        let m = x.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|c| (c.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

impl GaugeBody for LpBall {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        lp_norm(self.p, x)
    }

    fn rounding_radii(&self) -> RoundingRadii {
        let n = self.dim as f64;
        let e = 0.5 - 1.0 / self.p;
        if self.p >= 2.0 {
            RoundingRadii {
                inner: 1.0,
                outer: n.powf(e),
            }
        } else {
            RoundingRadii {
                inner: n.powf(e),
                outer: 1.0,
            }
        }
    }

    fn descriptor(&self) -> String {
        if self.p.is_infinite() {
            format!("lp(inf, n={})", self.dim)
        } else {
            format!("lp({}, n={})", self.p, self.dim)
        }
    }
}

/// Membership oracle: returns true iff the point lies in the body.
pub type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A body known only through a membership oracle; the gauge is obtained by
/// bisection on `λ` bracketed by the rounding radii.
#[derive(Clone)]
pub struct MembershipBody {
    dim: usize,
    contains: Membership,
    radii: RoundingRadii,
    descriptor: String,
    rel_tol: f64,
}

impl fmt::Debug for MembershipBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MembershipBody")
            .field("dim", &self.dim)
            .field("radii", &self.radii)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl MembershipBody {
    pub fn new(
        dim: usize,
        radii: RoundingRadii,
        descriptor: impl Into<String>,
        contains: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            contains: Arc::new(contains),
            radii,
            descriptor: descriptor.into(),
            rel_tol: 1e-14,
        }
    }

    /// The "flattening" body `conv((disk × {0}) ∪ {(x, 0, ±1) : |x| ≤ 1})`:
    /// origin-symmetric and convex, but its horizontal sections morph from a
    /// disk into a segment, so it lacks the intersection property.
    pub fn flattening() -> Self {
        Self::new(
            3,
            RoundingRadii {
                inner: 1.0 / 3f64.sqrt(),
                outer: 2f64.sqrt(),
            },
            "flattening",
            |p| {
                let (x, y, z) = (p[0].abs(), p[1].abs(), p[2].abs());
                if z + y > 1.0 {
                    return false;
                }
                let w = (1.0 - z) * (1.0 - z) - y * y;
                x <= z + w.max(0.0).sqrt()
            },
        )
    }
}

impl GaugeBody for MembershipBody {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let r = euclidean_norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let lo = r / self.radii.outer;
        let hi = r / self.radii.inner;
        let scaled = |lam: f64| -> Vec<f64> { x.iter().map(|c| c / lam).collect() };
        if (self.contains)(&scaled(lo)) {
            return lo;
        }
        bisect_relative(|lam| (self.contains)(&scaled(lam)), lo, hi, self.rel_tol)
    }

    fn rounding_radii(&self) -> RoundingRadii {
        self.radii
    }

    fn descriptor(&self) -> String {
        self.descriptor.clone()
    }
}

/// `λ·γ_B`, i.e. the body `B/λ`.
#[derive(Debug, Clone)]
pub struct ScaledBody<B> {
    inner: B,
    factor: f64,
}

impl<B: GaugeBody> ScaledBody<B> {
    pub fn new(inner: B, factor: f64) -> Self {
        assert!(factor > 0.0 && factor.is_finite());
        Self { inner, factor }
    }
}

impl<B: GaugeBody> GaugeBody for ScaledBody<B> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.eval(x)
    }
    fn rounding_radii(&self) -> RoundingRadii {
        let r = self.inner.rounding_radii();
        RoundingRadii {
            inner: r.inner / self.factor,
            outer: r.outer / self.factor,
        }
    }
    fn descriptor(&self) -> String {
        format!("{}*({})", self.factor, self.inner.descriptor())
    }
}
