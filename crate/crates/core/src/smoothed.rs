//! The parallel body `B + εB₂` of a core body with an exact Euclidean
//! projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{GaugeBody, RoundingRadii};
use crate::layered::{LayeredBody, Profile};
use crate::root::bracketed_root;
use crate::vector::euclidean_norm;

/// Core bodies whose nearest-point map is available in closed form (or by a
/// finite sort, for the cross-polytope).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projector {
    /// `[-1, 1]`.
    Segment,
    /// Euclidean unit ball of dimension `dim`.
    Ball { dim: usize },
    /// `[-1, 1]^dim`.
    Cube { dim: usize },
    /// `ℓ1` unit ball of dimension `dim`.
    CrossPolytope { dim: usize },
    /// `conv((B₂^{dim-1} × {0}) ∪ {±e_dim})`.
    DoubledConeOverBall { dim: usize },
    /// `B₂^{dim-1} × [-1, 1]`.
    CylinderOverBall { dim: usize },
}

impl Projector {
    /// Recognises the layered towers with a known projection.
    pub fn for_layered(body: &LayeredBody) -> Option<Self> {
        let profiles = body.profiles();
        let dim = body.dim();
        let all_lp = |p: f64, s: &[Profile]| {
            s.iter()
                .all(|q| matches!(q, Profile::Lp(x) if *x == p))
        };
        if profiles.is_empty() {
            return Some(Projector::Segment);
        }
        if all_lp(2.0, profiles) {
            return Some(Projector::Ball { dim });
        }
        if all_lp(1.0, profiles) {
            return Some(Projector::CrossPolytope { dim });
        }
        if profiles
            .iter()
            .all(|q| matches!(q, Profile::Prism) || matches!(q, Profile::Lp(x) if x.is_infinite()))
        {
            return Some(Projector::Cube { dim });
        }
        let (top, below) = profiles.split_last().unwrap();
        if below.is_empty() {
            // layer over the segment
            return match top {
                Profile::Cone => Some(Projector::CrossPolytope { dim }),
                _ => None,
            };
        }
        if all_lp(2.0, below) {
            return match top {
                Profile::Cone => Some(Projector::DoubledConeOverBall { dim }),
                Profile::Prism => Some(Projector::CylinderOverBall { dim }),
                _ => None,
            };
        }
        None
    }

    pub fn dim(&self) -> usize {
        match *self {
            Projector::Segment => 1,
            Projector::Ball { dim }
            | Projector::Cube { dim }
            | Projector::CrossPolytope { dim }
            | Projector::DoubledConeOverBall { dim }
            | Projector::CylinderOverBall { dim } => dim,
        }
    }

    /// Nearest point of the core body to `x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            Projector::Segment => vec![x[0].clamp(-1.0, 1.0)],
            Projector::Cube { .. } => x.iter().map(|c| c.clamp(-1.0, 1.0)).collect(),
            Projector::Ball { .. } => {
                let r = euclidean_norm(x);
                if r <= 1.0 {
                    x.to_vec()
                } else {
                    x.iter().map(|c| c / r).collect()
                }
            }
            Projector::CrossPolytope { .. } => project_l1(x),
            Projector::CylinderOverBall { dim } => {
                let (y, z) = x.split_at(dim - 1);
                let r = euclidean_norm(y);
                let mut out: Vec<f64> = if r <= 1.0 {
                    y.to_vec()
                } else {
                    y.iter().map(|c| c / r).collect()
                };
                out.push(z[0].clamp(-1.0, 1.0));
                out
            }
            Projector::DoubledConeOverBall { dim } => {
                let (y, z) = x.split_at(dim - 1);
                let rho = euclidean_norm(y);
                let h = z[0].abs();
                if rho + h <= 1.0 {
                    return x.to_vec();
                }
                // nearest point of the segment from (1, 0) to (0, 1) in the
                // (radial, |height|) half-plane
                let (pr, ph) = if rho - h >= 1.0 {
                    (1.0, 0.0)
                } else if h - rho >= 1.0 {
                    (0.0, 1.0)
                } else {
                    (0.5 * (rho - h + 1.0), 0.5 * (h - rho + 1.0))
                };
                let mut out: Vec<f64> = if rho > 0.0 {
                    y.iter().map(|c| c * pr / rho).collect()
                } else {
                    vec![0.0; dim - 1]
                };
                out.push(ph.copysign(z[0]));
                out
            }
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let p = self.project(x);
        x.iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn rounding_radii(&self) -> RoundingRadii {
        let n = self.dim() as f64;
        match self {
            Projector::Segment | Projector::Ball { .. } => RoundingRadii { inner: 1.0, outer: 1.0 },
            Projector::Cube { .. } => RoundingRadii { inner: 1.0, outer: n.sqrt() },
            Projector::CrossPolytope { .. } => RoundingRadii { inner: 1.0 / n.sqrt(), outer: 1.0 },
            Projector::DoubledConeOverBall { .. } => RoundingRadii {
                inner: std::f64::consts::FRAC_1_SQRT_2,
                outer: 1.0,
            },
            Projector::CylinderOverBall { .. } => RoundingRadii {
                inner: 1.0,
                outer: std::f64::consts::SQRT_2,
            },
        }
    }
}

/// Euclidean projection onto the `ℓ1` unit ball (sort-based simplex
/// projection of the absolute values).
fn project_l1(x: &[f64]) -> Vec<f64> {
    let s: f64 = x.iter().map(|c| c.abs()).sum();
    if s <= 1.0 {
        return x.to_vec();
    }
    let mut u: Vec<f64> = x.iter().map(|c| c.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j as f64 + 1.0);
        if uj > t {
            theta = t;
        } else {
            break;
        }
    }
    x.iter()
        .map(|c| (c.abs() - theta).max(0.0).copysign(*c))
        .collect()
}

/// `B* = B + εB₂` for a core body with an exact projection.
#[derive(Debug, Clone)]
pub struct SmoothedBody {
    core: LayeredBody,
    projector: Projector,
    epsilon: f64,
}

impl SmoothedBody {
    pub fn new(core: LayeredBody, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "smoothing radius {epsilon} must be positive"
            )));
        }
        let projector = Projector::for_layered(&core)
            .ok_or_else(|| Error::MissingProjection(core.spec_string()))?;
        Ok(Self {
            core,
            projector,
            epsilon,
        })
    }

    pub fn core(&self) -> &LayeredBody {
        &self.core
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Euclidean distance from `x` to the core body.
    pub fn core_distance(&self, x: &[f64]) -> f64 {
        self.projector.distance(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.core_distance(x) <= self.epsilon
    }
}

impl GaugeBody for SmoothedBody {
    fn dim(&self) -> usize {
        self.core.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let r = euclidean_norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let radii = self.rounding_radii();
        let lo = r / radii.outer;
        let hi = (r / radii.inner).min(self.core.eval(x));
        // dist(x/λ, core) - ε decreases in λ; root of its negative
        let excess = |lam: f64| {
            let y: Vec<f64> = x.iter().map(|c| c / lam).collect();
            self.epsilon - self.core_distance(&y)
        };
        if excess(lo) >= 0.0 {
            return lo;
        }
        if hi <= lo {
            return hi;
        }
        bracketed_root(excess, lo, hi, 1e-15)
    }

    fn rounding_radii(&self) -> RoundingRadii {
        let r = self.projector.rounding_radii();
        RoundingRadii {
            inner: r.inner + self.epsilon,
            outer: r.outer + self.epsilon,
        }
    }

    fn descriptor(&self) -> String {
        format!("smoothed:{}:{}", self.core.spec_string(), self.epsilon)
    }
}
