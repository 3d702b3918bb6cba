//! Bodies with the intersection property along the canonical chain
//! `H_i = <e_1, ..., e_i>`.
//!
//! A [`LayeredBody`] of dimension `n` is the segment `[-e_1, e_1]` followed by
//! `n - 1` layers. Layer `k` adds axis `e_{k+1}` and a section profile `r`:
//! the section at height `t` is `r(|t|)` times the body below, centred on the
//! axis. Every translate-section is therefore a homothet of the central one,
//! exactly and by construction.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gauge::{lp_norm, GaugeBody, RoundingRadii};
use crate::report::{PropertyReport, Verdict};
use crate::root::bisect_relative;

/// Grid used when a profile is validated on construction.
pub const PROFILE_GRID: usize = 65;

const PROFILE_VALIDATION_TOL: f64 = 1e-7;

/// Section ratio `r: [0, t_max] -> [0, 1]`.
#[derive(Clone)]
pub enum Profile {
    /// `r(t) = (1 - t^p)^{1/p}` on `[0, 1]`; constant 1 for `p = ∞`.
    Lp(f64),
    /// `r(t) = 1 - t` on `[0, 1]`.
    Cone,
    /// `r(t) = 1` on `[0, 1]`.
    Prism,
    /// Piecewise-linear interpolation of `(t, r)` samples; `t_max` is the
    /// last abscissa.
    Sampled(Arc<[(f64, f64)]>),
    Custom {
        name: String,
        t_max: f64,
        ratio: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({}, t_max={})", self.kind_tag(), self.t_max())
    }
}

#[derive(Deserialize)]
struct ProfileFile {
    t_max: f64,
    samples: Vec<[f64; 2]>,
}

impl Profile {
    pub fn lp(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Profile::Lp(p))
    }

    pub fn cone() -> Self {
        Profile::Cone
    }

    pub fn prism() -> Self {
        Profile::Prism
    }

    /// Samples sorted by strictly increasing `t`, starting at `t = 0`.
    pub fn sampled(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidProfile("need at least two samples".into()));
        }
        if samples.iter().any(|(t, r)| !t.is_finite() || !r.is_finite()) {
            return Err(Error::InvalidProfile("non-finite sample".into()));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::InvalidProfile("first sample must be at t = 0".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidProfile("samples not sorted by t".into()));
        }
        Ok(Profile::Sampled(samples.into()))
    }

    pub fn custom(
        name: impl Into<String>,
        t_max: f64,
        ratio: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidProfile(format!("t_max {t_max} not positive")));
        }
        Ok(Profile::Custom {
            name: name.into(),
            t_max,
            ratio: Arc::new(ratio),
        })
    }

    /// Parses `{"t_max": .., "samples": [[t, r], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProfileFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidProfile(format!("profile JSON: {e}")))?;
        let samples: Vec<(f64, f64)> = file.samples.iter().map(|s| (s[0], s[1])).collect();
        let profile = Self::sampled(samples)?;
        if (profile.t_max() - file.t_max).abs() > 1e-12 * file.t_max.abs().max(1.0) {
            return Err(Error::InvalidProfile(format!(
                "t_max {} does not match last sample {}",
                file.t_max,
                profile.t_max()
            )));
        }
        Ok(profile)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidProfile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn t_max(&self) -> f64 {
        match self {
            Profile::Lp(_) | Profile::Cone | Profile::Prism => 1.0,
            Profile::Sampled(s) => s[s.len() - 1].0,
            Profile::Custom { t_max, .. } => *t_max,
        }
    }

    pub fn kind_tag(&self) -> String {
        match self {
            Profile::Lp(p) if p.is_infinite() => "lp(inf)".into(),
            Profile::Lp(p) => format!("lp({p})"),
            Profile::Cone => "cone".into(),
            Profile::Prism => "prism".into(),
            Profile::Sampled(s) => format!("sampled({})", s.len()),
            Profile::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// `r(t)` for `t` in `[0, t_max]`; arguments outside are clamped.
    pub fn ratio(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.t_max());
        match self {
            Profile::Lp(p) if p.is_infinite() => 1.0,
            Profile::Lp(p) if *p == 1.0 => 1.0 - t,
            Profile::Lp(p) if *p == 2.0 => ((1.0 - t) * (1.0 + t)).max(0.0).sqrt(),
            Profile::Lp(p) => (1.0 - t.powf(*p)).max(0.0).powf(1.0 / p),
            Profile::Cone => 1.0 - t,
            Profile::Prism => 1.0,
            Profile::Sampled(s) => {
                let k = s.partition_point(|(ts, _)| *ts <= t);
                if k >= s.len() {
                    return s[s.len() - 1].1;
                }
                let (t0, r0) = s[k - 1];
                let (t1, r1) = s[k];
                r0 + (r1 - r0) * (t - t0) / (t1 - t0)
            }
            Profile::Custom { ratio, .. } => ratio(t),
        }
    }

    /// Combines the inner gauge `g` with the height `|z|` into the gauge of
    /// the layered body: `min{λ : |z| ≤ λ t_max, g ≤ λ r(|z|/λ)}`.
    fn combine(&self, g: f64, z: f64) -> f64 {
        match self {
            Profile::Lp(p) => lp_norm(*p, &[g, z]),
            Profile::Cone => g + z,
            Profile::Prism => g.max(z),
            Profile::Sampled(_) | Profile::Custom { .. } => {
                if z == 0.0 {
                    return g;
                }
                let t_max = self.t_max();
                let lo = z / t_max;
                let fits = |lam: f64| lam * self.ratio(z / lam) >= g;
                if fits(lo) {
                    return lo;
                }
                // concavity with r ≥ 0 gives r(t_max/2) ≥ 1/2
                let mut hi = (2.0 * lo).max(2.0 * g);
                let mut guard = 0;
                while !fits(hi) && guard < 64 {
                    hi *= 2.0;
                    guard += 1;
                }
                bisect_relative(fits, lo, hi, 1e-15)
            }
        }
    }
}

/// Checks `r(0) = 1`, monotone non-increase, range `[0, 1]`, and midpoint
/// concavity on a uniform grid of `grid_size` points.
pub fn validate_profile(profile: &Profile, grid_size: usize, verify_tol: f64) -> PropertyReport {
    let n = grid_size.max(3);
    let t_max = profile.t_max();
    let ts: Vec<f64> = (0..n)
        .map(|k| t_max * k as f64 / (n - 1) as f64)
        .collect();
    let rs: Vec<f64> = ts.iter().map(|&t| profile.ratio(t)).collect();

    let mut worst = 0.0f64;
    let mut witness = String::from("none");
    let mut details = Vec::new();
    let mut note = |res: f64, what: String, details: &mut Vec<String>| {
        if res > verify_tol {
            details.push(format!("{what}: violation {res:e}"));
        }
        if res > worst || res.is_nan() {
            worst = if res.is_nan() { f64::INFINITY } else { res };
            witness = what;
        }
    };

    note((rs[0] - 1.0).abs(), "r(0) = 1".into(), &mut details);
    for (k, (&t, &r)) in ts.iter().zip(&rs).enumerate() {
        let range = (-r).max(r - 1.0).max(0.0);
        note(range, format!("r({t}) in [0,1]"), &mut details);
        if k + 1 < n {
            let inc = (rs[k + 1] - r).max(0.0);
            note(inc, format!("non-increase on [{t}, {}]", ts[k + 1]), &mut details);
        }
    }
    for a in 0..n {
        for b in (a + 2..n).step_by(2) {
            let mid = (a + b) / 2;
            let deficit = (0.5 * (rs[a] + rs[b]) - rs[mid]).max(0.0);
            note(
                deficit,
                format!("midpoint concavity at ({}, {})", ts[a], ts[b]),
                &mut details,
            );
        }
    }
    details.truncate(32);
    PropertyReport::from_residual(
        &format!("profile {}", profile.kind_tag()),
        worst,
        verify_tol,
        witness,
        details,
    )
}

/// A body with the intersection property along the canonical chain: the
/// segment `[-e_1, e_1]` followed by one profile per added axis.
#[derive(Debug, Clone)]
pub struct LayeredBody {
    profiles: Vec<Profile>,
}

impl LayeredBody {
    /// The segment `[-e_1, e_1]` in dimension 1.
    pub fn base() -> Self {
        Self {
            profiles: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.profiles.len() + 1
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    /// The profile of the top layer, `None` for the base segment.
    pub fn top_profile(&self) -> Option<&Profile> {
        self.profiles.last()
    }

    /// The body `B ∩ H_{n-1}` one dimension down.
    pub fn inner(&self) -> Option<LayeredBody> {
        if self.profiles.is_empty() {
            return None;
        }
        Some(self.truncated(self.dim() - 1))
    }

    /// `B ∩ H_k` for `1 ≤ k ≤ dim`.
    pub fn truncated(&self, k: usize) -> LayeredBody {
        assert!(k >= 1 && k <= self.dim());
        Self {
            profiles: self.profiles[..k - 1].to_vec(),
        }
    }

    /// Short spec-like tag, e.g. `lp:2:3` or `cone:lp:2:2`.
    pub fn spec_string(&self) -> String {
        fn tower_p(profiles: &[Profile]) -> Option<f64> {
            let first = match profiles.first()? {
                Profile::Lp(p) => *p,
                _ => return None,
            };
            profiles
                .iter()
                .all(|q| matches!(q, Profile::Lp(p) if p == &first || (p.is_infinite() && first.is_infinite())))
                .then_some(first)
        }
        let fmt_p = |p: f64| if p.is_infinite() { "inf".to_string() } else { p.to_string() };
        let mut k = self.profiles.len();
        while k > 0 && tower_p(&self.profiles[..k]).is_none() {
            k -= 1;
        }
        let mut out = if k == 0 {
            "seg".to_string()
        } else {
            format!("lp:{}:{}", fmt_p(tower_p(&self.profiles[..k]).unwrap()), k + 1)
        };
        for prof in &self.profiles[k..] {
            out = match prof {
                Profile::Cone => format!("cone:{out}"),
                Profile::Prism => format!("prism:{out}"),
                other => format!("{}:{out}", other.kind_tag()),
            };
        }
        out
    }

    fn gauge_raw(&self, x: &[f64]) -> f64 {
        let mut g = x[0].abs();
        for (profile, z) in self.profiles.iter().zip(&x[1..]) {
            g = profile.combine(g, z.abs());
        }
        g
    }
}

impl GaugeBody for LayeredBody {
    fn dim(&self) -> usize {
        LayeredBody::dim(self)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.gauge_raw(x)
    }

    fn rounding_radii(&self) -> RoundingRadii {
        // B ⊆ inner × [-t_max, t_max] and B ⊇ conv(inner ∪ {±t_max e_n})
        let mut r = RoundingRadii {
            inner: 1.0,
            outer: 1.0,
        };
        for p in &self.profiles {
            let h = p.t_max();
            r = RoundingRadii {
                inner: r.inner * h / (r.inner * r.inner + h * h).sqrt(),
                outer: (r.outer * r.outer + h * h).sqrt(),
            };
        }
        r
    }

    fn descriptor(&self) -> String {
        self.spec_string()
    }

    fn as_layered(&self) -> Option<&LayeredBody> {
        Some(self)
    }
}

/// The `ℓp` ball of dimension `n` as a tower of identical `ℓp` layers.
pub fn make_lp_ball(p: f64, n: usize) -> Result<LayeredBody> {
    let profile = Profile::lp(p)?;
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    Ok(LayeredBody {
        profiles: vec![profile; n - 1],
    })
}

/// Adds one axis on top of `inner` with the given section profile.
pub fn extend_layer(inner: LayeredBody, profile: Profile) -> Result<LayeredBody> {
    let report = validate_profile(&profile, PROFILE_GRID, PROFILE_VALIDATION_TOL);
    if report.verdict != Verdict::Pass {
        return Err(Error::InvalidProfile(format!(
            "{} failed validation: {} ({:e})",
            profile.kind_tag(),
            report.witness,
            report.worst_residual
        )));
    }
    let mut profiles = inner.profiles;
    profiles.push(profile);
    Ok(LayeredBody { profiles })
}

/// `r(|t|)` of the top layer.
pub fn section_ratio(body: &LayeredBody, t: f64) -> Result<f64> {
    let profile = body.top_profile().ok_or(Error::NotALayer {
        required: 2,
        found: body.dim(),
    })?;
    let t_max = profile.t_max();
    if !t.is_finite() || t.abs() > t_max {
        return Err(Error::OutOfRange { t, t_max });
    }
    Ok(profile.ratio(t.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::LpBall;
    use approx::assert_abs_diff_eq;

    fn cone_over_disk() -> LayeredBody {
        extend_layer(make_lp_ball(2.0, 2).unwrap(), Profile::cone()).unwrap()
    }

    #[test]
    fn lp_ball_examples() {
        let b = make_lp_ball(2.0, 2).unwrap();
        assert_abs_diff_eq!(b.eval(&[1.0, 1.0]), 2f64.sqrt(), epsilon = 1e-15);
        let b = make_lp_ball(1.0, 2).unwrap();
        assert_eq!(section_ratio(&b, 0.5).unwrap(), 0.5);
        let b = make_lp_ball(f64::INFINITY, 3).unwrap();
        assert_eq!(b.eval(&[0.3, -1.0, 0.7]), 1.0);
        assert_eq!(make_lp_ball(0.9, 3).unwrap_err(), Error::InvalidExponent(0.9));
    }

    #[test]
    fn extend_layer_examples() {
        let cone = cone_over_disk();
        assert_eq!(cone.dim(), 3);
        assert_eq!(cone.spec_string(), "cone:lp:2:2");
        // equator circle and apexes on the boundary
        assert_abs_diff_eq!(cone.eval(&[0.6, 0.8, 0.0]), 1.0, epsilon = 1e-15);
        assert_eq!(cone.eval(&[0.0, 0.0, -1.0]), 1.0);
        // generator midpoint
        assert_abs_diff_eq!(cone.eval(&[0.5, 0.0, 0.5]), 1.0, epsilon = 1e-15);

        let square = extend_layer(LayeredBody::base(), Profile::prism()).unwrap();
        let linf = LpBall::new(f64::INFINITY, 2).unwrap();
        let diamond = extend_layer(LayeredBody::base(), Profile::cone()).unwrap();
        let l1 = LpBall::new(1.0, 2).unwrap();
        for x in [[0.3, -0.9], [1.5, 0.2], [-0.1, -0.1]] {
            assert_eq!(square.eval(&x), linf.eval(&x));
            assert_abs_diff_eq!(diamond.eval(&x), l1.eval(&x), epsilon = 1e-15);
        }

        let bad = Profile::custom("increasing", 1.0, |t| 1.0 + t).unwrap();
        assert!(matches!(
            extend_layer(LayeredBody::base(), bad),
            Err(Error::InvalidProfile(_))
        ));
    }

    #[test]
    fn section_ratio_examples() {
        let disk = make_lp_ball(2.0, 2).unwrap();
        assert_abs_diff_eq!(section_ratio(&disk, 0.5).unwrap(), 0.75f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(section_ratio(&disk, -0.5).unwrap(), 0.75f64.sqrt(), epsilon = 1e-15);
        assert_eq!(section_ratio(&cone_over_disk(), 0.5).unwrap(), 0.5);
        assert_eq!(section_ratio(&cone_over_disk(), 0.0).unwrap(), 1.0);
        assert!(matches!(
            section_ratio(&disk, 1.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            section_ratio(&LayeredBody::base(), 0.1),
            Err(Error::NotALayer { .. })
        ));
    }

    #[test]
    fn layered_gauge_examples() {
        assert_abs_diff_eq!(cone_over_disk().eval(&[0.25, 0.0, 0.5]), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(make_lp_ball(2.0, 3).unwrap().eval(&[1.0, 2.0, 2.0]), 3.0, epsilon = 1e-15);
        let square = extend_layer(LayeredBody::base(), Profile::prism()).unwrap();
        assert_eq!(square.eval(&[0.5, 2.0]), 2.0);
    }

    #[test]
    fn validate_profile_examples() {
        let cone = Profile::custom("1-t", 1.0, |t| 1.0 - t).unwrap();
        assert_eq!(validate_profile(&cone, 65, 1e-7).verdict, Verdict::Pass);
        let inc = Profile::custom("1+t", 1.0, |t| 1.0 + t).unwrap();
        assert_eq!(validate_profile(&inc, 65, 1e-7).verdict, Verdict::Fail);
        let convex = Profile::custom("(1-sqrt t)^2", 1.0, |t| (1.0 - t.sqrt()).powi(2)).unwrap();
        let rep = validate_profile(&convex, 3, 1e-7);
        assert_eq!(rep.verdict, Verdict::Fail);
        // midpoint test at a = 0, b = 1: 0.5 - (1 - 1/sqrt 2)^2
        let expected = 0.5 - (1.0 - 0.5f64.sqrt()).powi(2);
        assert_abs_diff_eq!(rep.worst_residual, expected, epsilon = 1e-12);
    }

    #[test]
    fn shipped_profiles_validate() {
        for p in [
            Profile::lp(1.0).unwrap(),
            Profile::lp(1.5).unwrap(),
            Profile::lp(2.0).unwrap(),
            Profile::lp(3.0).unwrap(),
            Profile::lp(f64::INFINITY).unwrap(),
            Profile::cone(),
            Profile::prism(),
        ] {
            let rep = validate_profile(&p, 257, 1e-9);
            assert!(rep.passed(), "{p:?}: {rep:?}");
        }
    }

    #[test]
    fn sampled_profile_gauge_matches_closed_form() {
        // sampled cone: exact under linear interpolation
        let sampled = Profile::sampled(vec![(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]).unwrap();
        let a = extend_layer(make_lp_ball(2.0, 2).unwrap(), sampled).unwrap();
        let b = cone_over_disk();
        for x in [[0.1, 0.2, 0.3], [-0.7, 0.1, -0.05], [0.0, 0.0, 0.4], [2.0, -1.0, 0.5]] {
            assert_abs_diff_eq!(a.eval(&x), b.eval(&x), epsilon = 1e-13);
        }
    }

    #[test]
    fn profile_json() {
        let p = Profile::from_json(r#"{"t_max": 2.0, "samples": [[0, 1], [1, 0.75], [2, 0.25]]}"#).unwrap();
        assert_eq!(p.t_max(), 2.0);
        assert_abs_diff_eq!(p.ratio(1.5), 0.5, epsilon = 1e-15);
        assert!(Profile::from_json(r#"{"t_max": 3.0, "samples": [[0, 1], [2, 0.5]]}"#).is_err());
        assert!(Profile::from_json(r#"{"t_max": 1.0, "samples": [[0.5, 1], [1, 0.5]]}"#).is_err());
    }

    #[test]
    fn rounding_radii_bracket_the_body() {
        let b = cone_over_disk();
        let r = b.rounding_radii();
        // every boundary point has Euclidean norm in [inner, outer]
        for k in 0..50 {
            let th = k as f64 * 0.37;
            let ph = k as f64 * 0.11 - 2.0;
            let d = [th.cos() * ph.cos(), th.sin() * ph.cos(), ph.sin()];
            let e = 1.0 / b.eval(&d);
            assert!(e >= r.inner - 1e-12 && e <= r.outer + 1e-12);
        }
    }
}
