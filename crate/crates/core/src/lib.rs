//! Inscribed equilateral simplices in unit balls of normed spaces.
//!
//! The crate builds, for bodies with the layered intersection property, an
//! equilateral `n`-simplex inscribed in the unit ball with diameter greater
//! than one, by induction on the dimension. Around that construction it
//! provides the gauge primitives, an independent derivative-free search for
//! equilateral sets, certificate checks, and the doubled-cone counterexample
//! gallery where the induction breaks down.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod construction;
pub mod error;
pub mod gallery;
pub mod gauge;
pub mod homothet;
pub mod layered;
pub mod pattern;
pub mod report;
mod root;
pub mod search;
pub mod simplex;
pub mod smoothed;
pub mod tolerance;
pub mod vector;

pub use checks::{check_2_intersection, check_intersection_property, verify_equilateral, verify_inscribed, SectionGrid};
pub use construction::{construct, Construction, ConstructionFailure, ConstructionTrace};
pub use error::{Error, Result};
pub use gauge::{boundary_scale, diameter_finite, gauge, norm_dist, GaugeBody, LpBall, RoundingRadii};
pub use homothet::{max_inscribed_homothet, remark_cone_step};
pub use layered::{extend_layer, make_lp_ball, section_ratio, LayeredBody, Profile};
pub use report::{PropertyReport, Verdict};
pub use search::{lower_bound_e, search_equilateral, SearchOptions, SearchResult};
pub use simplex::Simplex;
pub use smoothed::SmoothedBody;
pub use tolerance::Tolerance;
pub use vector::Vector;
