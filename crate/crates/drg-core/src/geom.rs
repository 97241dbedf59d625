//! Planar geometry: regions, distances, angles, disk-overlap areas, coverage
//! ratios, and the solver mapping a coverage-ratio threshold to the minimum
//! angle two prior senders must subtend before a retransmission is redundant.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Upper bound on the coverage-ratio threshold. Two senders a full range
/// apart on opposite sides already cover ~78% of a node's disk, so a
/// threshold above this is unreachable.
pub const CR_THRESHOLD_MAX: f64 = 0.78;

/// Margin in meters by which the forwarding zone extends past the zone of
/// relevance.
pub const ZOF_MARGIN_M: f64 = 15.0;

/// Error cases for geometry operations with restricted domains.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("degenerate vertex: point coincides with the angle vertex")]
    DegenerateVertex,
    #[error("domain error: {0}")]
    Domain(&'static str),
}

/// A planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Axis-aligned rectangle in meters; bounds are strict on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectRegion {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl RectRegion {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        assert!(
            min_x < max_x && min_y < max_y,
            "rectangle bounds must satisfy min < max on both axes"
        );
        RectRegion { min_x, min_y, max_x, max_y }
    }
}

/// Transmission range paired with the coverage-ratio threshold and the angle
/// threshold derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageParams {
    pub r_tx: f64,
    pub cr_threshold: f64,
    pub theta_min: f64,
}

impl CoverageParams {
    pub fn new(r_tx: f64, cr_threshold: f64) -> Result<Self, GeomError> {
        if r_tx <= 0.0 || r_tx.is_nan() {
            return Err(GeomError::Domain("transmission range must be positive"));
        }
        let theta_min = solve_theta_min(cr_threshold)?;
        Ok(CoverageParams { r_tx, cr_threshold, theta_min })
    }
}

/// Euclidean distance in meters.
pub fn dist(p: Point, q: Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Angle in [0, pi] that `p` and `q` subtend at vertex `o`.
pub fn angle_at(o: Point, p: Point, q: Point) -> Result<f64, GeomError> {
    let (ux, uy) = (p.x - o.x, p.y - o.y);
    let (vx, vy) = (q.x - o.x, q.y - o.y);
    let nu = ux.hypot(uy);
    let nv = vx.hypot(vy);
    if nu == 0.0 || nv == 0.0 {
        return Err(GeomError::DegenerateVertex);
    }
    let c = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(c.acos())
}

/// Intersection area of two disks of radius `r` whose centers are `d` apart.
pub fn lens_area(d: f64, r: f64) -> Result<f64, GeomError> {
    if r <= 0.0 || r.is_nan() {
        return Err(GeomError::Domain("disk radius must be positive"));
    }
    if d < 0.0 || !d.is_finite() {
        return Err(GeomError::Domain("center distance must be nonnegative"));
    }
    if d >= 2.0 * r {
        return Ok(0.0);
    }
    Ok(2.0 * r * r * (d / (2.0 * r)).acos() - (d / 2.0) * (4.0 * r * r - d * d).sqrt())
}

/// Fraction of one disk's area covered by a second disk of the same radius
/// at center distance `d`.
pub fn coverage_ratio_pair(d: f64, r: f64) -> Result<f64, GeomError> {
    Ok(lens_area(d, r)? / (PI * r * r))
}

/// Unit-circle lens area as a function of center distance; strictly
/// decreasing on [0, 2], which makes the root in `solve_theta_min` unique.
fn lens_area_unit(d: f64) -> f64 {
    2.0 * (d / 2.0).acos() - (d / 2.0) * (4.0 - d * d).sqrt()
}

/// Solves for the center distance `d` at which the residual uncovered
/// fraction of a unit disk equals `CR_THRESHOLD_MAX - x`, returning
/// `(d, theta)` where `theta = 2*asin(d/2)` is the angle the two senders
/// subtend. Bisection; the left side is strictly decreasing so the root is
/// unique. Tolerance 1e-9 on `d`.
pub fn solve_theta_min_root(x: f64) -> Result<(f64, f64), GeomError> {
    if !(x > 0.0 && x <= CR_THRESHOLD_MAX) {
        return Err(GeomError::Domain("coverage-ratio threshold must lie in (0, 0.78]"));
    }
    let target = (CR_THRESHOLD_MAX - x) * PI;
    if target <= 0.0 {
        // x at the ceiling: residual area is 0, met exactly at d = 2
        return Ok((2.0, PI));
    }
    let (mut lo, mut hi) = (1e-12_f64, 2.0_f64);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if lens_area_unit(mid) - target > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = 0.5 * (lo + hi);
    Ok((d, 2.0 * (d / 2.0).asin()))
}

/// Minimum angle in (0, pi] two prior senders must subtend at a node for the
/// node's own retransmission to be considered redundant, given the
/// coverage-ratio threshold `x`.
pub fn solve_theta_min(x: f64) -> Result<f64, GeomError> {
    solve_theta_min_root(x).map(|(_, theta)| theta)
}

/// Boundary-inclusive rectangle membership.
pub fn in_region(p: Point, r: &RectRegion) -> bool {
    p.x >= r.min_x && p.x <= r.max_x && p.y >= r.min_y && p.y <= r.max_y
}

/// Moves every bound of `r` outward by `margin` meters.
pub fn expand_region(r: &RectRegion, margin: f64) -> RectRegion {
    assert!(margin >= 0.0, "region margin must be nonnegative");
    RectRegion {
        min_x: r.min_x - margin,
        min_y: r.min_y - margin,
        max_x: r.max_x + margin,
        max_y: r.max_y + margin,
    }
}

/// Monte Carlo estimate of the fraction of the disk of radius `r` around `o`
/// covered by the union of same-radius disks at `senders`. Test oracle only;
/// never called from protocol code.
pub fn union_coverage_fraction(
    o: Point,
    senders: &[Point],
    r: f64,
    samples: u32,
    rng: &mut impl Rng,
) -> f64 {
    assert!(r > 0.0, "disk radius must be positive");
    assert!(samples > 0, "sample count must be positive");
    let mut covered = 0u32;
    for _ in 0..samples {
        // rejection-sample a point uniform in the disk around o
        let (px, py) = loop {
            let x: f64 = rng.random_range(-1.0..1.0);
            let y: f64 = rng.random_range(-1.0..1.0);
            if x * x + y * y <= 1.0 {
                break (o.x + r * x, o.y + r * y);
            }
        };
        let p = Point::new(px, py);
        if senders.iter().any(|s| dist(*s, p) <= r) {
            covered += 1;
        }
    }
    covered as f64 / samples as f64
}
