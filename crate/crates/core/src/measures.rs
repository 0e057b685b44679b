//! Viewport stretching and bending scores used by the global search.
//!
//! Both scores live in `[0, 1]`. Stretching is a Tissot-style area distortion
//! of object pixels; bending is the deviation from straightness of a fixed
//! battery of great-circle arcs. Only their ordering over the parameter grid
//! matters to the search, and other measures can be plugged in through
//! [`DistortionMeasures`].

use rayon::prelude::*;

use crate::imaging::{viewport_grid, LabelMap, PlaneGrid};
use crate::projections::{DomainError, PlaneExtent, PlanePoint, Projection, SpherePoint, ViewportSpec};

use std::f64::consts::FRAC_PI_2;

/// Pair of normalized distortion scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionScore {
    pub stretching: f64,
    pub bending: f64,
}

pub trait DistortionMeasures: Sync {
    /// Object stretching of a rendered object-id viewport.
    fn stretching(&self, seg_vp: &LabelMap, spec: &ViewportSpec, projection: &Projection) -> Result<f64, DomainError>;

    /// Bending of straight scene lines; independent of content.
    fn bending(&self, spec: &ViewportSpec, projection: &Projection) -> Result<f64, DomainError>;

    fn score(&self, seg_vp: &LabelMap, spec: &ViewportSpec, projection: &Projection) -> Result<DistortionScore, DomainError> {
        Ok(DistortionScore {
            stretching: self.stretching(seg_vp, spec, projection)?,
            bending: self.bending(spec, projection)?,
        })
    }
}

/// Default measures: log area-scale deviation for stretching and the
/// chord-deviation ratio of great-circle arcs for bending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyMeasures {
    /// Samples per arc (before endpoint refinement).
    pub arc_samples: usize,
}

impl Default for ProxyMeasures {
    fn default() -> Self {
        Self { arc_samples: 2001 }
    }
}

impl DistortionMeasures for ProxyMeasures {
    fn stretching(&self, seg_vp: &LabelMap, spec: &ViewportSpec, projection: &Projection) -> Result<f64, DomainError> {
        stretching_score(seg_vp, spec, projection)
    }

    fn bending(&self, spec: &ViewportSpec, projection: &Projection) -> Result<f64, DomainError> {
        bending_score_with(spec, projection, self.arc_samples)
    }
}

const JACOBIAN_STEP: f64 = 1e-5;

/// Local area scale of a projection at `p`: plane area per unit sphere area,
/// `|det J| / cos(theta)` with `J = d(x, y) / d(phi, theta)` taken by central
/// differences.
pub fn area_scale(projection: &Projection, p: SpherePoint) -> Result<f64, DomainError> {
    let h = JACOBIAN_STEP;
    let f = |dphi: f64, dtheta: f64| projection.forward(SpherePoint::new(p.phi + dphi, p.theta + dtheta));
    let (xp, xm) = (f(h, 0.0)?, f(-h, 0.0)?);
    let (yp, ym) = (f(0.0, h)?, f(0.0, -h)?);
    let dx_dphi = (xp.x - xm.x) / (2.0 * h);
    let dy_dphi = (xp.y - xm.y) / (2.0 * h);
    let dx_dtheta = (yp.x - ym.x) / (2.0 * h);
    let dy_dtheta = (yp.y - ym.y) / (2.0 * h);
    let det = dx_dphi * dy_dtheta - dx_dtheta * dy_dphi;
    Ok(det.abs() / p.theta.cos())
}

/// Sum of `|log a - log a_center|` and pixel count per object id.
pub(crate) fn log_area_deviation_sums(
    seg_vp: &LabelMap,
    grid: &PlaneGrid,
    projection: &Projection,
) -> Result<Vec<(f64, usize)>, DomainError> {
    let n_ids = seg_vp.pixels().iter().copied().max().unwrap_or(0) as usize + 1;
    let log_center = area_scale(projection, SpherePoint::new(0.0, 0.0))?.ln();
    let w = seg_vp.width();
    let rows: Vec<Vec<(f64, usize)>> = seg_vp
        .pixels()
        .par_chunks(w)
        .enumerate()
        .map(|(row, labels)| {
            let mut acc = vec![(0.0, 0usize); n_ids];
            for (col, &id) in labels.iter().enumerate() {
                if id == 0 {
                    continue;
                }
                let p = projection.backward(grid.index_to_plane(col, row))?;
                let dev = (area_scale(projection, p)?.ln() - log_center).abs();
                acc[id as usize].0 += dev;
                acc[id as usize].1 += 1;
            }
            Ok(acc)
        })
        .collect::<Result<_, DomainError>>()?;
    let mut total = vec![(0.0, 0usize); n_ids];
    for acc in rows {
        for (t, a) in total.iter_mut().zip(acc) {
            t.0 += a.0;
            t.1 += a.1;
        }
    }
    Ok(total)
}

/// Mean `|log a - log a_center|` per object id (index 0 unused).
pub fn object_area_deviation(
    seg_vp: &LabelMap,
    spec: &ViewportSpec,
    projection: &Projection,
) -> Result<Vec<Option<f64>>, DomainError> {
    let grid = viewport_grid(&spec.with_size(seg_vp.width(), seg_vp.height()), projection)?;
    Ok(log_area_deviation_sums(seg_vp, &grid, projection)?
        .into_iter()
        .map(|(sum, n)| (n > 0).then(|| sum / n as f64))
        .collect())
}

/// Stretching: pixel-weighted mean over objects of the per-object mean log
/// area-scale deviation from the viewport center, squashed by `s / (1 + s)`.
/// A viewport without objects scores 0.
pub fn stretching_score(seg_vp: &LabelMap, spec: &ViewportSpec, projection: &Projection) -> Result<f64, DomainError> {
    let grid = viewport_grid(&spec.with_size(seg_vp.width(), seg_vp.height()), projection)?;
    let sums = log_area_deviation_sums(seg_vp, &grid, projection)?;
    let (sum, count) = sums
        .iter()
        .skip(1)
        .fold((0.0, 0usize), |(s, c), &(ds, dc)| (s + ds, c + dc));
    if count == 0 {
        return Ok(0.0);
    }
    let s = sum / count as f64;
    Ok(s / (1.0 + s))
}

/// A great circle through the front hemisphere, parameterized by the angle
/// `t` from its point closest to the view axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arc {
    /// Horizontal scene line seen at elevation `theta` straight ahead.
    Horizontal { theta: f64 },
    /// Line through the view center tilted by `tilt` from the horizon.
    Oblique { tilt: f64 },
}

impl Arc {
    pub fn point(&self, t: f64) -> SpherePoint {
        let (st, ct) = t.sin_cos();
        let v = match *self {
            Arc::Horizontal { theta } => [st, ct * theta.sin(), ct * theta.cos()],
            Arc::Oblique { tilt } => [tilt.cos() * st, tilt.sin() * st, ct],
        };
        SpherePoint::from_vector(v)
    }

    /// The fixed battery: horizontal lines at +-15, +-30, +-45 degrees and
    /// oblique lines through the center at +-30 degrees.
    pub fn battery() -> Vec<Arc> {
        let mut arcs: Vec<Arc> = [15.0f64, 30.0, 45.0]
            .iter()
            .flat_map(|&a| [a, -a])
            .map(|a| Arc::Horizontal { theta: a.to_radians() })
            .collect();
        arcs.push(Arc::Oblique { tilt: 30f64.to_radians() });
        arcs.push(Arc::Oblique { tilt: (-30f64).to_radians() });
        arcs
    }
}

fn project_inside(projection: &Projection, extent: &PlaneExtent, p: SpherePoint) -> Option<PlanePoint> {
    let q = projection.forward(p).ok()?;
    (q.x.abs() <= extent.half_width && q.y.abs() <= extent.half_height).then_some(q)
}

/// Straightness defect of one arc: max distance of its projected points to
/// the chord, over the chord length. `None` if the visible part is shorter
/// than 10% of the viewport width.
pub fn arc_bending(
    arc: &Arc,
    projection: &Projection,
    extent: &PlaneExtent,
    samples: usize,
) -> Option<f64> {
    let samples = samples.max(3);
    let lo = -FRAC_PI_2 + 1e-6;
    let hi = FRAC_PI_2 - 1e-6;
    let t_at = |i: usize| lo + (hi - lo) * i as f64 / (samples - 1) as f64;
    let inside = |t: f64| project_inside(projection, extent, arc.point(t)).is_some();

    // longest run of visible samples
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for i in 0..=samples {
        let ok = i < samples && inside(t_at(i));
        match (ok, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| i - 1 - s > b - a) {
                    best = Some((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    let (a, b) = best?;

    // refine both ends to the visibility boundary
    let refine = |mut good: f64, mut bad: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if inside(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let t0 = if a > 0 { refine(t_at(a), t_at(a - 1)) } else { t_at(a) };
    let t1 = if b + 1 < samples { refine(t_at(b), t_at(b + 1)) } else { t_at(b) };

    let pts: Vec<PlanePoint> = (0..samples)
        .filter_map(|i| {
            let t = t0 + (t1 - t0) * i as f64 / (samples - 1) as f64;
            projection.forward(arc.point(t)).ok()
        })
        .collect();
    let (first, last) = (pts.first()?, pts.last()?);
    let (dx, dy) = (last.x - first.x, last.y - first.y);
    let chord = dx.hypot(dy);
    if chord < 0.1 * 2.0 * extent.half_width {
        return None;
    }
    let max_dev = pts
        .iter()
        .map(|p| ((p.x - first.x) * dy - (p.y - first.y) * dx).abs() / chord)
        .fold(0.0, f64::max);
    Some(max_dev / chord)
}

/// Bending: mean straightness defect over the arc battery, clamped to [0, 1].
pub fn bending_score(spec: &ViewportSpec, projection: &Projection) -> Result<f64, DomainError> {
    bending_score_with(spec, projection, ProxyMeasures::default().arc_samples)
}

pub fn bending_score_with(spec: &ViewportSpec, projection: &Projection, samples: usize) -> Result<f64, DomainError> {
    let extent = projection.plane_extent(spec.f_h, spec.aspect_ratio())?;
    let scores: Vec<f64> = Arc::battery()
        .iter()
        .filter_map(|arc| arc_bending(arc, projection, &extent, samples))
        .collect();
    if scores.is_empty() {
        return Ok(0.0);
    }
    Ok((scores.iter().sum::<f64>() / scores.len() as f64).clamp(0.0, 1.0))
}
