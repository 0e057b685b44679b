//! Global Pannini parameter search.
//!
//! Every `(d, vc)` on the 10 x 11 grid `d = 0.1..=1.0`, `vc = 0.0..=1.0`
//! (steps of 0.1) is scored by `beta * S + B` and the minimum is kept.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::RenderError;
use crate::measures::{DistortionMeasures, ProxyMeasures};
use crate::projections::{DomainError, PanniniParams, Projection, ViewportSpec};
use crate::segmentation::{render_seg_viewport, SegmentationMap};

/// Default stretching-to-bending weight.
pub const DEFAULT_BETA: f64 = 0.17;

#[derive(Debug, Error)]
pub enum GlobalSearchError {
    #[error("beta must be positive and finite, got {0}")]
    Beta(f64),
    #[error("rendering segmentation for {params}: {source}")]
    Render {
        params: PanniniParams,
        #[source]
        source: RenderError,
    },
    #[error("measuring {params}: {source}")]
    Measure {
        params: PanniniParams,
        #[source]
        source: DomainError,
    },
}

/// How raw scores are brought to a common scale before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Scores are used as returned by the measures (already in [0, 1]).
    #[default]
    Absolute,
    /// Scores are min-max rescaled over the grid.
    GridMinMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalSearchConfig {
    pub beta: f64,
    /// Measures run on the viewport downscaled by this factor (1 = full size).
    pub measure_downscale: usize,
    pub normalization: Normalization,
}

impl Default for GlobalSearchConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            measure_downscale: 4,
            normalization: Normalization::Absolute,
        }
    }
}

/// One evaluated grid entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub params: PanniniParams,
    pub stretching: f64,
    pub bending: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: PanniniParams,
    /// All 110 entries, `d`-major.
    pub cost_surface: Vec<GridPoint>,
}

impl GridSearchResult {
    pub fn best_point(&self) -> &GridPoint {
        self.cost_surface
            .iter()
            .find(|p| p.params == self.best)
            .expect("best is on the surface")
    }

    /// Cost surface as CSV: `d,vc,S,B,cost`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["d", "vc", "S", "B", "cost"])?;
        for p in &self.cost_surface {
            wtr.write_record([
                format!("{:.1}", p.params.d),
                format!("{:.1}", p.params.vc),
                format!("{:.9}", p.stretching),
                format!("{:.9}", p.bending),
                format!("{:.9}", p.cost),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// The 110 candidate parameter pairs, `d`-major.
pub fn parameter_grid() -> Vec<PanniniParams> {
    (1..=10)
        .flat_map(|i| (0..=10).map(move |j| PanniniParams { d: i as f64 / 10.0, vc: j as f64 / 10.0 }))
        .collect()
}

/// Ordering used for the argmin: cost, then `vc`, then `d`.
fn rank(a: &GridPoint, b: &GridPoint) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then(a.params.vc.total_cmp(&b.params.vc))
        .then(a.params.d.total_cmp(&b.params.d))
}

fn min_max(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Fills in `cost` for raw `(S, B)` scores and returns the index of the best
/// entry.
pub fn select_best(surface: &mut [GridPoint], beta: f64, normalization: Normalization) -> Option<usize> {
    let rescale = |lo: f64, hi: f64, v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let (s_lo, s_hi) = min_max(surface.iter().map(|p| p.stretching));
    let (b_lo, b_hi) = min_max(surface.iter().map(|p| p.bending));
    for p in surface.iter_mut() {
        let (s, b) = match normalization {
            Normalization::Absolute => (p.stretching, p.bending),
            Normalization::GridMinMax => (rescale(s_lo, s_hi, p.stretching), rescale(b_lo, b_hi, p.bending)),
        };
        p.cost = beta * s + b;
    }
    surface
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| rank(a, b))
        .map(|(i, _)| i)
}

/// Grid search with the default measures and configuration.
pub fn optimize_global(seg: &SegmentationMap, spec: &ViewportSpec, beta: f64) -> Result<GridSearchResult, GlobalSearchError> {
    let config = GlobalSearchConfig {
        beta,
        ..Default::default()
    };
    optimize_global_with(seg, spec, &config, &ProxyMeasures::default())
}

pub fn optimize_global_with(
    seg: &SegmentationMap,
    spec: &ViewportSpec,
    config: &GlobalSearchConfig,
    measures: &dyn DistortionMeasures,
) -> Result<GridSearchResult, GlobalSearchError> {
    if !(config.beta > 0.0 && config.beta.is_finite()) {
        return Err(GlobalSearchError::Beta(config.beta));
    }
    let measure_spec = spec.downscaled(config.measure_downscale);
    let mut surface: Vec<GridPoint> = parameter_grid()
        .into_par_iter()
        .map(|params| {
            let projection = Projection::Pannini(params);
            let seg_vp = render_seg_viewport(seg, &measure_spec, &projection)
                .map_err(|source| GlobalSearchError::Render { params, source })?;
            let score = measures
                .score(&seg_vp, &measure_spec, &projection)
                .map_err(|source| GlobalSearchError::Measure { params, source })?;
            Ok(GridPoint {
                params,
                stretching: score.stretching,
                bending: score.bending,
                cost: f64::NAN,
            })
        })
        .collect::<Result<_, GlobalSearchError>>()?;
    let best = select_best(&mut surface, config.beta, config.normalization).expect("grid is not empty");
    Ok(GridSearchResult {
        best: surface[best].params,
        cost_surface: surface,
    })
}
