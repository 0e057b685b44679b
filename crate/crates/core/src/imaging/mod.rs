//! Rasters, equirectangular sampling and viewport rendering.

mod cubemap;
pub mod io;

pub use cubemap::{cube_to_eri, eri_to_cube, CubeFace, CubeFaces};

use rayon::prelude::*;
use thiserror::Error;

use crate::projections::{rotate_to_vd, DomainError, PlaneExtent, PlanePoint, Projection, SpherePoint, ViewportSpec};

use std::f64::consts::PI;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterKind {
    Color,
    Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Bilinear,
    Nearest,
}

/// Pixel types a [`Raster`] can hold.
pub trait Pixel: Copy + PartialEq + Default + std::fmt::Debug + Send + Sync + 'static {
    const KIND: RasterKind;
    const CHANNELS: usize;

    /// Bilinear blend of four neighbours; `None` when the pixel type has no
    /// meaningful convex combination (labels).
    fn blend(p00: Self, p10: Self, p01: Self, p11: Self, fx: f64, fy: f64) -> Option<Self>;
}

impl Pixel for Rgb {
    const KIND: RasterKind = RasterKind::Color;
    const CHANNELS: usize = 3;

    fn blend(p00: Self, p10: Self, p01: Self, p11: Self, fx: f64, fy: f64) -> Option<Self> {
        let mut out = [0u8; 3];
        for c in 0..3 {
            let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
            let bot = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
            let v = top * (1.0 - fy) + bot * fy;
            out[c] = v.round().clamp(0.0, 255.0) as u8;
        }
        Some(out)
    }
}

impl Pixel for u32 {
    const KIND: RasterKind = RasterKind::Label;
    const CHANNELS: usize = 1;

    fn blend(_: Self, _: Self, _: Self, _: Self, _: f64, _: f64) -> Option<Self> {
        None
    }
}

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("pixel buffer holds {got} pixels, expected {expected}")]
    Size { expected: usize, got: usize },
    #[error("bilinear interpolation is not defined for label rasters")]
    BilinearOnLabels,
    #[error("cube faces must share one edge length")]
    FaceSize,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("pixel (row {row}, col {col}): {source}")]
    Domain {
        row: usize,
        col: usize,
        #[source]
        source: DomainError,
    },
    #[error(transparent)]
    Extent(#[from] DomainError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Row-major image.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

pub type ColorImage = Raster<Rgb>;
pub type LabelMap = Raster<u32>;

impl<P: Pixel> Raster<P> {
    pub fn new(width: usize, height: usize, data: Vec<P>) -> Result<Self, RasterError> {
        if data.len() != width * height {
            return Err(RasterError::Size {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: P) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> P) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn kind(&self) -> RasterKind {
        P::KIND
    }

    pub fn channels(&self) -> usize {
        P::CHANNELS
    }

    pub fn pixels(&self) -> &[P] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn into_pixels(self) -> Vec<P> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        self.data[y * self.width + x] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[P]> {
        self.data.chunks(self.width)
    }

    /// Samples at continuous pixel coordinates where integer values are pixel
    /// centers. Columns wrap when `wrap_x` is set, otherwise clamp; rows
    /// always clamp.
    pub fn sample(&self, u: f64, v: f64, interp: Interpolation, wrap_x: bool) -> Result<P, RasterError> {
        let col = |i: i64| -> usize {
            if wrap_x {
                i.rem_euclid(self.width as i64) as usize
            } else {
                i.clamp(0, self.width as i64 - 1) as usize
            }
        };
        let row = |j: i64| -> usize { j.clamp(0, self.height as i64 - 1) as usize };
        match interp {
            Interpolation::Nearest => Ok(self.get(col((u + 0.5).floor() as i64), row((v + 0.5).floor() as i64))),
            Interpolation::Bilinear => {
                let x0 = u.floor();
                let y0 = v.floor();
                let (fx, fy) = (u - x0, v - y0);
                let (x0, y0) = (x0 as i64, y0 as i64);
                let (c0, c1) = (col(x0), col(x0 + 1));
                let (r0, r1) = (row(y0), row(y0 + 1));
                P::blend(self.get(c0, r0), self.get(c1, r0), self.get(c0, r1), self.get(c1, r1), fx, fy)
                    .ok_or(RasterError::BilinearOnLabels)
            }
        }
    }

    pub fn map<Q: Pixel>(&self, f: impl Fn(P) -> Q) -> Raster<Q> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Samples an equirectangular image in direction `p`.
///
/// Longitude maps to `u = (phi / 2pi + 1/2) W - 1/2` with horizontal
/// wrap-around; latitude maps to `v = (1/2 - theta / pi) H - 1/2` with
/// vertical clamping.
pub fn sample_eri<P: Pixel>(eri: &Raster<P>, p: SpherePoint, interp: Interpolation) -> Result<P, RasterError> {
    let (u, v) = eri_coords(eri.width(), eri.height(), p);
    eri.sample(u, v, interp, true)
}

pub fn eri_coords(width: usize, height: usize, p: SpherePoint) -> (f64, f64) {
    let u = (p.phi / (2.0 * PI) + 0.5) * width as f64 - 0.5;
    let v = (0.5 - p.theta / PI) * height as f64 - 0.5;
    (u, v)
}

/// Direction at the center of ERI pixel `(x, y)`.
pub fn eri_pixel_direction(width: usize, height: usize, x: usize, y: usize) -> SpherePoint {
    let phi = ((x as f64 + 0.5) / width as f64 - 0.5) * 2.0 * PI;
    let theta = (0.5 - (y as f64 + 0.5) / height as f64) * PI;
    SpherePoint::new(phi, theta)
}

/// Mapping between viewport (or mesh) grid positions and plane coordinates.
/// Sample `m` sits at `m + 0.5`, so `x = 2 hw ((m + 0.5) / W - 1/2)` and
/// `y = 2 hh (1/2 - (n + 0.5) / H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneGrid {
    pub extent: PlaneExtent,
    pub width: usize,
    pub height: usize,
}

impl PlaneGrid {
    pub fn new(extent: PlaneExtent, width: usize, height: usize) -> Self {
        Self { extent, width, height }
    }

    /// Plane point at continuous grid position `(gx, gy)`, where the sample of
    /// index `m` lies at `gx = m + 0.5`.
    pub fn to_plane(&self, gx: f64, gy: f64) -> PlanePoint {
        PlanePoint {
            x: 2.0 * self.extent.half_width * (gx / self.width as f64 - 0.5),
            y: 2.0 * self.extent.half_height * (0.5 - gy / self.height as f64),
        }
    }

    /// Inverse of [`PlaneGrid::to_plane`].
    pub fn to_grid(&self, q: PlanePoint) -> (f64, f64) {
        let gx = (q.x / (2.0 * self.extent.half_width) + 0.5) * self.width as f64;
        let gy = (0.5 - q.y / (2.0 * self.extent.half_height)) * self.height as f64;
        (gx, gy)
    }

    pub fn index_to_plane(&self, m: usize, n: usize) -> PlanePoint {
        self.to_plane(m as f64 + 0.5, n as f64 + 0.5)
    }
}

/// Pixel grid of a viewport for one projection.
pub fn viewport_grid(spec: &ViewportSpec, projection: &Projection) -> Result<PlaneGrid, DomainError> {
    let extent = projection.plane_extent(spec.f_h, spec.aspect_ratio())?;
    Ok(PlaneGrid::new(extent, spec.width_px, spec.height_px))
}

/// Renders a viewport from an equirectangular raster.
///
/// Each output pixel center is mapped to the plane, projected back to the
/// sphere, rotated to the viewing direction and sampled from the ERI. Rows are
/// rendered in parallel; output is deterministic.
pub fn render_viewport<P: Pixel>(
    eri: &Raster<P>,
    spec: &ViewportSpec,
    projection: &Projection,
    interp: Interpolation,
) -> Result<Raster<P>, RenderError> {
    if P::KIND == RasterKind::Label && interp == Interpolation::Bilinear {
        return Err(RasterError::BilinearOnLabels.into());
    }
    let grid = viewport_grid(spec, projection)?;
    let (w, h) = (spec.width_px, spec.height_px);
    let mut data = vec![P::default(); w * h];
    data.par_chunks_mut(w).enumerate().try_for_each(|(row, out)| {
        for (col, px) in out.iter_mut().enumerate() {
            let q = grid.index_to_plane(col, row);
            let local = projection
                .backward(q)
                .map_err(|source| RenderError::Domain { row, col, source })?;
            *px = sample_eri(eri, rotate_to_vd(local, spec.vd), interp)?;
        }
        Ok::<_, RenderError>(())
    })?;
    Ok(Raster { width: w, height: h, data })
}

/// Color rendering with bilinear interpolation.
pub fn render_color(eri: &ColorImage, spec: &ViewportSpec, projection: &Projection) -> Result<ColorImage, RenderError> {
    render_viewport(eri, spec, projection, Interpolation::Bilinear)
}

/// Label rendering with nearest sampling.
pub fn render_labels(eri: &LabelMap, spec: &ViewportSpec, projection: &Projection) -> Result<LabelMap, RenderError> {
    render_viewport(eri, spec, projection, Interpolation::Nearest)
}
