//! Mesh-driven backward warping of the globally optimized viewport.

use rayon::prelude::*;

use crate::imaging::{viewport_grid, Interpolation, LabelMap, Pixel, Raster, RasterError};
use crate::measures::area_scale;
use crate::mesh::VertexMesh;
use crate::projections::{DomainError, Projection, SpherePoint, ViewportSpec};

/// Per-pixel source positions. Position `(sx, sy)` addresses the source image
/// in pixel-center units (pixel `(i, j)` is at `(i, j)`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseField {
    width: usize,
    height: usize,
    src: Vec<[f64; 2]>,
}

impl DenseField {
    pub fn identity(width: usize, height: usize) -> Self {
        Self::from_fn(width, height, |x, y| [x as f64, y as f64])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [f64; 2]) -> Self {
        let src = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { width, height, src }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 2] {
        self.src[y * self.width + x]
    }

    /// Jacobian determinant of the field at a pixel by central differences
    /// (one-sided on the border).
    pub fn jacobian_det(&self, x: usize, y: usize) -> f64 {
        let (x0, x1) = (x.saturating_sub(1), (x + 1).min(self.width - 1));
        let (y0, y1) = (y.saturating_sub(1), (y + 1).min(self.height - 1));
        let (a, b) = (self.get(x1, y), self.get(x0, y));
        let (c, d) = (self.get(x, y1), self.get(x, y0));
        let hx = (x1 - x0) as f64;
        let hy = (y1 - y0) as f64;
        let dx = [(a[0] - b[0]) / hx, (a[1] - b[1]) / hx];
        let dy = [(c[0] - d[0]) / hy, (c[1] - d[1]) / hy];
        dx[0] * dy[1] - dx[1] * dy[0]
    }
}

/// Piecewise-bilinear interpolation of vertex positions, with linear
/// extrapolation past the outermost vertices.
pub fn interpolate_mesh(mesh: &VertexMesh, gx: f64, gy: f64) -> [f64; 2] {
    interpolate_vertices(mesh.width(), mesh.height(), mesh.vertices(), gx, gy)
}

pub(crate) fn interpolate_vertices<const N: usize>(
    w_m: usize,
    h_m: usize,
    values: &[[f64; N]],
    gx: f64,
    gy: f64,
) -> [f64; N] {
    let tx = gx - 0.5;
    let ty = gy - 0.5;
    let i0 = (tx.floor() as i64).clamp(0, w_m as i64 - 2) as usize;
    let j0 = (ty.floor() as i64).clamp(0, h_m as i64 - 2) as usize;
    let fx = tx - i0 as f64;
    let fy = ty - j0 as f64;
    let at = |i: usize, j: usize| values[j * w_m + i];
    let (p00, p10, p01, p11) = (at(i0, j0), at(i0 + 1, j0), at(i0, j0 + 1), at(i0 + 1, j0 + 1));
    std::array::from_fn(|c| {
        let top = p00[c] * (1.0 - fx) + p10[c] * fx;
        let bot = p01[c] * (1.0 - fx) + p11[c] * fx;
        top * (1.0 - fy) + bot * fy
    })
}

/// Resizes a mesh to a per-pixel source map of an `out_w x out_h` image.
///
/// Pixel centers are placed in grid-index space, the mesh is interpolated
/// there, and the result is scaled back to source pixels.
pub fn upsample_mesh(mesh: &VertexMesh, out_w: usize, out_h: usize) -> DenseField {
    let sx = out_w as f64 / mesh.width() as f64;
    let sy = out_h as f64 / mesh.height() as f64;
    let mut src = vec![[0.0; 2]; out_w * out_h];
    src.par_chunks_mut(out_w).enumerate().for_each(|(y, row)| {
        let gy = (y as f64 + 0.5) / sy;
        for (x, s) in row.iter_mut().enumerate() {
            let gx = (x as f64 + 0.5) / sx;
            let v = interpolate_mesh(mesh, gx, gy);
            *s = [v[0] * sx - 0.5, v[1] * sy - 0.5];
        }
    });
    DenseField {
        width: out_w,
        height: out_h,
        src,
    }
}

/// Backward warp: each output pixel samples `image` at its field position,
/// clamping to the border. Color uses bilinear interpolation, labels use
/// nearest.
pub fn warp_image<P: Pixel>(image: &Raster<P>, field: &DenseField, interp: Interpolation) -> Result<Raster<P>, RasterError> {
    let w = field.width;
    let mut data = vec![P::default(); w * field.height];
    data.par_chunks_mut(w).enumerate().try_for_each(|(y, row)| {
        for (x, px) in row.iter_mut().enumerate() {
            let [sx, sy] = field.get(x, y);
            *px = image.sample(sx, sy, interp, false)?;
        }
        Ok::<_, RasterError>(())
    })?;
    Raster::new(w, field.height, data)
}

pub fn warp_labels(labels: &LabelMap, field: &DenseField) -> Result<LabelMap, RasterError> {
    warp_image(labels, field, Interpolation::Nearest)
}

/// Mean `|log a - log a_center|` over output pixels whose source lies on an
/// object of `seg_src`, where `a` is the area scale of the warped viewport:
/// the source projection's area scale at the sampled point divided by the
/// field's Jacobian determinant. `a_center` is the projection's area scale at
/// the view axis. `None` when no output pixel lands on an object.
pub fn warped_area_deviation(
    field: &DenseField,
    seg_src: &LabelMap,
    spec: &ViewportSpec,
    projection: &Projection,
) -> Result<Option<f64>, DomainError> {
    let grid = viewport_grid(&spec.with_size(seg_src.width(), seg_src.height()), projection)?;
    let log_center = area_scale(projection, SpherePoint::new(0.0, 0.0))?.ln();
    let rows: Vec<(f64, usize)> = (0..field.height)
        .into_par_iter()
        .map(|y| {
            let mut acc = (0.0, 0usize);
            for x in 0..field.width {
                let [sx, sy] = field.get(x, y);
                let id = seg_src.sample(sx, sy, Interpolation::Nearest, false).expect("nearest sampling");
                if id == 0 {
                    continue;
                }
                let p = projection.backward(grid.to_plane(sx + 0.5, sy + 0.5))?;
                let a = area_scale(projection, p)? / field.jacobian_det(x, y).abs();
                acc.0 += (a.ln() - log_center).abs();
                acc.1 += 1;
            }
            Ok(acc)
        })
        .collect::<Result<_, DomainError>>()?;
    let (sum, count) = rows.iter().fold((0.0, 0), |(s, c), r| (s + r.0, c + r.1));
    Ok((count > 0).then(|| sum / count as f64))
}
