use rayon::prelude::*;

use super::{eri_pixel_direction, sample_eri, Interpolation, Pixel, Raster, RasterError};
use crate::projections::SpherePoint;

/// The six faces of a cube map, each covering 90 x 90 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeFace {
    Front,
    Back,
    Left,
    Right,
    Top,
    Bottom,
}

impl CubeFace {
    pub const ALL: [CubeFace; 6] = [
        CubeFace::Front,
        CubeFace::Back,
        CubeFace::Left,
        CubeFace::Right,
        CubeFace::Top,
        CubeFace::Bottom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CubeFace::Front => "front",
            CubeFace::Back => "back",
            CubeFace::Left => "left",
            CubeFace::Right => "right",
            CubeFace::Top => "top",
            CubeFace::Bottom => "bottom",
        }
    }

    /// (forward, right, up) unit axes of the face camera.
    fn basis(self) -> [[f64; 3]; 3] {
        match self {
            CubeFace::Front => [[0., 0., 1.], [1., 0., 0.], [0., 1., 0.]],
            CubeFace::Back => [[0., 0., -1.], [-1., 0., 0.], [0., 1., 0.]],
            CubeFace::Right => [[1., 0., 0.], [0., 0., -1.], [0., 1., 0.]],
            CubeFace::Left => [[-1., 0., 0.], [0., 0., 1.], [0., 1., 0.]],
            CubeFace::Top => [[0., 1., 0.], [1., 0., 0.], [0., 0., -1.]],
            CubeFace::Bottom => [[0., -1., 0.], [1., 0., 0.], [0., 0., 1.]],
        }
    }

    /// Face hit by direction `v`. Ties go to the x axis, then y, then z.
    fn select(v: [f64; 3]) -> CubeFace {
        let [ax, ay, az] = v.map(f64::abs);
        if ax >= ay && ax >= az {
            if v[0] >= 0.0 {
                CubeFace::Right
            } else {
                CubeFace::Left
            }
        } else if ay >= az {
            if v[1] >= 0.0 {
                CubeFace::Top
            } else {
                CubeFace::Bottom
            }
        } else if v[2] >= 0.0 {
            CubeFace::Front
        } else {
            CubeFace::Back
        }
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeFaces<P> {
    faces: [Raster<P>; 6],
}

impl<P: Pixel> CubeFaces<P> {
    /// Faces in [`CubeFace::ALL`] order.
    pub fn new(faces: [Raster<P>; 6]) -> Result<Self, RasterError> {
        let n = faces[0].width();
        if faces.iter().any(|f| f.width() != n || f.height() != n) {
            return Err(RasterError::FaceSize);
        }
        Ok(Self { faces })
    }

    pub fn face(&self, face: CubeFace) -> &Raster<P> {
        &self.faces[face as usize]
    }

    pub fn edge(&self) -> usize {
        self.faces[0].width()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CubeFace, &Raster<P>)> {
        CubeFace::ALL.into_iter().zip(self.faces.iter())
    }
}

/// Renders the six rectilinear 90 degree faces of an ERI.
pub fn eri_to_cube<P: Pixel>(
    eri: &Raster<P>,
    face_px: usize,
    interp: Interpolation,
) -> Result<CubeFaces<P>, RasterError> {
    let n = face_px.max(2);
    let faces: Vec<Raster<P>> = CubeFace::ALL
        .par_iter()
        .map(|&face| {
            let [fwd, right, up] = face.basis();
            let mut data = Vec::with_capacity(n * n);
            for j in 0..n {
                let b = 1.0 - 2.0 * (j as f64 + 0.5) / n as f64;
                for i in 0..n {
                    let a = 2.0 * (i as f64 + 0.5) / n as f64 - 1.0;
                    let v = [0, 1, 2].map(|k| fwd[k] + a * right[k] + b * up[k]);
                    data.push(sample_eri(eri, SpherePoint::from_vector(v), interp)?);
                }
            }
            Raster::new(n, n, data)
        })
        .collect::<Result<_, _>>()?;
    let faces: [Raster<P>; 6] = faces.try_into().expect("six faces");
    CubeFaces::new(faces)
}

/// Reassembles an ERI from cube faces; each ERI direction reads from the face
/// of its dominant axis.
pub fn cube_to_eri<P: Pixel>(
    faces: &CubeFaces<P>,
    out_w: usize,
    out_h: usize,
    interp: Interpolation,
) -> Result<Raster<P>, RasterError> {
    let n = faces.edge() as f64;
    let mut data = vec![P::default(); out_w * out_h];
    data.par_chunks_mut(out_w).enumerate().try_for_each(|(y, row)| {
        for (x, px) in row.iter_mut().enumerate() {
            let v = eri_pixel_direction(out_w, out_h, x, y).to_vector();
            let face = CubeFace::select(v);
            let [fwd, right, up] = face.basis();
            let depth = dot(v, fwd);
            let a = dot(v, right) / depth;
            let b = dot(v, up) / depth;
            let u = (a + 1.0) * n / 2.0 - 0.5;
            let w = (1.0 - b) * n / 2.0 - 0.5;
            *px = faces.face(face).sample(u, w, interp, false)?;
        }
        Ok::<_, RasterError>(())
    })?;
    Raster::new(out_w, out_h, data)
}
