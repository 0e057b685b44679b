//! Background/foreground meshes and their energy-based blending.
//!
//! Meshes live in grid-index space: the undeformed vertex `(m, n)` sits at
//! `(m + 0.5, n + 0.5)`, so the lattice spans `[0, w_m] x [0, h_m]` with one
//! unit per cell. A vertex position is the location in `VP_b` (in the same
//! units) that the output sample at that vertex reads from.

mod energy;
mod flow;
mod optimize;

pub use energy::{EnergyProblem, EnergyTerms, EnergyWeights, SmoothnessForm, Term};
pub use flow::{flow_mask, overlay_mask};
pub use optimize::{optimize_mesh, MeshOptimization, MeshOptimizeError, OptimizeOptions, StepUnits, TraceRow};

use std::f64::consts::FRAC_PI_2;

use crate::imaging::PlaneGrid;
use crate::projections::{
    pannini_backward, pannini_forward, viewport_plane_extent, DomainError, PanniniParams, PlanePoint, SpherePoint,
    ViewportSpec,
};

/// Default viewport-to-mesh divisor.
pub const MESH_DIVISOR: usize = 10;

/// Offset added to `d_b` to obtain the foreground projection.
pub const DEFAULT_D_F_OFFSET: f64 = 0.2;

/// Mesh size for a viewport: `(floor(W / c), floor(H / c))`, at least 2 x 2.
pub fn mesh_dims(width_px: usize, height_px: usize, divisor: usize) -> (usize, usize) {
    let c = divisor.max(1);
    ((width_px / c).max(2), (height_px / c).max(2))
}

/// Foreground parameters derived from the background ones.
pub fn foreground_params(params_b: PanniniParams, d_offset: f64, vc_f: f64) -> Result<PanniniParams, DomainError> {
    PanniniParams::new(params_b.d + d_offset, vc_f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexMesh {
    w_m: usize,
    h_m: usize,
    vertices: Vec<[f64; 2]>,
}

impl VertexMesh {
    /// Undeformed lattice.
    pub fn uniform(w_m: usize, h_m: usize) -> Self {
        let vertices = (0..h_m)
            .flat_map(|n| (0..w_m).map(move |m| [m as f64 + 0.5, n as f64 + 0.5]))
            .collect();
        Self { w_m, h_m, vertices }
    }

    pub fn from_vertices(w_m: usize, h_m: usize, vertices: Vec<[f64; 2]>) -> Option<Self> {
        (vertices.len() == w_m * h_m && w_m >= 2 && h_m >= 2 && vertices.iter().flatten().all(|c| c.is_finite()))
            .then_some(Self { w_m, h_m, vertices })
    }

    pub fn width(&self) -> usize {
        self.w_m
    }

    pub fn height(&self) -> usize {
        self.h_m
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn vertices_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.vertices
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        n * self.w_m + m
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> [f64; 2] {
        self.vertices[self.index(m, n)]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| [v[0] + dx, v[1] + dy]).collect(),
            ..*self
        }
    }

    /// Mean Euclidean distance between corresponding vertices.
    pub fn mean_displacement(&self, other: &VertexMesh) -> f64 {
        let sum: f64 = self
            .vertices
            .iter()
            .zip(&other.vertices)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .sum();
        sum / self.vertices.len() as f64
    }

    pub fn max_displacement(&self, other: &VertexMesh) -> f64 {
        self.vertices
            .iter()
            .zip(&other.vertices)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0, f64::max)
    }
}

/// Background (`m_b`) and foreground (`m_f`) meshes of one viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshPair {
    pub m_b: VertexMesh,
    pub m_f: VertexMesh,
    pub params_b: PanniniParams,
    pub params_f: PanniniParams,
    /// Vertices of `m_f` whose sphere point had to be clamped into the
    /// forward domain of `params_b`.
    pub clamped: Vec<usize>,
    /// Width of one mesh cell on the `params_b` viewport plane.
    pub cell_size: f64,
}

/// Plane coordinates of mesh vertex `(n, m)` for a Pannini viewport.
pub fn grid_to_plane(
    n: usize,
    m: usize,
    params: PanniniParams,
    f_h: f64,
    w_m: usize,
    h_m: usize,
    ar: f64,
) -> Result<PlanePoint, DomainError> {
    let extent = viewport_plane_extent(params, f_h, ar)?;
    Ok(PlaneGrid::new(extent, w_m, h_m).index_to_plane(m, n))
}

fn forward_clamped(p: SpherePoint, params: PanniniParams) -> Result<(PlanePoint, bool), DomainError> {
    if let Ok(q) = pannini_forward(p, params) {
        return Ok((q, false));
    }
    let limit = FRAC_PI_2 - 1e-4;
    let mut p = SpherePoint::new(p.phi, p.theta.clamp(-limit, limit));
    for _ in 0..64 {
        if let Ok(q) = pannini_forward(p, params) {
            return Ok((q, true));
        }
        p.phi *= 0.99;
    }
    pannini_forward(SpherePoint::new(0.0, p.theta), params).map(|q| (q, true))
}

/// Builds `m_b` (the uniform lattice) and `m_f`.
///
/// Each `m_f` vertex is found by placing the lattice point on a viewport
/// projected with `params_f`, mapping it back to the sphere, forward through
/// `params_b`, and converting the result to `m_b` grid-index space. `m_f`
/// therefore tells where in `VP_b` each sample of the foreground viewport
/// comes from.
pub fn build_meshes(
    params_b: PanniniParams,
    params_f: PanniniParams,
    spec: &ViewportSpec,
    w_m: usize,
    h_m: usize,
) -> Result<MeshPair, DomainError> {
    let ar = spec.aspect_ratio();
    let grid_b = PlaneGrid::new(viewport_plane_extent(params_b, spec.f_h, ar)?, w_m, h_m);
    let grid_f = PlaneGrid::new(viewport_plane_extent(params_f, spec.f_h, ar)?, w_m, h_m);
    let m_b = VertexMesh::uniform(w_m, h_m);
    let mut vertices = Vec::with_capacity(w_m * h_m);
    let mut clamped = Vec::new();
    for n in 0..h_m {
        for m in 0..w_m {
            let sphere = pannini_backward(grid_f.index_to_plane(m, n), params_f)?;
            let (q, was_clamped) = forward_clamped(sphere, params_b)?;
            if was_clamped {
                clamped.push(n * w_m + m);
            }
            let (gx, gy) = grid_b.to_grid(q);
            vertices.push([gx, gy]);
        }
    }
    Ok(MeshPair {
        m_b,
        m_f: VertexMesh { w_m, h_m, vertices },
        params_b,
        params_f,
        clamped,
        cell_size: 2.0 * grid_b.extent.half_width / w_m as f64,
    })
}

/// Correction strength for a vertex at radius `r` from the mesh center:
/// a logistic curve with `m(0) = 0.01` and `m(r_max) = 0.99`.
pub fn correction_strength_at(r: f64, r_max: f64) -> f64 {
    let r1 = r_max / 2.0;
    let r2 = r_max / (2.0 * 99f64.ln());
    1.0 / (1.0 + (-(r - r1) / r2).exp())
}

/// Correction strength of vertex `i` of a `w_m x h_m` lattice; `r_max` is the
/// center-to-corner distance.
pub fn correction_strength(i: usize, w_m: usize, h_m: usize) -> f64 {
    let (m, n) = (i % w_m, i / w_m);
    let (cx, cy) = (w_m as f64 / 2.0, h_m as f64 / 2.0);
    let r = (m as f64 + 0.5 - cx).hypot(n as f64 + 0.5 - cy);
    correction_strength_at(r, cx.hypot(cy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec() -> ViewportSpec {
        ViewportSpec::new(SpherePoint::new(0.0, 0.0), 150f64.to_radians(), 1816, 1020).unwrap()
    }

    #[test]
    fn grid_to_plane_examples() {
        let p = PanniniParams::new(0.5, 0.0).unwrap();
        let f_h = 150f64.to_radians();
        let ar = 16.0 / 9.0;
        // odd width: the middle column is the vertical axis
        let q = grid_to_plane(3, 90, p, f_h, 181, 102, ar).unwrap();
        assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-15);

        let hw = 1.5 * 75f64.to_radians().sin() / (0.5 + 75f64.to_radians().cos());
        let q = grid_to_plane(0, 0, p, f_h, 181, 102, ar).unwrap();
        assert_abs_diff_eq!(q.x, 2.0 * hw * (0.5 / 181.0 - 0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(q.x, -1.89885, epsilon = 1e-5);
        assert_abs_diff_eq!(q.y, 2.0 * (hw / ar) * (0.5 - 0.5 / 102.0), epsilon = 1e-12);
    }

    #[test]
    fn default_mesh_size_at_full_resolution() {
        assert_eq!(mesh_dims(1816, 1020, MESH_DIVISOR), (181, 102));
    }

    #[test]
    fn identical_params_give_identical_meshes() {
        let p = PanniniParams::new(0.6, 0.4).unwrap();
        let pair = build_meshes(p, p, &spec(), 37, 21).unwrap();
        for (a, b) in pair.m_f.vertices().iter().zip(pair.m_b.vertices()) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-9);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-9);
        }
        assert!(pair.clamped.is_empty());
    }

    #[test]
    fn centers_agree() {
        for (b, f) in [((0.1, 0.0), (0.3, 0.0)), ((0.5, 0.6), (0.7, 0.0)), ((1.0, 1.0), (1.2, 0.0))] {
            let pb = PanniniParams::new(b.0, b.1).unwrap();
            let pf = PanniniParams::new(f.0, f.1).unwrap();
            let pair = build_meshes(pb, pf, &spec(), 181, 101).unwrap();
            let c = pair.m_f.get(90, 50);
            assert_abs_diff_eq!(c[0], 90.5, epsilon = 1e-9);
            assert_abs_diff_eq!(c[1], 50.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn foreground_magnifies_center() {
        // a larger d compresses the periphery, so m_f samples VP_b closer to the middle
        let pb = PanniniParams::new(0.4, 0.0).unwrap();
        let pair = build_meshes(pb, foreground_params(pb, 0.2, 0.0).unwrap(), &spec(), 181, 102).unwrap();
        let v = pair.m_f.get(45, 51);
        assert!(v[0] > 45.5, "{v:?}");
    }

    #[test]
    fn correction_strength_anchors() {
        assert_abs_diff_eq!(correction_strength_at(0.0, 10.0), 0.01, epsilon = 1e-12);
        assert_eq!(correction_strength_at(5.0, 10.0), 0.5);
        assert_abs_diff_eq!(correction_strength_at(10.0, 10.0), 0.99, epsilon = 1e-12);
        // lattice corners sit just inside r_max
        let corner = correction_strength(0, 181, 102);
        assert!(corner > 0.98 && corner < 0.99);
        let mid = correction_strength(51 * 181 + 90, 181, 102);
        assert!(mid < 0.011);
    }
}
