use rayon::prelude::*;

use super::VertexMesh;
use crate::imaging::{ColorImage, LabelMap, Raster};
use crate::warp::interpolate_vertices;

/// Binary mask (1 = modified) of the viewport regions moved by the mesh
/// optimization: per-vertex displacement `|o_i - b_i|` in grid units,
/// bilinearly resized to `out_w x out_h`, then thresholded.
pub fn flow_mask(m_b: &VertexMesh, m_o: &VertexMesh, out_w: usize, out_h: usize, threshold: f64) -> LabelMap {
    assert_eq!(
        (m_b.width(), m_b.height()),
        (m_o.width(), m_o.height()),
        "meshes must share dimensions"
    );
    let (w_m, h_m) = (m_b.width(), m_b.height());
    let magnitude: Vec<[f64; 1]> = m_b
        .vertices()
        .iter()
        .zip(m_o.vertices())
        .map(|(b, o)| [(o[0] - b[0]).hypot(o[1] - b[1])])
        .collect();
    let sx = out_w as f64 / w_m as f64;
    let sy = out_h as f64 / h_m as f64;
    let mut data = vec![0u32; out_w * out_h];
    data.par_chunks_mut(out_w).enumerate().for_each(|(y, row)| {
        let gy = (y as f64 + 0.5) / sy;
        for (x, px) in row.iter_mut().enumerate() {
            let [mag] = interpolate_vertices(w_m, h_m, &magnitude, (x as f64 + 0.5) / sx, gy);
            *px = (mag > threshold) as u32;
        }
    });
    Raster::new(out_w, out_h, data).expect("sized to fit")
}

/// Tints masked pixels green.
pub fn overlay_mask(image: &ColorImage, mask: &LabelMap) -> ColorImage {
    let mut out = image.clone();
    for (p, &m) in out.pixels_mut().iter_mut().zip(mask.pixels()) {
        if m != 0 {
            *p = [p[0] / 2, (p[1] / 2).saturating_add(128), p[2] / 2];
        }
    }
    out
}
