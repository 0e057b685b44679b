//! Procedural test scenes: equirectangular color and class rasters built
//! from spherical caps and great-circle lines.

use rayon::prelude::*;

use crate::imaging::{eri_pixel_direction, ColorImage, LabelMap, Raster, Rgb};
use crate::projections::SpherePoint;

/// A filled spherical cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    pub center: SpherePoint,
    /// Angular radius in radians.
    pub radius: f64,
    pub class_label: u32,
    pub color: Rgb,
}

/// A great circle drawn as a band of angular half-width `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatCircle {
    pub normal: [f64; 3],
    pub width: f64,
    pub color: Rgb,
}

impl GreatCircle {
    /// Circle through `p` and `q`.
    pub fn through(p: SpherePoint, q: SpherePoint, width: f64, color: Rgb) -> Self {
        let (a, b) = (p.to_vector(), q.to_vector());
        let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        Self {
            normal: [n[0] / len, n[1] / len, n[2] / len],
            width,
            color,
        }
    }

    fn distance(&self, v: [f64; 3]) -> f64 {
        (self.normal[0] * v[0] + self.normal[1] * v[1] + self.normal[2] * v[2]).abs().asin()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub caps: Vec<Cap>,
    pub lines: Vec<GreatCircle>,
}

impl Scene {
    /// Lines are drawn over the background and caps over the lines.
    pub fn render(&self, width: usize, height: usize) -> (ColorImage, LabelMap) {
        let mut color = vec![[0u8; 3]; width * height];
        let mut labels = vec![0u32; width * height];
        color
            .par_chunks_mut(width)
            .zip(labels.par_chunks_mut(width))
            .enumerate()
            .for_each(|(y, (crow, lrow))| {
                for x in 0..width {
                    let p = eri_pixel_direction(width, height, x, y);
                    let v = p.to_vector();
                    let mut c = background(p);
                    for line in &self.lines {
                        if line.distance(v) < line.width {
                            c = line.color;
                        }
                    }
                    for cap in &self.caps {
                        if angle_between(v, cap.center.to_vector()) < cap.radius {
                            c = cap.color;
                            lrow[x] = cap.class_label;
                        }
                    }
                    crow[x] = c;
                }
            });
        (
            Raster::new(width, height, color).expect("sized"),
            Raster::new(width, height, labels).expect("sized"),
        )
    }
}

fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0).acos()
}

/// Soft sky-to-floor gradient with a faint longitude checker.
fn background(p: SpherePoint) -> Rgb {
    let t = 0.5 + p.theta / std::f64::consts::PI;
    let checker = ((p.phi.to_degrees().rem_euclid(30.0) < 15.0) ^ (p.theta.to_degrees().rem_euclid(30.0) < 15.0)) as u8;
    let base = [(90.0 + 80.0 * t) as u8, (110.0 + 70.0 * t) as u8, (120.0 + 110.0 * t) as u8];
    base.map(|c| c.saturating_sub(12 * checker))
}

/// Radial background lines through the view axis `(0, 0)`, a horizon and
/// two horizontal-looking rails, plus one object in the lower-left corner of
/// a wide front-facing viewport.
pub fn corner_object_scene() -> Scene {
    let dark = [30, 30, 40];
    let mut lines: Vec<GreatCircle> = (0..6)
        .map(|k| {
            let tilt = (k as f64 * 30.0).to_radians();
            // circle through the view axis, rotated about it by `tilt`
            GreatCircle {
                normal: [tilt.cos(), tilt.sin(), 0.0],
                width: 0.004,
                color: dark,
            }
        })
        .collect();
    for pitch in [-30f64, 30.0] {
        let c = pitch.to_radians();
        // pitched equator: points (sin t, cos t sin c, cos t cos c)
        lines.push(GreatCircle {
            normal: [0.0, c.cos(), -c.sin()],
            width: 0.004,
            color: dark,
        });
    }
    Scene {
        caps: vec![Cap {
            center: SpherePoint::from_degrees(-58.0, -22.0),
            radius: 11f64.to_radians(),
            class_label: 1,
            color: [200, 60, 50],
        }],
        lines,
    }
}

/// A scene with one object per entry of `centers` (degrees), each of
/// angular radius `radius_deg`.
pub fn objects_scene(centers: &[(f64, f64)], radius_deg: f64) -> Scene {
    let palette: [Rgb; 4] = [[200, 60, 50], [60, 160, 70], [220, 180, 40], [120, 70, 170]];
    Scene {
        caps: centers
            .iter()
            .enumerate()
            .map(|(k, &(phi, theta))| Cap {
                center: SpherePoint::from_degrees(phi, theta),
                radius: radius_deg.to_radians(),
                class_label: k as u32 % 3 + 1,
                color: palette[k % palette.len()],
            })
            .collect(),
        lines: corner_object_scene().lines,
    }
}
