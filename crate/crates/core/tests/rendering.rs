use glap::imaging::{cube_to_eri, eri_to_cube, render_color, render_labels, ColorImage, Interpolation, LabelMap};
use glap::projections::{PanniniParams, Projection, SpherePoint, ViewportSpec};
use glap::synthetic::GreatCircle;

/// White ERI with a dark great circle of Gaussian profile.
fn line_eri(line: GreatCircle) -> ColorImage {
    let (w, h) = (4096, 2048);
    let sigma = 0.004;
    ColorImage::from_fn(w, h, |x, y| {
        let v = glap::imaging::eri_pixel_direction(w, h, x, y).to_vector();
        let dist = (line.normal[0] * v[0] + line.normal[1] * v[1] + line.normal[2] * v[2]).abs().asin();
        let g = (255.0 * (1.0 - (-(dist / sigma).powi(2)).exp())).round() as u8;
        [g, g, g]
    })
}

/// Darkness-weighted centroid of the line across each column (or row).
fn centroids(img: &ColorImage, by_column: bool) -> Vec<(f64, f64)> {
    let (outer, inner) = if by_column {
        (img.width(), img.height())
    } else {
        (img.height(), img.width())
    };
    (0..outer)
        .filter_map(|a| {
            let (mut sw, mut sb) = (0.0, 0.0);
            for b in 0..inner {
                let (x, y) = if by_column { (a, b) } else { (b, a) };
                let dark = 255.0 - img.get(x, y)[0] as f64;
                if dark > 8.0 {
                    sw += dark;
                    sb += dark * b as f64;
                }
            }
            let c = sb / sw;
            // skip columns the line only grazes or leaves through the border
            (sw > 200.0 && c > 6.0 && c < inner as f64 - 7.0).then_some((a as f64, c))
        })
        .collect()
}

/// Largest residual of a least-squares line fit.
fn line_residual(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    points
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rectilinear_keeps_great_circles_straight() {
    let vd = SpherePoint::from_degrees(40.0, 10.0);
    let line = GreatCircle::through(vd, SpherePoint::from_degrees(75.0, 20.0), 0.0, [0, 0, 0]);
    let spec = ViewportSpec::new(vd, 90f64.to_radians(), 480, 270).unwrap();
    let vp = render_color(&line_eri(line), &spec, &Projection::Rectilinear).unwrap();
    let pts = centroids(&vp, true);
    assert!(pts.len() > 100, "line barely visible: {} columns", pts.len());
    let r = line_residual(&pts);
    assert!(r < 0.5, "max residual {r} px");
}

#[test]
fn full_vertical_compression_keeps_horizontal_great_circles_straight() {
    // equator pitched by 20 degrees, seen straight ahead
    let c = 20f64.to_radians();
    let line = GreatCircle {
        normal: [0.0, c.cos(), -c.sin()],
        width: 0.0,
        color: [0, 0, 0],
    };
    let spec = ViewportSpec::new(SpherePoint::new(0.0, 0.0), 150f64.to_radians(), 640, 360).unwrap();
    let eri = line_eri(line);
    let straight = render_color(&eri, &spec, &Projection::Pannini(PanniniParams::new(0.8, 1.0).unwrap())).unwrap();
    let r = line_residual(&centroids(&straight, true));
    assert!(r < 0.5, "vc = 1 residual {r} px");
    let bent = render_color(&eri, &spec, &Projection::Pannini(PanniniParams::new(0.8, 0.0).unwrap())).unwrap();
    assert!(line_residual(&centroids(&bent, true)) > 5.0);
}

#[test]
fn meridians_stay_vertical_for_every_pannini() {
    let line = GreatCircle::through(SpherePoint::from_degrees(30.0, 0.0), SpherePoint::from_degrees(30.0, 40.0), 0.0, [0, 0, 0]);
    let eri = line_eri(line);
    let spec = ViewportSpec::new(SpherePoint::new(0.0, 0.0), 150f64.to_radians(), 640, 360).unwrap();
    for (d, vc) in [(0.1, 0.0), (0.5, 0.5), (1.0, 1.0)] {
        let vp = render_color(&eri, &spec, &Projection::Pannini(PanniniParams::new(d, vc).unwrap())).unwrap();
        let xs: Vec<f64> = centroids(&vp, false).iter().map(|p| p.1).collect();
        assert!(xs.len() > 200);
        let spread = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1.0, "d={d} vc={vc}: column spread {spread}");
    }
}

#[test]
fn cube_round_trip_error_is_small() {
    let (w, h) = (512, 256);
    let eri = ColorImage::from_fn(w, h, |x, y| {
        let p = glap::imaging::eri_pixel_direction(w, h, x, y);
        let v = p.to_vector();
        [(127.5 * (1.0 + v[0])) as u8, (127.5 * (1.0 + v[1])) as u8, (127.5 * (1.0 + v[2])) as u8]
    });
    let faces = eri_to_cube(&eri, w / 4, Interpolation::Bilinear).unwrap();
    let back = cube_to_eri(&faces, w, h, Interpolation::Bilinear).unwrap();
    let mae: f64 = eri
        .pixels()
        .iter()
        .zip(back.pixels())
        .map(|(a, b)| (0..3).map(|c| (a[c] as f64 - b[c] as f64).abs()).sum::<f64>() / 3.0)
        .sum::<f64>()
        / (w * h) as f64;
    assert!(mae < 2.0, "mean absolute error {mae}");
}

#[test]
fn label_viewports_only_contain_source_labels() {
    let labels = LabelMap::from_fn(360, 180, |x, y| ((x / 45) * 7 + y / 60) as u32 % 11 + 3);
    let spec = ViewportSpec::new(SpherePoint::from_degrees(-100.0, 25.0), 120f64.to_radians(), 200, 120).unwrap();
    let vp = render_labels(&labels, &spec, &Projection::Gpp(0.5)).unwrap();
    let source: std::collections::BTreeSet<u32> = labels.pixels().iter().copied().collect();
    assert!(vp.pixels().iter().all(|l| source.contains(l)));
}

#[test]
fn bilinear_label_rendering_is_refused() {
    let labels = LabelMap::filled(64, 32, 1);
    let spec = ViewportSpec::new(SpherePoint::new(0.0, 0.0), 1.0, 16, 9).unwrap();
    let err = glap::imaging::render_viewport(&labels, &spec, &Projection::Rectilinear, Interpolation::Bilinear);
    assert!(err.is_err());
}
