//! Object instances from a class-label ERI, including one object that
//! straddles the left/right seam, and what survives in a viewport.
//!
//!     cargo run --example segmentation

use glap::projections::{PanniniParams, Projection, SpherePoint, ViewportSpec};
use glap::segmentation::{connected_components, filter_small_objects, min_object_px, render_seg_viewport, MIN_OBJECT_FRACTION};
use glap::synthetic::objects_scene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = objects_scene(&[(-40.0, 0.0), (30.0, 20.0), (179.0, -10.0), (60.0, -30.0)], 8.0);
    let (_, classes) = scene.render(1024, 512);
    let seg = connected_components(&classes);
    println!("{} objects", seg.object_count());
    for r in &seg.regions {
        println!(
            "  id {} class {} {:>6} px  x {}..{}  y {}..{}",
            r.id, r.class_label, r.pixel_count, r.bbox.x_min, r.bbox.x_max, r.bbox.y_min, r.bbox.y_max
        );
    }

    let spec = ViewportSpec::new(SpherePoint::new(0.0, 0.0), 150f64.to_radians(), 908, 510)?;
    let vp = render_seg_viewport(&seg, &spec, &Projection::Pannini(PanniniParams::new(0.5, 0.0)?))?;
    let kept = filter_small_objects(&vp, min_object_px(908, 510, MIN_OBJECT_FRACTION));
    let ids = |m: &glap::imaging::LabelMap| {
        let mut v: Vec<u32> = m.pixels().iter().copied().filter(|&i| i != 0).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    println!(
        "visible in the front viewport: ids {:?}; {} large enough to keep (renumbered {:?})",
        ids(&vp),
        ids(&kept).len(),
        ids(&kept)
    );
    Ok(())
}
