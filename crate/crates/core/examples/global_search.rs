//! Global Pannini parameter search: the stretching / bending trade-off over
//! the (d, vc) grid for a few scenes.
//!
//!     cargo run --release --example global_search

use glap::global::optimize_global;
use glap::projections::{SpherePoint, ViewportSpec};
use glap::segmentation::connected_components;
use glap::synthetic::{corner_object_scene, objects_scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ViewportSpec::new(SpherePoint::new(0.0, 0.0), 150f64.to_radians(), 908, 510)?;
    let scenes = [
        ("corner object", corner_object_scene()),
        ("center object", objects_scene(&[(0.0, 0.0)], 15.0)),
        ("no objects", objects_scene(&[], 0.0)),
    ];
    for (name, scene) in scenes {
        let (_, classes) = scene.render(1024, 512);
        let result = optimize_global(&connected_components(&classes), &spec, 0.17)?;
        let mut ranked = result.cost_surface.clone();
        ranked.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        println!("{name}: best d = {}, vc = {}", result.best.d, result.best.vc);
        for p in ranked.iter().take(3) {
            println!(
                "    d {:.1} vc {:.1}  S {:.4}  B {:.4}  cost {:.4}",
                p.params.d, p.params.vc, p.stretching, p.bending, p.cost
            );
        }
    }
    Ok(())
}
