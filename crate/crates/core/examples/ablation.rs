//! Conformality ablation on a synthetic corner-object scene: the object's
//! area distortion in VP_b, after mesh optimization without the
//! conformality term, and with the default weights.
//!
//!     cargo run --release --example ablation [width height]

use glap::config::Config;
use glap::mesh::{optimize_mesh, EnergyWeights};
use glap::pipeline::render_scene;
use glap::projections::Projection;
use glap::synthetic::corner_object_scene;
use glap::warp::{upsample_mesh, warped_area_deviation, DenseField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (w, h) = match args[..] {
        [w, h] => (w, h),
        _ => (908, 510),
    };
    let (eri, classes) = corner_object_scene().render(2048, 1024);
    let config = Config {
        width: w,
        height: h,
        ..Config::default()
    };
    let out = render_scene(&config, &eri, Some(&classes))?;
    let spec = config.viewport()?;
    let pair = out.meshes.as_ref().expect("labels were given");
    let seg_vp = out.seg_vp.as_ref().unwrap();
    let projection = Projection::Pannini(pair.params_b);
    println!(
        "{w}x{h}, mesh {}x{}: d_b = {}, vc_b = {}, d_f = {}",
        pair.m_b.width(),
        pair.m_b.height(),
        pair.params_b.d,
        pair.params_b.vc,
        pair.params_f.d
    );

    let baseline = warped_area_deviation(&DenseField::identity(w, h), seg_vp, &spec, &projection)?.unwrap();
    println!("{:<14} {baseline:.4}", "VP_b");
    for (name, lambda_c) in [("lambda_c = 0", 0.0), ("default", EnergyWeights::default().lambda_c)] {
        let weights = EnergyWeights {
            lambda_c,
            ..config.weights()
        };
        let opt = optimize_mesh(pair, seg_vp, weights, &config.optimize_options())?;
        let field = upsample_mesh(&opt.mesh, w, h);
        let dev = warped_area_deviation(&field, seg_vp, &spec, &projection)?.unwrap();
        println!(
            "{name:<14} {dev:.4}  {:+.1}% vs VP_b, max vertex shift {:.2} cells",
            100.0 * (dev / baseline - 1.0),
            opt.mesh.max_displacement(&pair.m_b)
        );
    }
    Ok(())
}
