//! Local correction on its own: builds the background and foreground meshes
//! for a corner object, optimizes, and warps a checkerboard with the result
//! so the deformation is visible.
//!
//!     cargo run --release --example mesh_warp [out.png]

use glap::imaging::io::write_color;
use glap::imaging::{ColorImage, Interpolation, LabelMap};
use glap::mesh::{build_meshes, foreground_params, mesh_dims, optimize_mesh, EnergyWeights, OptimizeOptions};
use glap::projections::{PanniniParams, SpherePoint, ViewportSpec};
use glap::warp::{upsample_mesh, warp_image};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "mesh_warp.png".into());
    let (w, h) = (908, 510);
    let spec = ViewportSpec::new(SpherePoint::new(0.0, 0.0), 150f64.to_radians(), w, h)?;
    let params_b = PanniniParams::new(1.0, 1.0)?;
    let params_f = foreground_params(params_b, 0.2, 0.0)?;
    let (w_m, h_m) = mesh_dims(w, h, 10);
    let pair = build_meshes(params_b, params_f, &spec, w_m, h_m)?;
    // a disc in the lower left corner stands in for a segmented object
    let seg = LabelMap::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - 110.0, y as f64 - 400.0);
        u32::from(dx * dx + dy * dy < 90.0 * 90.0)
    });

    let opt = optimize_mesh(&pair, &seg, EnergyWeights::default(), &OptimizeOptions::default())?;
    for row in opt.trace.iter().step_by(20) {
        let t = row.terms;
        println!(
            "iter {:>3}  E_c {:>9.3}  E_ld {:>8.3}  E_s {:>8.3}  E_a {:>7.3}  E_t {:>9.3}",
            row.iteration, t.conformality, t.line, t.smoothness, t.asymmetric, t.total
        );
    }
    println!(
        "kept iteration {}; max vertex shift {:.2} cells",
        opt.selected_iteration,
        opt.mesh.max_displacement(&pair.m_b)
    );

    let checker = ColorImage::from_fn(w, h, |x, y| {
        let on = (x / 20 + y / 20) % 2 == 0;
        let inside = seg.get(x, y) != 0;
        match (on, inside) {
            (true, true) => [220, 80, 60],
            (false, true) => [120, 40, 30],
            (true, false) => [230, 230, 230],
            (false, false) => [60, 60, 70],
        }
    });
    let warped = warp_image(&checker, &upsample_mesh(&opt.mesh, w, h), Interpolation::Bilinear)?;
    write_color(&out, &warped)?;
    println!("wrote {out}");
    Ok(())
}
