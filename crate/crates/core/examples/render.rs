//! The whole pipeline on a synthetic scene: writes VP_b, the corrected
//! viewport, a flow overlay and a comparison sheet against fixed projections.
//!
//!     cargo run --release --example render [out_dir]

use glap::config::{Config, ProjectionChoice};
use glap::imaging::io::write_color;
use glap::mesh::overlay_mask;
use glap::pipeline::render_scene;
use glap::sheet::compose_sheet;
use glap::synthetic::corner_object_scene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "render_out".into()));
    std::fs::create_dir_all(&out_dir)?;
    let (eri, classes) = corner_object_scene().render(2048, 1024);
    let config = Config {
        width: 908,
        height: 510,
        ..Config::default()
    };

    let out = render_scene(&config, &eri, Some(&classes))?;
    for w in &out.warnings {
        println!("warning: {w}");
    }
    write_color(out_dir.join("viewport.png"), &out.viewport)?;
    if let Some(vp_b) = &out.vp_b {
        write_color(out_dir.join("vp_b.png"), vp_b)?;
    }
    if let Some(flow) = &out.flow {
        write_color(out_dir.join("flow_overlay.png"), &overlay_mask(&out.viewport, flow))?;
    }

    let mut tiles = vec![("GLAP".to_string(), out.viewport.clone())];
    for choice in ["pannini(0.5,0)", "gpp(0.5)", "rectilinear"] {
        let c = Config {
            projection: choice.parse::<ProjectionChoice>()?,
            ..config.clone()
        };
        tiles.push((choice.to_string(), render_scene(&c, &eri, None)?.viewport));
    }
    write_color(out_dir.join("compare.png"), &compose_sheet(&tiles))?;
    for (k, v) in out.results() {
        println!("{k} = {v}");
    }
    println!("images in {}", out_dir.display());
    Ok(())
}
