//! ERI to cube map and back.
//!
//!     cargo run --release --example cubemap [out_dir]

use glap::imaging::io::write_color;
use glap::imaging::{cube_to_eri, eri_to_cube, Interpolation};
use glap::synthetic::corner_object_scene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "cubemap_out".into()));
    std::fs::create_dir_all(&out)?;
    let (eri, _) = corner_object_scene().render(2048, 1024);
    let faces = eri_to_cube(&eri, 512, Interpolation::Bilinear)?;
    for (face, img) in faces.iter() {
        write_color(out.join(format!("face_{}.png", face.name())), img)?;
    }
    let back = cube_to_eri(&faces, 2048, 1024, Interpolation::Bilinear)?;
    write_color(out.join("round_trip.png"), &back)?;
    let mae = eri
        .pixels()
        .iter()
        .zip(back.pixels())
        .map(|(a, b)| (0..3).map(|c| (a[c] as f64 - b[c] as f64).abs()).sum::<f64>() / 3.0)
        .sum::<f64>()
        / (2048.0 * 1024.0);
    println!("wrote six 512 px faces to {}; round-trip mean abs error {mae:.2}", out.display());
    Ok(())
}
