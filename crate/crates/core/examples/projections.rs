//! Where a few sphere directions land under each projection, and the plane
//! extent of a 150 degree, 16:9 viewport.
//!
//!     cargo run --example projections

use glap::projections::{PanniniParams, Projection, SpherePoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let projections = [
        Projection::Rectilinear,
        Projection::Stereographic,
        Projection::Gpp(0.5),
        Projection::Pannini(PanniniParams::new(0.5, 0.0)?),
        Projection::Pannini(PanniniParams::new(1.0, 1.0)?),
    ];
    let points = [(0.0, 0.0), (40.0, 0.0), (40.0, 30.0), (70.0, -20.0)];

    print!("{:<22}", "(phi, theta) deg");
    for p in &projections {
        print!("{:>24}", p.name());
    }
    println!();
    for (phi, theta) in points {
        print!("{:<22}", format!("({phi}, {theta})"));
        for proj in &projections {
            let q = proj.forward(SpherePoint::from_degrees(phi, theta))?;
            let back = proj.backward(q)?;
            let err = (back.phi - phi.to_radians()).abs().max((back.theta - theta.to_radians()).abs());
            print!("{:>24}", format!("({:.3}, {:.3}) {err:.0e}", q.x, q.y));
        }
        println!();
    }

    println!("\nextent at 150 deg, 16:9");
    for proj in &projections {
        let e = proj.plane_extent(150f64.to_radians(), 16.0 / 9.0)?;
        println!(
            "{:<24} half width {:.4}  half height {:.4}  vertical fov {:.2} deg",
            proj.name(),
            e.half_width,
            e.half_height,
            e.f_v.to_degrees()
        );
    }
    Ok(())
}
