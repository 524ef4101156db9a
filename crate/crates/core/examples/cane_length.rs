//! Estimate cane stock: a surface path along a limb and ring lengths for the
//! hoops of a wireframe body.

use fabtwin::geodesics::{ring_lengths, GeodesicSolver};
use fabtwin::primitives;
use nalgebra::{Point3, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let leg = primitives::bent_limb("leg", 1400.0, 70.0);
    let solver = GeodesicSolver::from_mesh(&leg);
    let bbox = leg.bounding_box();
    let a = solver.surface_point_near(&Point3::new(bbox.min.x, 0.0, bbox.min.z));
    let b = solver.surface_point_near(&Point3::new(bbox.max.x, bbox.max.y, bbox.max.z));
    let graph = solver.distance(&a, &b, false)?;
    let path = solver.distance(&a, &b, true)?;
    println!("limb path: graph {:.1} mm, straightened {:.1} mm, chord {:.1} mm", graph.length, path.length, path.lower_bound);

    let body = primitives::ellipsoid("body", [900.0, 450.0, 500.0], 64, 32);
    println!("hoops every 150 mm along the body:");
    let mut total = 0.0;
    for station in ring_lengths(&body, &Vector3::x(), 150.0)? {
        total += station.circumference;
        println!("  x = {:>7.1} mm  {:>7.1} mm", station.height, station.circumference);
    }
    println!("total hoop cane {:.2} m", total / 1000.0);
    Ok(())
}
