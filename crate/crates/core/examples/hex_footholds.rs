//! Which foothold pairs and triples of a hexagonal base keep the sculpture's
//! centre of mass inside the support polygon.

use fabtwin::structural::{enumerate_footholds, hexagon_base};
use nalgebra::Point3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = hexagon_base(1800.0);
    let com = Point3::new(150.0, -80.0, 2400.0);
    for k in [2, 3] {
        let configs = enumerate_footholds(&base, k, &com)?;
        let stable = configs.iter().filter(|c| c.stable).count();
        println!("{} {k}-foothold configurations, {stable} stable", configs.len());
        for c in configs.iter().filter(|c| c.stable) {
            println!("  {:?} margin {:.0} mm", c.chosen, c.margin);
        }
    }
    Ok(())
}
