//! Parse a mesh file (or a built-in demo part) and print its statistics.
//!
//! cargo run --example inspect_mesh -- part.stl 25.4

use fabtwin::mesh::{detect_format, mesh_stats, parse_mesh_with, ParseOptions};
use fabtwin::primitives;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mesh = match args.next() {
        Some(path) => {
            let bytes = std::fs::read(&path)?;
            let ext = std::path::Path::new(&path).extension().and_then(|e| e.to_str());
            let opts = ParseOptions {
                name: path.clone(),
                unit_scale: args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0),
            };
            parse_mesh_with(&bytes, detect_format(&bytes, ext)?, &opts)?
        }
        None => primitives::bent_limb("deer-leg", 1400.0, 70.0),
    };
    let stats = mesh_stats(&mesh);
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}
