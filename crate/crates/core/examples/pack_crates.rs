//! Pack craft pieces into freight crates with the heuristic and the exact solver.

use fabtwin::packing::{pack_exact, pack_ffd, parse_items_csv, CrateCaps};

const ITEMS: &str = "name,mass_kg,volume_m3,fragile
deer-head,38,0.55,yes
deer-body,62,1.10,no
leg-fl,12,0.20,no
leg-fr,12,0.20,no
leg-rl,13,0.22,no
leg-rr,13,0.22,no
pattachitra-panel-1,9,0.35,yes
pattachitra-panel-2,9,0.35,yes
cane-bundle,25,0.40,no
tools,30,0.15,no
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let items = parse_items_csv(ITEMS.as_bytes())?;
    let caps = CrateCaps {
        mass_kg: 90.0,
        volume_m3: 1.5,
    };
    for (name, manifest) in [("first-fit decreasing", pack_ffd(&items, &caps)?), ("exact", pack_exact(&items, &caps)?)] {
        println!("{name}: {} crates", manifest.crate_count());
        for (i, c) in manifest.crates.iter().enumerate() {
            println!("  {}: {:>5.1} kg {:.2} m³  {}", i + 1, c.used_mass, c.used_volume, c.items.join(", "));
        }
    }
    Ok(())
}
