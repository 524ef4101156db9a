//! Project a part into front, top and side templates with a metric grid, tile
//! them onto A3 pages and write the SVGs plus sidecars into a directory.
//!
//! cargo run --example print_templates -- out/

use fabtwin::orientation::{canonicalize, principal_frame, Weighting};
use fabtwin::primitives;
use fabtwin::templating::{overlay_grid, page_file_name, project_view, render_svg, sidecar_json, tile_pages, ProjectionOptions, View};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "templates".into()));
    std::fs::create_dir_all(&out)?;
    let part = primitives::bent_limb("leg", 1400.0, 70.0);
    let (canonical, _) = canonicalize(&part, &principal_frame(&part, Weighting::Area)?);

    for view in [View::Front, View::Top, View::Right] {
        let sheet = overlay_grid(&project_view(&canonical, view, &ProjectionOptions::default())?, 50.0)?;
        let pages = tile_pages(&sheet, 297.0, 420.0, 10.0, 20.0)?;
        for (page, svg) in pages.iter().zip(render_svg(&pages, &sheet)) {
            std::fs::write(out.join(page_file_name("leg", view.name(), page)), svg)?;
        }
        std::fs::write(out.join(format!("leg_{}.json", view.name())), sidecar_json(&sheet, view.name(), &pages))?;
        println!(
            "{:>6}: {:.0} x {:.0} mm, silhouette {:.0} mm², {} page(s)",
            view.name(),
            sheet.width,
            sheet.height,
            sheet.silhouette_area(),
            pages.len()
        );
    }
    println!("written to {}", out.display());
    Ok(())
}
