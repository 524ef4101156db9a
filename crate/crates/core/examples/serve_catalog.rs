//! Serve a directory of meshes to the viewer, or a demo catalog when no
//! directory is given.
//!
//! cargo run --example serve_catalog -- meshes/ 8737

use std::net::{Ipv4Addr, SocketAddr};
use std::sync::Arc;

use fabtwin::primitives;
use fabtwin::service::{serve, MeshCatalog, DEFAULT_PORT};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let catalog = match args.next() {
        Some(dir) => {
            let (catalog, warnings) = MeshCatalog::load_dir(dir.as_ref())?;
            for w in warnings {
                eprintln!("skipped {w}");
            }
            catalog
        }
        None => MeshCatalog::from_meshes([
            ("leg".to_string(), primitives::bent_limb("leg", 1400.0, 70.0)),
            ("plate".to_string(), primitives::plate("plate", 600.0, 400.0, 6, 4)),
        ]),
    };
    let port = args.next().map(|p| p.parse()).transpose()?.unwrap_or(DEFAULT_PORT);
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    println!("{} mesh(es) on http://{addr}/v1/meshes", catalog.len());
    serve(Arc::new(catalog), addr).await?;
    Ok(())
}
