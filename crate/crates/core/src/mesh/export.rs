use std::fmt::Write as _;

use super::Mesh;
use crate::numfmt;

/// Decimal places for exported coordinates (millimetres): sub-micron, so a
/// re-parse lands within the STL weld tolerance of the original.
pub const EXPORT_DECIMALS: usize = 6;

/// Serialises a mesh to the viewer's JSON schema:
/// `{"name", "unit_scale", "vertices": [x0,y0,z0,...], "faces": [a0,b0,c0,...]}`.
///
/// Field order and number formatting are fixed so identical meshes give identical bytes.
pub fn export_mesh_json(mesh: &Mesh) -> Vec<u8> {
    let mut out = String::with_capacity(32 + mesh.vertex_count() * 36 + mesh.face_count() * 18);
    out.push_str("{\"name\":");
    out.push_str(&serde_json::to_string(mesh.name()).expect("string serialisation cannot fail"));
    let _ = write!(out, ",\"unit_scale\":{}", mesh.unit_scale());
    out.push_str(",\"vertices\":[");
    for (i, v) in mesh.vertices().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{},{},{}",
            numfmt::fixed(v.x, EXPORT_DECIMALS),
            numfmt::fixed(v.y, EXPORT_DECIMALS),
            numfmt::fixed(v.z, EXPORT_DECIMALS)
        );
    }
    out.push_str("],\"faces\":[");
    for (i, f) in mesh.faces().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{},{},{}", f[0], f[1], f[2]);
    }
    out.push_str("]}");
    out.into_bytes()
}

/// Wavefront OBJ with one `o` record, millimetre vertices and 1-based faces.
pub fn export_obj(mesh: &Mesh) -> Vec<u8> {
    let mut out = String::with_capacity(16 + mesh.vertex_count() * 36 + mesh.face_count() * 18);
    if !mesh.name().is_empty() {
        let _ = writeln!(out, "o {}", mesh.name());
    }
    for v in mesh.vertices() {
        let _ = writeln!(
            out,
            "v {} {} {}",
            numfmt::fixed(v.x, EXPORT_DECIMALS),
            numfmt::fixed(v.y, EXPORT_DECIMALS),
            numfmt::fixed(v.z, EXPORT_DECIMALS)
        );
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out.into_bytes()
}
