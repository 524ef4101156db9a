use std::collections::HashMap;
use std::path::Path;

use nalgebra::Point3;
use serde::Deserialize;

use super::{Mesh, MeshError};

/// STL facets repeat shared corners; corners closer than this (in file units) are merged.
pub const STL_WELD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFormat {
    Obj,
    StlAscii,
    StlBinary,
    PlyAscii,
    /// The toolkit's own JSON export (vertices already in millimetres).
    Json,
    Auto,
}

impl MeshFormat {
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::PlyAscii),
            "json" => Some(MeshFormat::Json),
            // ASCII vs binary is decided from content
            "stl" => Some(MeshFormat::Auto),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub name: String,
    /// Millimetres per file unit.
    pub unit_scale: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            name: String::new(),
            unit_scale: 1.0,
        }
    }
}

pub fn parse_mesh(bytes: &[u8], hint: MeshFormat) -> Result<Mesh, MeshError> {
    parse_mesh_with(bytes, hint, &ParseOptions::default())
}

pub fn parse_mesh_with(bytes: &[u8], hint: MeshFormat, opts: &ParseOptions) -> Result<Mesh, MeshError> {
    if bytes.is_empty() {
        return Err(MeshError::MalformedFile {
            location: "byte 0".into(),
            message: "empty input".into(),
        });
    }
    let format = match hint {
        MeshFormat::Auto => detect_format(bytes, None)?,
        other => other,
    };
    let raw = match format {
        MeshFormat::Obj => parse_obj(text(bytes)?)?,
        MeshFormat::StlAscii => parse_stl_ascii(text(bytes)?)?,
        MeshFormat::StlBinary => parse_stl_binary(bytes)?,
        MeshFormat::PlyAscii => parse_ply_ascii(text(bytes)?)?,
        MeshFormat::Json => return parse_json(bytes, opts),
        MeshFormat::Auto => unreachable!("auto resolved above"),
    };
    let scale = opts.unit_scale;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(MeshError::InvalidUnitScale(scale));
    }
    let vertices = raw.vertices.iter().map(|p| Point3::from(p.coords * scale)).collect();
    Mesh::with_unit_scale(opts.name.clone(), vertices, raw.faces, scale)
}

/// Reads a mesh file, choosing the parser from the extension (content sniffing for STL
/// and unknown extensions). The mesh is named after the file stem.
pub fn load_mesh(path: &Path) -> Result<Mesh, crate::Error> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path.display().to_string(), e))?;
    let ext = path.extension().and_then(|e| e.to_str());
    let format = detect_format(&bytes, ext)?;
    let opts = ParseOptions {
        name: path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string(),
        unit_scale: 1.0,
    };
    Ok(parse_mesh_with(&bytes, format, &opts)?)
}

/// Resolves the concrete format from an optional extension and the leading bytes.
pub fn detect_format(bytes: &[u8], extension: Option<&str>) -> Result<MeshFormat, MeshError> {
    if let Some(ext) = extension {
        match MeshFormat::from_extension(ext) {
            Some(MeshFormat::Auto) => return Ok(sniff_stl(bytes)),
            Some(f) => return Ok(f),
            None => {}
        }
    }
    if bytes.starts_with(b"ply") {
        return Ok(MeshFormat::PlyAscii);
    }
    if is_binary_stl(bytes) {
        return Ok(MeshFormat::StlBinary);
    }
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(4096)]);
    let trimmed = head.trim_start();
    if trimmed.starts_with('{') {
        return Ok(MeshFormat::Json);
    }
    if trimmed.starts_with("solid") {
        return Ok(MeshFormat::StlAscii);
    }
    if head
        .lines()
        .any(|l| l.starts_with("v ") || l.starts_with("f ") || l.starts_with('#'))
    {
        return Ok(MeshFormat::Obj);
    }
    Err(MeshError::UnsupportedFormat(
        extension.map(str::to_string).unwrap_or_else(|| "unrecognised content".into()),
    ))
}

fn sniff_stl(bytes: &[u8]) -> MeshFormat {
    if is_binary_stl(bytes) {
        return MeshFormat::StlBinary;
    }
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(512)]);
    if head.trim_start().starts_with("solid") {
        MeshFormat::StlAscii
    } else {
        MeshFormat::StlBinary
    }
}

fn is_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as u64;
    84 + 50 * n == bytes.len() as u64
}

fn text(bytes: &[u8]) -> Result<&str, MeshError> {
    std::str::from_utf8(bytes).map_err(|e| MeshError::MalformedFile {
        location: format!("byte {}", e.valid_up_to()),
        message: "invalid UTF-8".into(),
    })
}

struct RawMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
}

fn malformed(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::MalformedFile {
        location: format!("line {line}"),
        message: message.into(),
    }
}

fn parse_f64(tok: Option<&str>, line: usize, what: &str) -> Result<f64, MeshError> {
    let tok = tok.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| malformed(line, format!("invalid number '{tok}' for {what}")))?;
    if !v.is_finite() {
        return Err(malformed(line, format!("non-finite {what}")));
    }
    Ok(v)
}

/// Fan-triangulates a polygon, rejecting repeated corners in any triangle.
fn push_fan(faces: &mut Vec<[usize; 3]>, poly: &[usize], line: usize) -> Result<(), MeshError> {
    if poly.len() < 3 {
        return Err(malformed(line, "face with fewer than 3 vertices"));
    }
    for k in 1..poly.len() - 1 {
        let f = [poly[0], poly[k], poly[k + 1]];
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(malformed(line, "face repeats a vertex index"));
        }
        faces.push(f);
    }
    Ok(())
}

fn check_indices(raw: &RawMesh, face_lines: &[usize]) -> Result<(), MeshError> {
    let n = raw.vertices.len();
    for (f, &line) in raw.faces.iter().zip(face_lines) {
        if let Some(&i) = f.iter().find(|&&i| i >= n) {
            return Err(malformed(line, format!("vertex index {} out of range ({n} vertices)", i + 1)));
        }
    }
    if raw.faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    Ok(())
}

fn parse_obj(src: &str) -> Result<RawMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut face_lines = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line_no, "x")?;
                let y = parse_f64(toks.next(), line_no, "y")?;
                let z = parse_f64(toks.next(), line_no, "z")?;
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in toks {
                    let idx_tok = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_tok
                        .parse()
                        .map_err(|_| malformed(line_no, format!("invalid face index '{tok}'")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(malformed(line_no, "face index 0 is not valid in OBJ"));
                    };
                    if resolved < 0 {
                        return Err(malformed(line_no, format!("relative index {idx} out of range")));
                    }
                    poly.push(resolved as usize);
                }
                let before = faces.len();
                push_fan(&mut faces, &poly, line_no)?;
                face_lines.extend(std::iter::repeat_n(line_no, faces.len() - before));
            }
            _ => {}
        }
    }
    let raw = RawMesh { vertices, faces };
    check_indices(&raw, &face_lines)?;
    Ok(raw)
}

/// Merges coincident corners within [`STL_WELD_TOLERANCE`] using a hash grid.
struct Welder {
    cells: HashMap<[i64; 3], Vec<usize>>,
    vertices: Vec<Point3<f64>>,
}

impl Welder {
    fn new() -> Self {
        Welder {
            cells: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn cell(p: &Point3<f64>) -> [i64; 3] {
        [
            (p.x / STL_WELD_TOLERANCE).floor() as i64,
            (p.y / STL_WELD_TOLERANCE).floor() as i64,
            (p.z / STL_WELD_TOLERANCE).floor() as i64,
        ]
    }

    fn insert(&mut self, p: Point3<f64>) -> usize {
        let c = Self::cell(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if let Some(&id) = ids
                            .iter()
                            .find(|&&id| (self.vertices[id] - p).norm() <= STL_WELD_TOLERANCE)
                        {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.cells.entry(c).or_default().push(id);
        id
    }

    /// Adds a facet; facets collapsed by welding carry no area and are dropped.
    fn facet(&mut self, faces: &mut Vec<[usize; 3]>, corners: [Point3<f64>; 3]) {
        let f = corners.map(|p| self.insert(p));
        if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
            faces.push(f);
        }
    }
}

fn parse_stl_ascii(src: &str) -> Result<RawMesh, MeshError> {
    let mut toks = src
        .lines()
        .enumerate()
        .flat_map(|(ln, l)| l.split_whitespace().map(move |t| (ln + 1, t)))
        .peekable();
    let mut last_line = 1;
    let expect = |toks: &mut std::iter::Peekable<_>, kw: &str, last: &mut usize| -> Result<(), MeshError> {
        let next: Option<(usize, &str)> = Iterator::next(toks);
        match next {
            Some((ln, t)) if t == kw => {
                *last = ln;
                Ok(())
            }
            Some((ln, t)) => Err(malformed(ln, format!("expected '{kw}', found '{t}'"))),
            None => Err(malformed(*last, format!("unexpected end of file, expected '{kw}'"))),
        }
    };
    expect(&mut toks, "solid", &mut last_line)?;
    // optional solid name: everything up to the first 'facet' or 'endsolid'
    while let Some(&(_, t)) = toks.peek() {
        if t == "facet" || t == "endsolid" {
            break;
        }
        toks.next();
    }
    let mut welder = Welder::new();
    let mut faces = Vec::new();
    loop {
        match toks.next() {
            Some((_, "endsolid")) => break,
            Some((ln, "facet")) => {
                last_line = ln;
                expect(&mut toks, "normal", &mut last_line)?;
                for axis in ["nx", "ny", "nz"] {
                    let (ln, t) = toks
                        .next()
                        .ok_or_else(|| malformed(last_line, "unexpected end of file in normal"))?;
                    parse_f64(Some(t), ln, axis)?;
                    last_line = ln;
                }
                expect(&mut toks, "outer", &mut last_line)?;
                expect(&mut toks, "loop", &mut last_line)?;
                let mut corners = Vec::with_capacity(3);
                while let Some(&(_, "vertex")) = toks.peek() {
                    let (ln, _) = toks.next().expect("peeked");
                    let mut xyz = [0.0; 3];
                    for (k, axis) in ["x", "y", "z"].iter().enumerate() {
                        let tok = toks.next().map(|(_, t)| t);
                        xyz[k] = parse_f64(tok, ln, axis)?;
                    }
                    last_line = ln;
                    corners.push(Point3::new(xyz[0], xyz[1], xyz[2]));
                }
                expect(&mut toks, "endloop", &mut last_line)?;
                expect(&mut toks, "endfacet", &mut last_line)?;
                if corners.len() < 3 {
                    return Err(malformed(last_line, "facet with fewer than 3 vertices"));
                }
                for k in 1..corners.len() - 1 {
                    welder.facet(&mut faces, [corners[0], corners[k], corners[k + 1]]);
                }
            }
            Some((ln, t)) => return Err(malformed(ln, format!("expected 'facet' or 'endsolid', found '{t}'"))),
            None => return Err(malformed(last_line, "unexpected end of file, missing 'endsolid'")),
        }
    }
    if faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    Ok(RawMesh {
        vertices: welder.vertices,
        faces,
    })
}

fn parse_stl_binary(bytes: &[u8]) -> Result<RawMesh, MeshError> {
    let bad = |offset: usize, message: &str| MeshError::MalformedFile {
        location: format!("byte {offset}"),
        message: message.to_string(),
    };
    if bytes.len() < 84 {
        return Err(bad(bytes.len(), "binary STL shorter than its 84-byte header"));
    }
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    let expected = n
        .checked_mul(50)
        .and_then(|b| b.checked_add(84))
        .ok_or_else(|| bad(80, "triangle count overflows"))?;
    if bytes.len() < expected {
        return Err(bad(bytes.len(), &format!("truncated: header declares {n} triangles")));
    }
    let mut welder = Welder::new();
    let mut faces = Vec::with_capacity(n);
    for t in 0..n {
        let base = 84 + 50 * t;
        let mut corners = [Point3::origin(); 3];
        for (k, corner) in corners.iter_mut().enumerate() {
            let mut xyz = [0.0f64; 3];
            for (a, v) in xyz.iter_mut().enumerate() {
                let o = base + 12 + 12 * k + 4 * a;
                let f = f32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]);
                if !f.is_finite() {
                    return Err(bad(o, "non-finite coordinate"));
                }
                *v = f as f64;
            }
            *corner = Point3::new(xyz[0], xyz[1], xyz[2]);
        }
        welder.facet(&mut faces, corners);
    }
    if faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    Ok(RawMesh {
        vertices: welder.vertices,
        faces,
    })
}

#[derive(Debug)]
enum PlyProperty {
    Scalar(String),
    List(String),
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

fn parse_ply_ascii(src: &str) -> Result<RawMesh, MeshError> {
    let mut lines = src.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(malformed(1, "missing 'ply' magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut header_done = false;
    let mut last_line = 1;
    for (ln, line) in lines.by_ref() {
        let line_no = ln + 1;
        last_line = line_no;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => {
                return Err(MeshError::UnsupportedFormat(format!("PLY {other} (only ASCII PLY is supported)")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| malformed(line_no, format!("invalid element count '{count}'")))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", _, _, name] => elements
                .last_mut()
                .ok_or_else(|| malformed(line_no, "property before element"))?
                .properties
                .push(PlyProperty::List(name.to_string())),
            ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| malformed(line_no, "property before element"))?
                .properties
                .push(PlyProperty::Scalar(name.to_string())),
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(malformed(line_no, format!("unrecognised header line '{line}'"))),
        }
    }
    if !header_done {
        return Err(malformed(last_line, "missing 'end_header'"));
    }

    let mut toks = lines.flat_map(|(ln, l)| l.split_whitespace().map(move |t| (ln + 1, t)));
    let mut next_tok = |what: &str, last: &mut usize| -> Result<(usize, String), MeshError> {
        match toks.next() {
            Some((ln, t)) => {
                *last = ln;
                Ok((ln, t.to_string()))
            }
            None => Err(malformed(*last, format!("unexpected end of file reading {what}"))),
        }
    };

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut face_lines = Vec::new();
    for el in &elements {
        for _ in 0..el.count {
            let mut xyz = [None::<f64>; 3];
            for prop in &el.properties {
                match prop {
                    PlyProperty::Scalar(name) => {
                        let (ln, t) = next_tok(name, &mut last_line)?;
                        if el.name == "vertex" {
                            let slot = match name.as_str() {
                                "x" => Some(0),
                                "y" => Some(1),
                                "z" => Some(2),
                                _ => None,
                            };
                            if let Some(k) = slot {
                                xyz[k] = Some(parse_f64(Some(&t), ln, name)?);
                            }
                        }
                    }
                    PlyProperty::List(name) => {
                        let (ln, t) = next_tok(name, &mut last_line)?;
                        let len: usize = t
                            .parse()
                            .map_err(|_| malformed(ln, format!("invalid list length '{t}'")))?;
                        let mut items = Vec::with_capacity(len.min(64));
                        for _ in 0..len {
                            let (ln, t) = next_tok(name, &mut last_line)?;
                            let idx: usize = t
                                .parse()
                                .map_err(|_| malformed(ln, format!("invalid index '{t}'")))?;
                            items.push(idx);
                        }
                        if el.name == "face" && (name == "vertex_indices" || name == "vertex_index") {
                            let before = faces.len();
                            push_fan(&mut faces, &items, ln)?;
                            face_lines.extend(std::iter::repeat_n(ln, faces.len() - before));
                        }
                    }
                }
            }
            if el.name == "vertex" {
                match xyz {
                    [Some(x), Some(y), Some(z)] => vertices.push(Point3::new(x, y, z)),
                    _ => return Err(malformed(last_line, "vertex element lacks x, y or z")),
                }
            }
        }
    }
    let raw = RawMesh { vertices, faces };
    check_indices(&raw, &face_lines)?;
    Ok(raw)
}

#[derive(Deserialize)]
struct JsonMesh {
    name: String,
    unit_scale: f64,
    vertices: Vec<f64>,
    faces: Vec<usize>,
}

fn parse_json(bytes: &[u8], opts: &ParseOptions) -> Result<Mesh, MeshError> {
    let doc: JsonMesh = serde_json::from_slice(bytes).map_err(|e| MeshError::MalformedFile {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if !doc.vertices.len().is_multiple_of(3) || !doc.faces.len().is_multiple_of(3) {
        return Err(MeshError::MalformedFile {
            location: "vertices/faces".into(),
            message: "flat arrays must have a length divisible by 3".into(),
        });
    }
    let vertices = doc
        .vertices
        .chunks_exact(3)
        .map(|c| Point3::new(c[0], c[1], c[2]))
        .collect();
    let faces = doc.faces.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    let name = if opts.name.is_empty() { doc.name } else { opts.name.clone() };
    Mesh::with_unit_scale(name, vertices, faces, doc.unit_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh_stats;

    const ONE_TRIANGLE_STL: &str = "solid t\n facet normal 0 0 1\n  outer loop\n   vertex 0 0 0\n   vertex 1 0 0\n   vertex 0 1 0\n  endloop\n endfacet\nendsolid t\n";

    pub(crate) const CUBE_OBJ: &str = "# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
";

    /// Independent closedness check: count directed half-edges, each undirected edge must
    /// appear exactly twice overall.
    fn brute_force_closed(faces: &[[usize; 3]]) -> bool {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for f in faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.iter().all(|e| edges.iter().filter(|x| *x == e).count() == 2)
    }

    #[test]
    fn ascii_stl_single_triangle() {
        let m = parse_mesh(ONE_TRIANGLE_STL.as_bytes(), MeshFormat::Auto).unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.face_count(), 1);
    }

    #[test]
    fn obj_cube_is_closed() {
        let m = parse_mesh(CUBE_OBJ.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (8, 12));
        assert!(brute_force_closed(m.faces()));
        assert!(mesh_stats(&m).is_closed);
    }

    #[test]
    fn obj_index_out_of_range_is_malformed() {
        let src = CUBE_OBJ.replace("f 4 5 8", "f 4 5 9");
        let err = parse_mesh(src.as_bytes(), MeshFormat::Obj).unwrap_err();
        assert!(matches!(err, MeshError::MalformedFile { .. }), "{err:?}");
    }

    #[test]
    fn obj_handles_slashes_quads_and_negative_indices() {
        let src = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1/1 2//1 3 4\nf -4 -2 -1\n";
        let m = parse_mesh(src.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2], [0, 2, 3], [0, 2, 3]]);
    }

    #[test]
    fn stl_welds_shared_corners() {
        let cube = crate::primitives::cuboid("c", [1.0, 1.0, 1.0]);
        let mut s = String::from("solid c\n");
        for f in 0..cube.face_count() {
            s.push_str("facet normal 0 0 0\nouter loop\n");
            for p in cube.triangle(f) {
                s.push_str(&format!("vertex {} {} {}\n", p.x, p.y, p.z + 1e-8));
            }
            s.push_str("endloop\nendfacet\n");
        }
        s.push_str("endsolid c\n");
        let m = parse_mesh(s.as_bytes(), MeshFormat::StlAscii).unwrap();
        assert_eq!(m.vertex_count(), 8);
        assert!(mesh_stats(&m).is_closed);
    }

    #[test]
    fn binary_stl_round_trip_and_truncation() {
        let cube = crate::primitives::cuboid("c", [2.0, 1.0, 1.0]);
        let mut b = vec![0u8; 80];
        b.extend_from_slice(&(cube.face_count() as u32).to_le_bytes());
        for f in 0..cube.face_count() {
            b.extend_from_slice(&[0u8; 12]);
            for p in cube.triangle(f) {
                for c in [p.x, p.y, p.z] {
                    b.extend_from_slice(&(c as f32).to_le_bytes());
                }
            }
            b.extend_from_slice(&[0u8; 2]);
        }
        let m = parse_mesh(&b, MeshFormat::Auto).unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (8, 12));
        assert!(parse_mesh(&b[..b.len() - 1], MeshFormat::StlBinary).is_err());
    }

    #[test]
    fn ply_ascii_with_extra_properties() {
        let src = "ply\nformat ascii 1.0\ncomment test\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0 255\n1 0 0 255\n1 1 0 255\n0 1 0 255\n4 0 1 2 3\n";
        let m = parse_mesh(src.as_bytes(), MeshFormat::Auto).unwrap();
        assert_eq!(m.face_count(), 2);
        assert!((m.surface_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_ply_unsupported() {
        let src = "ply\nformat binary_little_endian 1.0\nend_header\n";
        assert!(matches!(
            parse_mesh(src.as_bytes(), MeshFormat::PlyAscii),
            Err(MeshError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn unit_scale_applied_at_parse() {
        let opts = ParseOptions {
            name: "inch".into(),
            unit_scale: 25.4,
        };
        let m = parse_mesh_with(ONE_TRIANGLE_STL.as_bytes(), MeshFormat::StlAscii, &opts).unwrap();
        assert!((m.vertices()[1].x - 25.4).abs() < 1e-12);
        assert_eq!(m.unit_scale(), 25.4);
    }

    #[test]
    fn empty_and_garbage_inputs() {
        assert!(parse_mesh(b"", MeshFormat::Auto).is_err());
        assert!(matches!(
            parse_mesh(b"\x00\x01garbage", MeshFormat::Auto),
            Err(MeshError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_mesh(b"solid x\nendsolid x\n", MeshFormat::StlAscii),
            Err(MeshError::EmptyMesh)
        ));
    }

    #[test]
    fn truncated_stl_and_ply_prefixes_always_error() {
        let ply = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        for src in [ONE_TRIANGLE_STL, ply] {
            // "endsolid" without its trailing name is already a complete STL
            let full = match src.find("endsolid") {
                Some(at) => at + "endsolid".len(),
                None => src.trim_end().len(),
            };
            for cut in 0..full {
                assert!(parse_mesh(&src.as_bytes()[..cut], MeshFormat::Auto).is_err(), "prefix {cut} of {src}");
            }
        }
    }
}
