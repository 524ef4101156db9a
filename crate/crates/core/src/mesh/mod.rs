//! Indexed triangle meshes: the single geometry currency of the toolkit.
//!
//! Design meshes, public-domain figurine parts and photogrammetry scans all
//! arrive here. Vertices are stored in millimetres; `unit_scale` records how
//! many millimetres one unit of the source file represented.

mod export;
mod parse;
mod topology;

pub use export::{export_mesh_json, export_obj};
pub use parse::{detect_format, load_mesh, parse_mesh, parse_mesh_with, MeshFormat, ParseOptions};
pub use topology::Topology;

use nalgebra::{Point3, Vector3};
use serde::Serialize;

use crate::error::ErrorCode;
use crate::geom;
use crate::orientation::Pose;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed file at {location}: {message}")]
    MalformedFile { location: String, message: String },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    InvalidIndex {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex index")]
    DegenerateFace { face: usize },
    #[error("vertex {index} has a non-finite coordinate")]
    NonFiniteVertex { index: usize },
    #[error("unit scale must be positive and finite, got {0}")]
    InvalidUnitScale(f64),
}

impl ErrorCode for MeshError {
    fn code(&self) -> &'static str {
        match self {
            MeshError::UnsupportedFormat(_) => "UnsupportedFormat",
            MeshError::MalformedFile { .. } => "MalformedFile",
            MeshError::EmptyMesh => "EmptyMesh",
            MeshError::InvalidIndex { .. } => "InvalidIndex",
            MeshError::DegenerateFace { .. } => "DegenerateFace",
            MeshError::NonFiniteVertex { .. } => "NonFiniteVertex",
            MeshError::InvalidUnitScale(_) => "InvalidUnitScale",
        }
    }
}

/// An immutable, validated triangle mesh.
///
/// Invariants: at least one face, every face index is below the vertex count,
/// no face repeats an index, all coordinates are finite and `unit_scale > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    name: String,
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    unit_scale: f64,
}

impl Mesh {
    /// Builds a mesh from millimetre vertices with `unit_scale = 1`.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Point3<f64>>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        Self::with_unit_scale(name, vertices, faces, 1.0)
    }

    pub fn with_unit_scale(
        name: impl Into<String>,
        vertices: Vec<Point3<f64>>,
        faces: Vec<[usize; 3]>,
        unit_scale: f64,
    ) -> Result<Self, MeshError> {
        if !(unit_scale > 0.0 && unit_scale.is_finite()) {
            return Err(MeshError::InvalidUnitScale(unit_scale));
        }
        if faces.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        if let Some(index) = vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(MeshError::NonFiniteVertex { index });
        }
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i >= n) {
                return Err(MeshError::InvalidIndex {
                    face: fi,
                    index,
                    vertex_count: n,
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face: fi });
            }
        }
        Ok(Mesh {
            name: name.into(),
            vertices,
            faces,
            unit_scale,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn unit_scale(&self) -> f64 {
        self.unit_scale
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn triangle(&self, face: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        geom::triangle_area(&a, &b, &c)
    }

    /// Unit face normal, `None` for geometrically degenerate (zero-area) faces.
    pub fn face_normal(&self, face: usize) -> Option<Vector3<f64>> {
        let [a, b, c] = self.triangle(face);
        geom::triangle_normal(&a, &b, &c)
    }

    pub fn face_centroid(&self, face: usize) -> Point3<f64> {
        let [a, b, c] = self.triangle(face);
        Point3::from((a.coords + b.coords + c.coords) / 3.0)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::from_points(self.vertices.iter())
    }

    /// Returns a copy with every vertex mapped through `pose`.
    pub fn transformed(&self, pose: &Pose) -> Mesh {
        Mesh {
            name: self.name.clone(),
            vertices: self.vertices.iter().map(|v| pose.apply(v)).collect(),
            faces: self.faces.clone(),
            unit_scale: self.unit_scale,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Mesh {
        self.name = name.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingBox {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl BoundingBox {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3<f64>>) -> Self {
        let mut min = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut max = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = min.inf(p);
            max = max.sup(p);
        }
        BoundingBox { min, max }
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }
}

/// Summary statistics used by `inspect` and the service catalog.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshStats {
    pub vertex_count: usize,
    pub face_count: usize,
    pub bounding_box: BoundingBox,
    pub surface_area: f64,
    pub is_closed: bool,
    pub connected_components: usize,
}

/// Computes [`MeshStats`]. A mesh is closed when every edge is shared by
/// exactly two faces; components are faces connected through shared vertices.
pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    let topo = Topology::new(mesh);
    MeshStats {
        vertex_count: mesh.vertex_count(),
        face_count: mesh.face_count(),
        bounding_box: mesh.bounding_box(),
        surface_area: mesh.surface_area(),
        is_closed: topo.is_closed(),
        connected_components: topo.component_count(),
    }
}
