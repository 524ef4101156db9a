use std::collections::BTreeSet;

use i_overlay::core::fill_rule::FillRule;
use i_overlay::float::simplify::SimplifyShape;
use nalgebra::{Point2, Vector3};
use serde::{Deserialize, Serialize};

use super::{TemplateError, TemplateSheet, DEFAULT_GRID_SPACING};
use crate::geom::{orient2d, polygon_area};
use crate::mesh::{Mesh, Topology};

pub const DEFAULT_FEATURE_ANGLE_DEG: f64 = 40.0;

/// Named views in a part's canonical frame (x longest, z shortest principal axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Front,
    Back,
    Top,
    Bottom,
    #[serde(alias = "side")]
    Right,
    Left,
}

impl View {
    pub const ALL: [View; 6] = [View::Front, View::Back, View::Top, View::Bottom, View::Right, View::Left];

    /// `(view_direction, view_up)`; the direction points from the eye into the scene.
    pub fn vectors(self) -> (Vector3<f64>, Vector3<f64>) {
        let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
        match self {
            View::Front => (y, z),
            View::Back => (-y, z),
            View::Top => (-z, y),
            View::Bottom => (z, -y),
            View::Right => (-x, z),
            View::Left => (x, z),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            View::Front => "front",
            View::Back => "back",
            View::Top => "top",
            View::Bottom => "bottom",
            View::Right => "right",
            View::Left => "left",
        }
    }
}

impl std::str::FromStr for View {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "front" => Ok(View::Front),
            "back" => Ok(View::Back),
            "top" => Ok(View::Top),
            "bottom" => Ok(View::Bottom),
            "right" | "side" => Ok(View::Right),
            "left" => Ok(View::Left),
            other => Err(TemplateError::InvalidView(format!("unknown view preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    pub scale: f64,
    /// Interior edges whose adjacent face normals differ by more than this are drawn.
    pub feature_angle_deg: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            scale: 1.0,
            feature_angle_deg: DEFAULT_FEATURE_ANGLE_DEG,
        }
    }
}

pub fn project_view(mesh: &Mesh, view: View, opts: &ProjectionOptions) -> Result<TemplateSheet, TemplateError> {
    let (d, up) = view.vectors();
    project_orthographic(mesh, &d, &up, opts)
}

/// Orthographic projection onto the plane perpendicular to `view_direction`.
///
/// Sheet x runs along `view_direction × view_up`, sheet y along `view_up`. The
/// silhouette is the boundary of the union of all projected triangles, so open scan
/// meshes work without hidden-line removal.
pub fn project_orthographic(
    mesh: &Mesh,
    view_direction: &Vector3<f64>,
    view_up: &Vector3<f64>,
    opts: &ProjectionOptions,
) -> Result<TemplateSheet, TemplateError> {
    if !(opts.scale > 0.0 && opts.scale.is_finite()) {
        return Err(TemplateError::InvalidScale(opts.scale));
    }
    let (d, up) = orthonormal_view(view_direction, view_up)?;
    let right = d.cross(&up);
    let s = opts.scale;
    let raw: Vec<Point2<f64>> = mesh
        .vertices()
        .iter()
        .map(|p| Point2::new(p.coords.dot(&right) * s, p.coords.dot(&up) * s))
        .collect();

    let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &raw {
        min = min.inf(p);
        max = max.sup(p);
    }
    let pts: Vec<Point2<f64>> = raw.iter().map(|p| Point2::from(p - min)).collect();

    let mut triangles: Vec<Vec<[f64; 2]>> = Vec::with_capacity(mesh.face_count());
    for (f, face) in mesh.faces().iter().enumerate() {
        let [a, b, c] = face.map(|i| pts[i]);
        let area2 = orient2d(&a, &b, &c);
        // faces seen edge-on contribute nothing to the union
        if area2.abs() <= 1e-12 * (2.0 * mesh.face_area(f) * s * s) || area2 == 0.0 {
            continue;
        }
        let tri = if area2 > 0.0 { [a, b, c] } else { [a, c, b] };
        triangles.push(tri.iter().map(|p| [p.x, p.y]).collect());
    }
    if triangles.is_empty() {
        return Err(TemplateError::DegenerateView);
    }

    let shapes = triangles.simplify_shape_as::<i64>(FillRule::NonZero);
    let mut silhouette = Vec::new();
    for shape in shapes {
        for (k, contour) in shape.into_iter().enumerate() {
            if contour.len() < 3 {
                continue;
            }
            let mut loop_: Vec<Point2<f64>> = contour.iter().map(|p| Point2::new(p[0], p[1])).collect();
            let area = polygon_area(&loop_);
            let want_ccw = k == 0;
            if (area > 0.0) != want_ccw {
                loop_.reverse();
            }
            let first = loop_[0];
            loop_.push(first);
            silhouette.push(loop_);
        }
    }
    let extent = max - min;
    let area: f64 = silhouette.iter().map(|p| polygon_area(p)).sum();
    if silhouette.is_empty() || area <= 1e-12 * extent.norm_squared().max(f64::MIN_POSITIVE) {
        return Err(TemplateError::DegenerateView);
    }

    let mut outline = silhouette.clone();
    outline.extend(feature_segments(mesh, &pts, opts.feature_angle_deg));

    Ok(TemplateSheet {
        source_mesh: mesh.name().to_string(),
        view_direction: d,
        view_up: up,
        scale: s,
        outline,
        silhouette,
        width: extent.x,
        height: extent.y,
        origin_offset: [min.x, min.y],
        grid_spacing: DEFAULT_GRID_SPACING,
        grid: None,
    })
}

fn orthonormal_view(d: &Vector3<f64>, up: &Vector3<f64>) -> Result<(Vector3<f64>, Vector3<f64>), TemplateError> {
    let finite = d.iter().chain(up.iter()).all(|v| v.is_finite());
    if !finite || (d.norm() - 1.0).abs() > 1e-6 || (up.norm() - 1.0).abs() > 1e-6 || d.dot(up).abs() > 1e-6 {
        return Err(TemplateError::InvalidView(
            "view direction and up must be orthonormal within 1e-6".into(),
        ));
    }
    let d = d.normalize();
    let up = (up - d * d.dot(up)).normalize();
    Ok((d, up))
}

/// Projected sharp, boundary and non-manifold edges as two-point polylines,
/// deduplicated and in a deterministic order.
fn feature_segments(mesh: &Mesh, pts: &[Point2<f64>], angle_deg: f64) -> Vec<Vec<Point2<f64>>> {
    let topo = Topology::new(mesh);
    let cos_limit = angle_deg.to_radians().cos();
    let normals: Vec<_> = (0..mesh.face_count()).map(|f| mesh.face_normal(f)).collect();
    let quant = |v: f64| (v * 1e6).round() as i64;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (e, [a, b]) in topo.edges().iter().enumerate() {
        let faces = topo.edge_faces(e);
        let sharp = match faces {
            [f, g] => match (normals[*f], normals[*g]) {
                (Some(n1), Some(n2)) => n1.dot(&n2) < cos_limit,
                _ => false,
            },
            _ => true,
        };
        if !sharp {
            continue;
        }
        let (p, q) = (pts[*a], pts[*b]);
        if (q - p).norm() <= 1e-9 {
            continue;
        }
        let mut key = [quant(p.x), quant(p.y), quant(q.x), quant(q.y)];
        if (key[2], key[3]) < (key[0], key[1]) {
            key = [key[2], key[3], key[0], key[1]];
        }
        if seen.insert(key) {
            out.push(vec![p, q]);
        }
    }
    out
}
