use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use serde::Serialize;

use super::GeodesicError;
use crate::mesh::{Mesh, Topology};

/// One connected polyline of a plane section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionLoop {
    pub points: Vec<Point3<f64>>,
    pub perimeter: f64,
    /// False when the section runs off an open mesh boundary.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingStation {
    /// Plane offset along the normal (mm).
    pub height: f64,
    /// Perimeter of the largest loop (mm).
    pub circumference: f64,
    /// Every loop at this station, longest first.
    pub loops: Vec<SectionLoop>,
    pub has_open_loops: bool,
}

/// Intersects `mesh` with the plane `{p : p·normal = height}`.
///
/// Vertices exactly on the plane count as above it, so each crossing lies strictly
/// inside or at the upper end of an edge and loops never branch.
pub fn section_at(mesh: &Mesh, normal: &Vector3<f64>, height: f64) -> Result<Vec<SectionLoop>, GeodesicError> {
    let topo = Topology::new(mesh);
    section_with(mesh, &topo, &normal.normalize(), height)
}

fn section_with(mesh: &Mesh, topo: &Topology, n: &Vector3<f64>, height: f64) -> Result<Vec<SectionLoop>, GeodesicError> {
    let d: Vec<f64> = mesh.vertices().iter().map(|p| p.coords.dot(n) - height).collect();
    let above = |v: usize| d[v] >= 0.0;
    let crossing = |e: usize| {
        let [a, b] = topo.edges()[e];
        let t = d[a] / (d[a] - d[b]);
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        Point3::from(pa.coords + (pb - pa) * t)
    };

    // each face with mixed sides contributes one segment between two crossed edges
    let mut segments: Vec<[usize; 2]> = Vec::new();
    for f in 0..mesh.face_count() {
        let fe = topo.face_edges(f);
        let crossed: Vec<usize> = fe
            .iter()
            .copied()
            .filter(|&e| {
                let [a, b] = topo.edges()[e];
                above(a) != above(b)
            })
            .collect();
        if crossed.len() == 2 {
            segments.push([crossed[0], crossed[1]]);
        }
    }
    if segments.is_empty() {
        return Err(GeodesicError::NoIntersection);
    }

    let mut at_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, s) in segments.iter().enumerate() {
        for e in s {
            at_edge.entry(*e).or_default().push(i);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut loops = Vec::new();
    // start open chains at their dangling ends first
    let mut order: Vec<usize> = (0..segments.len())
        .filter(|&i| segments[i].iter().any(|e| at_edge[e].len() == 1))
        .collect();
    order.extend(0..segments.len());
    for seed in order {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        let [e0, e1] = segments[seed];
        let (start, mut cur) = if at_edge[&e1].len() == 1 { (e1, e0) } else { (e0, e1) };
        let mut edges = vec![start, cur];
        let closed = loop {
            let next = at_edge[&cur].iter().copied().find(|&s| !used[s]);
            let Some(sid) = next else {
                break cur == start;
            };
            used[sid] = true;
            let [a, b] = segments[sid];
            cur = if a == cur { b } else { a };
            edges.push(cur);
            if cur == start {
                break true;
            }
        };
        let points: Vec<Point3<f64>> = edges.iter().map(|&e| crossing(e)).collect();
        let perimeter = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        loops.push(SectionLoop { points, perimeter, closed });
    }
    // a plane that only touches the mesh at a vertex leaves a zero-length loop
    let touch = 1e-9 * mesh.bounding_box().diagonal();
    loops.retain(|l| l.perimeter > touch);
    if loops.is_empty() {
        return Err(GeodesicError::NoIntersection);
    }
    loops.sort_by(|a, b| b.perimeter.total_cmp(&a.perimeter));
    Ok(loops)
}

/// Sections at every multiple of `spacing` along `normal` that meets the mesh.
pub fn ring_lengths(mesh: &Mesh, normal: &Vector3<f64>, spacing: f64) -> Result<Vec<RingStation>, GeodesicError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(GeodesicError::InvalidSpacing(spacing));
    }
    let n = normal.normalize();
    if !n.iter().all(|v| v.is_finite()) {
        return Err(GeodesicError::InvalidSpacing(spacing));
    }
    let topo = Topology::new(mesh);
    let (lo, hi) = mesh
        .vertices()
        .iter()
        .map(|p| p.coords.dot(&n))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| (lo.min(h), hi.max(h)));
    let first = (lo / spacing).ceil() as i64;
    let last = (hi / spacing).floor() as i64;
    let mut out = Vec::new();
    for k in first..=last {
        let height = k as f64 * spacing;
        match section_with(mesh, &topo, &n, height) {
            Ok(loops) => out.push(RingStation {
                height,
                circumference: loops.first().map_or(0.0, |l| l.perimeter),
                has_open_loops: loops.iter().any(|l| !l.closed),
                loops,
            }),
            Err(GeodesicError::NoIntersection) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
