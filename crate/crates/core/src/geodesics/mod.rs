//! Surface path lengths on triangle meshes.
//!
//! Cane and wire stock is cut to the length of a path that hugs the surface, not to
//! the straight-line distance. [`GeodesicSolver`] finds an initial path on a graph of
//! mesh vertices and edge midpoints, then optionally straightens it across faces.
//! [`ring_lengths`] measures closed cross-section loops for ring elements.

mod refine;
mod sections;

pub use sections::{ring_lengths, section_at, RingStation, SectionLoop};

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::{Arc, OnceLock};

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::ErrorCode;
use crate::geom::barycentric;
use crate::mesh::{Mesh, Topology};
use crate::spatial::TriangleBvh;

/// Barycentric components within this of 0 place a point on an edge or vertex.
const ON_FEATURE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeodesicError {
    #[error("endpoints lie on different connected components ({a_component} and {b_component})")]
    DisconnectedEndpoints { a_component: usize, b_component: usize },
    #[error("invalid surface point: {0}")]
    InvalidSurfacePoint(String),
    #[error("plane does not intersect the mesh")]
    NoIntersection,
    #[error("station spacing must be positive, got {0}")]
    InvalidSpacing(f64),
}

impl ErrorCode for GeodesicError {
    fn code(&self) -> &'static str {
        match self {
            GeodesicError::DisconnectedEndpoints { .. } => "DisconnectedEndpoints",
            GeodesicError::InvalidSurfacePoint(_) => "InvalidSurfacePoint",
            GeodesicError::NoIntersection => "NoIntersection",
            GeodesicError::InvalidSpacing(_) => "InvalidSpacing",
        }
    }
}

/// A point on a mesh face in barycentric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub face: usize,
    pub bary: [f64; 3],
}

impl SurfacePoint {
    pub fn new(mesh: &Mesh, face: usize, bary: [f64; 3]) -> Result<Self, GeodesicError> {
        let p = SurfacePoint { face, bary };
        p.validate(mesh)?;
        Ok(p)
    }

    /// Corner `k` of `face`.
    pub fn at_corner(mesh: &Mesh, face: usize, k: usize) -> Result<Self, GeodesicError> {
        let mut bary = [0.0; 3];
        bary[k.min(2)] = 1.0;
        Self::new(mesh, face, bary)
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<(), GeodesicError> {
        if self.face >= mesh.face_count() {
            return Err(GeodesicError::InvalidSurfacePoint(format!(
                "face {} out of range (mesh has {} faces)",
                self.face,
                mesh.face_count()
            )));
        }
        let sum: f64 = self.bary.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() >= 1e-9 {
            return Err(GeodesicError::InvalidSurfacePoint(format!("barycentric sum {sum} is not 1")));
        }
        if self.bary.iter().any(|b| *b < -1e-12) {
            return Err(GeodesicError::InvalidSurfacePoint("negative barycentric component".into()));
        }
        Ok(())
    }

    pub fn position(&self, mesh: &Mesh) -> Point3<f64> {
        let [a, b, c] = mesh.triangle(self.face);
        Point3::from(a.coords * self.bary[0] + b.coords * self.bary[1] + c.coords * self.bary[2])
    }
}

/// A polyline on the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub points: Vec<Point3<f64>>,
    /// Sum of segment lengths (mm).
    pub length: f64,
    /// Straight-line distance between the endpoints (mm).
    pub lower_bound: f64,
    /// Length of the unrefined graph path (mm).
    pub graph_length: f64,
    pub iterations: usize,
}

/// Wire form used by the CLI and the HTTP service.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicPathJson {
    pub length_mm: f64,
    pub lower_bound_mm: f64,
    pub polyline: Vec<[f64; 3]>,
}

impl From<&GeodesicPath> for GeodesicPathJson {
    fn from(p: &GeodesicPath) -> Self {
        GeodesicPathJson {
            length_mm: p.length,
            lower_bound_mm: p.lower_bound,
            polyline: p.points.iter().map(|q| [q.x, q.y, q.z]).collect(),
        }
    }
}

/// Where on the mesh a path point sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Loc {
    Vertex(usize),
    /// `t` measured from the lower-indexed endpoint of the edge.
    Edge { edge: usize, t: f64 },
    Face { face: usize, bary: [f64; 3] },
}

/// Shortest-path queries against one mesh. Build once, query from many threads.
#[derive(Debug)]
pub struct GeodesicSolver {
    mesh: Arc<Mesh>,
    topo: Topology,
    /// Vertices first, then `steiner` evenly spaced nodes inside each edge.
    node_pos: Vec<Point3<f64>>,
    steiner: usize,
    adj_start: Vec<usize>,
    adj: Vec<(usize, f64)>,
    bvh: OnceLock<TriangleBvh>,
}

impl GeodesicSolver {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let topo = Topology::new(&mesh);
        let nv = mesh.vertex_count();
        let mut node_pos: Vec<Point3<f64>> = mesh.vertices().to_vec();
        let steiner = steiner_count(mesh.face_count());
        for [a, b] in topo.edges() {
            let (pa, pb) = (mesh.vertices()[*a], mesh.vertices()[*b]);
            for k in 0..steiner {
                node_pos.push(pa + (pb - pa) * steiner_t(k, steiner));
            }
        }
        // consecutive nodes along each edge, then every pair of nodes of a face
        // that do not share an edge; other same-edge pairs are collinear and add nothing
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (e, [a, b]) in topo.edges().iter().enumerate() {
            let chain: Vec<usize> = std::iter::once(*a)
                .chain((0..steiner).map(|k| nv + e * steiner + k))
                .chain(std::iter::once(*b))
                .collect();
            for w in chain.windows(2) {
                pairs.push((w[0], w[1]));
                pairs.push((w[1], w[0]));
            }
        }
        // bit k set when the node lies on face edge fe[k]
        let mut nodes: Vec<(usize, u8)> = Vec::with_capacity(3 + 3 * steiner);
        for f in 0..mesh.face_count() {
            let fe = topo.face_edges(f);
            nodes.clear();
            nodes.extend(mesh.faces()[f].iter().map(|&v| {
                let mask = (0..3).filter(|&k| topo.edges()[fe[k]].contains(&v)).fold(0u8, |m, k| m | 1 << k);
                (v, mask)
            }));
            for (k, e) in fe.iter().enumerate() {
                nodes.extend((0..steiner).map(|i| (nv + e * steiner + i, 1u8 << k)));
            }
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    if nodes[i].1 & nodes[j].1 == 0 {
                        pairs.push((nodes[i].0, nodes[j].0));
                        pairs.push((nodes[j].0, nodes[i].0));
                    }
                }
            }
        }
        let mut adj_start = vec![0usize; node_pos.len() + 1];
        for &(u, _) in &pairs {
            adj_start[u + 1] += 1;
        }
        for i in 0..node_pos.len() {
            adj_start[i + 1] += adj_start[i];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![(0usize, 0.0); pairs.len()];
        for &(u, v) in &pairs {
            adj[fill[u]] = (v, (node_pos[u] - node_pos[v]).norm());
            fill[u] += 1;
        }
        GeodesicSolver {
            mesh,
            topo,
            node_pos,
            steiner,
            adj_start,
            adj,
            bvh: OnceLock::new(),
        }
    }

    pub fn from_mesh(mesh: &Mesh) -> Self {
        Self::new(Arc::new(mesh.clone()))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub(crate) fn topology(&self) -> &Topology {
        &self.topo
    }

    /// Surface point closest to `p`.
    pub fn surface_point_near(&self, p: &Point3<f64>) -> SurfacePoint {
        let bvh = self.bvh.get_or_init(|| TriangleBvh::new(&self.mesh));
        let hit = bvh.closest_point(p);
        let [a, b, c] = self.mesh.triangle(hit.face);
        let mut bary = barycentric(&hit.point, &a, &b, &c).map(|v| v.max(0.0));
        let s: f64 = bary.iter().sum();
        bary.iter_mut().for_each(|v| *v /= s);
        SurfacePoint { face: hit.face, bary }
    }

    /// Shortest surface path from `a` to `b`; with `refine` the graph path is
    /// straightened across faces and never gets longer.
    pub fn distance(&self, a: &SurfacePoint, b: &SurfacePoint, refine: bool) -> Result<GeodesicPath, GeodesicError> {
        a.validate(&self.mesh)?;
        b.validate(&self.mesh)?;
        let (ca, cb) = (self.topo.face_component(a.face), self.topo.face_component(b.face));
        if ca != cb {
            return Err(GeodesicError::DisconnectedEndpoints {
                a_component: ca,
                b_component: cb,
            });
        }
        let la = self.classify(a);
        let lb = self.classify(b);
        let pa = self.position(&la);
        let pb = self.position(&lb);
        let lower_bound = (pb - pa).norm();
        if lower_bound == 0.0 {
            return Ok(GeodesicPath {
                points: vec![pa],
                length: 0.0,
                lower_bound,
                graph_length: 0.0,
                iterations: 0,
            });
        }
        // work in a fixed endpoint order so that swapping a and b only reverses the path
        let swap = (b.face, b.bary.map(f64::to_bits)) < (a.face, a.bary.map(f64::to_bits));
        let (la, lb) = if swap { (lb, la) } else { (la, lb) };
        let locs = self.graph_path(&la, &lb);
        let graph_length = self.path_length(&locs);
        let (mut locs, graph_length, iterations) = if refine {
            // straightening finds a local minimum, so start it from both graph paths
            let mut back = self.graph_path(&lb, &la);
            back.reverse();
            let back_length = self.path_length(&back);
            let (fwd, i1) = refine::straighten(self, locs);
            let (rev, i2) = refine::straighten(self, back);
            if self.path_length(&rev) < self.path_length(&fwd) {
                (rev, back_length, i2)
            } else {
                (fwd, graph_length, i1)
            }
        } else {
            (locs, graph_length, 0)
        };
        if swap {
            locs.reverse();
        }
        let points: Vec<Point3<f64>> = locs.iter().map(|l| self.position(l)).collect();
        let length = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        Ok(GeodesicPath {
            points,
            length,
            lower_bound,
            graph_length,
            iterations,
        })
    }

    pub(crate) fn classify(&self, p: &SurfacePoint) -> Loc {
        let face = self.mesh.faces()[p.face];
        let zero: Vec<usize> = (0..3).filter(|&k| p.bary[k] <= ON_FEATURE).collect();
        match zero.len() {
            0 => Loc::Face {
                face: p.face,
                bary: p.bary,
            },
            1 => {
                let k = zero[0];
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let edge = self.topo.edge_id(face[i], face[j]).expect("face edge exists");
                let lo_is_i = face[i] < face[j];
                let (wi, wj) = (p.bary[i], p.bary[j]);
                let t_hi = (if lo_is_i { wj } else { wi }) / (wi + wj);
                Loc::Edge { edge, t: t_hi }
            }
            _ => {
                let k = (0..3).max_by(|&x, &y| p.bary[x].total_cmp(&p.bary[y])).unwrap_or(0);
                Loc::Vertex(face[k])
            }
        }
    }

    pub(crate) fn position(&self, l: &Loc) -> Point3<f64> {
        let v = self.mesh.vertices();
        match *l {
            Loc::Vertex(i) => v[i],
            Loc::Edge { edge, t } => {
                let [a, b] = self.topo.edges()[edge];
                Point3::from(v[a].coords * (1.0 - t) + v[b].coords * t)
            }
            Loc::Face { face, bary } => SurfacePoint { face, bary }.position(&self.mesh),
        }
    }

    pub(crate) fn faces_of<'a>(&'a self, l: &'a Loc) -> &'a [usize] {
        match l {
            Loc::Vertex(v) => self.topo.vertex_faces(*v),
            Loc::Edge { edge, .. } => self.topo.edge_faces(*edge),
            Loc::Face { face, .. } => std::slice::from_ref(face),
        }
    }

    pub(crate) fn shared_face(&self, a: &Loc, b: &Loc) -> Option<usize> {
        let fb = self.faces_of(b);
        self.faces_of(a).iter().copied().find(|f| fb.contains(f))
    }

    pub(crate) fn path_length(&self, locs: &[Loc]) -> f64 {
        locs.windows(2)
            .map(|w| (self.position(&w[1]) - self.position(&w[0])).norm())
            .sum()
    }

    fn node_loc(&self, node: usize) -> Loc {
        let nv = self.mesh.vertex_count();
        if node < nv {
            Loc::Vertex(node)
        } else {
            let k = node - nv;
            Loc::Edge {
                edge: k / self.steiner,
                t: steiner_t(k % self.steiner, self.steiner),
            }
        }
    }

    fn attach(&self, l: &Loc) -> Vec<usize> {
        let nv = self.mesh.vertex_count();
        let mut nodes: Vec<usize> = self
            .faces_of(l)
            .iter()
            .flat_map(|&f| face_nodes(&self.mesh, &self.topo, nv, self.steiner, f))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Dijkstra over vertices and edge Steiner points, entered and left through the
    /// faces containing each endpoint.
    fn graph_path(&self, a: &Loc, b: &Loc) -> Vec<Loc> {
        let pa = self.position(a);
        let pb = self.position(b);
        let mut best = if self.shared_face(a, b).is_some() {
            (pb - pa).norm()
        } else {
            f64::INFINITY
        };
        let mut best_last: Option<usize> = None;
        let targets = self.attach(b);
        let n = self.node_pos.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for u in self.attach(a) {
            let d = (self.node_pos[u] - pa).norm();
            if d < dist[u] {
                dist[u] = d;
                heap.push(Reverse((Key(d), u)));
            }
        }
        while let Some(Reverse((Key(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if d >= best {
                break;
            }
            if targets.binary_search(&u).is_ok() {
                let total = d + (pb - self.node_pos[u]).norm();
                if total < best {
                    best = total;
                    best_last = Some(u);
                }
            }
            for &(v, w) in &self.adj[self.adj_start[u]..self.adj_start[u + 1]] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(Reverse((Key(nd), v)));
                }
            }
        }
        let mut locs = vec![*b];
        let mut cur = best_last;
        while let Some(u) = cur {
            locs.push(self.node_loc(u));
            cur = (prev[u] != usize::MAX).then_some(prev[u]);
        }
        locs.push(*a);
        locs.reverse();
        locs
    }
}

/// Upper bound on directed graph arcs, spread over the faces.
const ARC_BUDGET: usize = 1 << 20;
const MAX_STEINER: usize = 12;

/// Interior nodes per edge. A sparse graph can route around the wrong side of a
/// corner on coarse meshes, and straightening keeps that choice, so coarse meshes
/// get dense edges while fine ones rely on their vertices.
fn steiner_count(faces: usize) -> usize {
    let per_face = ((ARC_BUDGET / faces.max(1)) as f64).sqrt() as usize;
    (per_face / 3).saturating_sub(1).clamp(1, MAX_STEINER)
}

fn steiner_t(k: usize, steiner: usize) -> f64 {
    (k + 1) as f64 / (steiner + 1) as f64
}

/// Corner vertices and edge Steiner points of a face, as graph node ids.
fn face_nodes(mesh: &Mesh, topo: &Topology, nv: usize, steiner: usize, f: usize) -> Vec<usize> {
    let mut nodes = mesh.faces()[f].to_vec();
    for e in topo.face_edges(f) {
        nodes.extend((0..steiner).map(|k| nv + e * steiner + k));
    }
    nodes
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// One-shot convenience over [`GeodesicSolver`].
pub fn geodesic_distance(
    mesh: &Mesh,
    a: &SurfacePoint,
    b: &SurfacePoint,
    refine: bool,
) -> Result<GeodesicPath, GeodesicError> {
    GeodesicSolver::from_mesh(mesh).distance(a, b, refine)
}

/// Surface point of `mesh` located at (or nearest to) vertex `v`.
pub fn vertex_point(mesh: &Mesh, v: usize) -> Option<SurfacePoint> {
    mesh.faces().iter().enumerate().find_map(|(f, face)| {
        face.iter().position(|&i| i == v).map(|k| {
            let mut bary = [0.0; 3];
            bary[k] = 1.0;
            SurfacePoint { face: f, bary }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    fn corner(mesh: &Mesh, p: [f64; 3]) -> SurfacePoint {
        let v = mesh
            .vertices()
            .iter()
            .position(|q| (q - Point3::from(p)).norm() < 1e-12)
            .unwrap();
        vertex_point(mesh, v).unwrap()
    }

    #[test]
    fn same_triangle_is_straight() {
        let m = primitives::plate("p", 10.0, 10.0, 1, 1);
        let a = SurfacePoint::new(&m, 0, [0.6, 0.3, 0.1]).unwrap();
        let b = SurfacePoint::new(&m, 0, [0.1, 0.2, 0.7]).unwrap();
        for refine in [false, true] {
            let p = geodesic_distance(&m, &a, &b, refine).unwrap();
            assert!((p.length - p.lower_bound).abs() < 1e-12);
            assert_eq!(p.points.len(), 2);
        }
    }

    #[test]
    fn same_point_twice() {
        let m = primitives::cuboid("c", [1.0, 1.0, 1.0]);
        let a = SurfacePoint::new(&m, 3, [0.2, 0.3, 0.5]).unwrap();
        let p = geodesic_distance(&m, &a, &a, true).unwrap();
        assert_eq!(p.length, 0.0);
        assert_eq!(p.points.len(), 1);
    }

    #[test]
    fn cube_corners_unfold_to_root_five() {
        let m = primitives::cuboid("c", [1.0, 1.0, 1.0]);
        let a = corner(&m, [0.0, 0.0, 0.0]);
        let b = corner(&m, [1.0, 1.0, 1.0]);
        let raw = geodesic_distance(&m, &a, &b, false).unwrap();
        let refined = geodesic_distance(&m, &a, &b, true).unwrap();
        let exact = 5f64.sqrt();
        assert!(refined.length <= raw.length + 1e-9);
        assert!(refined.length >= exact - 1e-6);
        assert!(refined.length <= exact * 1.02, "{}", refined.length);
        assert!(refined.length >= 3f64.sqrt());
    }

    #[test]
    fn subdivided_cube_corners() {
        let m = primitives::subdivided_cuboid("c", [1.0, 1.0, 1.0], 6);
        let a = corner(&m, [0.0, 0.0, 0.0]);
        let b = corner(&m, [1.0, 1.0, 1.0]);
        let refined = geodesic_distance(&m, &a, &b, true).unwrap();
        assert!(refined.length >= 5f64.sqrt() - 1e-6);
        assert!(refined.length <= 5f64.sqrt() * 1.02, "{}", refined.length);
        assert!(refined.length <= refined.graph_length + 1e-9);
    }

    #[test]
    fn box_corners_take_the_shortest_unfolding() {
        // unfoldings of a 1×2×3 box give √((1+2)²+3²), √((1+3)²+2²), √((2+3)²+1²)
        let exact = [18f64, 20.0, 26.0].map(f64::sqrt).into_iter().fold(f64::INFINITY, f64::min);
        for n in [1, 4, 9] {
            let m = primitives::subdivided_cuboid("b", [1.0, 2.0, 3.0], n);
            let a = corner(&m, [0.0, 0.0, 0.0]);
            let b = corner(&m, [1.0, 2.0, 3.0]);
            let p = geodesic_distance(&m, &a, &b, true).unwrap();
            assert!((p.length - exact).abs() < 1e-9, "n={n}: {}", p.length);
            assert!(p.graph_length > exact + 1e-3);
        }
    }

    #[test]
    fn disconnected_components() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(5.0, 0.0, 0.0),
            Point3::new(6.0, 0.0, 0.0),
            Point3::new(5.0, 1.0, 0.0),
        ];
        let m = Mesh::new("two", v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let a = SurfacePoint::new(&m, 0, [1.0 / 3.0; 3]).unwrap();
        let b = SurfacePoint::new(&m, 1, [1.0 / 3.0; 3]).unwrap();
        assert_eq!(
            geodesic_distance(&m, &a, &b, true).unwrap_err(),
            GeodesicError::DisconnectedEndpoints {
                a_component: 0,
                b_component: 1
            }
        );
    }

    #[test]
    fn invalid_points_rejected() {
        let m = primitives::cuboid("c", [1.0, 1.0, 1.0]);
        assert!(SurfacePoint::new(&m, 99, [1.0, 0.0, 0.0]).is_err());
        assert!(SurfacePoint::new(&m, 0, [0.5, 0.5, 0.5]).is_err());
        assert!(SurfacePoint::new(&m, 0, [1.5, -0.5, 0.0]).is_err());
    }

    #[test]
    fn flat_plate_geodesic_is_euclidean() {
        let m = primitives::plate("p", 100.0, 60.0, 7, 5);
        let solver = GeodesicSolver::from_mesh(&m);
        let a = solver.surface_point_near(&Point3::new(3.0, 4.0, 0.0));
        let b = solver.surface_point_near(&Point3::new(91.0, 55.0, 0.0));
        let p = solver.distance(&a, &b, true).unwrap();
        assert!((p.length - p.lower_bound).abs() < 1e-7, "{} vs {}", p.length, p.lower_bound);
    }
}
