use std::collections::HashMap;

use super::Mesh;

/// Edge and incidence tables for a mesh. Built once, shared read-only.
#[derive(Debug, Clone)]
pub struct Topology {
    edges: Vec<[usize; 2]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    edge_faces: Vec<Vec<usize>>,
    face_edges: Vec<[usize; 3]>,
    vertex_faces: Vec<Vec<usize>>,
    face_component: Vec<usize>,
    component_count: usize,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Topology {
    pub fn new(mesh: &Mesh) -> Self {
        let mut edges = Vec::new();
        let mut edge_lookup = HashMap::new();
        let mut edge_faces: Vec<Vec<usize>> = Vec::new();
        let mut face_edges = Vec::with_capacity(mesh.face_count());
        let mut vertex_faces = vec![Vec::new(); mesh.vertex_count()];

        for (fi, f) in mesh.faces().iter().enumerate() {
            let mut fe = [0usize; 3];
            for k in 0..3 {
                let (a, b) = key(f[k], f[(k + 1) % 3]);
                let id = *edge_lookup.entry((a, b)).or_insert_with(|| {
                    edges.push([a, b]);
                    edge_faces.push(Vec::new());
                    edges.len() - 1
                });
                edge_faces[id].push(fi);
                fe[k] = id;
                vertex_faces[f[k]].push(fi);
            }
            face_edges.push(fe);
        }

        // union-find over faces through shared vertices
        let mut parent: Vec<usize> = (0..mesh.face_count()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for faces in &vertex_faces {
            if let Some((&first, rest)) = faces.split_first() {
                for &other in rest {
                    let ra = find(&mut parent, first);
                    let rb = find(&mut parent, other);
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut label = HashMap::new();
        let mut face_component = Vec::with_capacity(mesh.face_count());
        for f in 0..mesh.face_count() {
            let root = find(&mut parent, f);
            let next = label.len();
            face_component.push(*label.entry(root).or_insert(next));
        }
        let component_count = label.len();

        Topology {
            edges,
            edge_lookup,
            edge_faces,
            face_edges,
            vertex_faces,
            face_component,
            component_count,
        }
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Edge id of the undirected edge `a-b`, if it exists.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn edge_faces(&self, edge: usize) -> &[usize] {
        &self.edge_faces[edge]
    }

    /// Edge ids of a face; entry `k` is the edge from corner `k` to corner `k+1`.
    pub fn face_edges(&self, face: usize) -> [usize; 3] {
        self.face_edges[face]
    }

    pub fn vertex_faces(&self, vertex: usize) -> &[usize] {
        &self.vertex_faces[vertex]
    }

    pub fn face_component(&self, face: usize) -> usize {
        self.face_component[face]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn is_closed(&self) -> bool {
        self.edge_faces.iter().all(|f| f.len() == 2)
    }

    /// Face across `edge` from `face`, when the edge is manifold.
    pub fn opposite_face(&self, edge: usize, face: usize) -> Option<usize> {
        let faces = &self.edge_faces[edge];
        if faces.len() != 2 {
            return None;
        }
        if faces[0] == face {
            Some(faces[1])
        } else if faces[1] == face {
            Some(faces[0])
        } else {
            None
        }
    }
}
