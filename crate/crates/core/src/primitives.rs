//! Procedural test and demo meshes (millimetres, outward-facing winding).

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Point3;

use crate::mesh::Mesh;

fn build(name: &str, vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Mesh {
    Mesh::new(name, vertices, faces).expect("primitive generators emit valid meshes")
}

/// Axis-aligned box spanning `[0, size]` on each axis, 8 vertices and 12 triangles.
pub fn cuboid(name: &str, size: [f64; 3]) -> Mesh {
    subdivided_cuboid(name, size, 1)
}

/// Axis-aligned box centred on the origin.
pub fn centered_box(name: &str, size: [f64; 3]) -> Mesh {
    let m = cuboid(name, size);
    let shift = nalgebra::Vector3::new(size[0], size[1], size[2]) * 0.5;
    let v = m.vertices().iter().map(|p| p - shift).collect();
    build(name, v, m.faces().to_vec())
}

/// Box spanning `[0, size]` with each face split into an `n × n` grid of quads
/// (two triangles each), vertices shared along seams.
pub fn subdivided_cuboid(name: &str, size: [f64; 3], n: usize) -> Mesh {
    let n = n.max(1);
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut vid = |lattice: [usize; 3], vertices: &mut Vec<Point3<f64>>| -> usize {
        *index.entry(lattice).or_insert_with(|| {
            vertices.push(Point3::new(
                size[0] * lattice[0] as f64 / n as f64,
                size[1] * lattice[1] as f64 / n as f64,
                size[2] * lattice[2] as f64 / n as f64,
            ));
            vertices.len() - 1
        })
    };
    // (normal axis, side, u axis, v axis) with u × v pointing outward
    let sides: [(usize, usize, usize, usize); 6] = [
        (2, 0, 1, 0),
        (2, n, 0, 1),
        (1, 0, 0, 2),
        (1, n, 2, 0),
        (0, 0, 2, 1),
        (0, n, 1, 2),
    ];
    for &(axis, side, u, v) in &sides {
        for i in 0..n {
            for j in 0..n {
                let corner = |di: usize, dj: usize| {
                    let mut l = [0usize; 3];
                    l[axis] = side;
                    l[u] = i + di;
                    l[v] = j + dj;
                    l
                };
                let a = vid(corner(0, 0), &mut vertices);
                let b = vid(corner(1, 0), &mut vertices);
                let c = vid(corner(1, 1), &mut vertices);
                let d = vid(corner(0, 1), &mut vertices);
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
    }
    build(name, vertices, faces)
}

/// Flat rectangular plate in the `z = 0` plane, `[0, width] × [0, height]`,
/// with `nx × ny` quads. Normals point +z.
pub fn plate(name: &str, width: f64, height: f64, nx: usize, ny: usize) -> Mesh {
    let (nx, ny) = (nx.max(1), ny.max(1));
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(
                width * i as f64 / nx as f64,
                height * j as f64 / ny as f64,
                0.0,
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build(name, vertices, faces)
}

/// Cylinder around the z axis from `z = 0` to `z = height`, optionally capped.
pub fn cylinder(name: &str, radius: f64, height: f64, segments: usize, rings: usize, capped: bool) -> Mesh {
    let segments = segments.max(3);
    let rings = rings.max(1);
    let mut vertices = Vec::new();
    for r in 0..=rings {
        let z = height * r as f64 / rings as f64;
        for s in 0..segments {
            let t = 2.0 * PI * s as f64 / segments as f64;
            vertices.push(Point3::new(radius * t.cos(), radius * t.sin(), z));
        }
    }
    let id = |r: usize, s: usize| r * segments + (s % segments);
    let mut faces = Vec::new();
    for r in 0..rings {
        for s in 0..segments {
            faces.push([id(r, s), id(r, s + 1), id(r + 1, s + 1)]);
            faces.push([id(r, s), id(r + 1, s + 1), id(r + 1, s)]);
        }
    }
    if capped {
        let bottom = vertices.len();
        vertices.push(Point3::new(0.0, 0.0, 0.0));
        let top = vertices.len();
        vertices.push(Point3::new(0.0, 0.0, height));
        for s in 0..segments {
            faces.push([bottom, id(0, s + 1), id(0, s)]);
            faces.push([top, id(rings, s), id(rings, s + 1)]);
        }
    }
    build(name, vertices, faces)
}

/// Axis-aligned ellipsoid centred on the origin (UV parameterisation).
pub fn ellipsoid(name: &str, radii: [f64; 3], segments: usize, rings: usize) -> Mesh {
    let segments = segments.max(3);
    let rings = rings.max(2);
    let mut vertices = vec![Point3::new(0.0, 0.0, radii[2])];
    for r in 1..rings {
        let phi = PI * r as f64 / rings as f64;
        for s in 0..segments {
            let theta = 2.0 * PI * s as f64 / segments as f64;
            vertices.push(Point3::new(
                radii[0] * phi.sin() * theta.cos(),
                radii[1] * phi.sin() * theta.sin(),
                radii[2] * phi.cos(),
            ));
        }
    }
    let south = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, -radii[2]));
    let id = |r: usize, s: usize| 1 + (r - 1) * segments + (s % segments);
    let mut faces = Vec::new();
    for s in 0..segments {
        faces.push([0, id(1, s), id(1, s + 1)]);
    }
    for r in 1..rings - 1 {
        for s in 0..segments {
            faces.push([id(r, s), id(r + 1, s), id(r + 1, s + 1)]);
            faces.push([id(r, s), id(r + 1, s + 1), id(r, s + 1)]);
        }
    }
    for s in 0..segments {
        faces.push([south, id(rings - 1, s + 1), id(rings - 1, s)]);
    }
    build(name, vertices, faces)
}

pub fn uv_sphere(name: &str, radius: f64, segments: usize, rings: usize) -> Mesh {
    ellipsoid(name, [radius; 3], segments, rings)
}

/// An asymmetric limb-like solid: a tapered, bent tube with capped ends.
/// Useful wherever a part without rotational or mirror symmetry is needed.
pub fn bent_limb(name: &str, length: f64, radius: f64) -> Mesh {
    let segments = 24;
    let rings = 32;
    let mut vertices = Vec::new();
    let centre = |t: f64| Point3::new(0.25 * length * (t * PI).sin() * t, 0.08 * length * t * t, length * t);
    for r in 0..=rings {
        let t = r as f64 / rings as f64;
        let c = centre(t);
        let rad = radius * (1.0 - 0.45 * t) * (1.0 + 0.15 * (3.0 * PI * t).sin());
        for s in 0..segments {
            let th = 2.0 * PI * s as f64 / segments as f64;
            let squash = 1.0 + 0.35 * t;
            vertices.push(Point3::new(c.x + rad * squash * th.cos(), c.y + rad * th.sin(), c.z));
        }
    }
    let id = |r: usize, s: usize| r * segments + (s % segments);
    let mut faces = Vec::new();
    for r in 0..rings {
        for s in 0..segments {
            faces.push([id(r, s), id(r, s + 1), id(r + 1, s + 1)]);
            faces.push([id(r, s), id(r + 1, s + 1), id(r + 1, s)]);
        }
    }
    let bottom = vertices.len();
    vertices.push(centre(0.0));
    let top = vertices.len();
    vertices.push(centre(1.0));
    for s in 0..segments {
        faces.push([bottom, id(0, s + 1), id(0, s)]);
        faces.push([top, id(rings, s), id(rings, s + 1)]);
    }
    build(name, vertices, faces)
}
