//! Path straightening.
//!
//! Runs of edge crossings between anchors (endpoints and vertices) are unfolded
//! into the plane and replaced by the shortest path through the strip (funnel
//! algorithm). A path that still passes through a vertex is rerouted around the
//! other side of that vertex when the unfolded angle there is below π. Every step
//! is accepted only if it does not lengthen the path.

use std::f64::consts::PI;

use nalgebra::{Point2, Point3, Vector2, Vector3};

use super::{GeodesicSolver, Loc};
use crate::geom::{barycentric, orient2d};

const MAX_ITERATIONS: usize = 100;
const MIN_IMPROVEMENT: f64 = 1e-7;
const SNAP: f64 = 1e-9;

pub(super) fn straighten(s: &GeodesicSolver, mut locs: Vec<Loc>) -> (Vec<Loc>, usize) {
    let mut len = s.path_length(&locs);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut next = locs.clone();
        drop_redundant(s, &mut next);
        straighten_runs(s, &mut next);
        drop_redundant(s, &mut next);
        relax_vertices(s, &mut next);
        drop_redundant(s, &mut next);
        let l = s.path_length(&next);
        let improvement = len - l;
        if improvement > 0.0 {
            locs = next;
            len = l;
        }
        if improvement < MIN_IMPROVEMENT {
            break;
        }
    }
    (locs, iterations)
}

/// Removes interior points whose neighbours already share a face.
fn drop_redundant(s: &GeodesicSolver, locs: &mut Vec<Loc>) {
    let mut i = 1;
    while i + 1 < locs.len() {
        if locs[i] == locs[i - 1] || s.shared_face(&locs[i - 1], &locs[i + 1]).is_some() {
            locs.remove(i);
            i = i.saturating_sub(1).max(1);
        } else {
            i += 1;
        }
    }
    if locs.len() == 2 && locs[0] == locs[1] {
        locs.pop();
    }
}

fn straighten_runs(s: &GeodesicSolver, locs: &mut Vec<Loc>) {
    if locs.len() < 3 {
        return;
    }
    let last = locs.len() - 1;
    let mut out = vec![locs[0]];
    let mut start = 0;
    for j in 1..=last {
        if j == last || matches!(locs[j], Loc::Vertex(_)) {
            let run = &locs[start..=j];
            let replacement = funnel_run(s, run).filter(|new| s.path_length(new) <= s.path_length(run));
            match replacement {
                Some(new) => out.extend_from_slice(&new[1..]),
                None => out.extend_from_slice(&run[1..]),
            }
            start = j;
        }
    }
    *locs = out;
}

/// Unfolded strip: one portal per crossed edge, as (right, left) 2D points and vertex ids.
struct Strip {
    start: Point2<f64>,
    end: Point2<f64>,
    portals: Vec<([Point2<f64>; 2], [usize; 2])>,
}

fn unfold_point(tri3: &[Point3<f64>; 3], tri2: &[Point2<f64>; 3], p: &Point3<f64>) -> Point2<f64> {
    let b = barycentric(p, &tri3[0], &tri3[1], &tri3[2]);
    Point2::from(tri2[0].coords * b[0] + tri2[1].coords * b[1] + tri2[2].coords * b[2])
}

fn build_strip(s: &GeodesicSolver, run: &[Loc]) -> Option<Strip> {
    let mesh = s.mesh();
    let topo = s.topology();
    let k = run.len() - 2;
    let edges: Vec<usize> = run[1..=k]
        .iter()
        .map(|l| match l {
            Loc::Edge { edge, .. } => Some(*edge),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let first: Vec<usize> = topo
        .edge_faces(edges[0])
        .iter()
        .copied()
        .filter(|f| s.faces_of(&run[0]).contains(f))
        .collect();
    let [f0] = first[..] else { return None };

    // place the first face isometrically
    let fv = mesh.faces()[f0];
    let t3 = mesh.triangle(f0);
    let e = t3[1] - t3[0];
    let len = e.norm();
    let ex = e / len;
    let ac = t3[2] - t3[0];
    let cx = ac.dot(&ex);
    let cy = (ac - ex * cx).norm();
    let mut cur2 = [Point2::new(0.0, 0.0), Point2::new(len, 0.0), Point2::new(cx, cy)];
    let mut cur_ids = fv;
    let mut cur3 = t3;
    let start = unfold_point(&cur3, &cur2, &s.position(&run[0]));

    let mut face = f0;
    let mut portals = Vec::with_capacity(k);
    for (i, &edge) in edges.iter().enumerate() {
        let [u, w] = topo.edges()[edge];
        let iu = cur_ids.iter().position(|&x| x == u)?;
        let iw = cur_ids.iter().position(|&x| x == w)?;
        let ic = 3 - iu - iw;
        let (pu, pw, pc) = (cur2[iu], cur2[iw], cur2[ic]);
        let portal = if orient2d(&pc, &pu, &pw) > 0.0 {
            ([pu, pw], [u, w])
        } else {
            ([pw, pu], [w, u])
        };
        portals.push(portal);

        let next = topo.opposite_face(edge, face)?;
        let nf = mesh.faces()[next];
        let x = *nf.iter().find(|&&v| v != u && v != w)?;
        let (u3, w3, x3) = (mesh.vertices()[u], mesh.vertices()[w], mesh.vertices()[x]);
        let d3: Vector3<f64> = w3 - u3;
        let dl = d3.norm();
        let along = (x3 - u3).dot(&d3) / dl;
        let perp = ((x3 - u3) - d3 * (along / dl)).norm();
        let d2: Vector2<f64> = (pw - pu) / (pw - pu).norm();
        let mut n2 = Vector2::new(-d2.y, d2.x);
        if n2.dot(&(pc - pu)) > 0.0 {
            n2 = -n2;
        }
        let px = pu + d2 * along + n2 * perp;
        cur_ids = [u, w, x];
        cur2 = [pu, pw, px];
        cur3 = [u3, w3, x3];
        face = next;
        if i + 1 < k {
            let ne = edges[i + 1];
            if !topo.face_edges(face).contains(&ne) {
                return None;
            }
        }
    }
    if !s.faces_of(&run[k + 1]).contains(&face) {
        return None;
    }
    let end = unfold_point(&cur3, &cur2, &s.position(&run[k + 1]));
    Some(Strip { start, end, portals })
}

/// Apex of the funnel path: a 2D point, its portal index (0 = start, k+1 = end)
/// and the mesh vertex it sits on, if any.
type Apex = (Point2<f64>, usize, Option<usize>);

fn funnel(strip: &Strip) -> Vec<Apex> {
    let k = strip.portals.len();
    let portal = |i: usize| -> ([Point2<f64>; 2], [Option<usize>; 2]) {
        if i == 0 {
            ([strip.start, strip.start], [None, None])
        } else if i == k + 1 {
            ([strip.end, strip.end], [None, None])
        } else {
            let (p, ids) = &strip.portals[i - 1];
            (*p, [Some(ids[0]), Some(ids[1])])
        }
    };
    let mut path: Vec<Apex> = vec![(strip.start, 0, None)];
    let mut apex = strip.start;
    let (mut left, mut right) = (strip.start, strip.start);
    let (mut li, mut ri) = (0usize, 0usize);
    let mut i = 1;
    while i <= k + 1 {
        let ([r, l], _) = portal(i);
        if orient2d(&apex, &right, &r) >= 0.0 {
            if apex == right || orient2d(&apex, &left, &r) < 0.0 {
                right = r;
                ri = i;
            } else {
                let id = portal(li).1[1];
                path.push((left, li, id));
                apex = left;
                right = apex;
                ri = li;
                i = li + 1;
                continue;
            }
        }
        if orient2d(&apex, &left, &l) <= 0.0 {
            if apex == left || orient2d(&apex, &right, &l) > 0.0 {
                left = l;
                li = i;
            } else {
                let id = portal(ri).1[0];
                path.push((right, ri, id));
                apex = right;
                left = apex;
                li = ri;
                i = ri + 1;
                continue;
            }
        }
        i += 1;
    }
    path.push((strip.end, k + 1, None));
    path
}

fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn edge_loc(s: &GeodesicSolver, from: usize, to: usize, frac: f64) -> Option<Loc> {
    if frac <= SNAP {
        return Some(Loc::Vertex(from));
    }
    if frac >= 1.0 - SNAP {
        return Some(Loc::Vertex(to));
    }
    let edge = s.topology().edge_id(from, to)?;
    let t = if from < to { frac } else { 1.0 - frac };
    Some(Loc::Edge { edge, t })
}

fn funnel_run(s: &GeodesicSolver, run: &[Loc]) -> Option<Vec<Loc>> {
    if run.len() < 3 {
        return None;
    }
    let strip = build_strip(s, run)?;
    let apexes = funnel(&strip);
    let k = strip.portals.len();
    let mut out = vec![run[0]];
    let mut seg = 0;
    for i in 1..=k {
        while apexes[seg + 1].1 < i {
            seg += 1;
        }
        let (pts, ids) = &strip.portals[i - 1];
        let loc = if apexes[seg + 1].1 == i && apexes[seg + 1].2.is_some() {
            Loc::Vertex(apexes[seg + 1].2?)
        } else {
            let (a, b) = (apexes[seg].0, apexes[seg + 1].0);
            let d = b - a;
            let e = pts[1] - pts[0];
            let denom = cross2(&e, &d);
            let frac = if denom.abs() <= 1e-15 * d.norm() * e.norm() {
                ((a - pts[0]).dot(&e) / e.norm_squared()).clamp(0.0, 1.0)
            } else {
                (cross2(&(a - pts[0]), &d) / denom).clamp(0.0, 1.0)
            };
            edge_loc(s, ids[0], ids[1], frac)?
        };
        if out.last() != Some(&loc) {
            out.push(loc);
        }
    }
    out.push(run[run.len() - 1]);
    Some(out)
}

/// Faces around `v` in winding order, with their spokes. Returns `None` for
/// non-manifold neighbourhoods.
struct Fan {
    faces: Vec<usize>,
    /// `spokes[j]` and `spokes[j + 1]` bound `faces[j]`.
    spokes: Vec<usize>,
    /// Cumulative angle of each spoke.
    theta: Vec<f64>,
    closed: bool,
}

impl Fan {
    fn total(&self) -> f64 {
        *self.theta.last().unwrap_or(&0.0)
    }
}

fn fan(s: &GeodesicSolver, v: usize) -> Option<Fan> {
    let mesh = s.mesh();
    let incident = s.topology().vertex_faces(v);
    let mut by_start = std::collections::HashMap::new();
    let mut ends = std::collections::HashSet::new();
    for &f in incident {
        let face = mesh.faces()[f];
        let k = face.iter().position(|&x| x == v)?;
        let (a, b) = (face[(k + 1) % 3], face[(k + 2) % 3]);
        if by_start.insert(a, (f, b)).is_some() || !ends.insert(b) {
            return None;
        }
    }
    let mut starts: Vec<usize> = by_start.keys().copied().filter(|a| !ends.contains(a)).collect();
    starts.sort_unstable();
    let closed = starts.is_empty();
    let first = if closed {
        let f = *incident.iter().min()?;
        let face = mesh.faces()[f];
        let k = face.iter().position(|&x| x == v)?;
        face[(k + 1) % 3]
    } else if starts.len() == 1 {
        starts[0]
    } else {
        return None;
    };
    let mut faces = Vec::new();
    let mut spokes = vec![first];
    let mut cur = first;
    while let Some(&(f, b)) = by_start.get(&cur) {
        faces.push(f);
        spokes.push(b);
        cur = b;
        if cur == first || faces.len() > incident.len() {
            break;
        }
    }
    if faces.len() != incident.len() || (closed && cur != first) {
        return None;
    }
    let pv = mesh.vertices()[v];
    let mut theta = vec![0.0];
    for j in 0..faces.len() {
        let a = mesh.vertices()[spokes[j]] - pv;
        let b = mesh.vertices()[spokes[j + 1]] - pv;
        theta.push(theta[j] + a.angle(&b));
    }
    Some(Fan {
        faces,
        spokes,
        theta,
        closed,
    })
}

/// Polar coordinates of a path point in the unfolded fan around `v`.
fn polar(s: &GeodesicSolver, fan: &Fan, v: usize, l: &Loc) -> Option<(f64, f64)> {
    let pv = s.mesh().vertices()[v];
    let p = s.position(l);
    let r = (p - pv).norm();
    if r <= 0.0 {
        return None;
    }
    let faces = s.faces_of(l);
    let j = fan.faces.iter().position(|f| faces.contains(f))?;
    let spoke = s.mesh().vertices()[fan.spokes[j]] - pv;
    let phi = spoke.angle(&(p - pv));
    Some((r, fan.theta[j] + phi))
}

fn relax_vertices(s: &GeodesicSolver, locs: &mut Vec<Loc>) {
    let mut i = 1;
    while i + 1 < locs.len() {
        if let Loc::Vertex(v) = locs[i] {
            if let Some(new) = reroute(s, v, &locs[i - 1], &locs[i + 1]) {
                let n = new.len();
                locs.splice(i..=i, new);
                i += n;
                continue;
            }
        }
        i += 1;
    }
}

/// Replacement points for vertex `v` between `p` and `q`, when going around `v`
/// on a side whose unfolded angle is below π is strictly shorter.
fn reroute(s: &GeodesicSolver, v: usize, p: &Loc, q: &Loc) -> Option<Vec<Loc>> {
    let fan = fan(s, v)?;
    let (rp, ap) = polar(s, &fan, v, p)?;
    let (rq, aq) = polar(s, &fan, v, q)?;
    let total = fan.total();
    let pv = s.mesh().vertices()[v];
    let pp = s.position(p);
    let pq = s.position(q);
    let current = (pp - pv).norm() + (pq - pv).norm();

    // (sign, sweep): +1 walks increasing spoke angle, -1 decreasing
    let mut sides = Vec::new();
    if fan.closed {
        let ccw = (aq - ap).rem_euclid(total);
        sides.push((1.0, ccw));
        sides.push((-1.0, total - ccw));
    } else if aq >= ap {
        sides.push((1.0, aq - ap));
    } else {
        sides.push((-1.0, ap - aq));
    }

    let mut best: Option<(f64, Vec<Loc>)> = None;
    for (sign, sweep) in sides {
        if sweep >= PI - 1e-9 || sweep <= 0.0 {
            continue;
        }
        let mut crossed: Vec<(f64, usize)> = Vec::new();
        let n_spokes = if fan.closed { fan.faces.len() } else { fan.spokes.len() };
        for j in 0..n_spokes {
            let rel = if fan.closed {
                (sign * (fan.theta[j] - ap)).rem_euclid(total)
            } else {
                sign * (fan.theta[j] - ap)
            };
            if rel > 1e-12 && rel < sweep - 1e-12 {
                crossed.push((rel, j));
            }
        }
        if crossed.is_empty() {
            continue;
        }
        crossed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let p2 = Vector2::new(rp, 0.0);
        let q2 = Vector2::new(rq * sweep.cos(), rq * sweep.sin());
        let d = q2 - p2;
        let mut new = Vec::with_capacity(crossed.len());
        let mut ok = true;
        for (beta, j) in crossed {
            let dir = Vector2::new(beta.cos(), beta.sin());
            let denom = cross2(&dir, &d);
            if denom.abs() <= 1e-300 {
                ok = false;
                break;
            }
            let rho = cross2(&p2, &d) / denom;
            let w = fan.spokes[j];
            let len = (s.mesh().vertices()[w] - pv).norm();
            if !(rho > 0.0) {
                ok = false;
                break;
            }
            match edge_loc(s, v, w, (rho / len).min(1.0)) {
                Some(Loc::Vertex(x)) if x == v => {
                    ok = false;
                    break;
                }
                Some(l) => {
                    if new.last() != Some(&l) {
                        new.push(l);
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut candidate = vec![*p];
        candidate.extend_from_slice(&new);
        candidate.push(*q);
        let len = s.path_length(&candidate);
        if len < current - 1e-12 && best.as_ref().is_none_or(|b| len < b.0) {
            best = Some((len, new));
        }
    }
    best.map(|b| b.1)
}
