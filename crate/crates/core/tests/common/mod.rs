#![allow(dead_code)]

use fabtwin::structural::{Joint, LoadCase, Member, PointLoad, Restraint, TrussModel, TrussSolution};
use nalgebra::{Point3, Vector3};
use rand::Rng;

/// Statically determinate space truss: three pinned ground joints, then each new
/// joint braced to three earlier non-collinear joints by three members.
pub fn henneberg_truss<R: Rng>(rng: &mut R, free_joints: usize) -> TrussModel {
    let mut joints: Vec<Joint> = [[0.0, 0.0, 0.0], [1000.0, 0.0, 0.0], [400.0, 900.0, 0.0]]
        .iter()
        .enumerate()
        .map(|(i, p)| Joint {
            name: format!("g{i}"),
            position: *p,
            restraint: Restraint::PINNED,
        })
        .collect();
    let mut members = Vec::new();
    while joints.len() < 3 + free_joints {
        let n = joints.len();
        let mut pick = [0usize; 3];
        loop {
            for p in &mut pick {
                *p = rng.random_range(0..n);
            }
            if pick[0] == pick[1] || pick[1] == pick[2] || pick[0] == pick[2] {
                continue;
            }
            let [a, b, c] = pick.map(|i| Point3::from(joints[i].position));
            let normal = (b - a).cross(&(c - a));
            if normal.norm() < 0.2 * (b - a).norm() * (c - a).norm() {
                continue;
            }
            let centroid = Point3::from((a.coords + b.coords + c.coords) / 3.0);
            let up = normal.normalize() * if normal.z < 0.0 { -1.0 } else { 1.0 };
            let lateral = Vector3::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0), 0.0);
            let p = centroid + up * rng.random_range(300.0..900.0) + lateral;
            joints.push(Joint {
                name: format!("j{n}"),
                position: [p.x, p.y, p.z],
                restraint: Restraint::FREE,
            });
            for (k, &i) in pick.iter().enumerate() {
                members.push(Member::new(format!("m{n}_{k}"), i, n, rng.random_range(100.0..600.0), 240.0));
            }
            break;
        }
    }
    TrussModel { joints, members }
}

pub fn random_loads<R: Rng>(rng: &mut R, model: &TrussModel, count: usize) -> LoadCase {
    let free: Vec<usize> = (0..model.joints.len()).filter(|&j| model.joints[j].restraint.is_free()).collect();
    let mut case = LoadCase::new("random");
    for _ in 0..count {
        case.point_loads.push(PointLoad {
            joint: free[rng.random_range(0..free.len())],
            force: [
                rng.random_range(-2000.0..2000.0),
                rng.random_range(-2000.0..2000.0),
                rng.random_range(-4000.0..1000.0),
            ],
        });
    }
    case
}

/// Largest joint and global out-of-balance force, recomputed from the reported member
/// forces and reactions, relative to the summed magnitude of the applied loads.
pub fn equilibrium_error(model: &TrussModel, load: &LoadCase, solution: &TrussSolution) -> f64 {
    let mut net = vec![Vector3::zeros(); model.joints.len()];
    for pl in &load.point_loads {
        net[pl.joint] += Vector3::from(pl.force);
    }
    let applied: f64 = load.point_loads.iter().map(|p| Vector3::from(p.force).norm()).sum();
    let mut total = Vector3::zeros();
    for pl in &load.point_loads {
        total += Vector3::from(pl.force);
    }
    for r in &solution.reactions {
        net[r.joint] += Vector3::from(r.force);
        total += Vector3::from(r.force);
    }
    for (i, m) in model.members.iter().enumerate() {
        let [a, b] = m.joints;
        let dir = (model.joint_position(b) - model.joint_position(a)).normalize();
        let n = solution.members[i].force;
        net[a] += dir * n;
        net[b] -= dir * n;
    }
    let joint_worst = net.iter().map(|v| v.norm()).fold(0.0, f64::max);
    joint_worst.max(total.norm()) / applied.max(f64::MIN_POSITIVE)
}
