use nalgebra::{Point2, Point3};
use serde::Serialize;

use super::StructuralError;
use crate::geom::{convex_hull_2d, orient2d, point_segment_distance_2d};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FootholdConfig {
    pub chosen: Vec<usize>,
    /// Convex hull of the chosen ground points, counter-clockwise.
    pub support_polygon: Vec<[f64; 2]>,
    pub stable: bool,
    /// Distance from the projected centre of mass to the polygon boundary (mm),
    /// negative when outside. A polygon with no area has margin ≤ 0.
    pub margin: f64,
}

/// Regular hexagonal base of circumradius `radius` on the ground plane.
pub fn hexagon_base(radius: f64) -> Vec<Point3<f64>> {
    (0..6)
        .map(|k| {
            let a = k as f64 * std::f64::consts::FRAC_PI_3;
            Point3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect()
}

pub fn foothold_stability(base: &[Point3<f64>], chosen: &[usize], com: &Point3<f64>) -> Result<FootholdConfig, StructuralError> {
    let mut seen = chosen.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != chosen.len() || chosen.is_empty() || chosen.iter().any(|&i| i >= base.len()) {
        return Err(StructuralError::InvalidFootholds(chosen.to_vec()));
    }
    let pts: Vec<Point2<f64>> = chosen.iter().map(|&i| Point2::new(base[i].x, base[i].y)).collect();
    let hull = convex_hull_2d(&pts);
    let p = Point2::new(com.x, com.y);
    let boundary = |hull: &[Point2<f64>]| {
        (0..hull.len())
            .map(|i| point_segment_distance_2d(&p, &hull[i], &hull[(i + 1) % hull.len()]))
            .fold(f64::INFINITY, f64::min)
    };
    let margin = if hull.len() < 3 {
        -boundary(&hull)
    } else {
        let inside = (0..hull.len()).all(|i| orient2d(&hull[i], &hull[(i + 1) % hull.len()], &p) > 0.0);
        let d = boundary(&hull);
        if inside {
            d
        } else {
            -d
        }
    };
    Ok(FootholdConfig {
        chosen: chosen.to_vec(),
        support_polygon: hull.iter().map(|q| [q.x, q.y]).collect(),
        stable: margin > 0.0,
        margin,
    })
}

/// Every `k`-subset of the base vertices in lexicographic order.
pub fn foothold_combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

pub fn enumerate_footholds(base: &[Point3<f64>], k: usize, com: &Point3<f64>) -> Result<Vec<FootholdConfig>, StructuralError> {
    foothold_combinations(base.len(), k).iter().map(|c| foothold_stability(base, c, com)).collect()
}
