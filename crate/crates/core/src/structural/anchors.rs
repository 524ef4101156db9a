use nalgebra::{Matrix2, Point2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::truss::{TrussModel, TrussSolution};
use super::units;
use super::StructuralError;

/// Layouts measured at exactly 3 ft must not trip the check on rounding (mm).
const SPACING_ROUNDING: f64 = 1e-6;

/// Net load the structure applies to its base plate, about the anchor centroid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseLoad {
    /// Force on the base in N; positive z is uplift.
    pub force: [f64; 3],
    /// Overturning moment about the x and y axes through the anchor centroid (N·mm).
    pub moment: [f64; 2],
}

impl BaseLoad {
    /// The load the solved structure puts on its supports, which is the opposite
    /// of the support reactions, taken about `centre`.
    pub fn from_reactions(model: &TrussModel, solution: &TrussSolution, centre: &Point2<f64>) -> Self {
        let mut force = Vector3::zeros();
        let mut moment = Vector3::zeros();
        let c = Vector3::new(centre.x, centre.y, 0.0);
        for r in &solution.reactions {
            let f = -Vector3::from(r.force);
            force += f;
            moment += (model.joint_position(r.joint).coords - c).cross(&f);
        }
        BaseLoad {
            force: [force.x, force.y, force.z],
            moment: [moment.x, moment.y],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorLoad {
    pub anchor: usize,
    pub position: [f64; 2],
    /// Axial pull on the anchor (N); negative values are bearing.
    pub tension: f64,
    /// Horizontal shear share (N).
    pub shear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingViolation {
    pub anchors: [usize; 2],
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorReport {
    pub anchors: Vec<AnchorLoad>,
    pub min_spacing: f64,
    pub max_tension: f64,
    pub capacity: f64,
    pub required_spacing: f64,
    pub spacing_violations: Vec<SpacingViolation>,
    pub overloaded: Vec<usize>,
    pub pass: bool,
}

/// Distributes a base load over anchors as if the base plate were rigid:
/// tension varies linearly over the plate, and the plane is the least-squares
/// one that balances the uplift and both overturning moments.
pub fn anchor_distribution(anchors: &[Point2<f64>], load: &BaseLoad) -> Result<AnchorReport, StructuralError> {
    if anchors.len() < 3 {
        return Err(StructuralError::CollinearAnchors);
    }
    if !load.force.iter().chain(load.moment.iter()).all(|v| v.is_finite())
        || !anchors.iter().all(|p| p.x.is_finite() && p.y.is_finite())
    {
        return Err(StructuralError::InvalidLoad("anchor layout and base load must be finite".into()));
    }
    let n = anchors.len() as f64;
    let c = anchors.iter().fold(Vector2::zeros(), |a, p| a + p.coords) / n;
    let mut s = Matrix2::zeros();
    let mut extent = 0.0f64;
    for p in anchors {
        let d = p.coords - c;
        s += d * d.transpose();
        extent = extent.max(d.norm());
    }
    // moment balance: Σ y·t = Mx and −Σ x·t = My with t = a + b·x + c·y
    if s.determinant().abs() <= 1e-12 * extent.powi(4).max(f64::MIN_POSITIVE) {
        return Err(StructuralError::CollinearAnchors);
    }
    let coef = s.try_inverse().ok_or(StructuralError::CollinearAnchors)? * Vector2::new(-load.moment[1], load.moment[0]);
    let base = load.force[2] / n;
    let shear = (load.force[0].hypot(load.force[1])) / n;
    let loads: Vec<AnchorLoad> = anchors
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = p.coords - c;
            AnchorLoad {
                anchor: i,
                position: [p.x, p.y],
                tension: base + coef.dot(&d),
                shear,
            }
        })
        .collect();

    let required_spacing = units::anchor_min_spacing_mm();
    let capacity = units::anchor_capacity_n();
    let mut min_spacing = f64::INFINITY;
    let mut spacing_violations = Vec::new();
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            let d = (anchors[j] - anchors[i]).norm();
            min_spacing = min_spacing.min(d);
            if d < required_spacing - SPACING_ROUNDING {
                spacing_violations.push(SpacingViolation { anchors: [i, j], distance: d });
            }
        }
    }
    let overloaded: Vec<usize> = loads.iter().filter(|a| a.tension > capacity).map(|a| a.anchor).collect();
    let max_tension = loads.iter().fold(f64::NEG_INFINITY, |m, a| m.max(a.tension));
    Ok(AnchorReport {
        pass: spacing_violations.is_empty() && overloaded.is_empty(),
        anchors: loads,
        min_spacing,
        max_tension,
        capacity,
        required_spacing,
        spacing_violations,
        overloaded,
    })
}

/// Regular hexagon of anchors with circumradius `radius` around the origin.
pub fn hexagon_anchors(radius: f64) -> Vec<Point2<f64>> {
    (0..6)
        .map(|k| {
            let a = k as f64 * std::f64::consts::FRAC_PI_3;
            Point2::new(radius * a.cos(), radius * a.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_uplift_splits_evenly() {
        let r = anchor_distribution(&hexagon_anchors(1500.0), &BaseLoad { force: [0.0, 0.0, 6000.0], moment: [0.0, 0.0] }).unwrap();
        for a in &r.anchors {
            assert!((a.tension - 1000.0).abs() < 1e-9);
        }
        assert!(r.pass);
        assert!((r.min_spacing - 1500.0).abs() < 1e-9);
    }

    #[test]
    fn pure_moment_is_antisymmetric() {
        let hex = hexagon_anchors(1500.0);
        let r = anchor_distribution(&hex, &BaseLoad { force: [0.0; 3], moment: [4.0e6, 0.0] }).unwrap();
        let sum: f64 = r.anchors.iter().map(|a| a.tension).sum();
        assert!(sum.abs() < 1e-6);
        // mirrored anchors (y ↦ −y) carry opposite tension
        assert!((r.anchors[1].tension + r.anchors[5].tension).abs() < 1e-6);
        assert!(r.anchors[1].tension > 0.0);
        let mx: f64 = r.anchors.iter().map(|a| a.position[1] * a.tension).sum();
        assert!((mx - 4.0e6).abs() < 1e-3);
        let r = anchor_distribution(&hex, &BaseLoad { force: [0.0; 3], moment: [0.0, 3.0e6] }).unwrap();
        let my: f64 = r.anchors.iter().map(|a| -a.position[0] * a.tension).sum();
        assert!((my - 3.0e6).abs() < 1e-3);
    }

    #[test]
    fn close_anchors_and_overload_are_flagged() {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(900.0, 0.0), Point2::new(0.0, 2000.0)];
        let r = anchor_distribution(&pts, &BaseLoad::default()).unwrap();
        assert_eq!(r.spacing_violations.len(), 1);
        assert_eq!(r.spacing_violations[0].anchors, [0, 1]);
        assert!(!r.pass);
        let exact = vec![Point2::new(0.0, 0.0), Point2::new(914.4, 0.0), Point2::new(0.0, 2000.0)];
        assert!(anchor_distribution(&exact, &BaseLoad::default()).unwrap().spacing_violations.is_empty());

        let heavy = BaseLoad { force: [0.0, 0.0, 6.0 * 13_400.0], moment: [0.0, 0.0] };
        let r = anchor_distribution(&hexagon_anchors(1500.0), &heavy).unwrap();
        assert_eq!(r.overloaded.len(), 6);
    }

    #[test]
    fn collinear_anchors_rejected() {
        let pts: Vec<_> = (0..4).map(|i| Point2::new(i as f64 * 1000.0, 0.0)).collect();
        assert_eq!(anchor_distribution(&pts, &BaseLoad::default()).unwrap_err(), StructuralError::CollinearAnchors);
    }
}
