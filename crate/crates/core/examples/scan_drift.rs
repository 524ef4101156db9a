//! Align a scale-free, arbitrarily posed "scan" to its design mesh, then report
//! where the fabricated part drifted from the design.

use fabtwin::registration::{deviation_report, estimate_scale, register_auto, IcpOptions, ReferencePair};
use fabtwin::{primitives, Mesh, Pose};
use nalgebra::{Point3, Rotation3, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let design = primitives::ellipsoid("panel", [600.0, 300.0, 150.0], 48, 24);

    // a panel that bulged 8 mm on one flank, scanned at an unknown scale and pose
    let bulged: Vec<Point3<f64>> = design
        .vertices()
        .iter()
        .map(|p| if p.x > 300.0 { p + Vector3::new(0.0, 0.0, 8.0 * p.z.signum()) } else { *p })
        .collect();
    let built = Mesh::new("built", bulged, design.faces().to_vec())?;
    let scan_pose = Pose::from_rotation(Rotation3::from_euler_angles(0.4, 2.5, -1.2), Vector3::new(3.0, 1.0, -2.0)).with_scale(0.0021)?;
    let scan = built.transformed(&scan_pose).renamed("scan");

    // a tape measurement between two marked points restores millimetres
    let tip = |x: f64| scan_pose.apply(&Point3::new(x, 0.0, 0.0)).coords.into();
    let pairs = [ReferencePair {
        a: tip(-600.0),
        b: tip(600.0),
        true_distance_mm: 1200.0,
    }];
    let scale = estimate_scale(&pairs)?;
    println!("scale {:.3} (residual {:.2e} mm)", scale.scale, scale.max_residual);

    let result = register_auto(&scan, &design, scale.scale, &IcpOptions::default())?;
    println!("rmse {:.3} mm after {} iterations, inliers {:.0}%", result.rmse, result.iterations, result.inlier_fraction * 100.0);

    let report = deviation_report(&scan, &design, &result.pose, 5000, 5.0);
    let s = &report.summary;
    println!("deviation mean {:.2} mm, p95 {:.2} mm, max {:.2} mm", s.mean, s.p95, s.max);
    println!("{} of {} samples beyond 5 mm", report.threshold_exceeded.len(), report.distances.len());
    Ok(())
}
