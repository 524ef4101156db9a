//! Recover the principal frame of a part posed with roll and pitch, report the
//! Euler angles a fabricator needs, and show the canonical pose round trip.

use fabtwin::orientation::{canonicalize, euler_angles, principal_frame, Weighting};
use fabtwin::{primitives, Pose};
use nalgebra::{Rotation3, Vector3};

fn main() {
    let leg = primitives::bent_limb("leg", 1400.0, 70.0);
    let posed = leg.transformed(&Pose::from_rotation(
        Rotation3::from_euler_angles(15f64.to_radians(), -25f64.to_radians(), 40f64.to_radians()),
        Vector3::new(2000.0, -500.0, 300.0),
    ));

    for weighting in [Weighting::Vertex, Weighting::Area] {
        let frame = principal_frame(&posed, weighting).expect("leg is full rank");
        let e = euler_angles(&frame.pose());
        println!("{weighting:?} weighting");
        println!("  centroid   {:.1?}", frame.centroid.coords.as_slice());
        for (axis, var) in frame.axes.iter().zip(frame.variances) {
            println!("  axis {:>7.4?}  sd {:.1} mm", axis.as_slice(), var.sqrt());
        }
        println!("  roll {:.2}  pitch {:.2}  yaw {:.2} deg", e.roll, e.pitch, e.yaw);

        let (canonical, pose) = canonicalize(&posed, &frame);
        let worst = canonical
            .vertices()
            .iter()
            .zip(posed.vertices())
            .map(|(c, p)| (pose.apply(c) - p).norm())
            .fold(0.0, f64::max);
        println!("  canonical -> world round trip error {worst:.2e} mm");
    }
}
