//! Principal frames and canonical poses.
//!
//! Sculpture parts arrive rolled and pitched in the world frame. Before they can be
//! projected along meaningful directions they are moved to a canonical pose: centroid
//! at the origin, largest-variance axis on world x, smallest on world z.

use nalgebra::{Matrix3, Point3, Rotation3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::ErrorCode;
use crate::mesh::Mesh;

/// Relative eigenvalue gap under which two principal axes are treated as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-6;
/// Eigenvalues below this fraction of the largest count as zero when reporting rank.
const RANK_TOLERANCE: f64 = 1e-12;
/// Normalised third moment below which an axis sign is considered undetermined.
const SKEW_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrientationError {
    #[error("geometry is degenerate: covariance rank {rank} (need at least 2)")]
    DegenerateGeometry { rank: usize },
    #[error("invalid pose: {0}")]
    InvalidPose(String),
}

impl ErrorCode for OrientationError {
    fn code(&self) -> &'static str {
        match self {
            OrientationError::DegenerateGeometry { .. } => "DegenerateGeometry",
            OrientationError::InvalidPose(_) => "InvalidPose",
        }
    }
}

/// Similarity transform `p ↦ scale · R · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    scale: f64,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    /// Validates `RᵀR = I` and `det R = +1` within 1e-9, and `scale > 0`.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>, scale: f64) -> Result<Self, OrientationError> {
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if !(ortho <= 1e-9) {
            return Err(OrientationError::InvalidPose(format!(
                "rotation is not orthonormal (max |RᵀR - I| = {ortho:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(OrientationError::InvalidPose(format!("rotation determinant {det}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(OrientationError::InvalidPose(format!("scale {scale}")));
        }
        if !translation.iter().all(|t| t.is_finite()) {
            return Err(OrientationError::InvalidPose("non-finite translation".into()));
        }
        Ok(Pose {
            rotation,
            translation,
            scale,
        })
    }

    pub fn from_rotation(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Pose {
            rotation: *rotation.matrix(),
            translation,
            scale: 1.0,
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Pose {
            translation,
            ..Pose::identity()
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self, OrientationError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(OrientationError::InvalidPose(format!("scale {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.scale * (self.rotation * p.coords) + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.scale * (self.rotation * v)
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation) / self.scale,
            scale: 1.0 / self.scale,
        }
    }

    /// The pose that applies `self` first and `next` second.
    pub fn then(&self, next: &Pose) -> Pose {
        Pose {
            rotation: next.rotation * self.rotation,
            translation: next.scale * (next.rotation * self.translation) + next.translation,
            scale: self.scale * next.scale,
        }
    }

    /// Rotation angle of `R` in degrees.
    pub fn rotation_angle_deg(&self) -> f64 {
        let c = ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos().to_degrees()
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.iter().chain(self.translation.iter()).all(|v| v.is_finite()) && self.scale.is_finite()
    }
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    /// Row-major.
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
    scale: f64,
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = &self.rotation;
        PoseRepr {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [self.translation.x, self.translation.y, self.translation.z],
            scale: self.scale,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PoseRepr::deserialize(d)?;
        let r = repr.rotation;
        let m = Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        );
        Pose::new(m, Vector3::from(repr.translation), repr.scale).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Every vertex counts once.
    #[default]
    Vertex,
    /// Triangle centroids weighted by triangle area (robust to uneven scan density).
    Area,
}

/// Centroid plus orthonormal right-handed axes ordered by descending variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalFrame {
    pub centroid: Point3<f64>,
    pub axes: [Vector3<f64>; 3],
    pub variances: [f64; 3],
    /// Set when two or more variances are within [`DEGENERATE_GAP`] of each other and the
    /// affected axes were chosen by Gram-Schmidt against the world axes.
    pub degenerate_axes: bool,
}

impl PrincipalFrame {
    /// Rotation whose columns are the principal axes.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&self.axes)
    }

    /// Pose mapping canonical coordinates back to the world.
    pub fn pose(&self) -> Pose {
        Pose {
            rotation: self.rotation(),
            translation: self.centroid.coords,
            scale: 1.0,
        }
    }
}

fn samples(mesh: &Mesh, weighting: Weighting) -> Vec<(Point3<f64>, f64)> {
    match weighting {
        Weighting::Vertex => mesh.vertices().iter().map(|v| (*v, 1.0)).collect(),
        Weighting::Area => (0..mesh.face_count())
            .map(|f| (mesh.face_centroid(f), mesh.face_area(f)))
            .filter(|(_, w)| *w > 0.0)
            .collect(),
    }
}

/// Principal axes of the (vertex- or area-weighted) sample covariance.
///
/// Axis signs are fixed so the third moment along each of the first two axes is
/// non-negative (ties: largest-magnitude component positive); the third axis is their
/// cross product so the frame is always right-handed.
pub fn principal_frame(mesh: &Mesh, weighting: Weighting) -> Result<PrincipalFrame, OrientationError> {
    let pts = samples(mesh, weighting);
    let total: f64 = pts.iter().map(|(_, w)| w).sum();
    if pts.is_empty() || total <= 0.0 {
        return Err(OrientationError::DegenerateGeometry { rank: 0 });
    }
    let centroid = Point3::from(pts.iter().map(|(p, w)| p.coords * *w).sum::<Vector3<f64>>() / total);
    let mut cov = Matrix3::zeros();
    for (p, w) in &pts {
        let d = p - centroid;
        cov += *w * d * d.transpose();
    }
    cov /= total;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let variances = order.map(|i| eig.eigenvalues[i].max(0.0));
    let mut axes = order.map(|i| eig.eigenvectors.column(i).into_owned());

    let top = variances[0];
    let rank = variances.iter().filter(|&&v| v > RANK_TOLERANCE * top && v > 0.0).count();
    if rank < 2 {
        return Err(OrientationError::DegenerateGeometry { rank });
    }

    let degenerate_axes = resolve_degenerate_axes(&variances, &mut axes);

    // sign disambiguation by third moment
    for axis in axes.iter_mut().take(2) {
        let (m2, m3) = pts.iter().fold((0.0, 0.0), |(m2, m3), (p, w)| {
            let s = (p - centroid).dot(axis);
            (m2 + w * s * s, m3 + w * s * s * s)
        });
        let sigma = (m2 / total).sqrt();
        let skew = if sigma > 0.0 { m3 / total / sigma.powi(3) } else { 0.0 };
        let flip = if skew.abs() < SKEW_TIE {
            let k = axis.iamax();
            axis[k] < 0.0
        } else {
            skew < 0.0
        };
        if flip {
            *axis = -*axis;
        }
    }
    axes[2] = axes[0].cross(&axes[1]).normalize();

    Ok(PrincipalFrame {
        centroid,
        axes,
        variances,
        degenerate_axes,
    })
}

/// Replaces eigenvectors inside near-degenerate eigenspaces with a deterministic basis
/// built from the world axes. Returns whether any replacement happened.
fn resolve_degenerate_axes(variances: &[f64; 3], axes: &mut [Vector3<f64>; 3]) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= DEGENERATE_GAP * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    // variances are sorted, so degenerate groups are contiguous
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=3 {
        if i == 3 || !close(variances[i - 1], variances[i]) {
            if i - start > 1 {
                groups.push((start, i));
            }
            start = i;
        }
    }
    if groups.is_empty() {
        return false;
    }
    let world = [Vector3::x(), Vector3::y(), Vector3::z()];
    for (lo, hi) in groups {
        let span: Vec<Vector3<f64>> = axes[lo..hi].to_vec();
        let project = |v: &Vector3<f64>| span.iter().map(|e| e * e.dot(v)).sum::<Vector3<f64>>();
        let mut chosen: Vec<Vector3<f64>> = Vec::new();
        for _ in lo..hi {
            let mut best: Option<Vector3<f64>> = None;
            for w in &world {
                let mut r = project(w);
                for c in &chosen {
                    r -= c * c.dot(&r);
                }
                if best.is_none_or(|b| r.norm() > b.norm() + 1e-12) {
                    best = Some(r);
                }
            }
            let b = best.expect("three world axes");
            chosen.push(b.normalize());
        }
        for (k, c) in chosen.into_iter().enumerate() {
            axes[lo + k] = c;
        }
    }
    true
}

/// Moves a mesh into its canonical pose.
///
/// Returns the canonical mesh and the pose mapping canonical coordinates back to
/// the original world coordinates.
pub fn canonicalize(mesh: &Mesh, frame: &PrincipalFrame) -> (Mesh, Pose) {
    let pose = frame.pose();
    let canonical = mesh.transformed(&pose.inverse());
    (canonical, pose)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Pitch within 1e-6° of ±90°: roll and yaw are coupled, yaw is reported as 0.
    pub gimbal_lock: bool,
}

/// Roll, pitch and yaw in degrees about world x, y, z, with `R = Rz(yaw)·Ry(pitch)·Rx(roll)`.
pub fn euler_angles(pose: &Pose) -> EulerAngles {
    let r = &pose.rotation;
    let sp = (-r[(2, 0)]).clamp(-1.0, 1.0);
    let pitch = sp.asin().to_degrees();
    if (pitch.abs() - 90.0).abs() <= 1e-6 {
        // with yaw = 0: R = Ry(±90)·Rx(roll)
        let roll = if pitch > 0.0 {
            r[(0, 1)].atan2(r[(1, 1)])
        } else {
            (-r[(0, 1)]).atan2(r[(1, 1)])
        };
        return EulerAngles {
            roll: roll.to_degrees(),
            pitch,
            yaw: 0.0,
            gimbal_lock: true,
        };
    }
    EulerAngles {
        roll: r[(2, 1)].atan2(r[(2, 2)]).to_degrees(),
        pitch,
        yaw: r[(1, 0)].atan2(r[(0, 0)]).to_degrees(),
        gimbal_lock: false,
    }
}

/// Rotation matrix from roll, pitch, yaw in degrees (same convention as [`euler_angles`]).
pub fn rotation_from_euler(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    let (sr, cr) = roll.to_radians().sin_cos();
    let (sp, cp) = pitch.to_radians().sin_cos();
    let (sy, cy) = yaw.to_radians().sin_cos();
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr);
    let ry = Matrix3::new(cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp);
    let rz = Matrix3::new(cy, -sy, 0.0, sy, cy, 0.0, 0.0, 0.0, 1.0);
    rz * ry * rx
}

/// JSON report for the `orient` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct OrientReport {
    pub centroid: Point3<f64>,
    pub axes: [Vector3<f64>; 3],
    pub variances: [f64; 3],
    pub degenerate_axes: bool,
    pub euler_deg: EulerAngles,
}

impl From<&PrincipalFrame> for OrientReport {
    fn from(f: &PrincipalFrame) -> Self {
        OrientReport {
            centroid: f.centroid,
            axes: f.axes,
            variances: f.variances,
            degenerate_axes: f.degenerate_axes,
            euler_deg: euler_angles(&f.pose()),
        }
    }
}
