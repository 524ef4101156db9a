//! Scan-to-design alignment and drift reports.
//!
//! Photogrammetry scans have no absolute scale, so scale comes from a few measured
//! reference distances ([`estimate_scale`]) and is then held fixed while
//! [`register_icp`] solves the rigid part. [`deviation_report`] turns the aligned
//! scan into signed distances against the design surface.

use nalgebra::{Matrix6, Point3, Rotation3, Vector3, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ErrorCode;
use crate::mesh::Mesh;
use crate::orientation::{principal_frame, Pose, Weighting};
use crate::spatial::TriangleBvh;

pub const DEFAULT_SAMPLE_COUNT: usize = 5000;
pub const DEFAULT_DRIFT_THRESHOLD: f64 = 5.0;
/// Stop once an iteration improves the objective by less than this (mm).
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;
const MIN_CORRESPONDENCES: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistrationError {
    #[error("no reference pairs given")]
    NoPairs,
    #[error("reference pair {0} has zero measured distance")]
    ZeroMeasuredDistance(usize),
    #[error("invalid reference pair {index}: {reason}")]
    InvalidPair { index: usize, reason: String },
    #[error("only {found} scan samples within {inlier_distance} mm of the design; pre-align the scan")]
    NoCorrespondences { found: usize, inlier_distance: f64 },
    #[error("invalid registration parameter: {0}")]
    InvalidParameter(String),
}

impl ErrorCode for RegistrationError {
    fn code(&self) -> &'static str {
        match self {
            RegistrationError::NoPairs => "NoPairs",
            RegistrationError::ZeroMeasuredDistance(_) => "ZeroMeasuredDistance",
            RegistrationError::InvalidPair { .. } => "InvalidPair",
            RegistrationError::NoCorrespondences { .. } => "NoCorrespondences",
            RegistrationError::InvalidParameter(_) => "InvalidParameter",
        }
    }
}

/// Two points picked on the scan and the true distance between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePair {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub true_distance_mm: f64,
}

impl ReferencePair {
    pub fn measured(&self) -> f64 {
        (Vector3::from(self.b) - Vector3::from(self.a)).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleEstimate {
    pub scale: f64,
    /// Largest |scale·measured − true| over the pairs (mm).
    pub max_residual: f64,
    pub rms_residual: f64,
    pub pairs: usize,
}

/// Least-squares scale `Σ(true·measured) / Σ(measured²)`.
pub fn estimate_scale(pairs: &[ReferencePair]) -> Result<ScaleEstimate, RegistrationError> {
    if pairs.is_empty() {
        return Err(RegistrationError::NoPairs);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, p) in pairs.iter().enumerate() {
        let m = p.measured();
        if !(m.is_finite() && p.true_distance_mm.is_finite() && p.true_distance_mm > 0.0) {
            return Err(RegistrationError::InvalidPair {
                index: i,
                reason: "distances must be finite and the true distance positive".into(),
            });
        }
        if m == 0.0 {
            return Err(RegistrationError::ZeroMeasuredDistance(i));
        }
        num += p.true_distance_mm * m;
        den += m * m;
    }
    let scale = num / den;
    let residuals: Vec<f64> = pairs.iter().map(|p| scale * p.measured() - p.true_distance_mm).collect();
    let max_residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(ScaleEstimate {
        scale,
        max_residual,
        rms_residual,
        pairs: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpOptions {
    pub max_iterations: usize,
    /// Samples farther than this from the design are outliers (mm).
    pub inlier_distance: f64,
    pub sample_count: usize,
}

impl Default for IcpOptions {
    fn default() -> Self {
        IcpOptions {
            max_iterations: 50,
            inlier_distance: 50.0,
            sample_count: DEFAULT_SAMPLE_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrationResult {
    /// Maps scan coordinates into the design frame.
    pub pose: Pose,
    /// Root mean square of sample-to-design distances, each capped at the inlier distance (mm).
    pub rmse: f64,
    pub inlier_fraction: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted iteration, starting with the initial pose.
    pub rmse_trace: Vec<f64>,
}

/// Area-stratified deterministic vertex sample: every vertex when the mesh is
/// small, otherwise systematic sampling over cumulative vertex area.
pub fn sample_vertices(mesh: &Mesh, count: usize) -> Vec<usize> {
    let n = mesh.vertex_count();
    if n <= count {
        return (0..n).collect();
    }
    let mut weight = vec![0.0; n];
    for (f, face) in mesh.faces().iter().enumerate() {
        let a = mesh.face_area(f) / 3.0;
        for &v in face {
            weight[v] += a;
        }
    }
    let total: f64 = weight.iter().sum();
    if total <= 0.0 {
        let step = n as f64 / count as f64;
        return (0..count).map(|k| ((k as f64 + 0.5) * step) as usize).collect();
    }
    let mut out = Vec::with_capacity(count);
    let mut acc = 0.0;
    let mut k = 0usize;
    for (v, w) in weight.iter().enumerate() {
        acc += w;
        while k < count && (k as f64 + 0.5) * total / count as f64 <= acc {
            if out.last() != Some(&v) {
                out.push(v);
            }
            k += 1;
        }
    }
    out
}

struct Correspondence {
    point: Point3<f64>,
    target: Point3<f64>,
    normal: Vector3<f64>,
    distance: f64,
}

fn correspond(bvh: &TriangleBvh, design: &Mesh, pts: &[Point3<f64>]) -> Vec<Correspondence> {
    pts.par_iter()
        .map(|p| {
            let hit = bvh.closest_point(p);
            Correspondence {
                point: *p,
                target: hit.point,
                normal: design.face_normal(hit.face).unwrap_or_else(Vector3::zeros),
                distance: hit.distance,
            }
        })
        .collect()
}

fn objective(corr: &[Correspondence], inlier: f64) -> (f64, usize) {
    let mut sum = 0.0;
    let mut inliers = 0;
    for c in corr {
        let d = c.distance.min(inlier);
        sum += d * d;
        inliers += (c.distance <= inlier) as usize;
    }
    ((sum / corr.len().max(1) as f64).sqrt(), inliers)
}

/// Rigid update about `centre`: `p ↦ R(p − c) + c + τ`.
fn increment(x: &Vector6<f64>, centre: &Point3<f64>, step: f64) -> Pose {
    let omega = Vector3::new(x[0], x[1], x[2]) * step;
    let tau = Vector3::new(x[3], x[4], x[5]) * step;
    let r = Rotation3::new(omega);
    let t = centre.coords - r * centre.coords + tau;
    Pose::from_rotation(r, t)
}

fn check_options(opts: &IcpOptions) -> Result<(), RegistrationError> {
    if !(opts.inlier_distance > 0.0 && opts.inlier_distance.is_finite()) {
        return Err(RegistrationError::InvalidParameter(format!(
            "inlier distance {}",
            opts.inlier_distance
        )));
    }
    if opts.sample_count == 0 {
        return Err(RegistrationError::InvalidParameter("sample count 0".into()));
    }
    Ok(())
}

/// Point-to-plane ICP from `initial`. The objective never increases between
/// accepted iterations; steps that would increase it are halved until they don't.
pub fn register_icp(
    scan: &Mesh,
    design: &Mesh,
    initial: &Pose,
    opts: &IcpOptions,
) -> Result<RegistrationResult, RegistrationError> {
    check_options(opts)?;
    if !initial.is_finite() {
        return Err(RegistrationError::InvalidParameter("initial pose is not finite".into()));
    }
    let bvh = TriangleBvh::new(design);
    icp_with(&bvh, scan, design, initial, opts)
}

fn icp_with(
    bvh: &TriangleBvh,
    scan: &Mesh,
    design: &Mesh,
    initial: &Pose,
    opts: &IcpOptions,
) -> Result<RegistrationResult, RegistrationError> {
    let samples: Vec<Point3<f64>> = sample_vertices(scan, opts.sample_count)
        .into_iter()
        .map(|v| scan.vertices()[v])
        .collect();
    let inlier = opts.inlier_distance;
    let place = |pose: &Pose| -> Vec<Point3<f64>> { samples.iter().map(|p| pose.apply(p)).collect() };

    let mut pose = *initial;
    let mut corr = correspond(bvh, design, &place(&pose));
    let (mut rmse, mut inliers) = objective(&corr, inlier);
    if inliers < MIN_CORRESPONDENCES {
        return Err(RegistrationError::NoCorrespondences {
            found: inliers,
            inlier_distance: inlier,
        });
    }
    let mut trace = vec![rmse];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let used: Vec<&Correspondence> = corr.iter().filter(|c| c.distance <= inlier).collect();
        let centre = Point3::from(used.iter().map(|c| c.point.coords).sum::<Vector3<f64>>() / used.len() as f64);
        let mut jtj = Matrix6::zeros();
        let mut jtr = Vector6::zeros();
        for c in &used {
            let arm = c.point - centre;
            let cr = arm.cross(&c.normal);
            let j = Vector6::new(cr.x, cr.y, cr.z, c.normal.x, c.normal.y, c.normal.z);
            let r = c.normal.dot(&(c.point - c.target));
            jtj += j * j.transpose();
            jtr += j * r;
        }
        // tiny damping keeps flat or symmetric parts solvable
        let damping = 1e-12 * jtj.trace().max(1e-300);
        for k in 0..6 {
            jtj[(k, k)] += damping;
        }
        let Some(x) = jtj.cholesky().map(|ch| ch.solve(&(-jtr))) else {
            converged = true;
            break;
        };

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let candidate = pose.then(&increment(&x, &centre, step));
            let c2 = correspond(bvh, design, &place(&candidate));
            let (r2, n2) = objective(&c2, inlier);
            if r2 <= rmse && n2 >= MIN_CORRESPONDENCES {
                accepted = Some((candidate, c2, r2, n2));
                break;
            }
            step *= 0.5;
        }
        let Some((p2, c2, r2, n2)) = accepted else {
            converged = true;
            break;
        };
        let improvement = rmse - r2;
        pose = p2;
        corr = c2;
        rmse = r2;
        inliers = n2;
        trace.push(rmse);
        if improvement < CONVERGENCE_TOLERANCE {
            converged = true;
            break;
        }
    }
    Ok(RegistrationResult {
        pose,
        rmse,
        inlier_fraction: inliers as f64 / corr.len().max(1) as f64,
        iterations,
        converged,
        rmse_trace: trace,
    })
}

/// ICP seeded by aligning principal frames, trying the four right-handed sign
/// combinations of the first two axes and keeping the lowest objective.
///
/// `scale` multiplies scan coordinates before alignment.
pub fn register_auto(scan: &Mesh, design: &Mesh, scale: f64, opts: &IcpOptions) -> Result<RegistrationResult, RegistrationError> {
    check_options(opts)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(RegistrationError::InvalidParameter(format!("scale {scale}")));
    }
    let scaled = scan.transformed(&Pose::identity().with_scale(scale).expect("scale checked"));
    let fs = principal_frame(&scaled, Weighting::Area)
        .map_err(|e| RegistrationError::InvalidParameter(format!("scan frame: {e}")))?;
    let fd = principal_frame(design, Weighting::Area)
        .map_err(|e| RegistrationError::InvalidParameter(format!("design frame: {e}")))?;
    let bvh = TriangleBvh::new(design);
    let mut best: Option<RegistrationResult> = None;
    let mut last_err = None;
    for (s0, s1) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
        let a0 = fs.axes[0] * s0;
        let a1 = fs.axes[1] * s1;
        let rs = nalgebra::Matrix3::from_columns(&[a0, a1, a0.cross(&a1)]);
        let rd = fd.rotation();
        let r = rd * rs.transpose();
        let t = fd.centroid.coords - r * fs.centroid.coords;
        let seed = Pose::new(r, t, 1.0).expect("product of rotations");
        let scaled_seed = Pose::identity().with_scale(scale).expect("scale checked").then(&seed);
        match icp_with(&bvh, scan, design, &scaled_seed, opts) {
            Ok(res) => {
                if best.as_ref().is_none_or(|b| res.rmse < b.rmse) {
                    best = Some(res);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(RegistrationError::NoCorrespondences { found: 0, inlier_distance: opts.inlier_distance }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub mean: f64,
    /// Largest |distance|.
    pub max: f64,
    /// 95th percentile of |distance| (nearest rank).
    pub p95: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    /// Scan vertex index of each sample.
    pub sample_vertices: Vec<usize>,
    /// Signed distance per sample, positive on the side the design normal points to (mm).
    pub distances: Vec<f64>,
    pub summary: DeviationSummary,
    pub threshold: f64,
    /// Sample indices with |distance| > threshold, largest first.
    pub threshold_exceeded: Vec<usize>,
}

pub fn deviation_report(scan: &Mesh, design: &Mesh, pose: &Pose, sample_count: usize, threshold: f64) -> DeviationReport {
    let bvh = TriangleBvh::new(design);
    let sample_vertices = sample_vertices(scan, sample_count.max(1));
    let pts: Vec<Point3<f64>> = sample_vertices.iter().map(|&v| pose.apply(&scan.vertices()[v])).collect();
    let corr = correspond(&bvh, design, &pts);
    let distances: Vec<f64> = corr
        .iter()
        .map(|c| {
            let side = c.normal.dot(&(c.point - c.target));
            if side < 0.0 {
                -c.distance
            } else {
                c.distance
            }
        })
        .collect();
    let n = distances.len().max(1) as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let rms = (distances.iter().map(|d| d * d).sum::<f64>() / n).sqrt();
    let mut abs: Vec<f64> = distances.iter().map(|d| d.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let max = abs.last().copied().unwrap_or(0.0);
    let p95 = if abs.is_empty() {
        0.0
    } else {
        abs[((0.95 * abs.len() as f64).ceil() as usize).clamp(1, abs.len()) - 1]
    };
    let mut threshold_exceeded: Vec<usize> = (0..distances.len()).filter(|&i| distances[i].abs() > threshold).collect();
    threshold_exceeded.sort_by(|&a, &b| distances[b].abs().total_cmp(&distances[a].abs()).then(a.cmp(&b)));
    DeviationReport {
        sample_vertices,
        distances,
        summary: DeviationSummary { mean, max, p95, rms },
        threshold,
        threshold_exceeded,
    }
}

/// Largest distance between where `estimate` and `truth` send the mesh vertices,
/// and the rotation angle between them in degrees.
pub fn pose_error(mesh: &Mesh, estimate: &Pose, truth: &Pose) -> (f64, f64) {
    let rms = (mesh
        .vertices()
        .iter()
        .map(|v| (estimate.apply(v) - truth.apply(v)).norm_squared())
        .sum::<f64>()
        / mesh.vertex_count() as f64)
        .sqrt();
    let rel = estimate.inverse().then(truth);
    (rms, rel.rotation_angle_deg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;
    use nalgebra::Unit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(m: f64, t: f64) -> ReferencePair {
        ReferencePair {
            a: [0.0, 0.0, 0.0],
            b: [m, 0.0, 0.0],
            true_distance_mm: t,
        }
    }

    #[test]
    fn scale_examples() {
        let s = estimate_scale(&[pair(500.0, 1000.0)]).unwrap();
        assert_eq!(s.scale, 2.0);
        let s = estimate_scale(&[pair(500.0, 1000.0), pair(250.0, 500.0)]).unwrap();
        assert_eq!(s.scale, 2.0);
        assert_eq!(s.max_residual, 0.0);
        // hand-derived: (1000·500 + 1000·520) / (500² + 520²) = 1 020 000 / 520 400
        let s = estimate_scale(&[pair(500.0, 1000.0), pair(520.0, 1000.0)]).unwrap();
        assert!((s.scale - 1_020_000.0 / 520_400.0).abs() < 1e-12);
        let r1 = (s.scale * 500.0 - 1000.0).abs();
        let r2 = (s.scale * 520.0 - 1000.0).abs();
        assert!((s.max_residual - r1.max(r2)).abs() < 1e-9);
        assert!(s.max_residual > 0.0);
    }

    #[test]
    fn scale_errors() {
        assert_eq!(estimate_scale(&[]).unwrap_err(), RegistrationError::NoPairs);
        assert_eq!(
            estimate_scale(&[pair(500.0, 1000.0), pair(0.0, 10.0)]).unwrap_err(),
            RegistrationError::ZeroMeasuredDistance(1)
        );
    }

    fn limb() -> Mesh {
        primitives::bent_limb("leg", 600.0, 60.0)
    }

    #[test]
    fn self_registration_is_identity() {
        let m = limb();
        let r = register_icp(&m, &m, &Pose::identity(), &IcpOptions::default()).unwrap();
        assert!(r.rmse < 1e-6);
        assert!(r.converged);
        let (d, ang) = pose_error(&m, &r.pose, &Pose::identity());
        assert!(d < 1e-6 && ang < 1e-6);
    }

    #[test]
    fn recovers_known_transform() {
        let design = limb();
        let truth_rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(0.2, 1.0, -0.4)), 0.9);
        let t = Pose::from_rotation(truth_rot, Vector3::new(120.0, -40.0, 300.0));
        let scan = design.transformed(&t);
        let truth = t.inverse();
        let centroid = Point3::from(design.vertices().iter().map(|p| p.coords).sum::<Vector3<f64>>() / design.vertex_count() as f64);
        let wobble = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(1.0, 1.0, 0.0)), 4f64.to_radians());
        let perturb = Pose::from_rotation(wobble, centroid.coords - wobble * centroid.coords + Vector3::new(3.0, -2.0, 2.5));
        let seed = truth.then(&perturb);
        let r = register_icp(&scan, &design, &seed, &IcpOptions::default()).unwrap();
        let (d, ang) = pose_error(&scan, &r.pose, &truth);
        assert!(d < 1e-3, "translation rms {d}");
        assert!(ang < 0.1, "angle {ang}");
        assert!(r.rmse < 1e-3);
        assert!(r.rmse_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn noisy_scan_rmse_matches_noise_level() {
        let design = limb();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // uniform on [-a, a] has σ = a/√3
        let a = 0.5 * 3f64.sqrt();
        let v = design
            .vertices()
            .iter()
            .map(|p| p + Vector3::new(rng.random_range(-a..a), rng.random_range(-a..a), rng.random_range(-a..a)))
            .collect();
        let scan = Mesh::new("noisy", v, design.faces().to_vec()).unwrap();
        let r = register_icp(&scan, &design, &Pose::identity(), &IcpOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.rmse > 0.3 && r.rmse < 0.7, "{}", r.rmse);
    }

    #[test]
    fn far_apart_meshes_have_no_correspondences() {
        let design = limb();
        let scan = design.transformed(&Pose::from_translation(Vector3::new(10_000.0, 0.0, 0.0)));
        let opts = IcpOptions {
            inlier_distance: 50.0,
            ..IcpOptions::default()
        };
        assert!(matches!(
            register_icp(&scan, &design, &Pose::identity(), &opts),
            Err(RegistrationError::NoCorrespondences { .. })
        ));
    }

    #[test]
    fn auto_seed_finds_large_rotations() {
        let design = limb();
        let t = Pose::from_rotation(Rotation3::from_euler_angles(2.0, -0.7, 1.2), Vector3::new(500.0, 0.0, -80.0));
        let scan = design.transformed(&t);
        let opts = IcpOptions {
            inlier_distance: 200.0,
            max_iterations: 100,
            ..IcpOptions::default()
        };
        let r = register_auto(&scan, &design, 1.0, &opts).unwrap();
        let (d, _) = pose_error(&scan, &r.pose, &t.inverse());
        assert!(d < 1e-2, "{d}");
    }

    #[test]
    fn deviation_examples() {
        let design = primitives::plate("plate", 200.0, 100.0, 10, 5);
        let same = deviation_report(&design, &design, &Pose::identity(), 5000, 5.0);
        assert!(same.summary.mean.abs() < 1e-6 && same.summary.max < 1e-6);
        assert!(same.threshold_exceeded.is_empty());

        let lifted = design.transformed(&Pose::from_translation(Vector3::new(0.0, 0.0, 2.0)));
        let rep = deviation_report(&lifted, &design, &Pose::identity(), 5000, 1.0);
        assert!((rep.summary.mean - 2.0).abs() < 1e-9);
        assert_eq!(rep.threshold_exceeded.len(), rep.distances.len());
        assert!(rep.summary.mean.abs() <= rep.summary.max && rep.summary.p95 <= rep.summary.max);

        let sunk = design.transformed(&Pose::from_translation(Vector3::new(0.0, 0.0, -2.0)));
        let rep = deviation_report(&sunk, &design, &Pose::identity(), 5000, 1.0);
        assert!((rep.summary.mean + 2.0).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_bounded_and_deterministic() {
        let m = primitives::uv_sphere("s", 10.0, 64, 32);
        let a = sample_vertices(&m, 500);
        assert!(a.len() <= 500 && a.len() > 400);
        assert_eq!(a, sample_vertices(&m, 500));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_vertices(&m, 1_000_000).len(), m.vertex_count());
    }
}
