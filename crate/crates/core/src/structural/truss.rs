use nalgebra::{DMatrix, DVector, Point3, Vector3};
use serde::{Deserialize, Serialize, Serializer};

use super::units::{self, STANDARD_GRAVITY};
use super::StructuralError;

/// Default Young's modulus for aluminium tube (MPa).
pub const DEFAULT_MODULUS_MPA: f64 = 69_000.0;
/// Smallest stiffness eigenvalue, relative to the largest, that still counts as braced.
const MECHANISM_TOLERANCE: f64 = 1e-10;

fn default_modulus() -> f64 {
    DEFAULT_MODULUS_MPA
}

/// Translational restraints of a joint along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Restraint(pub [bool; 3]);

impl Restraint {
    pub const FREE: Restraint = Restraint([false; 3]);
    pub const PINNED: Restraint = Restraint([true; 3]);

    pub fn is_free(&self) -> bool {
        self.0 == [false; 3]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: String,
    /// Position in mm.
    pub position: [f64; 3],
    #[serde(default)]
    pub restraint: Restraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberGroup {
    Base,
    #[default]
    Skeleton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub name: String,
    pub joints: [usize; 2],
    pub area_mm2: f64,
    pub yield_mpa: f64,
    #[serde(default = "default_modulus")]
    pub modulus_mpa: f64,
    /// Overrides `area·yield` in tension (N).
    #[serde(default)]
    pub capacity_tension_n: Option<f64>,
    /// Overrides `area·yield` in compression (N).
    #[serde(default)]
    pub capacity_compression_n: Option<f64>,
    /// Mass per length for gravity cases (kg/m).
    #[serde(default)]
    pub linear_density_kg_m: f64,
    #[serde(default)]
    pub group: MemberGroup,
}

impl Member {
    pub fn new(name: impl Into<String>, a: usize, b: usize, area_mm2: f64, yield_mpa: f64) -> Self {
        Member {
            name: name.into(),
            joints: [a, b],
            area_mm2,
            yield_mpa,
            modulus_mpa: DEFAULT_MODULUS_MPA,
            capacity_tension_n: None,
            capacity_compression_n: None,
            linear_density_kg_m: 0.0,
            group: MemberGroup::Skeleton,
        }
    }

    pub fn capacity(&self, force: f64) -> f64 {
        let nominal = self.area_mm2 * self.yield_mpa;
        if force < 0.0 {
            self.capacity_compression_n.unwrap_or(nominal)
        } else {
            self.capacity_tension_n.unwrap_or(nominal)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrussModel {
    pub joints: Vec<Joint>,
    pub members: Vec<Member>,
}

impl TrussModel {
    pub fn joint_position(&self, j: usize) -> Point3<f64> {
        Point3::from(self.joints[j].position)
    }

    pub fn member_length(&self, m: usize) -> f64 {
        let [a, b] = self.members[m].joints;
        (self.joint_position(b) - self.joint_position(a)).norm()
    }

    pub fn validate(&self) -> Result<(), StructuralError> {
        for (i, j) in self.joints.iter().enumerate() {
            if !j.position.iter().all(|v| v.is_finite()) {
                return Err(StructuralError::InvalidModel(format!("joint {i} has a non-finite position")));
            }
        }
        for (i, m) in self.members.iter().enumerate() {
            for &j in &m.joints {
                if j >= self.joints.len() {
                    return Err(StructuralError::InvalidJoint { member: i, joint: j });
                }
            }
            if self.member_length(i) <= 0.0 {
                return Err(StructuralError::ZeroLengthMember(i));
            }
            let positive = |v: f64| v > 0.0 && v.is_finite();
            if !(positive(m.area_mm2) && positive(m.yield_mpa) && positive(m.modulus_mpa)) {
                return Err(StructuralError::InvalidModel(format!(
                    "member {i} needs positive area, yield strength and modulus"
                )));
            }
            if !(m.linear_density_kg_m >= 0.0 && m.linear_density_kg_m.is_finite()) {
                return Err(StructuralError::InvalidModel(format!("member {i} has a negative density")));
            }
            for cap in [m.capacity_tension_n, m.capacity_compression_n].into_iter().flatten() {
                if !positive(cap) {
                    return Err(StructuralError::InvalidModel(format!("member {i} has a non-positive capacity")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub joint: usize,
    /// Force in N.
    pub force: [f64; 3],
}

/// Drag on a joint's tributary area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exposure {
    pub joint: usize,
    pub area_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindLoad {
    pub speed_ms: f64,
    #[serde(default = "default_cd")]
    pub drag_coefficient: f64,
    #[serde(default = "default_rho")]
    pub air_density: f64,
    /// Direction the wind blows towards; only its horizontal part is used.
    pub direction: [f64; 3],
    pub exposures: Vec<Exposure>,
}

fn default_cd() -> f64 {
    units::DEFAULT_DRAG_COEFFICIENT
}

fn default_rho() -> f64 {
    units::SEA_LEVEL_AIR_DENSITY
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadCase {
    pub name: String,
    #[serde(default)]
    pub point_loads: Vec<PointLoad>,
    #[serde(default)]
    pub wind: Option<WindLoad>,
    /// Adds member self-weight, split half to each end.
    #[serde(default)]
    pub gravity: bool,
}

impl LoadCase {
    pub fn new(name: impl Into<String>) -> Self {
        LoadCase {
            name: name.into(),
            ..LoadCase::default()
        }
    }

    /// 250 lbf straight down at each foothold.
    pub fn climb_static(footholds: &[usize]) -> Self {
        let f = units::lbf_to_n(units::CLIMB_STATIC_LBF);
        LoadCase {
            name: "climb-static".into(),
            point_loads: footholds.iter().map(|&j| PointLoad { joint: j, force: [0.0, 0.0, -f] }).collect(),
            ..LoadCase::default()
        }
    }

    /// 400 lbf straight down at each joint.
    pub fn climb_dynamic(joints: &[usize]) -> Self {
        let f = units::lbf_to_n(units::CLIMB_DYNAMIC_LBF);
        LoadCase {
            name: "climb-dynamic".into(),
            point_loads: joints.iter().map(|&j| PointLoad { joint: j, force: [0.0, 0.0, -f] }).collect(),
            ..LoadCase::default()
        }
    }

    /// 75 mph gust with default drag coefficient and sea-level air.
    pub fn design_gust(direction: [f64; 3], exposures: Vec<Exposure>) -> Self {
        LoadCase {
            name: "gust-75mph".into(),
            wind: Some(WindLoad {
                speed_ms: units::design_gust_ms(),
                drag_coefficient: units::DEFAULT_DRAG_COEFFICIENT,
                air_density: units::SEA_LEVEL_AIR_DENSITY,
                direction,
                exposures,
            }),
            ..LoadCase::default()
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.point_loads {
            p.force = p.force.map(|f| f * k);
        }
        out
    }

    /// Resultant force on every joint (N).
    pub fn joint_forces(&self, model: &TrussModel) -> Result<Vec<Vector3<f64>>, StructuralError> {
        let n = model.joints.len();
        let mut f = vec![Vector3::zeros(); n];
        let check_joint = |j: usize| {
            if j < n {
                Ok(j)
            } else {
                Err(StructuralError::InvalidLoad(format!("load on unknown joint {j}")))
            }
        };
        for p in &self.point_loads {
            let v = Vector3::from(p.force);
            if !v.iter().all(|x| x.is_finite()) {
                return Err(StructuralError::InvalidLoad(format!("non-finite load on joint {}", p.joint)));
            }
            f[check_joint(p.joint)?] += v;
        }
        if let Some(w) = &self.wind {
            let dir = Vector3::new(w.direction[0], w.direction[1], 0.0);
            let norm = dir.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(StructuralError::InvalidLoad("wind direction has no horizontal part".into()));
            }
            for e in &w.exposures {
                let drag = wind_drag_force(w.speed_ms, w.drag_coefficient, e.area_m2, w.air_density)?;
                f[check_joint(e.joint)?] += dir / norm * drag;
            }
        }
        if self.gravity {
            for (i, m) in model.members.iter().enumerate() {
                let weight = m.linear_density_kg_m * model.member_length(i) / 1000.0 * STANDARD_GRAVITY;
                for &j in &m.joints {
                    f[j].z -= weight / 2.0;
                }
            }
        }
        Ok(f)
    }
}

/// Drag `½·ρ·C_d·A·v²` in N for speed in m/s, area in m² and density in kg/m³.
pub fn wind_drag_force(speed: f64, drag_coefficient: f64, area: f64, air_density: f64) -> Result<f64, StructuralError> {
    for (name, v) in [("speed", speed), ("drag coefficient", drag_coefficient), ("area", area), ("air density", air_density)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(StructuralError::InvalidLoad(format!("{name} must be finite and non-negative, got {v}")));
        }
    }
    Ok(0.5 * air_density * drag_coefficient * area * speed * speed)
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberReport {
    pub member: usize,
    pub name: String,
    pub group: MemberGroup,
    /// Axial force in N, positive in tension.
    pub force: f64,
    pub capacity: f64,
    pub utilization: f64,
    /// `capacity / |force|`; infinite (null in JSON) for zero-force members.
    #[serde(serialize_with = "finite_or_null")]
    pub factor_of_safety: f64,
}

impl MemberReport {
    pub fn new(member: usize, m: &Member, force: f64) -> Self {
        let capacity = m.capacity(force);
        let (utilization, factor_of_safety) = if force == 0.0 {
            (0.0, f64::INFINITY)
        } else {
            (force.abs() / capacity, capacity / force.abs())
        };
        MemberReport {
            member,
            name: m.name.clone(),
            group: m.group,
            force,
            capacity,
            utilization,
            factor_of_safety,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reaction {
    pub joint: usize,
    pub force: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrussSolution {
    pub case: String,
    pub members: Vec<MemberReport>,
    /// Reactions exerted by the supports on the structure (N).
    pub reactions: Vec<Reaction>,
    /// Joint displacements (mm).
    pub displacements: Vec<[f64; 3]>,
    /// Largest out-of-balance force over free joint directions (N).
    pub equilibrium_residual: f64,
}

impl TrussSolution {
    pub fn total_reaction(&self) -> Vector3<f64> {
        self.reactions.iter().map(|r| Vector3::from(r.force)).sum()
    }
}

/// Direct-stiffness solve of a pin-jointed truss.
///
/// Fails with [`StructuralError::MechanismDetected`] when the free degrees of
/// freedom admit a zero-stiffness motion, which is reported per joint.
pub fn solve_truss(model: &TrussModel, load: &LoadCase) -> Result<TrussSolution, StructuralError> {
    model.validate()?;
    let forces = load.joint_forces(model)?;
    let n = model.joints.len();
    let dof = 3 * n;
    let mut k = DMatrix::<f64>::zeros(dof, dof);
    let mut dirs = Vec::with_capacity(model.members.len());
    for (i, m) in model.members.iter().enumerate() {
        let [a, b] = m.joints;
        let len = model.member_length(i);
        let e = (model.joint_position(b) - model.joint_position(a)) / len;
        let stiff = m.modulus_mpa * m.area_mm2 / len;
        let block = e * e.transpose() * stiff;
        for (p, q, sign) in [(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)] {
            for r in 0..3 {
                for c in 0..3 {
                    k[(3 * p + r, 3 * q + c)] += sign * block[(r, c)];
                }
            }
        }
        dirs.push((e, stiff));
    }

    let free: Vec<usize> = (0..dof).filter(|&d| !model.joints[d / 3].restraint.0[d % 3]).collect();
    let f_all = DVector::from_iterator(dof, forces.iter().flat_map(|v| [v.x, v.y, v.z]));
    let mut u = DVector::<f64>::zeros(dof);
    if !free.is_empty() {
        let kff = DMatrix::from_fn(free.len(), free.len(), |r, c| k[(free[r], free[c])]);
        let ff = DVector::from_iterator(free.len(), free.iter().map(|&d| f_all[d]));
        let eig = kff.clone().symmetric_eigen();
        let (imin, lmin) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        if lmax <= 0.0 || lmin <= MECHANISM_TOLERANCE * lmax {
            let v = eig.eigenvectors.column(imin);
            let mut motion = vec![[0.0; 3]; n];
            for (r, &d) in free.iter().enumerate() {
                motion[d / 3][d % 3] = v[r];
            }
            return Err(StructuralError::MechanismDetected { motion });
        }
        let uf = kff.cholesky().ok_or(StructuralError::MechanismDetected { motion: vec![[0.0; 3]; n] })?.solve(&ff);
        for (r, &d) in free.iter().enumerate() {
            u[d] = uf[r];
        }
    }

    let ku = &k * &u;
    let mut residual = 0.0f64;
    for &d in &free {
        residual = residual.max((ku[d] - f_all[d]).abs());
    }
    let reactions = (0..n)
        .filter(|&j| !model.joints[j].restraint.is_free())
        .map(|j| {
            let mut r = [0.0; 3];
            for (c, slot) in r.iter_mut().enumerate() {
                if model.joints[j].restraint.0[c] {
                    *slot = ku[3 * j + c] - f_all[3 * j + c];
                }
            }
            Reaction { joint: j, force: r }
        })
        .collect();
    let members = model
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let [a, b] = m.joints;
            let (e, stiff) = dirs[i];
            let du = Vector3::new(u[3 * b] - u[3 * a], u[3 * b + 1] - u[3 * a + 1], u[3 * b + 2] - u[3 * a + 2]);
            MemberReport::new(i, m, stiff * e.dot(&du))
        })
        .collect();
    Ok(TrussSolution {
        case: load.name.clone(),
        members,
        reactions,
        displacements: (0..n).map(|j| [u[3 * j], u[3 * j + 1], u[3 * j + 2]]).collect(),
        equilibrium_residual: residual,
    })
}

/// Solves several load cases in parallel over one model.
pub fn solve_cases(model: &TrussModel, cases: &[LoadCase]) -> Vec<Result<TrussSolution, StructuralError>> {
    use rayon::prelude::*;
    cases.par_iter().map(|c| solve_truss(model, c)).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn joint(name: &str, p: [f64; 3], r: [bool; 3]) -> Joint {
        Joint {
            name: name.into(),
            position: p,
            restraint: Restraint(r),
        }
    }

    /// Two bars at 45° from vertical meeting at an apex, in the x–z plane.
    pub(crate) fn two_bar() -> TrussModel {
        TrussModel {
            joints: vec![
                joint("left", [-1000.0, 0.0, 0.0], [true; 3]),
                joint("right", [1000.0, 0.0, 0.0], [true; 3]),
                joint("apex", [0.0, 0.0, 1000.0], [false, true, false]),
            ],
            members: vec![Member::new("l", 0, 2, 100.0, 200.0), Member::new("r", 1, 2, 100.0, 200.0)],
        }
    }

    fn down(joint: usize, p: f64) -> LoadCase {
        LoadCase {
            name: "p".into(),
            point_loads: vec![PointLoad { joint, force: [0.0, 0.0, -p] }],
            ..LoadCase::default()
        }
    }

    #[test]
    fn two_bar_method_of_joints() {
        let s = solve_truss(&two_bar(), &down(2, 1000.0)).unwrap();
        // P / (2 cos 45°)
        let expect = 1000.0 / (2.0 * std::f64::consts::FRAC_PI_4.cos());
        for m in &s.members {
            assert!((m.force + expect).abs() < 1e-6, "{}", m.force);
            assert!((m.factor_of_safety * m.utilization - 1.0).abs() < 1e-12);
        }
        assert!((s.total_reaction() - Vector3::new(0.0, 0.0, 1000.0)).norm() < 1e-6);
    }

    #[test]
    fn vertical_bar_carries_dynamic_climb_load() {
        let model = TrussModel {
            joints: vec![joint("foot", [0.0; 3], [true; 3]), joint("top", [0.0, 0.0, 2000.0], [true, true, false])],
            members: vec![Member::new("post", 0, 1, 300.0, 240.0)],
        };
        let s = solve_truss(&model, &LoadCase::climb_dynamic(&[1])).unwrap();
        assert!((s.members[0].force.abs() - 1779.3).abs() < 0.05);
        assert!(s.members[0].force < 0.0);
    }

    #[test]
    fn unbraced_square_is_a_mechanism() {
        let pin = [true; 3];
        let planar = [false, true, false];
        let model = TrussModel {
            joints: vec![
                joint("a", [0.0, 0.0, 0.0], pin),
                joint("b", [1000.0, 0.0, 0.0], pin),
                joint("c", [1000.0, 0.0, 1000.0], planar),
                joint("d", [0.0, 0.0, 1000.0], planar),
            ],
            members: vec![
                Member::new("ab", 0, 1, 100.0, 200.0),
                Member::new("bc", 1, 2, 100.0, 200.0),
                Member::new("cd", 2, 3, 100.0, 200.0),
                Member::new("da", 3, 0, 100.0, 200.0),
            ],
        };
        match solve_truss(&model, &down(2, 10.0)) {
            Err(StructuralError::MechanismDetected { motion }) => {
                // the sway moves both top joints sideways together
                assert!(motion[2][0].abs() > 0.1 && (motion[2][0] - motion[3][0]).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        let mut braced = model.clone();
        braced.members.push(Member::new("ac", 0, 2, 100.0, 200.0));
        assert!(solve_truss(&braced, &down(2, 10.0)).is_ok());
    }

    #[test]
    fn zero_force_member_has_infinite_fos() {
        let mut model = two_bar();
        model.joints.push(joint("spare", [0.0, 0.0, 2000.0], [false, true, false]));
        model.joints[3].restraint = Restraint([true, true, false]);
        model.members.push(Member::new("mast", 2, 3, 100.0, 200.0));
        let s = solve_truss(&model, &down(2, 1000.0)).unwrap();
        assert!(s.members[2].force.abs() < 1e-9);
        let r = MemberReport::new(2, &model.members[2], 0.0);
        assert!(r.factor_of_safety.is_infinite() && r.utilization == 0.0);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["factor_of_safety"].is_null());
    }

    #[test]
    fn drag_examples() {
        let f = wind_drag_force(units::design_gust_ms(), 1.2, 1.0, 1.225).unwrap();
        // ½ · 1.225 · 1.2 · 1 · 33.528² evaluated by hand
        assert!((f - 826.23).abs() < 0.01, "{f}");
        assert_eq!(wind_drag_force(0.0, 1.2, 1.0, 1.225).unwrap(), 0.0);
        let f2 = wind_drag_force(2.0 * units::design_gust_ms(), 1.2, 1.0, 1.225).unwrap();
        assert!((f2 / f - 4.0).abs() < 1e-12);
        assert!(wind_drag_force(-1.0, 1.2, 1.0, 1.225).is_err());
    }

    #[test]
    fn gust_and_gravity_loads() {
        let mut model = two_bar();
        model.members[0].linear_density_kg_m = 2.0;
        let case = LoadCase {
            gravity: true,
            ..LoadCase::design_gust([1.0, 0.0, 0.0], vec![Exposure { joint: 2, area_m2: 0.5 }])
        };
        let f = case.joint_forces(&model).unwrap();
        let drag = wind_drag_force(units::design_gust_ms(), 1.2, 0.5, 1.225).unwrap();
        assert!((f[2].x - drag).abs() < 1e-9);
        let w = 2.0 * model.member_length(0) / 1000.0 * STANDARD_GRAVITY;
        assert!((f[0].z + w / 2.0).abs() < 1e-9 && (f[2].z + w / 2.0).abs() < 1e-9);
        let s = solve_truss(&model, &case).unwrap();
        let total: Vector3<f64> = f.iter().sum();
        assert!((s.total_reaction() + total).norm() < 1e-6);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut m = two_bar();
        m.members.push(Member::new("bad", 0, 7, 1.0, 1.0));
        assert_eq!(
            solve_truss(&m, &down(2, 1.0)).unwrap_err(),
            StructuralError::InvalidJoint { member: 2, joint: 7 }
        );
        let mut m = two_bar();
        m.joints[2].position = m.joints[0].position;
        assert_eq!(solve_truss(&m, &down(2, 1.0)).unwrap_err(), StructuralError::ZeroLengthMember(0));
    }
}
