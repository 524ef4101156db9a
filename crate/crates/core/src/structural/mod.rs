//! Desk-scale structural checks: wind drag, pin-jointed trusses, anchor loads,
//! foothold stability and the factor-of-safety gate.
//!
//! Units are mm, N and MPa throughout, except wind speed (m/s), exposure area (m²)
//! and air density (kg/m³), which follow the usual drag formula.

pub mod anchors;
pub mod footholds;
pub mod format;
pub mod report;
pub mod truss;
pub mod units;

pub use anchors::{anchor_distribution, hexagon_anchors, AnchorLoad, AnchorReport, BaseLoad, SpacingViolation};
pub use footholds::{enumerate_footholds, foothold_combinations, foothold_stability, hexagon_base, FootholdConfig};
pub use format::{parse_structural, StructuralInput};
pub use report::{base_members, compliance_markdown, compliance_report, fos_summary, ComplianceReport, FosSummary};
pub use truss::{
    solve_cases, solve_truss, wind_drag_force, Exposure, Joint, LoadCase, Member, MemberGroup, MemberReport, PointLoad, Reaction,
    Restraint, TrussModel, TrussSolution, WindLoad,
};

use crate::error::ErrorCode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructuralError {
    #[error("invalid truss model: {0}")]
    InvalidModel(String),
    #[error("member {member} references missing joint {joint}")]
    InvalidJoint { member: usize, joint: usize },
    #[error("member {0} has zero length")]
    ZeroLengthMember(usize),
    #[error("truss is a mechanism; add bracing or supports")]
    MechanismDetected {
        /// Zero-stiffness motion of each joint.
        motion: Vec<[f64; 3]>,
    },
    #[error("invalid load: {0}")]
    InvalidLoad(String),
    #[error("anchors must include at least three non-collinear points")]
    CollinearAnchors,
    #[error("invalid foothold selection {0:?}")]
    InvalidFootholds(Vec<usize>),
    #[error("no member reports to summarise")]
    EmptyReports,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl ErrorCode for StructuralError {
    fn code(&self) -> &'static str {
        match self {
            StructuralError::InvalidModel(_) => "InvalidModel",
            StructuralError::InvalidJoint { .. } => "InvalidJoint",
            StructuralError::ZeroLengthMember(_) => "ZeroLengthMember",
            StructuralError::MechanismDetected { .. } => "MechanismDetected",
            StructuralError::InvalidLoad(_) => "InvalidLoad",
            StructuralError::CollinearAnchors => "CollinearAnchors",
            StructuralError::InvalidFootholds(_) => "InvalidFootholds",
            StructuralError::EmptyReports => "EmptyReports",
            StructuralError::Parse { .. } => "ParseError",
        }
    }
}
