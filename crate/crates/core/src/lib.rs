//! Mesh-to-fabrication toolkit.
//!
//! `fabtwin` takes triangle meshes of sculpture parts (parametric exports or
//! photogrammetry scans) and turns them into things a workshop can use:
//!
//! - [`mesh`]: OBJ / STL / PLY parsing, validation, statistics and a stable JSON export.
//! - [`orientation`]: principal frames and canonical poses for arbitrarily posed parts.
//! - [`templating`]: 1:1 orthographic templates with metric grids, tiled onto paper pages
//!   and rendered as millimetre-true SVG.
//! - [`geodesics`]: surface path lengths and cross-section ring lengths for cane and wire stock.
//! - [`registration`]: scale recovery, point-to-plane ICP and deviation reports for scan-vs-design drift.
//! - [`structural`]: wind drag, pin-jointed truss statics, factor-of-safety gates, anchor loads
//!   and hexagonal-base foothold stability.
//! - [`packing`]: crate assignment under mass and volume limits.
//! - [`cli`] and [`service`]: the `fabtwin` command line and the local HTTP bridge for the viewer.
//!
//! Every length is in millimetres unless a name says otherwise.

pub mod cli;
pub mod error;
pub mod geodesics;
pub mod geom;
pub mod mesh;
pub mod numfmt;
pub mod orientation;
pub mod packing;
pub mod primitives;
pub mod registration;
pub mod service;
pub mod spatial;
pub mod structural;
pub mod templating;

pub use error::{Error, ErrorCode};
pub use mesh::{Mesh, MeshStats};
pub use orientation::Pose;
