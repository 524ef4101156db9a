//! 1:1 fabrication templates.
//!
//! A mesh is projected orthographically into a [`TemplateSheet`] (true millimetres
//! times `scale`), optionally overlaid with a metric grid, split into overlapping
//! [`TemplatePage`]s that fit a paper format, and rendered to one SVG per page whose
//! header declares physical size so a 100% print is metrically true.

mod grid;
mod projection;
mod svg;
mod tiling;

pub use grid::{overlay_grid, Grid, GridLine, DEFAULT_GRID_SPACING, LABEL_EVERY};
pub use projection::{project_orthographic, project_view, ProjectionOptions, View, DEFAULT_FEATURE_ANGLE_DEG};
pub use svg::{page_file_name, render_svg, sidecar_json, CALIBRATION_BAR_MM};
pub use tiling::{
    tile_pages, PagePreset, RegistrationMark, TemplatePage, DEFAULT_MARGIN, DEFAULT_OVERLAP,
};

use nalgebra::{Point2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::ErrorCode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TemplateError {
    #[error("mesh projects to zero area along this view")]
    DegenerateView,
    #[error("invalid view: {0}")]
    InvalidView(String),
    #[error("grid spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("invalid scale {0}")]
    InvalidScale(f64),
    #[error("printable area {printable_width}×{printable_height} mm does not exceed overlap {overlap} mm")]
    PageTooSmall {
        printable_width: f64,
        printable_height: f64,
        overlap: f64,
    },
}

impl ErrorCode for TemplateError {
    fn code(&self) -> &'static str {
        match self {
            TemplateError::DegenerateView => "DegenerateView",
            TemplateError::InvalidView(_) => "InvalidView",
            TemplateError::InvalidSpacing(_) => "InvalidSpacing",
            TemplateError::InvalidScale(_) => "InvalidScale",
            TemplateError::PageTooSmall { .. } => "PageTooSmall",
        }
    }
}

/// A projected drawing in sheet coordinates: millimetres on paper, x to the right,
/// y up, with the drawing's bounding box starting at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSheet {
    pub source_mesh: String,
    pub view_direction: Vector3<f64>,
    pub view_up: Vector3<f64>,
    /// Drawing millimetres per object millimetre.
    pub scale: f64,
    /// Silhouette loops plus projected feature and boundary edges.
    pub outline: Vec<Vec<Point2<f64>>>,
    /// Closed polygons (first point repeated at the end); holes wind clockwise.
    pub silhouette: Vec<Vec<Point2<f64>>>,
    pub width: f64,
    pub height: f64,
    /// Projected-plane coordinates (times scale) of the sheet origin.
    pub origin_offset: [f64; 2],
    pub grid_spacing: f64,
    pub grid: Option<Grid>,
}

impl TemplateSheet {
    /// Total silhouette area in drawing mm² (holes subtract).
    pub fn silhouette_area(&self) -> f64 {
        self.silhouette.iter().map(|p| crate::geom::polygon_area(p)).sum()
    }

    /// Sheet coordinates of an object point, projected along this sheet's view.
    pub fn project_point(&self, p: &nalgebra::Point3<f64>) -> Point2<f64> {
        let right = self.view_direction.cross(&self.view_up);
        Point2::new(
            p.coords.dot(&right) * self.scale - self.origin_offset[0],
            p.coords.dot(&self.view_up) * self.scale - self.origin_offset[1],
        )
    }
}
