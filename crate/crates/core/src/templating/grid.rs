use serde::Serialize;

use super::{TemplateError, TemplateSheet};
use crate::numfmt;

pub const DEFAULT_GRID_SPACING: f64 = 50.0;
/// Every fifth line carries a millimetre label (250 mm at the default spacing).
pub const LABEL_EVERY: i64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct GridLine {
    /// Sheet coordinate in drawing millimetres (x for vertical lines, y for horizontal).
    pub coordinate: f64,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Grid {
    pub spacing: f64,
    pub vertical: Vec<GridLine>,
    pub horizontal: Vec<GridLine>,
}

fn lines(lo: f64, hi: f64, spacing: f64) -> Vec<GridLine> {
    let first = (lo / spacing + 1e-9).floor() as i64;
    let last = (hi / spacing - 1e-9).ceil() as i64;
    (first..=last)
        .map(|k| {
            let coordinate = k as f64 * spacing;
            GridLine {
                coordinate,
                label: (k % LABEL_EVERY == 0).then(|| numfmt::fixed(coordinate, 3)),
            }
        })
        .collect()
}

/// Adds grid lines at every integer multiple of `spacing` that covers the sheet.
pub fn overlay_grid(sheet: &TemplateSheet, spacing: f64) -> Result<TemplateSheet, TemplateError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(TemplateError::InvalidSpacing(spacing));
    }
    let mut out = sheet.clone();
    out.grid_spacing = spacing;
    out.grid = Some(Grid {
        spacing,
        vertical: lines(0.0, sheet.width, spacing),
        horizontal: lines(0.0, sheet.height, spacing),
    });
    Ok(out)
}
