use nalgebra::Point2;
use serde::Serialize;

use super::{TemplateError, TemplateSheet};

pub const DEFAULT_MARGIN: f64 = 10.0;
pub const DEFAULT_OVERLAP: f64 = 20.0;
/// Width of the roll preset; its length adapts to the sheet.
pub const ROLL_WIDTH: f64 = 914.0;

/// Paper formats in portrait orientation (width × height, mm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PagePreset {
    A0,
    A1,
    A3,
    A4,
    Roll914,
    Custom { width: f64, height: f64 },
}

impl PagePreset {
    /// Page size for a sheet of the given drawing height. The roll is cut to fit
    /// the whole drawing in one row, but never shorter than an A4 sheet.
    pub fn dimensions(&self, sheet_height: f64, margin: f64) -> (f64, f64) {
        match *self {
            PagePreset::A0 => (841.0, 1189.0),
            PagePreset::A1 => (594.0, 841.0),
            PagePreset::A3 => (297.0, 420.0),
            PagePreset::A4 => (210.0, 297.0),
            PagePreset::Roll914 => (ROLL_WIDTH, (sheet_height + 2.0 * margin).ceil().max(297.0)),
            PagePreset::Custom { width, height } => (width, height),
        }
    }

    pub fn name(&self) -> String {
        match self {
            PagePreset::A0 => "A0".into(),
            PagePreset::A1 => "A1".into(),
            PagePreset::A3 => "A3".into(),
            PagePreset::A4 => "A4".into(),
            PagePreset::Roll914 => "roll914".into(),
            PagePreset::Custom { width, height } => format!("{width}x{height}"),
        }
    }
}

impl std::str::FromStr for PagePreset {
    type Err = String;

    /// Accepts `A0`, `A1`, `A3`, `A4`, `roll`/`roll914`, or `<width>x<height>` in mm.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a0" => Ok(PagePreset::A0),
            "a1" => Ok(PagePreset::A1),
            "a3" => Ok(PagePreset::A3),
            "a4" => Ok(PagePreset::A4),
            "roll" | "roll914" => Ok(PagePreset::Roll914),
            other => {
                let (w, h) = other
                    .split_once('x')
                    .ok_or_else(|| format!("unknown page preset {s:?} (A0, A1, A3, A4, roll914 or WxH)"))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| *x > 0.0 && x.is_finite())
                        .ok_or_else(|| format!("invalid page size {s:?}"))
                };
                Ok(PagePreset::Custom {
                    width: parse(w)?,
                    height: parse(h)?,
                })
            }
        }
    }
}

/// Corner cross, in page-local printable coordinates (mm, y up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegistrationMark {
    pub x: f64,
    pub y: f64,
    pub size: f64,
}

/// One physical page of a tiled sheet.
///
/// Page-local coordinates start at the lower-left corner of the printable area;
/// `sheet = local + offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplatePage {
    pub page_width: f64,
    pub page_height: f64,
    pub printable_margin: f64,
    pub overlap: f64,
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
    pub offset: [f64; 2],
    pub registration_marks: Vec<RegistrationMark>,
    pub label: String,
}

impl TemplatePage {
    pub fn printable_width(&self) -> f64 {
        self.page_width - 2.0 * self.printable_margin
    }

    pub fn printable_height(&self) -> f64 {
        self.page_height - 2.0 * self.printable_margin
    }

    pub fn to_sheet(&self, local: &Point2<f64>) -> Point2<f64> {
        Point2::new(local.x + self.offset[0], local.y + self.offset[1])
    }

    pub fn to_local(&self, sheet: &Point2<f64>) -> Point2<f64> {
        Point2::new(sheet.x - self.offset[0], sheet.y - self.offset[1])
    }

    /// Whether a sheet point falls on this page's printable area (boundary included).
    pub fn covers(&self, sheet: &Point2<f64>) -> bool {
        let l = self.to_local(sheet);
        l.x >= 0.0 && l.y >= 0.0 && l.x <= self.printable_width() && l.y <= self.printable_height()
    }
}

fn count(extent: f64, printable: f64, overlap: f64) -> usize {
    if extent <= printable {
        1
    } else {
        ((extent - overlap) / (printable - overlap) - 1e-9).ceil() as usize
    }
}

/// Splits a sheet into a grid of pages whose printable areas overlap by `overlap` mm.
///
/// Row 0 is the bottom row of the drawing.
pub fn tile_pages(
    sheet: &TemplateSheet,
    page_width: f64,
    page_height: f64,
    margin: f64,
    overlap: f64,
) -> Result<Vec<TemplatePage>, TemplateError> {
    let pw = page_width - 2.0 * margin;
    let ph = page_height - 2.0 * margin;
    let valid = [page_width, page_height, margin, overlap].iter().all(|v| v.is_finite())
        && margin >= 0.0
        && overlap >= 0.0;
    if !valid || pw <= overlap || ph <= overlap {
        return Err(TemplateError::PageTooSmall {
            printable_width: pw,
            printable_height: ph,
            overlap,
        });
    }
    let cols = count(sheet.width, pw, overlap);
    let rows = count(sheet.height, ph, overlap);
    let mark = 5.0f64.min(pw / 4.0).min(ph / 4.0);
    let mut pages = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let registration_marks = [(0.0, 0.0), (pw, 0.0), (0.0, ph), (pw, ph)]
                .iter()
                .map(|&(x, y)| RegistrationMark { x, y, size: mark })
                .collect();
            pages.push(TemplatePage {
                page_width,
                page_height,
                printable_margin: margin,
                overlap,
                row,
                col,
                rows,
                cols,
                offset: [col as f64 * (pw - overlap), row as f64 * (ph - overlap)],
                registration_marks,
                label: format!("R{row}C{col}"),
            });
        }
    }
    Ok(pages)
}
