use std::fmt::Write as _;

use nalgebra::Point2;
use serde::Serialize;

use super::{TemplatePage, TemplateSheet};
use crate::numfmt;

pub const CALIBRATION_BAR_MM: f64 = 100.0;
const DECIMALS: usize = 4;

fn f(v: f64) -> String {
    numfmt::fixed(v, DECIMALS)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// `{mesh}_{view}_R{r}C{c}.svg`
pub fn page_file_name(mesh: &str, view: &str, page: &TemplatePage) -> String {
    format!("{mesh}_{view}_{}.svg", page.label)
}

struct PageFrame<'a> {
    page: &'a TemplatePage,
}

impl PageFrame<'_> {
    /// Sheet millimetres to SVG user units (millimetres, y down, origin at page corner).
    fn map(&self, p: &Point2<f64>) -> (f64, f64) {
        let l = self.page.to_local(p);
        let m = self.page.printable_margin;
        (m + l.x, m + self.page.printable_height() - l.y)
    }

    fn overlaps(&self, pts: &[Point2<f64>]) -> bool {
        let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in pts {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let o = self.page.offset;
        hi.x >= o[0] && lo.x <= o[0] + self.page.printable_width() && hi.y >= o[1] && lo.y <= o[1] + self.page.printable_height()
    }

    fn path(&self, pts: &[Point2<f64>], close: bool) -> String {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, f(x), f(y));
        }
        if close {
            d.push_str(" Z");
        }
        d
    }
}

/// Renders one SVG 1.1 document per page. Each document is exactly page-sized in
/// millimetres with a 1 mm = 1 user unit view box, so printing at 100% is 1:1.
pub fn render_svg(pages: &[TemplatePage], sheet: &TemplateSheet) -> Vec<Vec<u8>> {
    pages.iter().map(|p| render_page(p, sheet).into_bytes()).collect()
}

fn render_page(page: &TemplatePage, sheet: &TemplateSheet) -> String {
    let frame = PageFrame { page };
    let (w, h) = (page.page_width, page.page_height);
    let m = page.printable_margin;
    let (pw, ph) = (page.printable_width(), page.printable_height());
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"0 0 {w} {h}\">",
        w = f(w),
        h = f(h)
    );
    let _ = writeln!(
        s,
        "<defs><clipPath id=\"printable\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath></defs>",
        f(m),
        f(m),
        f(pw),
        f(ph)
    );
    s.push_str("<g clip-path=\"url(#printable)\" fill=\"none\" stroke-linecap=\"round\">\n");

    if let Some(grid) = &sheet.grid {
        s.push_str("<g class=\"grid\" stroke=\"#9ab\" stroke-width=\"0.2\">\n");
        let o = page.offset;
        for line in &grid.vertical {
            if line.coordinate < o[0] || line.coordinate > o[0] + pw {
                continue;
            }
            let (x, _) = frame.map(&Point2::new(line.coordinate, o[1]));
            let _ = writeln!(s, "<path d=\"M{} {} V{}\"/>", f(x), f(m), f(m + ph));
        }
        for line in &grid.horizontal {
            if line.coordinate < o[1] || line.coordinate > o[1] + ph {
                continue;
            }
            let (_, y) = frame.map(&Point2::new(o[0], line.coordinate));
            let _ = writeln!(s, "<path d=\"M{} {} H{}\"/>", f(m), f(y), f(m + pw));
        }
        s.push_str("</g>\n<g class=\"grid-labels\" fill=\"#579\" stroke=\"none\" font-family=\"sans-serif\" font-size=\"3\">\n");
        for line in grid.vertical.iter().filter(|l| l.label.is_some()) {
            if line.coordinate < o[0] || line.coordinate > o[0] + pw {
                continue;
            }
            let (x, _) = frame.map(&Point2::new(line.coordinate, o[1]));
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{}</text>", f(x + 0.5), f(m + ph - 1.0), line.label.as_deref().unwrap_or_default());
        }
        for line in grid.horizontal.iter().filter(|l| l.label.is_some()) {
            if line.coordinate < o[1] || line.coordinate > o[1] + ph {
                continue;
            }
            let (_, y) = frame.map(&Point2::new(o[0], line.coordinate));
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{}</text>", f(m + 1.0), f(y - 0.5), line.label.as_deref().unwrap_or_default());
        }
        s.push_str("</g>\n");
    }

    s.push_str("<g class=\"silhouette\" stroke=\"#000\" stroke-width=\"0.5\">\n");
    for poly in sheet.silhouette.iter().filter(|p| frame.overlaps(p)) {
        let _ = writeln!(s, "<path d=\"{}\"/>", frame.path(&poly[..poly.len() - 1], true));
    }
    s.push_str("</g>\n<g class=\"features\" stroke=\"#444\" stroke-width=\"0.25\">\n");
    let n_sil = sheet.silhouette.len();
    for line in sheet.outline.iter().skip(n_sil).filter(|p| frame.overlaps(p)) {
        let _ = writeln!(s, "<path d=\"{}\"/>", frame.path(line, false));
    }
    s.push_str("</g>\n</g>\n");

    s.push_str("<g class=\"registration\" fill=\"none\" stroke=\"#000\" stroke-width=\"0.2\">\n");
    for mark in &page.registration_marks {
        let (x, y) = (m + mark.x, m + ph - mark.y);
        let r = mark.size;
        let _ = writeln!(
            s,
            "<path d=\"M{} {} H{} M{} {} V{}\"/>",
            f(x - r),
            f(y),
            f(x + r),
            f(x),
            f(y - r),
            f(y + r)
        );
    }
    s.push_str("</g>\n");

    // calibration bar sits in the bottom margin so it never hides the drawing
    let bar_y = h - m / 2.0;
    let _ = writeln!(
        s,
        "<g class=\"calibration\"><path d=\"M{} {} h{}\" stroke=\"#000\" stroke-width=\"0.5\"/><text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"3\">{} mm</text></g>",
        f(m),
        f(bar_y),
        f(CALIBRATION_BAR_MM),
        f(m + CALIBRATION_BAR_MM + 2.0),
        f(bar_y + 1.0),
        f(CALIBRATION_BAR_MM)
    );
    let _ = writeln!(
        s,
        "<text class=\"label\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"4\">{} {} of {}x{} scale {}</text>",
        f(m),
        f(m * 0.7),
        escape(&sheet.source_mesh),
        page.label,
        page.rows,
        page.cols,
        f(sheet.scale)
    );
    s.push_str("</svg>\n");
    s
}

#[derive(Serialize)]
struct SidecarPage {
    file: String,
    row: usize,
    col: usize,
    offset: [f64; 2],
}

#[derive(Serialize)]
struct Sidecar<'a> {
    source_mesh: &'a str,
    view: &'a str,
    view_direction: [f64; 3],
    view_up: [f64; 3],
    scale: f64,
    sheet_width: f64,
    sheet_height: f64,
    origin_offset: [f64; 2],
    grid_spacing: f64,
    page_width: f64,
    page_height: f64,
    margin: f64,
    overlap: f64,
    rows: usize,
    cols: usize,
    pages: Vec<SidecarPage>,
}

/// Sheet metadata written next to the page files.
pub fn sidecar_json(sheet: &TemplateSheet, view: &str, pages: &[TemplatePage]) -> Vec<u8> {
    let first = pages.first();
    let d = &sheet.view_direction;
    let u = &sheet.view_up;
    let car = Sidecar {
        source_mesh: &sheet.source_mesh,
        view,
        view_direction: [d.x, d.y, d.z],
        view_up: [u.x, u.y, u.z],
        scale: sheet.scale,
        sheet_width: sheet.width,
        sheet_height: sheet.height,
        origin_offset: sheet.origin_offset,
        grid_spacing: sheet.grid_spacing,
        page_width: first.map_or(0.0, |p| p.page_width),
        page_height: first.map_or(0.0, |p| p.page_height),
        margin: first.map_or(0.0, |p| p.printable_margin),
        overlap: first.map_or(0.0, |p| p.overlap),
        rows: first.map_or(0, |p| p.rows),
        cols: first.map_or(0, |p| p.cols),
        pages: pages
            .iter()
            .map(|p| SidecarPage {
                file: page_file_name(&sheet.source_mesh, view, p),
                row: p.row,
                col: p.col,
                offset: p.offset,
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&car).expect("sidecar serialises");
    out.push(b'\n');
    out
}
