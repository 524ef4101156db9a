//! The `fabtwin` command line.
//!
//! Exit codes: 0 success, 1 domain or I/O error (reported on stderr as
//! `{"code": ..., "message": ...}`), 2 usage error. Subcommands that write files
//! also write a run manifest beside them.

mod manifest;

use std::io::Write;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{Point3, Vector3};
use serde::Serialize;

pub use manifest::{InputHash, OutputDir, RunManifest};

use crate::error::{Error, ErrorCode};
use crate::geodesics::{ring_lengths, GeodesicPathJson, GeodesicSolver, RingStation, SurfacePoint};
use crate::mesh::{detect_format, export_obj, mesh_stats, parse_mesh_with, Mesh, ParseOptions};
use crate::numfmt::fixed;
use crate::orientation::{canonicalize, principal_frame, OrientReport, Pose, Weighting};
use crate::packing::{pack_exact, pack_ffd, parse_items_csv, CrateCaps, CrateManifest};
use crate::registration::{
    deviation_report, estimate_scale, register_auto, register_icp, IcpOptions, ReferencePair, DEFAULT_DRIFT_THRESHOLD,
    DEFAULT_SAMPLE_COUNT,
};
use crate::structural::{compliance_markdown, compliance_report, enumerate_footholds, foothold_stability, hexagon_base, parse_structural};
use crate::templating::{
    overlay_grid, page_file_name, project_view, render_svg, sidecar_json, tile_pages, PagePreset, ProjectionOptions, TemplateSheet,
    View, DEFAULT_FEATURE_ANGLE_DEG, DEFAULT_GRID_SPACING, DEFAULT_MARGIN, DEFAULT_OVERLAP,
};

/// Environment variable naming the default page preset.
pub const PAGE_ENV: &str = "FABTWIN_PAGE";

#[derive(Debug, Parser, Serialize)]
#[command(name = "fabtwin", version, about = "Mesh-to-fabrication toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Mesh statistics
    Inspect(InspectArgs),
    /// Principal frame, Euler angles and optional canonical mesh
    Orient(OrientArgs),
    /// Orthographic 1:1 template pages as SVG
    Project(ProjectArgs),
    /// Re-tile a saved template sheet onto pages
    Tile(TileArgs),
    /// Surface path length between two points, or ring lengths along an axis
    Geodesic(GeodesicArgs),
    /// Align a scan to its design and report drift
    Register(RegisterArgs),
    /// Truss, wind, climb and anchor compliance report
    Loads(LoadsArgs),
    /// Foothold stability on a hexagonal base
    Stability(StabilityArgs),
    /// Assign freight items to crates
    Pack(PackArgs),
    /// Serve a mesh directory to the viewer over HTTP
    Serve(ServeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MeshInput {
    /// OBJ, STL, PLY or mesh JSON file
    pub mesh: PathBuf,
    /// Millimetres per file unit
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Output {
    /// Print JSON instead of a human summary
    #[arg(long)]
    pub json: bool,
    /// Also write the result and a run manifest into this directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct InspectArgs {
    #[command(flatten)]
    pub input: MeshInput,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingArg {
    Vertex,
    Area,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Vertex => Weighting::Vertex,
            WeightingArg::Area => Weighting::Area,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OrientArgs {
    #[command(flatten)]
    pub input: MeshInput,
    #[arg(long, value_enum, default_value_t = WeightingArg::Vertex)]
    pub weighting: WeightingArg,
    /// Write the mesh in its canonical pose as OBJ (requires --out)
    #[arg(long, requires = "out")]
    pub canonical: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct PageArgs {
    /// A0, A1, A3, A4, roll914 or <width>x<height> in mm
    #[arg(long, env = PAGE_ENV, default_value = "A4")]
    pub page: PagePreset,
    /// Unprintable border on every page edge (mm)
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    /// Content shared by neighbouring pages (mm)
    #[arg(long, default_value_t = DEFAULT_OVERLAP)]
    pub overlap: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub input: MeshInput,
    /// front, back, left, right (side), top or bottom
    #[arg(long, default_value = "front")]
    pub view: View,
    /// Drawing mm per object mm
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Grid spacing on the drawing (mm); 0 disables the grid
    #[arg(long, default_value_t = DEFAULT_GRID_SPACING)]
    pub grid: f64,
    /// Dihedral angle above which edges are drawn as features (degrees)
    #[arg(long, default_value_t = DEFAULT_FEATURE_ANGLE_DEG)]
    pub feature_angle: f64,
    #[command(flatten)]
    pub pages: PageArgs,
    /// Also write the projected sheet as JSON for `tile`
    #[arg(long)]
    pub emit_sheet: bool,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TileArgs {
    /// Template sheet JSON from `project --emit-sheet` or the service
    pub sheet: PathBuf,
    /// View name used in page file names
    #[arg(long, default_value = "sheet")]
    pub view: String,
    #[command(flatten)]
    pub pages: PageArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

/// `x,y,z` (snapped to the nearest surface point) or `face:u,v,w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EndpointArg {
    Near([f64; 3]),
    Surface { face: usize, bary: [f64; 3] },
}

fn triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("not a finite number: {p:?}"))?;
    }
    Ok(out)
}

impl FromStr for EndpointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((face, bary)) => Ok(EndpointArg::Surface {
                face: face.trim().parse().map_err(|_| format!("bad face index in {s:?}"))?,
                bary: triple(bary)?,
            }),
            None => Ok(EndpointArg::Near(triple(s)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisArg(pub [f64; 3]);

impl FromStr for AxisArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = match s {
            "x" => [1.0, 0.0, 0.0],
            "y" => [0.0, 1.0, 0.0],
            "z" => [0.0, 0.0, 1.0],
            other => triple(other)?,
        };
        if Vector3::from(v).norm() == 0.0 {
            return Err("axis must be non-zero".into());
        }
        Ok(AxisArg(v))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub input: MeshInput,
    /// Start point: x,y,z or face:u,v,w
    #[arg(long, required_unless_present = "rings", requires = "to")]
    pub from: Option<EndpointArg>,
    /// End point: x,y,z or face:u,v,w
    #[arg(long, requires = "from")]
    pub to: Option<EndpointArg>,
    /// Report the graph path without straightening
    #[arg(long)]
    pub no_refine: bool,
    /// Ring lengths at this station spacing (mm) instead of a point-to-point path
    #[arg(long, conflicts_with_all = ["from", "to"])]
    pub rings: Option<f64>,
    /// Station axis for --rings: x, y, z or dx,dy,dz
    #[arg(long, default_value = "z")]
    pub axis: AxisArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    /// Try principal-frame alignments
    Auto,
    /// Start from the scan's own placement
    Identity,
}

#[derive(Debug, Args, Serialize)]
pub struct RegisterArgs {
    /// Scan mesh
    pub scan: PathBuf,
    /// Design mesh
    pub design: PathBuf,
    /// Scan units to mm before alignment
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
    /// Reference distance pairs JSON: [{"a":[..],"b":[..],"true_distance_mm":..}]
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InitArg::Auto)]
    pub init: InitArg,
    /// Samples farther than this from the design are ignored (mm)
    #[arg(long, default_value_t = 50.0)]
    pub inlier_distance: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
    pub samples: usize,
    /// Drift threshold for the deviation report (mm)
    #[arg(long, default_value_t = DEFAULT_DRIFT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct LoadsArgs {
    /// Truss file in the text grammar or JSON
    pub input: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct StabilityArgs {
    /// Circumradius of the hexagonal base (mm)
    #[arg(long, default_value_t = 1500.0)]
    pub radius: f64,
    /// Centre of mass x,y,z (mm)
    #[arg(long, default_value = "0,0,1000")]
    pub com: AxisOrPoint,
    /// Footholds per configuration (enumerates every combination)
    #[arg(long, default_value_t = 2, conflicts_with = "chosen")]
    pub k: usize,
    /// One configuration, e.g. 0,2,4
    #[arg(long, value_delimiter = ',')]
    pub chosen: Option<Vec<usize>>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisOrPoint(pub [f64; 3]);

impl FromStr for AxisOrPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        triple(s).map(AxisOrPoint)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PackArgs {
    /// CSV with name,mass_kg,volume_m3,fragile
    pub items: PathBuf,
    #[arg(long)]
    pub mass_cap: f64,
    #[arg(long)]
    pub volume_cap: f64,
    /// Provably minimal crate count (at most 12 items)
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    /// Directory of mesh files
    pub dir: PathBuf,
    #[arg(long, default_value_t = crate::service::DEFAULT_PORT)]
    pub port: u16,
    /// Bind address; loopback unless set
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    pub host: IpAddr,
}

/// Runs the command line with process stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return e.exit_code();
        }
    };
    match dispatch(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let body = serde_json::json!({ "code": e.code(), "message": e.to_string() });
            let _ = writeln!(err, "{body}");
            1
        }
    }
}

type CliResult = Result<(), Error>;

fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Inspect(a) => inspect(a, out),
        Command::Orient(a) => orient(a, out),
        Command::Project(a) => project(a, out),
        Command::Tile(a) => tile(a, out),
        Command::Geodesic(a) => geodesic(a, out),
        Command::Register(a) => register(a, out),
        Command::Loads(a) => loads(a, out),
        Command::Stability(a) => stability(a, out),
        Command::Pack(a) => pack(a, out),
        Command::Serve(a) => serve(a, out, err),
    }
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialise")
}

fn read(path: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn parse_mesh_bytes(path: &Path, bytes: &[u8], unit_scale: f64) -> Result<Mesh, Error> {
    let format = detect_format(bytes, path.extension().and_then(|e| e.to_str()))?;
    let opts = ParseOptions {
        name: path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
        unit_scale,
    };
    Ok(parse_mesh_with(bytes, format, &opts)?)
}

fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("result serialises");
    b.push(b'\n');
    b
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("stdout", e)
}

/// Prints JSON or the human text, and with `--out` saves the JSON and a manifest.
fn emit<T: Serialize>(name: &str, value: &T, human: String, output: &Output, manifest: RunManifest, out: &mut dyn Write) -> CliResult {
    let json = pretty(value);
    if output.json {
        out.write_all(&json).map_err(io_out)?;
    } else {
        out.write_all(human.as_bytes()).map_err(io_out)?;
    }
    if let Some(dir) = &output.out {
        let mut d = OutputDir::create(dir)?;
        d.write(&format!("{name}.json"), &json)?;
        d.finish(manifest, &format!("{name}.manifest.json"))?;
    }
    Ok(())
}

fn v3(v: &[f64]) -> String {
    format!("{}, {}, {}", fixed(v[0], 3), fixed(v[1], 3), fixed(v[2], 3))
}

fn inspect(a: &InspectArgs, out: &mut dyn Write) -> CliResult {
    let bytes = read(&a.input.mesh)?;
    let mut manifest = RunManifest::new("inspect", params(a));
    manifest.hash_input(&a.input.mesh, &bytes);
    let mesh = parse_mesh_bytes(&a.input.mesh, &bytes, a.input.unit_scale)?;
    let s = mesh_stats(&mesh);
    let ext = s.bounding_box.extent();
    let human = format!(
        "mesh        {}\nvertices    {}\nfaces       {}\nbbox min    {} mm\nbbox max    {} mm\nsize        {} mm\nsurface     {} mm²\nclosed      {}\ncomponents  {}\n",
        mesh.name(),
        s.vertex_count,
        s.face_count,
        v3(s.bounding_box.min.coords.as_slice()),
        v3(s.bounding_box.max.coords.as_slice()),
        v3(ext.as_slice()),
        fixed(s.surface_area, 3),
        if s.is_closed { "yes" } else { "no" },
        s.connected_components
    );
    emit("inspect", &s, human, &a.output, manifest, out)
}

fn orient(a: &OrientArgs, out: &mut dyn Write) -> CliResult {
    let bytes = read(&a.input.mesh)?;
    let mut manifest = RunManifest::new("orient", params(a));
    manifest.hash_input(&a.input.mesh, &bytes);
    let mesh = parse_mesh_bytes(&a.input.mesh, &bytes, a.input.unit_scale)?;
    let frame = principal_frame(&mesh, a.weighting.into())?;
    let report = OrientReport::from(&frame);
    let e = &report.euler_deg;
    let mut human = format!(
        "centroid    {} mm\naxis 1      {}  variance {}\naxis 2      {}  variance {}\naxis 3      {}  variance {}\neuler (deg) roll {} pitch {} yaw {}{}\n",
        v3(report.centroid.coords.as_slice()),
        v3(report.axes[0].as_slice()),
        fixed(report.variances[0], 3),
        v3(report.axes[1].as_slice()),
        fixed(report.variances[1], 3),
        v3(report.axes[2].as_slice()),
        fixed(report.variances[2], 3),
        fixed(e.roll, 3),
        fixed(e.pitch, 3),
        fixed(e.yaw, 3),
        if e.gimbal_lock { " (gimbal lock)" } else { "" }
    );
    if report.degenerate_axes {
        human.push_str("note        near-equal variances; tied axes snapped towards world axes\n");
    }
    let json = pretty(&report);
    if a.output.json {
        out.write_all(&json).map_err(io_out)?;
    } else {
        out.write_all(human.as_bytes()).map_err(io_out)?;
    }
    if let Some(dir) = &a.output.out {
        let mut d = OutputDir::create(dir)?;
        d.write("orient.json", &json)?;
        if a.canonical {
            let (canon, _) = canonicalize(&mesh, &frame);
            d.write(&format!("{}_canonical.obj", mesh.name()), &export_obj(&canon))?;
        }
        d.finish(manifest, "orient.manifest.json")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TemplateSummary {
    view: String,
    page: String,
    page_width: f64,
    page_height: f64,
    sheet_width: f64,
    sheet_height: f64,
    rows: usize,
    cols: usize,
    files: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn write_pages(
    sheet: &TemplateSheet,
    view: &str,
    pages: &PageArgs,
    dir: &Path,
    json: bool,
    manifest: RunManifest,
    extra: Option<(String, Vec<u8>)>,
    out: &mut dyn Write,
) -> CliResult {
    let (w, h) = pages.page.dimensions(sheet.height, pages.margin);
    let tiles = tile_pages(sheet, w, h, pages.margin, pages.overlap)?;
    let docs = render_svg(&tiles, sheet);
    let mut d = OutputDir::create(dir)?;
    for (page, doc) in tiles.iter().zip(&docs) {
        d.write(&page_file_name(&sheet.source_mesh, view, page), doc)?;
    }
    d.write(&format!("{}_{view}.json", sheet.source_mesh), &sidecar_json(sheet, view, &tiles))?;
    if let Some((name, bytes)) = extra {
        d.write(&name, &bytes)?;
    }
    let files = d.finish(manifest, &format!("{}_{view}.manifest.json", sheet.source_mesh))?;
    let (rows, cols) = tiles.first().map_or((0, 0), |p| (p.rows, p.cols));
    let summary = TemplateSummary {
        view: view.to_string(),
        page: pages.page.name(),
        page_width: w,
        page_height: h,
        sheet_width: sheet.width,
        sheet_height: sheet.height,
        rows,
        cols,
        files,
    };
    if json {
        out.write_all(&pretty(&summary)).map_err(io_out)?;
    } else {
        let text = format!(
            "{} view: {} x {} mm drawing on {} {} page(s) ({} rows x {} cols), written to {}\n",
            view,
            fixed(sheet.width, 1),
            fixed(sheet.height, 1),
            tiles.len(),
            pages.page.name(),
            rows,
            cols,
            dir.display()
        );
        out.write_all(text.as_bytes()).map_err(io_out)?;
    }
    Ok(())
}

fn project(a: &ProjectArgs, out: &mut dyn Write) -> CliResult {
    let bytes = read(&a.input.mesh)?;
    let mut manifest = RunManifest::new("project", params(a));
    manifest.hash_input(&a.input.mesh, &bytes);
    let mesh = parse_mesh_bytes(&a.input.mesh, &bytes, a.input.unit_scale)?;
    let opts = ProjectionOptions {
        scale: a.scale,
        feature_angle_deg: a.feature_angle,
    };
    let mut sheet = project_view(&mesh, a.view, &opts)?;
    if a.grid > 0.0 {
        sheet = overlay_grid(&sheet, a.grid)?;
    }
    let view = a.view.name();
    let extra = a
        .emit_sheet
        .then(|| (format!("{}_{view}.sheet.json", sheet.source_mesh), pretty(&sheet)));
    write_pages(&sheet, view, &a.pages, &a.out, a.json, manifest, extra, out)
}

fn tile(a: &TileArgs, out: &mut dyn Write) -> CliResult {
    let bytes = read(&a.sheet)?;
    let mut manifest = RunManifest::new("tile", params(a));
    manifest.hash_input(&a.sheet, &bytes);
    let sheet: TemplateSheet =
        serde_json::from_slice(&bytes).map_err(|e| Error::InvalidInput(format!("{}: not a template sheet: {e}", a.sheet.display())))?;
    write_pages(&sheet, &a.view, &a.pages, &a.out, a.json, manifest, None, out)
}

#[derive(Serialize)]
struct RingReport {
    axis: [f64; 3],
    spacing: f64,
    stations: Vec<RingStation>,
}

fn geodesic(a: &GeodesicArgs, out: &mut dyn Write) -> CliResult {
    let bytes = read(&a.input.mesh)?;
    let mut manifest = RunManifest::new("geodesic", params(a));
    manifest.hash_input(&a.input.mesh, &bytes);
    let mesh = parse_mesh_bytes(&a.input.mesh, &bytes, a.input.unit_scale)?;
    if let Some(spacing) = a.rings {
        let stations = ring_lengths(&mesh, &Vector3::from(a.axis.0), spacing)?;
        let mut human = String::from("height (mm)  circumference (mm)  loops\n");
        for s in &stations {
            human.push_str(&format!(
                "{:>11}  {:>18}  {}{}\n",
                fixed(s.height, 3),
                fixed(s.circumference, 3),
                s.loops.len(),
                if s.has_open_loops { " (open)" } else { "" }
            ));
        }
        let report = RingReport {
            axis: a.axis.0,
            spacing,
            stations,
        };
        return emit("rings", &report, human, &a.output, manifest, out);
    }
    let (Some(from), Some(to)) = (a.from, a.to) else {
        return Err(Error::InvalidInput("geodesic needs --from and --to, or --rings".into()));
    };
    let solver = GeodesicSolver::from_mesh(&mesh);
    let resolve = |e: EndpointArg| -> Result<SurfacePoint, Error> {
        match e {
            EndpointArg::Near(p) => Ok(solver.surface_point_near(&Point3::from(p))),
            EndpointArg::Surface { face, bary } => Ok(SurfacePoint::new(&mesh, face, bary)?),
        }
    };
    let path = solver.distance(&resolve(from)?, &resolve(to)?, !a.no_refine)?;
    let report = GeodesicPathJson::from(&path);
    let human = format!(
        "geodesic    {} mm\nstraight    {} mm\npoints      {}\n",
        fixed(path.length, 3),
        fixed(path.lower_bound, 3),
        path.points.len()
    );
    emit("geodesic", &report, human, &a.output, manifest, out)
}

#[derive(Serialize)]
struct RegisterReport {
    scale: Option<crate::registration::ScaleEstimate>,
    registration: crate::registration::RegistrationResult,
    deviation: crate::registration::DeviationSummary,
    threshold: f64,
    samples: usize,
    threshold_exceeded: usize,
}

fn register(a: &RegisterArgs, out: &mut dyn Write) -> CliResult {
    let scan_bytes = read(&a.scan)?;
    let design_bytes = read(&a.design)?;
    let mut manifest = RunManifest::new("register", params(a));
    manifest.hash_input(&a.scan, &scan_bytes);
    manifest.hash_input(&a.design, &design_bytes);
    let scan = parse_mesh_bytes(&a.scan, &scan_bytes, a.unit_scale)?;
    let design = parse_mesh_bytes(&a.design, &design_bytes, 1.0)?;
    let scale = match &a.pairs {
        Some(p) => {
            let bytes = read(p)?;
            manifest.hash_input(p, &bytes);
            let pairs: Vec<ReferencePair> =
                serde_json::from_slice(&bytes).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
            // pairs are picked on the file, so bring them into millimetres first
            let pairs: Vec<ReferencePair> = pairs
                .into_iter()
                .map(|r| ReferencePair {
                    a: r.a.map(|v| v * a.unit_scale),
                    b: r.b.map(|v| v * a.unit_scale),
                    true_distance_mm: r.true_distance_mm,
                })
                .collect();
            Some(estimate_scale(&pairs)?)
        }
        None => None,
    };
    let s = scale.as_ref().map_or(1.0, |e| e.scale);
    let opts = IcpOptions {
        max_iterations: a.max_iterations,
        inlier_distance: a.inlier_distance,
        sample_count: a.samples,
    };
    let result = match a.init {
        InitArg::Auto => register_auto(&scan, &design, s, &opts)?,
        InitArg::Identity => {
            let seed = Pose::identity()
                .with_scale(s)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            register_icp(&scan, &design, &seed, &opts)?
        }
    };
    let dev = deviation_report(&scan, &design, &result.pose, a.samples, a.threshold);
    let report = RegisterReport {
        scale,
        registration: result.clone(),
        deviation: dev.summary.clone(),
        threshold: a.threshold,
        samples: dev.distances.len(),
        threshold_exceeded: dev.threshold_exceeded.len(),
    };
    let json = pretty(&report);
    if a.output.json {
        out.write_all(&json).map_err(io_out)?;
    } else {
        let human = format!(
            "scale       {}\nrmse        {} mm\ninliers     {}%\niterations  {}{}\ndeviation   mean {} mm, p95 {} mm, max {} mm\nover {} mm  {} of {} samples\n",
            fixed(s, 6),
            fixed(result.rmse, 4),
            fixed(result.inlier_fraction * 100.0, 1),
            result.iterations,
            if result.converged { "" } else { " (not converged)" },
            fixed(dev.summary.mean, 3),
            fixed(dev.summary.p95, 3),
            fixed(dev.summary.max, 3),
            fixed(a.threshold, 3),
            dev.threshold_exceeded.len(),
            dev.distances.len()
        );
        out.write_all(human.as_bytes()).map_err(io_out)?;
    }
    if let Some(dir) = &a.output.out {
        let mut d = OutputDir::create(dir)?;
        d.write("register.json", &json)?;
        d.write("deviation.json", &pretty(&dev))?;
        let aligned = scan.transformed(&result.pose);
        d.write(&format!("{}_registered.obj", scan.name()), &export_obj(&aligned))?;
        d.finish(manifest, "register.manifest.json")?;
    }
    Ok(())
}

fn loads(a: &LoadsArgs, out: &mut dyn Write) -> CliResult {
    let bytes = read(&a.input)?;
    let mut manifest = RunManifest::new("loads", params(a));
    manifest.hash_input(&a.input, &bytes);
    let text = String::from_utf8(bytes).map_err(|_| Error::InvalidInput(format!("{} is not UTF-8", a.input.display())))?;
    let input = parse_structural(&text)?;
    let report = compliance_report(&input)?;
    let md = compliance_markdown(&report);
    let json = pretty(&report);
    if a.output.json {
        out.write_all(&json).map_err(io_out)?;
    } else {
        out.write_all(md.as_bytes()).map_err(io_out)?;
    }
    if let Some(dir) = &a.output.out {
        let mut d = OutputDir::create(dir)?;
        d.write("compliance.md", md.as_bytes())?;
        d.write("compliance.json", &json)?;
        d.finish(manifest, "loads.manifest.json")?;
    }
    Ok(())
}

fn stability(a: &StabilityArgs, out: &mut dyn Write) -> CliResult {
    if !(a.radius > 0.0 && a.radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {}", a.radius)));
    }
    let manifest = RunManifest::new("stability", params(a));
    let base = hexagon_base(a.radius);
    let com = Point3::from(a.com.0);
    let configs = match &a.chosen {
        Some(c) => vec![foothold_stability(&base, c, &com)?],
        None => enumerate_footholds(&base, a.k, &com)?,
    };
    let stable = configs.iter().filter(|c| c.stable).count();
    let mut human = format!("{} configuration(s), {} stable\n", configs.len(), stable);
    for c in &configs {
        let ids: Vec<String> = c.chosen.iter().map(|i| i.to_string()).collect();
        human.push_str(&format!(
            "  {:<12} margin {:>10} mm  {}\n",
            ids.join(","),
            fixed(c.margin, 3),
            if c.stable { "stable" } else { "unstable" }
        ));
    }
    emit("stability", &configs, human, &a.output, manifest, out)
}

#[derive(Serialize)]
struct PackReport<'a> {
    method: &'static str,
    crate_count: usize,
    #[serde(flatten)]
    manifest: &'a CrateManifest,
}

fn pack(a: &PackArgs, out: &mut dyn Write) -> CliResult {
    let bytes = read(&a.items)?;
    let mut manifest = RunManifest::new("pack", params(a));
    manifest.hash_input(&a.items, &bytes);
    let items = parse_items_csv(&bytes)?;
    let caps = CrateCaps {
        mass_kg: a.mass_cap,
        volume_m3: a.volume_cap,
    };
    let (method, result) = if a.exact {
        ("exact", pack_exact(&items, &caps)?)
    } else {
        ("ffd", pack_ffd(&items, &caps)?)
    };
    let mut human = format!("{} crate(s) by {}\n", result.crate_count(), method);
    for (i, c) in result.crates.iter().enumerate() {
        human.push_str(&format!(
            "  crate {}: {} kg, {} m³{}: {}\n",
            i + 1,
            fixed(c.used_mass, 3),
            fixed(c.used_volume, 4),
            if c.fragile { ", fragile" } else { "" },
            c.items.join(", ")
        ));
    }
    for u in &result.unassigned {
        human.push_str(&format!("  unassigned {}: {}\n", u.name, u.reason));
    }
    let report = PackReport {
        method,
        crate_count: result.crate_count(),
        manifest: &result,
    };
    emit("pack", &report, human, &a.output, manifest, out)
}

fn serve(a: &ServeArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (catalog, warnings) = crate::service::MeshCatalog::load_dir(&a.dir)?;
    for w in warnings {
        let _ = writeln!(err, "skipped {w}");
    }
    let addr = SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("tokio runtime", e))?;
    let _ = writeln!(out, "serving {} mesh(es) on http://{addr}", catalog.len());
    let _ = out.flush();
    runtime
        .block_on(crate::service::serve(Arc::new(catalog), addr))
        .map_err(|e| Error::io(format!("serve on {addr}"), e))
}
