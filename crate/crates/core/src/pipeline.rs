//! End-to-end runs behind the command-line subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use thiserror::Error;

use crate::config::{Config, ConfigError, ProjectionChoice};
use crate::global::{optimize_global_with, GlobalSearchError, GridSearchResult};
use crate::imaging::io::{read_color, read_labels, write_color, write_labels, ImageIoError};
use crate::imaging::{cube_to_eri, eri_to_cube, render_color, ColorImage, CubeFace, CubeFaces, Interpolation, LabelMap, RenderError};
use crate::measures::ProxyMeasures;
use crate::mesh::{
    build_meshes, flow_mask, foreground_params, mesh_dims, optimize_mesh, overlay_mask, MeshOptimization,
    MeshOptimizeError, MeshPair,
};
use crate::pceval::{evaluate, read_votes, EvaluationReport, PcError};
use crate::projections::{DomainError, PanniniParams, Projection};
use crate::segmentation::{connected_components, filter_small_objects, min_object_px, render_seg_viewport};
use crate::sheet::compose_sheet;
use crate::warp::{upsample_mesh, warp_image, DenseField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Input,
    Segmentation,
    GlobalSearch,
    Render,
    MeshBuild,
    MeshOptimize,
    Warp,
    Output,
    Evaluation,
    Cubemap,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Input => "input",
            Stage::Segmentation => "segmentation",
            Stage::GlobalSearch => "global search",
            Stage::Render => "render",
            Stage::MeshBuild => "mesh build",
            Stage::MeshOptimize => "mesh optimization",
            Stage::Warp => "warp",
            Stage::Output => "output",
            Stage::Evaluation => "evaluation",
            Stage::Cubemap => "cubemap",
        };
        f.write_str(name)
    }
}

/// Broad error category, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or arguments.
    Config,
    /// A projection or viewport outside its mathematical domain.
    Domain,
    Io,
    /// Malformed input data.
    Data,
    /// Numerical failure such as optimizer divergence.
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Domain => 3,
            ErrorClass::Io => 4,
            ErrorClass::Data => 5,
            ErrorClass::Numeric => 6,
        }
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    pub class: ErrorClass,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new(stage: Stage, class: ErrorClass, source: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> Self {
        Self {
            stage,
            class,
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

fn config_err(e: ConfigError) -> PipelineError {
    PipelineError::new(Stage::Config, ErrorClass::Config, e)
}

fn render_err(stage: Stage, e: RenderError) -> PipelineError {
    let class = match e {
        RenderError::Raster(_) => ErrorClass::Data,
        _ => ErrorClass::Domain,
    };
    PipelineError::new(stage, class, e)
}

fn io_err(stage: Stage) -> impl Fn(ImageIoError) -> PipelineError {
    move |e| PipelineError::new(stage, ErrorClass::Io, e)
}

fn write_file(path: &Path, write: impl FnOnce(fs::File) -> csv::Result<()>) -> Result<(), PipelineError> {
    let file = fs::File::create(path).map_err(|e| PipelineError::new(Stage::Output, ErrorClass::Io, e))?;
    write(file).map_err(|e| PipelineError::new(Stage::Output, ErrorClass::Io, e))
}

/// Everything a render produces. Fields not used by the selected projection
/// are `None`.
#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub viewport: ColorImage,
    /// Projection the viewport (or `VP_b`) was rendered with.
    pub projection: Projection,
    pub search: Option<GridSearchResult>,
    pub vp_b: Option<ColorImage>,
    /// Object ids of `VP_b` after small-object filtering.
    pub seg_vp: Option<LabelMap>,
    pub meshes: Option<MeshPair>,
    pub optimization: Option<MeshOptimization>,
    pub field: Option<DenseField>,
    pub flow: Option<LabelMap>,
    pub warnings: Vec<String>,
}

impl RenderOutput {
    pub fn params_b(&self) -> Option<PanniniParams> {
        self.search.as_ref().map(|s| s.best)
    }

    pub fn params_f(&self) -> Option<PanniniParams> {
        self.meshes.as_ref().map(|m| m.params_f)
    }

    /// `result.*` manifest entries.
    pub fn results(&self) -> Vec<(String, String)> {
        let mut out = vec![("result.projection".to_string(), self.projection.name())];
        if let Some(p) = self.params_b() {
            out.push(("result.d_b".into(), p.d.to_string()));
            out.push(("result.vc_b".into(), p.vc.to_string()));
        }
        if let Some(m) = &self.meshes {
            out.push(("result.d_f".into(), m.params_f.d.to_string()));
            out.push(("result.vc_f".into(), m.params_f.vc.to_string()));
            out.push(("result.mesh_w".into(), m.m_b.width().to_string()));
            out.push(("result.mesh_h".into(), m.m_b.height().to_string()));
            out.push(("result.clamped_vertices".into(), m.clamped.len().to_string()));
        }
        if let Some(o) = &self.optimization {
            out.push(("result.selected_iteration".into(), o.selected_iteration.to_string()));
            out.push(("result.initial_energy".into(), o.initial_energy().to_string()));
            out.push(("result.final_energy".into(), o.final_energy().to_string()));
        }
        for (k, w) in self.warnings.iter().enumerate() {
            out.push((format!("result.warning{}", k + 1), w.clone()));
        }
        out
    }
}

/// Renders one viewport in memory. `classes` is an ERI of class labels
/// (0 = background); without it content-adaptive projections fall back to
/// the global search alone.
pub fn render_scene(config: &Config, eri: &ColorImage, classes: Option<&LabelMap>) -> Result<RenderOutput, PipelineError> {
    config.validate().map_err(config_err)?;
    let spec = config
        .viewport()
        .map_err(|e| PipelineError::new(Stage::Config, ErrorClass::Domain, e))?;
    let mut warnings = Vec::new();

    if let Some(projection) = config.projection.fixed() {
        let viewport = render_color(eri, &spec, &projection).map_err(|e| render_err(Stage::Render, e))?;
        return Ok(RenderOutput {
            viewport,
            projection,
            search: None,
            vp_b: None,
            seg_vp: None,
            meshes: None,
            optimization: None,
            field: None,
            flow: None,
            warnings,
        });
    }

    let have_labels = classes.is_some();
    let empty;
    let classes = match classes {
        Some(c) if (c.width(), c.height()) != (eri.width(), eri.height()) => {
            return Err(PipelineError::new(
                Stage::Input,
                ErrorClass::Data,
                format!(
                    "label map is {}x{} but the image is {}x{}",
                    c.width(),
                    c.height(),
                    eri.width(),
                    eri.height()
                ),
            ))
        }
        Some(c) => c,
        None => {
            let msg = "no label map given; running the global search only".to_string();
            warn!("{msg}");
            warnings.push(msg);
            empty = LabelMap::filled(eri.width(), eri.height(), 0);
            &empty
        }
    };
    let seg = connected_components(classes);

    let search = optimize_global_with(&seg, &spec, &config.global_search(), &ProxyMeasures::default()).map_err(|e| {
        let class = match e {
            GlobalSearchError::Beta(_) => ErrorClass::Config,
            _ => ErrorClass::Domain,
        };
        PipelineError::new(Stage::GlobalSearch, class, e)
    })?;
    let params_b = search.best;
    let projection = Projection::Pannini(params_b);
    let vp_b = render_color(eri, &spec, &projection).map_err(|e| render_err(Stage::Render, e))?;
    let seg_vp = render_seg_viewport(&seg, &spec, &projection).map_err(|e| render_err(Stage::Segmentation, e))?;
    let seg_vp = filter_small_objects(&seg_vp, min_object_px(spec.width_px, spec.height_px, config.min_object_fraction));

    let local = config.projection == ProjectionChoice::Glap && have_labels;
    if !local {
        return Ok(RenderOutput {
            viewport: vp_b.clone(),
            projection,
            search: Some(search),
            vp_b: Some(vp_b),
            seg_vp: Some(seg_vp),
            meshes: None,
            optimization: None,
            field: None,
            flow: None,
            warnings,
        });
    }

    let params_f = foreground_params(params_b, config.d_f_offset, config.vc_f)
        .map_err(|e| PipelineError::new(Stage::MeshBuild, ErrorClass::Config, e))?;
    let (w_m, h_m) = mesh_dims(spec.width_px, spec.height_px, config.mesh_divisor);
    let meshes = build_meshes(params_b, params_f, &spec, w_m, h_m)
        .map_err(|e: DomainError| PipelineError::new(Stage::MeshBuild, ErrorClass::Domain, e))?;
    if !meshes.clamped.is_empty() {
        let msg = format!("{} foreground vertices fell outside the background domain and were clamped", meshes.clamped.len());
        warn!("{msg}");
        warnings.push(msg);
    }
    let optimization =
        optimize_mesh(&meshes, &seg_vp, config.weights(), &config.optimize_options()).map_err(|e| {
            let class = match e {
                MeshOptimizeError::Settings(_) => ErrorClass::Config,
                MeshOptimizeError::Diverged { .. } => ErrorClass::Numeric,
            };
            PipelineError::new(Stage::MeshOptimize, class, e)
        })?;
    let field = upsample_mesh(&optimization.mesh, spec.width_px, spec.height_px);
    let viewport = warp_image(&vp_b, &field, Interpolation::Bilinear)
        .map_err(|e| PipelineError::new(Stage::Warp, ErrorClass::Data, e))?;
    let flow = flow_mask(&meshes.m_b, &optimization.mesh, spec.width_px, spec.height_px, config.flow_threshold);
    Ok(RenderOutput {
        viewport,
        projection,
        search: Some(search),
        vp_b: Some(vp_b),
        seg_vp: Some(seg_vp),
        meshes: Some(meshes),
        optimization: Some(optimization),
        field: Some(field),
        flow: Some(flow),
        warnings,
    })
}

fn load_inputs(config: &Config) -> Result<(ColorImage, Option<LabelMap>), PipelineError> {
    let eri_path = config.eri.as_ref().ok_or_else(|| {
        PipelineError::new(Stage::Config, ErrorClass::Config, "no input image (set `eri`)")
    })?;
    let eri = read_color(eri_path).map_err(io_err(Stage::Input))?;
    let labels = match &config.labels {
        Some(p) => Some(read_labels(p).map_err(io_err(Stage::Input))?),
        None => None,
    };
    Ok((eri, labels))
}

fn prepare_out_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Output, ErrorClass::Io, format!("{}: {e}", dir.display())))
}

/// Writes the effective configuration plus `results` as a config file.
pub fn write_manifest(path: &Path, config: &Config, results: &[(String, String)]) -> Result<(), PipelineError> {
    let mut text = String::from("# effective configuration; can be passed back with --config\n");
    text.push_str(&config.to_text());
    if !results.is_empty() {
        text.push_str("\n# results (ignored on input)\n");
        for (k, v) in results {
            text.push_str(&format!("{k} = {}\n", v.replace('\n', " ")));
        }
    }
    fs::write(path, text).map_err(|e| PipelineError::new(Stage::Output, ErrorClass::Io, format!("{}: {e}", path.display())))
}

/// Files written by a command.
#[derive(Debug, Clone, Default)]
pub struct RunFiles {
    pub files: Vec<PathBuf>,
}

impl RunFiles {
    fn path(&mut self, dir: &Path, name: &str) -> PathBuf {
        let p = dir.join(name);
        self.files.push(p.clone());
        p
    }
}

/// `render`: reads the inputs named in `config`, renders, and writes the
/// viewport with its by-products and manifest into `config.out_dir`.
pub fn cmd_render(config: &Config) -> Result<(RenderOutput, RunFiles), PipelineError> {
    config.validate().map_err(config_err)?;
    let (eri, labels) = load_inputs(config)?;
    let out = render_scene(config, &eri, labels.as_ref())?;
    let dir = &config.out_dir;
    prepare_out_dir(dir)?;
    let mut files = RunFiles::default();
    let out_io = io_err(Stage::Output);
    write_color(files.path(dir, "viewport.png"), &out.viewport).map_err(&out_io)?;
    if let Some(vp_b) = &out.vp_b {
        write_color(files.path(dir, "vp_b.png"), vp_b).map_err(&out_io)?;
    }
    if let Some(seg_vp) = &out.seg_vp {
        write_labels(files.path(dir, "vp_b_objects.png"), seg_vp).map_err(&out_io)?;
    }
    if let Some(search) = &out.search {
        write_file(&files.path(dir, "cost_surface.csv"), |f| search.write_csv(f))?;
    }
    if let Some(opt) = &out.optimization {
        write_file(&files.path(dir, "energy_trace.csv"), |f| opt.write_trace_csv(f))?;
    }
    if let (Some(flow), true) = (&out.flow, config.flow_overlay) {
        write_color(files.path(dir, "flow_overlay.png"), &overlay_mask(&out.viewport, flow)).map_err(&out_io)?;
    }
    write_manifest(&files.path(dir, "manifest.cfg"), config, &out.results())?;
    Ok((out, files))
}

/// `compare`: renders every projection in `config.compare` and writes a
/// labeled sheet.
pub fn cmd_compare(config: &Config) -> Result<(ColorImage, RunFiles), PipelineError> {
    config.validate().map_err(config_err)?;
    let (eri, labels) = load_inputs(config)?;
    let mut tiles = Vec::new();
    let mut results = Vec::new();
    for (k, &choice) in config.compare.iter().enumerate() {
        let mut c = config.clone();
        c.projection = choice;
        let out = render_scene(&c, &eri, labels.as_ref())?;
        let label = match out.params_b() {
            Some(p) => format!("{choice} d={} vc={}", p.d, p.vc),
            None => choice.to_string(),
        };
        results.push((format!("result.tile{}", k + 1), label.clone()));
        tiles.push((label, out.viewport));
    }
    let sheet = compose_sheet(&tiles);
    prepare_out_dir(&config.out_dir)?;
    let mut files = RunFiles::default();
    write_color(files.path(&config.out_dir, "compare.png"), &sheet).map_err(io_err(Stage::Output))?;
    write_manifest(&files.path(&config.out_dir, "manifest.cfg"), config, &results)?;
    Ok((sheet, files))
}

/// `measures`: runs the global search and dumps the stretching / bending /
/// cost surface.
pub fn cmd_measures(config: &Config) -> Result<(GridSearchResult, RunFiles), PipelineError> {
    config.validate().map_err(config_err)?;
    let spec = config
        .viewport()
        .map_err(|e| PipelineError::new(Stage::Config, ErrorClass::Domain, e))?;
    let classes = match (&config.labels, &config.eri) {
        (Some(p), _) => read_labels(p).map_err(io_err(Stage::Input))?,
        (None, Some(p)) => {
            warn!("no label map given; stretching is zero everywhere");
            let eri = read_color(p).map_err(io_err(Stage::Input))?;
            LabelMap::filled(eri.width(), eri.height(), 0)
        }
        (None, None) => {
            return Err(PipelineError::new(
                Stage::Config,
                ErrorClass::Config,
                "set `labels` (or at least `eri`)",
            ))
        }
    };
    let seg = connected_components(&classes);
    let search = optimize_global_with(&seg, &spec, &config.global_search(), &ProxyMeasures::default())
        .map_err(|e| PipelineError::new(Stage::GlobalSearch, ErrorClass::Domain, e))?;
    prepare_out_dir(&config.out_dir)?;
    let mut files = RunFiles::default();
    write_file(&files.path(&config.out_dir, "cost_surface.csv"), |f| search.write_csv(f))?;
    let results = vec![
        ("result.d_b".to_string(), search.best.d.to_string()),
        ("result.vc_b".to_string(), search.best.vc.to_string()),
        ("result.objects".to_string(), seg.object_count().to_string()),
    ];
    write_manifest(&files.path(&config.out_dir, "manifest.cfg"), config, &results)?;
    Ok((search, files))
}

/// `eval`: screens observers, then writes transitivity, probability and
/// Bradley-Terry score tables into `out_dir`.
pub fn cmd_eval(votes: &Path, out_dir: &Path) -> Result<(EvaluationReport, RunFiles), PipelineError> {
    let file = fs::File::open(votes)
        .map_err(|e| PipelineError::new(Stage::Input, ErrorClass::Io, format!("{}: {e}", votes.display())))?;
    let pc = |e: PcError| {
        let class = match e {
            PcError::Csv(_) => ErrorClass::Io,
            _ => ErrorClass::Data,
        };
        PipelineError::new(Stage::Evaluation, class, e)
    };
    let records = read_votes(file).map_err(pc)?;
    let report = evaluate(&records).map_err(pc)?;
    for o in report.excluded_observers() {
        warn!("observer {o} excluded as an outlier");
    }
    prepare_out_dir(out_dir)?;
    let mut files = RunFiles::default();
    write_file(&files.path(out_dir, "transitivity.csv"), |f| report.write_transitivity_csv(f))?;
    write_file(&files.path(out_dir, "probabilities.csv"), |f| report.write_probabilities_csv(f))?;
    write_file(&files.path(out_dir, "bt_scores.csv"), |f| report.write_scores_csv(f))?;
    Ok((report, files))
}

fn face_file(dir: &Path, face: CubeFace) -> PathBuf {
    dir.join(format!("face_{}.png", face.name()))
}

/// `cubemap` (to cube): writes `face_<name>.png` for the six faces.
/// `face_px` defaults to a quarter of the ERI width.
pub fn cmd_eri_to_cube(eri: &Path, out_dir: &Path, face_px: Option<usize>) -> Result<RunFiles, PipelineError> {
    let img = read_color(eri).map_err(io_err(Stage::Input))?;
    let faces = eri_to_cube(&img, face_px.unwrap_or(img.width() / 4), Interpolation::Bilinear)
        .map_err(|e| PipelineError::new(Stage::Cubemap, ErrorClass::Data, e))?;
    prepare_out_dir(out_dir)?;
    let mut files = RunFiles::default();
    for (face, raster) in faces.iter() {
        let p = face_file(out_dir, face);
        write_color(&p, raster).map_err(io_err(Stage::Output))?;
        files.files.push(p);
    }
    Ok(files)
}

/// `cubemap` (to ERI): reads `face_<name>.png` from `dir` and writes a
/// `width x width/2` ERI.
pub fn cmd_cube_to_eri(dir: &Path, out: &Path, width: usize) -> Result<RunFiles, PipelineError> {
    if width < 2 {
        return Err(PipelineError::new(Stage::Config, ErrorClass::Config, "ERI width must be at least 2"));
    }
    let faces = CubeFace::ALL
        .iter()
        .map(|&f| read_color(face_file(dir, f)).map_err(io_err(Stage::Input)))
        .collect::<Result<Vec<_>, _>>()?;
    let faces = CubeFaces::new(faces.try_into().expect("six faces"))
        .map_err(|e| PipelineError::new(Stage::Cubemap, ErrorClass::Data, e))?;
    let eri = cube_to_eri(&faces, width, width / 2, Interpolation::Bilinear)
        .map_err(|e| PipelineError::new(Stage::Cubemap, ErrorClass::Data, e))?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_out_dir(parent)?;
    }
    write_color(out, &eri).map_err(io_err(Stage::Output))?;
    Ok(RunFiles {
        files: vec![out.to_path_buf()],
    })
}
