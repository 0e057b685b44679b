//! Run configuration: a plain `key = value` file, command-line overrides,
//! and the manifest written after each run.
//!
//! Angles are given in degrees. Lines starting with `#` are comments. Keys
//! under `result.` are written by runs for reference and ignored on input,
//! so a manifest can be fed back as a config.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::global::{GlobalSearchConfig, Normalization, DEFAULT_BETA};
use crate::mesh::{EnergyWeights, OptimizeOptions, SmoothnessForm, StepUnits, DEFAULT_D_F_OFFSET, MESH_DIVISOR};
use crate::projections::{DomainError, PanniniParams, Projection, SpherePoint, ViewportSpec};
use crate::segmentation::MIN_OBJECT_FRACTION;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: expected `key = value`, got {text:?}")]
    Syntax { origin: String, text: String },
    #[error("{origin}: unknown key {key:?}")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: invalid value {value:?} for {key}: {reason}")]
    BadValue {
        origin: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Projection selected for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectionChoice {
    /// Global search plus local mesh correction.
    Glap,
    /// Global search only.
    Gap,
    Pannini(PanniniParams),
    Gpp(f64),
    Rectilinear,
    Stereographic,
}

impl ProjectionChoice {
    /// Fixed projection, if the choice does not depend on content.
    pub fn fixed(&self) -> Option<Projection> {
        match *self {
            ProjectionChoice::Glap | ProjectionChoice::Gap => None,
            ProjectionChoice::Pannini(p) => Some(Projection::Pannini(p)),
            ProjectionChoice::Gpp(d) => Some(Projection::Gpp(d)),
            ProjectionChoice::Rectilinear => Some(Projection::Rectilinear),
            ProjectionChoice::Stereographic => Some(Projection::Stereographic),
        }
    }
}

impl fmt::Display for ProjectionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectionChoice::Glap => write!(f, "glap"),
            ProjectionChoice::Gap => write!(f, "gap"),
            ProjectionChoice::Pannini(p) => write!(f, "pannini({},{})", p.d, p.vc),
            ProjectionChoice::Gpp(d) => write!(f, "gpp({d})"),
            ProjectionChoice::Rectilinear => write!(f, "rectilinear"),
            ProjectionChoice::Stereographic => write!(f, "stereographic"),
        }
    }
}

impl FromStr for ProjectionChoice {
    type Err = String;

    /// Accepts `glap`, `gap`, `pannini`, `pannini(d,vc)`, `gpp(d)`,
    /// `rectilinear`, `stereographic`. Bare `pannini` is `pannini(0.5,0)`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        let (name, args) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| format!("unbalanced parentheses in {s:?}"))?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>().map_err(|e| format!("{a:?}: {e}")))
                    .collect::<Result<Vec<_>, _>>()?;
                (s[..open].trim().to_string(), args)
            }
            None => (s.clone(), vec![]),
        };
        let params = |d: f64, vc: f64| PanniniParams::new(d, vc).map_err(|e| e.to_string());
        match (name.as_str(), args.as_slice()) {
            ("glap", []) => Ok(ProjectionChoice::Glap),
            ("gap", []) => Ok(ProjectionChoice::Gap),
            ("pannini", []) => Ok(ProjectionChoice::Pannini(params(0.5, 0.0)?)),
            ("pannini", &[d, vc]) => Ok(ProjectionChoice::Pannini(params(d, vc)?)),
            ("gpp", &[d]) if (0.0..=1.0).contains(&d) => Ok(ProjectionChoice::Gpp(d)),
            ("gpp", &[d]) => Err(format!("gpp distance must be in [0, 1], got {d}")),
            ("rectilinear", []) => Ok(ProjectionChoice::Rectilinear),
            ("stereographic", []) => Ok(ProjectionChoice::Stereographic),
            _ => Err(format!(
                "unknown projection {s:?} (glap, gap, pannini(d,vc), gpp(d), rectilinear, stereographic)"
            )),
        }
    }
}

/// Every tunable of the pipeline, with the published defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub eri: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub fov_h_deg: f64,
    pub width: usize,
    pub height: usize,
    pub projection: ProjectionChoice,
    pub compare: Vec<ProjectionChoice>,
    pub beta: f64,
    pub normalization: Normalization,
    pub measure_downscale: usize,
    pub lambda_c: f64,
    pub lambda_b: f64,
    pub lambda_s: f64,
    pub lambda_a: f64,
    pub d_f_offset: f64,
    pub vc_f: f64,
    pub mesh_divisor: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub step_units: StepUnits,
    pub smoothness: SmoothnessForm,
    pub min_object_fraction: f64,
    pub flow_overlay: bool,
    /// Vertex displacement, in mesh cells, above which a region counts as
    /// modified in the flow mask.
    pub flow_threshold: f64,
}

impl Default for Config {
    fn default() -> Self {
        let weights = EnergyWeights::default();
        let opt = OptimizeOptions::default();
        let global = GlobalSearchConfig::default();
        Self {
            eri: None,
            labels: None,
            out_dir: PathBuf::from("out"),
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            fov_h_deg: 150.0,
            width: 1816,
            height: 1020,
            projection: ProjectionChoice::Glap,
            compare: vec![
                ProjectionChoice::Rectilinear,
                ProjectionChoice::Stereographic,
                ProjectionChoice::Pannini(PanniniParams { d: 0.5, vc: 0.0 }),
                ProjectionChoice::Gap,
                ProjectionChoice::Glap,
            ],
            beta: DEFAULT_BETA,
            normalization: global.normalization,
            measure_downscale: global.measure_downscale,
            lambda_c: weights.lambda_c,
            lambda_b: weights.lambda_b,
            lambda_s: weights.lambda_s,
            lambda_a: weights.lambda_a,
            d_f_offset: DEFAULT_D_F_OFFSET,
            vc_f: 0.0,
            mesh_divisor: MESH_DIVISOR,
            iterations: opt.iterations,
            learning_rate: opt.learning_rate,
            step_units: opt.step_units,
            smoothness: opt.smoothness,
            min_object_fraction: MIN_OBJECT_FRACTION,
            flow_overlay: true,
            flow_threshold: 0.25,
        }
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl Config {
    pub const KEYS: [&'static str; 27] = [
        "eri",
        "labels",
        "out_dir",
        "yaw_deg",
        "pitch_deg",
        "fov_h_deg",
        "width",
        "height",
        "projection",
        "compare",
        "beta",
        "normalization",
        "measure_downscale",
        "lambda_c",
        "lambda_b",
        "lambda_s",
        "lambda_a",
        "d_f_offset",
        "vc_f",
        "mesh_divisor",
        "iterations",
        "learning_rate",
        "step_units",
        "smoothness",
        "min_object_fraction",
        "flow_overlay",
        "flow_threshold",
    ];

    /// Sets one key; `origin` names the source in error messages.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = |reason: String| ConfigError::BadValue {
            origin: origin.into(),
            key: key.into(),
            value: value.into(),
            reason,
        };
        match key {
            "eri" => self.eri = optional_path(value),
            "labels" => self.labels = optional_path(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "yaw_deg" => self.yaw_deg = parse(value).map_err(bad)?,
            "pitch_deg" => self.pitch_deg = parse(value).map_err(bad)?,
            "fov_h_deg" => self.fov_h_deg = parse(value).map_err(bad)?,
            "width" => self.width = parse(value).map_err(bad)?,
            "height" => self.height = parse(value).map_err(bad)?,
            "projection" => self.projection = value.parse().map_err(bad)?,
            "compare" => {
                self.compare = split_list(value)
                    .iter()
                    .map(|s| s.parse::<ProjectionChoice>())
                    .collect::<Result<_, _>>()
                    .map_err(bad)?
            }
            "beta" => self.beta = parse(value).map_err(bad)?,
            "normalization" => {
                self.normalization = match value.to_ascii_lowercase().as_str() {
                    "absolute" => Normalization::Absolute,
                    "gridminmax" | "grid_min_max" => Normalization::GridMinMax,
                    _ => return Err(bad("expected absolute or gridminmax".into())),
                }
            }
            "measure_downscale" => self.measure_downscale = parse(value).map_err(bad)?,
            "lambda_c" => self.lambda_c = parse(value).map_err(bad)?,
            "lambda_b" => self.lambda_b = parse(value).map_err(bad)?,
            "lambda_s" => self.lambda_s = parse(value).map_err(bad)?,
            "lambda_a" => self.lambda_a = parse(value).map_err(bad)?,
            "d_f_offset" => self.d_f_offset = parse(value).map_err(bad)?,
            "vc_f" => self.vc_f = parse(value).map_err(bad)?,
            "mesh_divisor" => self.mesh_divisor = parse(value).map_err(bad)?,
            "iterations" => self.iterations = parse(value).map_err(bad)?,
            "learning_rate" => self.learning_rate = parse(value).map_err(bad)?,
            "step_units" => {
                self.step_units = match value.to_ascii_lowercase().as_str() {
                    "plane" => StepUnits::Plane,
                    "grid" => StepUnits::Grid,
                    _ => return Err(bad("expected plane or grid".into())),
                }
            }
            "smoothness" => {
                self.smoothness = match value.to_ascii_lowercase().as_str() {
                    "absolute" => SmoothnessForm::Absolute,
                    "relative" => SmoothnessForm::Relative,
                    _ => return Err(bad("expected absolute or relative".into())),
                }
            }
            "min_object_fraction" => self.min_object_fraction = parse(value).map_err(bad)?,
            "flow_overlay" => self.flow_overlay = parse_bool(value).map_err(bad)?,
            "flow_threshold" => self.flow_threshold = parse(value).map_err(bad)?,
            _ if key.starts_with("result.") => {}
            _ => {
                return Err(ConfigError::UnknownKey {
                    origin: origin.into(),
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let origin = format!("{source}:{}", n + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.clone(),
                text: line.into(),
            })?;
            self.set(key.trim(), value, &origin)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let mut config = Self::default();
        config.apply_text(&text, &path.display().to_string())?;
        Ok(config)
    }

    /// Applies `key=value` overrides given on the command line.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: "command line".into(),
                text: item.into(),
            })?;
            self.set(key.trim(), value, "command line")?;
        }
        Ok(())
    }

    /// `(key, value)` for every key, in [`Config::KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let values = [
            path(&self.eri),
            path(&self.labels),
            self.out_dir.display().to_string(),
            self.yaw_deg.to_string(),
            self.pitch_deg.to_string(),
            self.fov_h_deg.to_string(),
            self.width.to_string(),
            self.height.to_string(),
            self.projection.to_string(),
            self.compare.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("; "),
            self.beta.to_string(),
            match self.normalization {
                Normalization::Absolute => "absolute",
                Normalization::GridMinMax => "gridminmax",
            }
            .to_string(),
            self.measure_downscale.to_string(),
            self.lambda_c.to_string(),
            self.lambda_b.to_string(),
            self.lambda_s.to_string(),
            self.lambda_a.to_string(),
            self.d_f_offset.to_string(),
            self.vc_f.to_string(),
            self.mesh_divisor.to_string(),
            self.iterations.to_string(),
            self.learning_rate.to_string(),
            match self.step_units {
                StepUnits::Plane => "plane",
                StepUnits::Grid => "grid",
            }
            .to_string(),
            match self.smoothness {
                SmoothnessForm::Absolute => "absolute",
                SmoothnessForm::Relative => "relative",
            }
            .to_string(),
            self.min_object_fraction.to_string(),
            self.flow_overlay.to_string(),
            self.flow_threshold.to_string(),
        ];
        Self::KEYS.into_iter().zip(values).collect()
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Checks ranges that the individual parsers cannot.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.width < 2 || self.height < 2 {
            return invalid(format!("viewport must be at least 2x2, got {}x{}", self.width, self.height));
        }
        if !(self.fov_h_deg > 0.0 && self.fov_h_deg < 180.0) {
            return invalid(format!("fov_h_deg must be in (0, 180), got {}", self.fov_h_deg));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be positive, got {}", self.beta));
        }
        if self.measure_downscale == 0 || self.mesh_divisor == 0 {
            return invalid("measure_downscale and mesh_divisor must be >= 1".into());
        }
        if !self.weights().is_valid() {
            return invalid(format!("energy weights must be >= 0, got {:?}", self.weights()));
        }
        if self.iterations == 0 || !(self.learning_rate > 0.0) {
            return invalid("iterations and learning_rate must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.vc_f) || !(self.d_f_offset >= 0.0) {
            return invalid(format!("need vc_f in [0, 1] and d_f_offset >= 0, got {} and {}", self.vc_f, self.d_f_offset));
        }
        if !(0.0..1.0).contains(&self.min_object_fraction) {
            return invalid(format!("min_object_fraction must be in [0, 1), got {}", self.min_object_fraction));
        }
        if self.compare.is_empty() {
            return invalid("compare needs at least one projection".into());
        }
        Ok(())
    }

    pub fn viewport(&self) -> Result<ViewportSpec, DomainError> {
        ViewportSpec::new(
            SpherePoint::from_degrees(self.yaw_deg, self.pitch_deg),
            self.fov_h_deg.to_radians(),
            self.width,
            self.height,
        )
    }

    pub fn weights(&self) -> EnergyWeights {
        EnergyWeights {
            lambda_c: self.lambda_c,
            lambda_b: self.lambda_b,
            lambda_s: self.lambda_s,
            lambda_a: self.lambda_a,
        }
    }

    pub fn optimize_options(&self) -> OptimizeOptions {
        OptimizeOptions {
            iterations: self.iterations,
            learning_rate: self.learning_rate,
            step_units: self.step_units,
            smoothness: self.smoothness,
            ..Default::default()
        }
    }

    pub fn global_search(&self) -> GlobalSearchConfig {
        GlobalSearchConfig {
            beta: self.beta,
            measure_downscale: self.measure_downscale,
            normalization: self.normalization,
        }
    }
}

fn split_list(value: &str) -> Vec<String> {
    // commas also separate projection arguments, so split on ';' or on commas
    // outside parentheses
    let mut items = Vec::new();
    let mut depth = 0;
    let mut current = String::new();
    for c in value.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if (c == ';' || c == ',') && depth == 0 {
            items.push(std::mem::take(&mut current));
        } else {
            current.push(c);
        }
    }
    items.push(current);
    items.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let c = Config::default();
        let mut back = Config::default();
        back.beta = 1.0;
        back.compare.clear();
        back.apply_text(&c.to_text(), "manifest").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn cli_overrides_file() {
        let mut c = Config::default();
        c.apply_text("beta = 0.5\nwidth=640\n# comment\n", "f").unwrap();
        c.apply_overrides(&["beta=0.25"]).unwrap();
        assert_eq!((c.beta, c.width, c.height), (0.25, 640, 1020));
    }

    #[test]
    fn errors_name_their_origin() {
        let mut c = Config::default();
        let e = c.apply_text("width = 10\nfoo = 1\n", "run.cfg").unwrap_err();
        assert_eq!(e.to_string(), "run.cfg:2: unknown key \"foo\"");
        let e = c.apply_overrides(&["width=wide"]).unwrap_err();
        assert!(e.to_string().starts_with("command line: invalid value \"wide\" for width"));
        assert!(c.apply_text("novalue\n", "x").is_err());
    }

    #[test]
    fn projection_syntax() {
        assert_eq!("pannini(0.5, 0)".parse(), Ok(ProjectionChoice::Pannini(PanniniParams { d: 0.5, vc: 0.0 })));
        assert_eq!("Pannini".parse(), Ok(ProjectionChoice::Pannini(PanniniParams { d: 0.5, vc: 0.0 })));
        assert_eq!("gpp(1)".parse(), Ok(ProjectionChoice::Gpp(1.0)));
        assert!("gpp(2)".parse::<ProjectionChoice>().is_err());
        assert!("pannini(0.5,2)".parse::<ProjectionChoice>().is_err());
        assert!("fisheye".parse::<ProjectionChoice>().is_err());
        let mut c = Config::default();
        c.set("compare", "gap, pannini(0.3,0.1), gpp(0.5)", "t").unwrap();
        assert_eq!(c.compare.len(), 3);
    }

    #[test]
    fn result_keys_are_ignored() {
        let mut c = Config::default();
        c.apply_text("result.d_b = 0.3\n", "m").unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let mut c = Config::default();
        assert!(c.validate().is_ok());
        c.fov_h_deg = 190.0;
        assert!(c.validate().is_err());
    }
}
