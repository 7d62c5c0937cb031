//! Strict JSON configuration parsing (unknown keys rejected, errors carry
//! JSON pointer paths), provenance blocks and atomic file writes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    fixtures, BindingCurve, Incidence, IncidenceEntry, OpenBookSpec, ParamChart, Side, SpecOptions,
};
use crate::study::StudyPlan;
use crate::{Error, Result};

type A3 = [f64; 3];
type GV3 = nalgebra::Vector3<f64>;

fn v3(a: A3) -> GV3 {
    GV3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PageConfig {
    FlatRectangle {
        origin: A3,
        e1: A3,
        e2: A3,
        y1_range: [f64; 2],
        y2_range: [f64; 2],
        #[serde(default = "one")]
        orientation: f64,
    },
    SphericalCap {
        center: A3,
        radius: f64,
        #[serde(default = "z_axis")]
        axis: A3,
        #[serde(default = "full_turn")]
        azimuth_range: [f64; 2],
        polar_range: [f64; 2],
        #[serde(default = "one")]
        orientation: f64,
    },
    Hemisphere {
        center: A3,
        radius: f64,
        #[serde(default = "z_axis")]
        axis: A3,
        half: Half,
        #[serde(default = "one")]
        orientation: f64,
    },
    PlanarDisk {
        center: A3,
        e1: A3,
        e2: A3,
        radius: f64,
        #[serde(default = "one")]
        orientation: f64,
    },
    PlanarAnnulus {
        center: A3,
        e1: A3,
        e2: A3,
        r_inner: f64,
        r_outer: f64,
        #[serde(default = "one")]
        orientation: f64,
    },
    CylinderSegment {
        center: A3,
        radius: f64,
        #[serde(default = "z_axis")]
        axis: A3,
        z_range: [f64; 2],
        #[serde(default = "one")]
        orientation: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Half {
    Upper,
    Lower,
}

fn one() -> f64 {
    1.0
}
fn z_axis() -> A3 {
    [0.0, 0.0, 1.0]
}
fn full_turn() -> [f64; 2] {
    [0.0, std::f64::consts::TAU]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BindingConfig {
    Circle {
        center: A3,
        #[serde(default = "z_axis")]
        normal: A3,
        radius: f64,
    },
    Segment { start: A3, end: A3 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryConfig {
    page: usize,
    side: Side,
    #[serde(default = "one_i8")]
    direction: i8,
}

fn one_i8() -> i8 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct IncidenceConfig {
    binding: usize,
    entries: Vec<EntryConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    #[serde(default)]
    pub test_mode: bool,
    #[serde(default = "default_theta_min_deg")]
    pub theta_min_deg: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_theta_min_deg() -> f64 {
    10.0
}
fn default_samples() -> usize {
    256
}

impl Default for OptionsConfig {
    fn default() -> Self {
        OptionsConfig {
            test_mode: false,
            theta_min_deg: default_theta_min_deg(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeomConfig {
    pages: Vec<PageConfig>,
    bindings: Vec<BindingConfig>,
    incidences: Vec<IncidenceConfig>,
    #[serde(default)]
    options: OptionsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GeometryRef {
    Fixture(String),
    Inline(Box<GeomConfig>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanConfig {
    geometry: GeometryRef,
    eps: Vec<f64>,
    #[serde(default = "default_n_eigs")]
    n_eigs: usize,
    #[serde(default = "default_h")]
    h: f64,
    #[serde(default = "default_ladder")]
    ladder: usize,
    #[serde(default)]
    layers: Option<usize>,
    #[serde(default)]
    audits: Vec<String>,
    #[serde(default = "default_seed")]
    seed: u64,
}

fn default_n_eigs() -> usize {
    6
}
fn default_h() -> f64 {
    0.1
}
fn default_ladder() -> usize {
    2
}
fn default_seed() -> u64 {
    0x0b5e55ed
}

/// A parsed configuration document: either a geometry spec or a study plan.
#[derive(Debug)]
pub enum ParsedConfig {
    Geometry(OpenBookSpec),
    Plan(StudyPlan),
}

fn strict_from_value<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    let mut track = serde_path_to_error::Track::new();
    let de = serde_path_to_error::Deserializer::new(value, &mut track);
    T::deserialize(de).map_err(|e| {
        Error::Config(format!("at /{}: {e}", track.path().to_string().replace('.', "/")))
    })
}

fn geom_to_spec(cfg: GeomConfig) -> Result<OpenBookSpec> {
    let mut pages = Vec::new();
    for p in cfg.pages {
        pages.push(match p {
            PageConfig::FlatRectangle { origin, e1, e2, y1_range, y2_range, orientation } => {
                let mut c =
                    ParamChart::flat_rectangle(v3(origin), v3(e1), v3(e2), y1_range, y2_range);
                c.orientation = orientation;
                c
            }
            PageConfig::SphericalCap {
                center,
                radius,
                axis,
                azimuth_range,
                polar_range,
                orientation,
            } => {
                let axis = v3(axis).normalize();
                let (u, v) = crate::geometry::frame_complement(&axis);
                let mut c = ParamChart::spherical_cap(
                    v3(center),
                    radius,
                    [u, v, axis],
                    azimuth_range,
                    polar_range,
                );
                c.orientation = orientation;
                c
            }
            PageConfig::Hemisphere { center, radius, axis, half, orientation } => {
                let mut c = ParamChart::hemisphere(
                    v3(center),
                    radius,
                    v3(axis),
                    matches!(half, Half::Upper),
                );
                c.orientation = orientation;
                c
            }
            PageConfig::PlanarDisk { center, e1, e2, radius, orientation } => {
                let mut c = ParamChart::planar_disk(v3(center), v3(e1), v3(e2), radius);
                c.orientation = orientation;
                c
            }
            PageConfig::PlanarAnnulus { center, e1, e2, r_inner, r_outer, orientation } => {
                let mut c =
                    ParamChart::planar_annulus(v3(center), v3(e1), v3(e2), r_inner, r_outer);
                c.orientation = orientation;
                c
            }
            PageConfig::CylinderSegment { center, radius, axis, z_range, orientation } => {
                let axis = v3(axis).normalize();
                let (u, v) = crate::geometry::frame_complement(&axis);
                let mut c =
                    ParamChart::cylinder_segment(v3(center), radius, [u, v, axis], z_range);
                c.orientation = orientation;
                c
            }
        });
    }
    let bindings = cfg
        .bindings
        .into_iter()
        .map(|b| match b {
            BindingConfig::Circle { center, normal, radius } => {
                BindingCurve::circle(v3(center), v3(normal), radius)
            }
            BindingConfig::Segment { start, end } => BindingCurve::segment(v3(start), v3(end)),
        })
        .collect();
    let incidences = cfg
        .incidences
        .into_iter()
        .map(|i| Incidence {
            binding: i.binding,
            entries: i
                .entries
                .into_iter()
                .map(|e| IncidenceEntry { page: e.page, side: e.side, direction: e.direction })
                .collect(),
        })
        .collect();
    Ok(OpenBookSpec {
        pages,
        bindings,
        incidences,
        options: SpecOptions {
            test_mode: cfg.options.test_mode,
            theta_min: cfg.options.theta_min_deg.to_radians(),
            samples: cfg.options.samples,
        },
    })
}

fn plan_from_config(cfg: PlanConfig) -> Result<StudyPlan> {
    for w in cfg.eps.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Config("eps must be descending".into()));
        }
    }
    if cfg.eps.is_empty() {
        return Err(Error::Config("eps list must not be empty".into()));
    }
    let spec = match cfg.geometry {
        GeometryRef::Fixture(name) => fixtures::by_name(&name)
            .ok_or_else(|| Error::Config(format!("unknown geometry fixture `{name}`")))?,
        GeometryRef::Inline(g) => geom_to_spec(*g)?,
    };
    Ok(StudyPlan {
        spec,
        eps: cfg.eps,
        n_eigs: cfg.n_eigs,
        h: cfg.h,
        ladder: cfg.ladder,
        layers: cfg.layers,
        audits: if cfg.audits.is_empty() {
            vec!["transfer".into(), "poincare".into(), "binding".into(), "metric".into()]
        } else {
            cfg.audits
        },
        seed: cfg.seed,
    })
}

/// Parse a configuration document (geometry spec or study plan), strict
/// schema, defaults filled.
pub fn parse_config(path: &Path) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ParsedConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("top level must be a JSON object".into()))?;
    if obj.contains_key("pages") {
        let cfg: GeomConfig = strict_from_value(value)?;
        Ok(ParsedConfig::Geometry(geom_to_spec(cfg)?))
    } else if obj.contains_key("eps") || obj.contains_key("geometry") {
        let cfg: PlanConfig = strict_from_value(value)?;
        Ok(ParsedConfig::Plan(plan_from_config(cfg)?))
    } else {
        Err(Error::Config(
            "document has neither `pages` (geometry) nor `eps`/`geometry` (plan)".into(),
        ))
    }
}

/// SHA-256 hex digest used for provenance hashes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance block echoed into every emitted artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub created_unix: u64,
}

impl Provenance {
    pub fn new(config_text: &str, seed: u64) -> Self {
        Provenance {
            config_hash: sha256_hex(config_text.as_bytes()),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
