//! Structure sources: built-in presets or a JSON description.
//!
//! A config file holds either one component
//!
//! ```json
//! {
//!   "polygon": [[0.0, 0.0], [1.0, 0.0], [0.5, 0.8660254037844386]],
//!   "maps": [
//!     { "scale": 0.5, "translation": [0.0, 0.0] },
//!     { "scale": 0.5, "translation": [0.5, 0.0] },
//!     { "scale": 0.5, "rotation_deg": 0.0, "reflect": false,
//!       "translation": [0.25, 0.4330127018922193] }
//!   ],
//!   "depth_limit": 12
//! }
//! ```
//!
//! or several, as `{ "components": [ ... ] }`. Rotation is in degrees,
//! counterclockwise; a reflection (across the x axis) is applied before the
//! rotation. The `FRAC_DEPTH_LIMIT` environment variable overrides every
//! component's depth cap.

use std::fs;
use std::path::PathBuf;

use serde::Deserialize;

use lacuna::geom::{ConvexPolygon, Point2, Similitude};
use lacuna::presets;
use lacuna::structure::CellularStructure;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub scale: f64,
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default)]
    pub reflect: bool,
    pub translation: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub polygon: Vec<[f64; 2]>,
    pub maps: Vec<MapSpec>,
    #[serde(default)]
    pub depth_limit: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultiSpec {
    components: Vec<ComponentSpec>,
}

/// Where a structure comes from; exactly one of the two must be given.
#[derive(Debug, clap::Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in structure: gasket, square4, pinwheel, infinite-gasket,
    /// gasket-wedge
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,

    /// JSON file describing the base polygon and maps
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

impl Source {
    /// Builds every component, with the `FRAC_DEPTH_LIMIT` override applied.
    pub fn load(&self) -> Result<Vec<CellularStructure>, CliError> {
        let mut comps = match (&self.preset, &self.config) {
            (Some(name), None) => presets::preset(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset {name:?}; available: {}",
                    presets::PRESET_NAMES.join(", ")
                ))
            })?,
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                parse_config(&text)?
                    .iter()
                    .map(build_component)
                    .collect::<Result<Vec<_>, _>>()?
            }
            _ => unreachable!("clap enforces exactly one source"),
        };
        if let Some(limit) = depth_limit_env()? {
            comps = comps
                .into_iter()
                .map(|c| c.with_depth_limit(limit))
                .collect();
        }
        Ok(comps)
    }
}

fn depth_limit_env() -> Result<Option<usize>, CliError> {
    match std::env::var("FRAC_DEPTH_LIMIT") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("FRAC_DEPTH_LIMIT={s:?} is not a level count"))),
        Err(_) => Ok(None),
    }
}

pub fn parse_config(text: &str) -> Result<Vec<ComponentSpec>, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config JSON: {e}")))?;
    if value.get("components").is_some() {
        let multi: MultiSpec = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("config: {e}")))?;
        if multi.components.is_empty() {
            return Err(CliError::Config("config: empty component list".into()));
        }
        Ok(multi.components)
    } else {
        let single: ComponentSpec = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("config: {e}")))?;
        Ok(vec![single])
    }
}

fn build_component(spec: &ComponentSpec) -> Result<CellularStructure, CliError> {
    let verts = spec
        .polygon
        .iter()
        .map(|[x, y]| Point2::new(*x, *y))
        .collect();
    let base = ConvexPolygon::new(verts).map_err(|e| CliError::Invalid(e.to_string()))?;
    let maps = spec
        .maps
        .iter()
        .map(|m| {
            Similitude::new(
                m.scale,
                m.rotation_deg.to_radians(),
                m.reflect,
                Point2::new(m.translation[0], m.translation[1]),
            )
        })
        .collect();
    CellularStructure::validate(base, maps, spec.depth_limit).map_err(CliError::from)
}
