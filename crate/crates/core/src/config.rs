//! Scenario files: TOML with unit-suffixed keys and strict key checking.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constitutive::Technique;
use crate::dynamics::{RampSegment, SolverConfig, TimeStep};
use crate::error::{Error, Result};
use crate::materials::MaterialModel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub experiment: u32,
    pub geometry: GeometryConfig,
    pub material: MaterialConfig,
    pub technique: TechniqueConfig,
    pub load: LoadConfig,
    pub solver: SolverSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    /// Flat strip along x, clamped at x = 0.
    Strip {
        length_m: f64,
        width_m: f64,
        thickness_m: f64,
        length_elements: usize,
        width_elements: usize,
    },
    /// Quarter of a square sheet with a central circular hole.
    PlateWithHole {
        half_width_m: f64,
        hole_radius_m: f64,
        thickness_m: f64,
    },
    /// Quarter of a square sheet of full side `side_m`.
    Square { side_m: f64, thickness_m: f64 },
    /// Quarter of a tube; `profile_row` is the element row (from z = 0)
    /// where the wall stress profile is sampled.
    Cylinder {
        inner_radius_m: f64,
        wall_thickness_m: f64,
        length_m: f64,
        circumferential_elements: usize,
        axial_elements: usize,
        profile_row: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub density_kg_per_m3: f64,
    pub law: MaterialModel,
}

fn default_constant_nu() -> f64 {
    0.499
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechniqueConfig {
    pub selector: Technique,
    /// ν of the constant tensor that Techniques 2 and 3 use for Mooney–Rivlin.
    #[serde(default = "default_constant_nu")]
    pub constant_tensor_poisson_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoadKind {
    #[serde(rename = "tip_moment_N_m")]
    TipMoment,
    #[serde(rename = "edge_tension_Pa")]
    EdgeTension,
    #[serde(rename = "edge_pressure_Pa")]
    EdgePressure,
    #[serde(rename = "follower_pressure_Pa")]
    FollowerPressure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub start: f64,
    pub end: f64,
    pub duration_s: f64,
}

impl From<SegmentConfig> for RampSegment {
    fn from(s: SegmentConfig) -> Self {
        RampSegment {
            start: s.start,
            end: s.end,
            duration: s.duration_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub target: LoadKind,
    pub segments: Vec<SegmentConfig>,
    /// Second loading history with the same final value, run by `verify`
    /// for the loading-rate comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate_segments: Option<Vec<SegmentConfig>>,
}

/// `"auto"` or a step in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtSetting(pub TimeStep);

impl Serialize for DtSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            TimeStep::Auto => s.serialize_str("auto"),
            TimeStep::Fixed(dt) => s.serialize_f64(dt),
        }
    }
}

impl<'de> Deserialize<'de> for DtSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Seconds(f64),
        }
        match Repr::deserialize(d)? {
            Repr::Seconds(v) => Ok(DtSetting(TimeStep::Fixed(v))),
            Repr::Text(t) => parse_dt(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses `auto` or a positive number of seconds.
pub fn parse_dt(text: &str) -> std::result::Result<DtSetting, String> {
    if text.trim().eq_ignore_ascii_case("auto") {
        return Ok(DtSetting(TimeStep::Auto));
    }
    match text.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(DtSetting(TimeStep::Fixed(v))),
        _ => Err(format!("expected \"auto\" or a positive number of seconds, got {text:?}")),
    }
}

fn default_safety() -> f64 {
    0.8
}
fn default_refresh() -> usize {
    20
}
fn default_in_plane() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: DtSetting,
    #[serde(default = "default_safety")]
    pub safety_factor: f64,
    pub end_time_s: f64,
    pub output_stride: usize,
    #[serde(default)]
    pub damping_per_s: f64,
    #[serde(default = "default_refresh")]
    pub dt_refresh_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotary_inertia_scale: Option<f64>,
    /// Gauss points per in-plane direction (2 to 4); thickness always uses 2.
    #[serde(default = "default_in_plane")]
    pub in_plane_gauss_points: usize,
}

impl SolverSection {
    pub fn to_solver(&self) -> SolverConfig {
        SolverConfig {
            time_step: self.dt.0,
            safety_factor: self.safety_factor,
            end_time: self.end_time_s,
            output_stride: self.output_stride,
            damping: self.damping_per_s,
            dt_refresh_interval: self.dt_refresh_steps,
            rotary_inertia_scale: self.rotary_inertia_scale,
        }
    }
}

fn domain(field: &str, message: impl Into<String>) -> Error {
    Error::Domain {
        field: field.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: origin.into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Physical-range checks; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(domain(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if !(1..=5).contains(&self.experiment) {
            return Err(Error::InvalidExperiment(self.experiment));
        }
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(field, format!("must be > 0, got {v}")))
            }
        };
        match self.geometry {
            GeometryConfig::Strip {
                length_m,
                width_m,
                thickness_m,
                length_elements,
                width_elements,
            } => {
                positive("geometry.length_m", length_m)?;
                positive("geometry.width_m", width_m)?;
                positive("geometry.thickness_m", thickness_m)?;
                if length_elements == 0 || width_elements == 0 {
                    return Err(domain("geometry.length_elements", "element counts must be >= 1"));
                }
            }
            GeometryConfig::PlateWithHole {
                half_width_m,
                hole_radius_m,
                thickness_m,
            } => {
                positive("geometry.half_width_m", half_width_m)?;
                positive("geometry.hole_radius_m", hole_radius_m)?;
                positive("geometry.thickness_m", thickness_m)?;
                if hole_radius_m >= half_width_m {
                    return Err(domain("geometry.hole_radius_m", "must be smaller than half_width_m"));
                }
            }
            GeometryConfig::Square { side_m, thickness_m } => {
                positive("geometry.side_m", side_m)?;
                positive("geometry.thickness_m", thickness_m)?;
            }
            GeometryConfig::Cylinder {
                inner_radius_m,
                wall_thickness_m,
                length_m,
                circumferential_elements,
                axial_elements,
                profile_row,
            } => {
                positive("geometry.inner_radius_m", inner_radius_m)?;
                positive("geometry.wall_thickness_m", wall_thickness_m)?;
                positive("geometry.length_m", length_m)?;
                if circumferential_elements == 0 || axial_elements == 0 {
                    return Err(domain("geometry.axial_elements", "element counts must be >= 1"));
                }
                if profile_row >= axial_elements {
                    return Err(domain("geometry.profile_row", format!("must be < axial_elements ({axial_elements})")));
                }
            }
        }
        positive("material.density_kg_per_m3", self.material.density_kg_per_m3)?;
        self.material.law.validate().map_err(|e| match e {
            Error::InvalidMaterial { field, reason } => domain(&format!("material.law.{field}"), reason),
            other => other,
        })?;
        let nu = self.technique.constant_tensor_poisson_ratio;
        if !(0.0..0.5).contains(&nu) {
            return Err(domain("technique.constant_tensor_poisson_ratio", format!("must lie in [0, 0.5), got {nu}")));
        }
        if self.load.segments.is_empty() {
            return Err(domain("load.segments", "at least one segment is required"));
        }
        if !(2..=4).contains(&self.solver.in_plane_gauss_points) {
            return Err(domain(
                "solver.in_plane_gauss_points",
                format!("must be 2, 3 or 4, got {}", self.solver.in_plane_gauss_points),
            ));
        }
        self.solver.to_solver().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
schema_version = 1
name = "sample"
experiment = 3

[geometry]
kind = "square"
side_m = 0.025
thickness_m = 0.0004

[material]
density_kg_per_m3 = 1000.0

[material.law]
model = "guccione_3d"
c1_Pa = 2000.0
c2 = 30.0
c3 = 10.0
c4 = 5.0

[technique]
selector = 1

[load]
target = "edge_tension_Pa"
segments = [{ start = 0.0, end = 1000.0, duration_s = 0.5 }]

[solver]
dt = "auto"
end_time_s = 0.5
output_stride = 10
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ScenarioConfig::from_toml_str(SAMPLE, "sample").unwrap();
        assert_eq!(cfg.technique.selector, Technique::Technique1);
        assert_eq!(cfg.solver.dt, DtSetting(TimeStep::Auto));
        let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string(), "again").unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let text = SAMPLE.replace("output_stride = 10", "output_stride = 10\nbogus_key = 1");
        let err = ScenarioConfig::from_toml_str(&text, "sample").unwrap_err().to_string();
        assert!(err.contains("bogus_key"), "{err}");
    }

    #[test]
    fn dt_forms() {
        assert_eq!(parse_dt("auto").unwrap(), DtSetting(TimeStep::Auto));
        assert_eq!(parse_dt("1e-5").unwrap(), DtSetting(TimeStep::Fixed(1e-5)));
        assert!(parse_dt("-1").is_err());
        let text = SAMPLE.replace("dt = \"auto\"", "dt = 2.5e-6");
        let cfg = ScenarioConfig::from_toml_str(&text, "sample").unwrap();
        assert_eq!(cfg.solver.dt, DtSetting(TimeStep::Fixed(2.5e-6)));
    }
}
