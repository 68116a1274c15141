use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use metaline::metrics::SpecMask;
use metaline::synthesis::SynthesisConfig;
use metaline::touchstone::{DataFormat, FrequencyUnit};
use metaline::{FrequencyGrid, UnitCellParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: &str = "metaline.run/1";

fn default_schema() -> String {
    SCHEMA.to_string()
}
fn default_grid() -> FrequencyGrid {
    FrequencyGrid::linear(0.1e9, 5e9, 2001).expect("valid grid")
}
fn default_stages() -> usize {
    1
}
fn default_z0() -> f64 {
    50.0
}
fn default_reference_center() -> Option<f64> {
    Some(730e6)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default = "OutputSettings::default_dir")]
    pub dir: PathBuf,
    /// File name prefix for everything written.
    #[serde(default = "OutputSettings::default_stem")]
    pub stem: String,
    #[serde(default)]
    pub touchstone_format: DataFormat,
    #[serde(default)]
    pub frequency_unit: FrequencyUnit,
}

impl OutputSettings {
    fn default_dir() -> PathBuf {
        PathBuf::from("out")
    }
    fn default_stem() -> String {
        "metaline".into()
    }
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            dir: Self::default_dir(),
            stem: Self::default_stem(),
            touchstone_format: DataFormat::default(),
            frequency_unit: FrequencyUnit::default(),
        }
    }
}

/// Optional synthesis overrides. Unset fields take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<FrequencyGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polish_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default)]
    pub cell: UnitCellParams,
    #[serde(default = "default_grid")]
    pub grid: FrequencyGrid,
    #[serde(default = "default_stages")]
    pub stages: usize,
    #[serde(default = "default_z0")]
    pub z0_ohm: f64,
    /// Expected pass-band center used by the consistency report.
    #[serde(default = "default_reference_center")]
    pub reference_center_hz: Option<f64>,
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<SpecMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisSettings>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: default_schema(),
            cell: UnitCellParams::default(),
            grid: default_grid(),
            stages: default_stages(),
            z0_ohm: default_z0(),
            reference_center_hz: default_reference_center(),
            output: OutputSettings::default(),
            mask: None,
            synthesis: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!(
                "line {} column {}, field `{path}`: {inner}",
                inner.line(),
                inner.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            )));
        }
        self.cell.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.stages < 1 {
            return Err(CliError::Config("stages must be at least 1".into()));
        }
        if !(self.z0_ohm > 0.0 && self.z0_ohm.is_finite()) {
            return Err(CliError::Config(format!(
                "z0_ohm must be positive, got {}",
                self.z0_ohm
            )));
        }
        if let Some(r) = self.reference_center_hz {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Config(format!(
                    "reference_center_hz must be positive, got {r}"
                )));
            }
        }
        if let Some(m) = &self.mask {
            m.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        self.synthesis_config()?.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Library synthesis settings: the configured cell as starting point, the
    /// configured mask (or the 730 MHz default) and any overrides.
    pub fn synthesis_config(&self) -> Result<SynthesisConfig, CliError> {
        let d = SynthesisConfig::default();
        let s = self.synthesis.clone().unwrap_or_default();
        Ok(SynthesisConfig {
            base: self.cell,
            bounds: s.bounds,
            mask: self.mask.clone().unwrap_or(d.mask),
            grid: s.grid.unwrap_or(d.grid),
            stages: s.stages.unwrap_or(d.stages),
            z0_ohm: self.z0_ohm,
            max_iterations: s.max_iterations.unwrap_or(d.max_iterations),
            tolerance: s.tolerance.unwrap_or(d.tolerance),
            restarts: s.restarts.unwrap_or(d.restarts),
            seed: s.seed.unwrap_or(d.seed),
            polish_rounds: s.polish_rounds.unwrap_or(d.polish_rounds),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}
