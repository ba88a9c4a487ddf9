//! Run configuration: TOML file plus command-line overrides.
//!
//! ```toml
//! radial_cells = 48
//! angular_count = 96
//! eps_min = 1e-5
//! grading = 0.5
//! seed = 0
//! format = "json"
//!
//! [probe]
//! radial_cells = 10
//! angular_count = 16
//! eps_min = 1e-3
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use hartogs::quadrature::GridParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Grid section as written in the file; missing keys take defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub radial_cells: usize,
    pub angular_count: usize,
    pub eps_min: f64,
    pub grading: f64,
    pub inner_radial_cells: Option<usize>,
    pub inner_angular_count: Option<usize>,
}

impl GridSection {
    fn from_params(g: GridParams) -> Self {
        Self {
            radial_cells: g.radial_cells,
            angular_count: g.angular_count,
            eps_min: g.eps_min,
            grading: g.grading,
            inner_radial_cells: g.inner_radial_cells,
            inner_angular_count: g.inner_angular_count,
        }
    }

    pub fn params(&self) -> GridParams {
        GridParams {
            inner_radial_cells: self.inner_radial_cells,
            inner_angular_count: self.inner_angular_count,
            ..GridParams::new(self.radial_cells, self.angular_count, self.eps_min, self.grading)
        }
    }
}

/// Coarse grid for family probes.
pub fn default_probe_grid() -> GridParams {
    GridParams { inner_radial_cells: Some(2), inner_angular_count: Some(16), ..GridParams::new(10, 16, 1e-3, 0.5) }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    radial_cells: Option<usize>,
    angular_count: Option<usize>,
    eps_min: Option<f64>,
    grading: Option<f64>,
    inner_radial_cells: Option<usize>,
    inner_angular_count: Option<usize>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    probe: Option<RawGrid>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    radial_cells: Option<usize>,
    angular_count: Option<usize>,
    eps_min: Option<f64>,
    grading: Option<f64>,
    inner_radial_cells: Option<usize>,
    inner_angular_count: Option<usize>,
}

impl RawGrid {
    fn over(self, base: GridParams) -> GridSection {
        let mut g = GridSection::from_params(base);
        g.radial_cells = self.radial_cells.unwrap_or(g.radial_cells);
        g.angular_count = self.angular_count.unwrap_or(g.angular_count);
        g.eps_min = self.eps_min.unwrap_or(g.eps_min);
        g.grading = self.grading.unwrap_or(g.grading);
        g.inner_radial_cells = self.inner_radial_cells.or(g.inner_radial_cells);
        g.inner_angular_count = self.inner_angular_count.or(g.inner_angular_count);
        g
    }
}

/// Validated configuration shared by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: GridSection,
    pub probe: GridSection,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSection::from_params(GridParams::default()),
            probe: GridSection::from_params(default_probe_grid()),
            seed: 0,
            output: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    /// Parse TOML text; errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))?;
        let top = RawGrid {
            radial_cells: raw.radial_cells,
            angular_count: raw.angular_count,
            eps_min: raw.eps_min,
            grading: raw.grading,
            inner_radial_cells: raw.inner_radial_cells,
            inner_angular_count: raw.inner_angular_count,
        };
        let cfg = Self {
            grid: top.over(GridParams::default()),
            probe: raw
                .probe
                .map_or_else(|| GridSection::from_params(default_probe_grid()), |p| p.over(default_probe_grid())),
            seed: raw.seed.unwrap_or(0),
            output: raw.output,
            format: raw.format.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid.params().validate().map_err(|e| ConfigError(e.to_string()))?;
        self.probe.params().validate().map_err(|e| ConfigError(format!("[probe] {e}")))
    }

    /// Stable hash of every field.
    pub fn fingerprint(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(canon.as_bytes())[..8])
    }
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_toml(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}
