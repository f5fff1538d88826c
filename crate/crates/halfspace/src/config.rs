//! TOML run and sweep specifications.
//!
//! A run spec has four sections:
//!
//! ```toml
//! [grid]
//! dim = 1
//! half_width = 60.0
//! points = 1024
//!
//! [symbol]
//! family = "laplacian"     # laplacian | fractional | gaussian | kernel
//! # beta = 1.0             # fractional
//! # sigma = 1.0            # gaussian
//! # path = "kernel.csv"    # kernel: samples on the [grid] lattice
//!
//! [initial]
//! kind = "bump"            # bump | csv
//! amplitude = 1.0
//! # path = "u0.csv"
//!
//! [run]
//! alpha = 1.2              # the only field without a default
//! t_max = 100.0
//! dt = 0.05
//! ```
//!
//! CSV fields are plain value lists in row-major order over the target
//! shape; tokens may be separated by commas, whitespace, or newlines, and
//! `#` starts a comment. Relative paths resolve against the directory of
//! the spec file.

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, HalfField, Symmetry};
use crate::semilinear::SimConfig;
use crate::symbols::DiffusionSymbol;
use ndarray::{ArrayD, IxDyn};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

fn default_dim() -> usize {
    1
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.half_width, self.points)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl SymbolSpec {
    /// Reject fields that do not belong to the declared family; a stray
    /// `beta` under `family = "laplacian"` is a typo, not a preference.
    fn check_fields(&self, allowed: &[&str]) -> Result<()> {
        let present = [
            ("beta", self.beta.is_some()),
            ("sigma", self.sigma.is_some()),
            ("path", self.path.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(Error::Config(format!(
                    "field '{name}' does not apply to symbol family '{}'",
                    self.family
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self, grid: Grid, base_dir: &Path) -> Result<DiffusionSymbol> {
        match self.family.as_str() {
            "laplacian" => {
                self.check_fields(&[])?;
                Ok(DiffusionSymbol::laplacian())
            }
            "fractional" => {
                self.check_fields(&["beta"])?;
                let beta = self
                    .beta
                    .ok_or_else(|| Error::Config("family 'fractional' needs beta".into()))?;
                DiffusionSymbol::fractional_laplacian(beta)
            }
            "gaussian" => {
                self.check_fields(&["sigma"])?;
                let sigma = self
                    .sigma
                    .ok_or_else(|| Error::Config("family 'gaussian' needs sigma".into()))?;
                let samples = Field::gaussian(grid, sigma)?;
                DiffusionSymbol::convolution(samples, sigma * sigma / 2.0, 2.0)
            }
            "kernel" => {
                self.check_fields(&["path"])?;
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("family 'kernel' needs path".into()))?;
                let samples = read_field_csv(&resolve(base_dir, path), grid)?;
                DiffusionSymbol::convolution_fitted(samples)
            }
            other => Err(Error::Config(format!(
                "unknown symbol family '{other}'; expected laplacian, fractional, gaussian, or kernel"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl InitialSpec {
    pub fn build(&self, grid: Grid, base_dir: &Path) -> Result<HalfField> {
        match self.kind.as_str() {
            "bump" => {
                if self.path.is_some() {
                    return Err(Error::Config(
                        "field 'path' does not apply to initial kind 'bump'".into(),
                    ));
                }
                let amplitude = self.amplitude.unwrap_or(1.0);
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(Error::Config(format!(
                        "bump amplitude {amplitude} must be a nonnegative number"
                    )));
                }
                Ok(HalfField::bump(grid, amplitude))
            }
            "csv" => {
                if self.amplitude.is_some() {
                    return Err(Error::Config(
                        "field 'amplitude' does not apply to initial kind 'csv'".into(),
                    ));
                }
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("initial kind 'csv' needs path".into()))?;
                read_half_field_csv(&resolve(base_dir, path), grid)
            }
            other => Err(Error::Config(format!(
                "unknown initial kind '{other}'; expected bump or csv"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub alpha: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "default_dt_safety")]
    pub dt_safety: f64,
    #[serde(default = "default_dt_floor")]
    pub dt_floor: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_gamma: Option<f64>,
    #[serde(default)]
    pub linear_only: bool,
}

fn default_t_max() -> f64 {
    100.0
}
fn default_dt() -> f64 {
    0.05
}
fn default_threshold() -> f64 {
    1e8
}
fn default_dt_safety() -> f64 {
    0.2
}
fn default_dt_floor() -> f64 {
    1e-12
}
fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub grid: GridSpec,
    pub symbol: SymbolSpec,
    pub initial: InitialSpec,
    pub run: RunSection,
}

impl RunSpec {
    pub fn from_toml_str(text: &str) -> Result<RunSpec> {
        toml::from_str(text).map_err(|e| Error::Config(format!("run spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Build the simulation config and initial data. `base_dir` anchors
    /// relative CSV paths; pass the spec file's directory.
    pub fn materialize(&self, base_dir: &Path) -> Result<(SimConfig, HalfField)> {
        let grid = self.grid.build()?;
        let symbol = self.symbol.build(grid, base_dir)?;
        let mut config = SimConfig::new(symbol, grid, self.run.alpha);
        config.t_max = self.run.t_max;
        config.dt_initial = self.run.dt;
        config.blowup_threshold = self.run.blowup_threshold;
        config.dt_safety = self.run.dt_safety;
        config.dt_floor = self.run.dt_floor;
        config.record_stride = self.run.record_stride;
        config.probe_gamma = self.run.probe_gamma;
        config.linear_only = self.run.linear_only;
        config.validate()?;
        let u0 = self.initial.build(grid, base_dir)?;
        Ok((config, u0))
    }

    /// The spec as TOML, for echoing into result artifacts.
    pub fn echo_toml(&self) -> String {
        toml::to_string(self).expect("a parsed spec serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_sweep_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "default_sweep_stride")]
    pub record_stride: usize,
}

fn default_sweep_t_max() -> f64 {
    400.0
}
fn default_sweep_stride() -> usize {
    20
}

/// Phase-diagram sweep: bump data at each amplitude, one run per
/// (alpha, amplitude) pair on a shared grid and symbol.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub grid: GridSpec,
    pub symbol: SymbolSpec,
    pub sweep: SweepSection,
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<SweepSpec> {
        toml::from_str(text).map_err(|e| Error::Config(format!("sweep spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<SweepSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn echo_toml(&self) -> String {
        toml::to_string(self).expect("a parsed spec serializes")
    }
}

fn resolve(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

fn read_values(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(expected);
    for (line_no, line) in text.lines().enumerate() {
        let data = line.split('#').next().unwrap_or("");
        for token in data.split(|c: char| c == ',' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            let v: f64 = token.parse().map_err(|_| {
                Error::Config(format!(
                    "{}:{}: '{token}' is not a number",
                    path.display(),
                    line_no + 1
                ))
            })?;
            values.push(v);
        }
    }
    if values.len() != expected {
        return Err(Error::Config(format!(
            "{}: expected {expected} values, found {}",
            path.display(),
            values.len()
        )));
    }
    Ok(values)
}

/// Read a full-lattice field from a value list in row-major order.
pub fn read_field_csv(path: &Path, grid: Grid) -> Result<Field> {
    let shape = grid.shape();
    let expected: usize = shape.iter().product();
    let values = read_values(path, expected)?;
    let array = ArrayD::from_shape_vec(IxDyn(&shape), values)
        .expect("length was checked against the shape");
    Ok(Field { grid, values: array, symmetry: Symmetry::None })
}

/// Read half-space data from a value list in row-major order over the half
/// shape (full box on the first axes, `n/2 - 1` interior points on the
/// last).
pub fn read_half_field_csv(path: &Path, grid: Grid) -> Result<HalfField> {
    let shape = HalfField::half_shape(&grid);
    let expected: usize = shape.iter().product();
    let values = read_values(path, expected)?;
    let array = ArrayD::from_shape_vec(IxDyn(&shape), values)
        .expect("length was checked against the shape");
    Ok(HalfField { grid, values: array })
}
