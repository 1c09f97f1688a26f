//! Experiment configuration.
//!
//! A TOML file with flat dotted keys (`array.n_rows = 32`), overridden by
//! `key=value` pairs from the command line. Every field has a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{size_coupling_caps_with, StageConvention};
use crate::energy::{ArrayModel, EnergyParams, MapGrid, DEFAULT_CAP_FJ};
use crate::error::{Error, Result};
use crate::formats::FpFormat;
use crate::mac::{Arch, ArchConfig, Granularity, DEFAULT_GAIN_RANGE_LIMIT};
use crate::stimulus::DistributionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Gain-range limit: a bit count, or `"none"` to disable the check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LimitSetting {
    Bits(u32),
    Named(String),
}

impl LimitSetting {
    pub fn resolve(&self) -> Result<Option<u32>> {
        match self {
            LimitSetting::Bits(b) => Ok(Some(*b)),
            LimitSetting::Named(s) if s == "none" => Ok(None),
            LimitSetting::Named(s) => Err(Error::Config(format!(
                "gain_range_limit `{s}`: expected bits or \"none\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub arch: Arch,
    pub granularity: Granularity,
    pub n_rows: usize,
    pub n_cols: usize,
    pub x_fmt: FpFormat,
    pub w_fmt: FpFormat,
    pub gain_range_limit: LimitSetting,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            arch: Arch::GainRanging,
            granularity: Granularity::Row,
            n_rows: 32,
            n_cols: 32,
            x_fmt: FpFormat { n_e: 3, n_m: 2 },
            w_fmt: FpFormat { n_e: 2, n_m: 1 },
            gain_range_limit: LimitSetting::Bits(DEFAULT_GAIN_RANGE_LIMIT),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StimulusSection {
    pub x_dist: DistributionSpec,
    pub w_dist: DistributionSpec,
}

impl Default for StimulusSection {
    fn default() -> Self {
        Self {
            x_dist: DistributionSpec::gaussian_outliers(0.01, 50.0),
            w_dist: DistributionSpec::MaxEntropy(FpFormat { n_e: 2, n_m: 1 }),
        }
    }
}

/// Format axes of the ENOB sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub ne_min: u32,
    pub ne_max: u32,
    pub nm_min: u32,
    pub nm_max: u32,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            ne_min: 1,
            ne_max: 6,
            nm_min: 1,
            nm_max: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub c_gate: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub v_dd: f64,
    pub cap_fj: f64,
    pub sqnr_min: f64,
    pub sqnr_max: f64,
    pub sqnr_step: f64,
    pub excess_max: f64,
    pub excess_step: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        let p = EnergyParams::default();
        Self {
            c_gate: p.c_gate,
            k1: p.k1,
            k2: p.k2,
            k3: p.k3,
            v_dd: p.v_dd,
            cap_fj: DEFAULT_CAP_FJ,
            sqnr_min: 10.79,
            sqnr_max: 52.0,
            sqnr_step: 1.0,
            excess_max: 16.0,
            excess_step: 0.5,
        }
    }
}

impl EnergySection {
    pub fn params(&self) -> EnergyParams {
        EnergyParams {
            c_gate: self.c_gate,
            k1: self.k1,
            k2: self.k2,
            k3: self.k3,
            v_dd: self.v_dd,
        }
    }

    pub fn grid(&self) -> Result<MapGrid> {
        MapGrid::stepped(
            (self.sqnr_min, self.sqnr_max, self.sqnr_step),
            (0.0, self.excess_max, self.excess_step),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapsizeSection {
    pub n_m_w: u32,
    pub e_max: u32,
    pub c_u: f64,
    pub c_p1: f64,
    pub stage: StageConvention,
}

impl Default for CapsizeSection {
    fn default() -> Self {
        Self {
            n_m_w: 3,
            e_max: 4,
            c_u: 1.0,
            c_p1: 0.0,
            stage: StageConvention::default(),
        }
    }
}

/// Fully resolved settings of one run; echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// Where results go; not part of the echoed metadata.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub array: ArraySection,
    pub stimulus: StimulusSection,
    pub sweep: SweepSection,
    pub energy: EnergySection,
    pub capsize: CapsizeSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 100_000,
            out: None,
            format: OutputFormat::Csv,
            array: ArraySection::default(),
            stimulus: StimulusSection::default(),
            sweep: SweepSection::default(),
            energy: EnergySection::default(),
            capsize: CapsizeSection::default(),
        }
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::Config(format!("bad key `{key}`")));
        }
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let next = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = next
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{part}` in `{key}` is not a section")))?;
    }
    Err(Error::Config(format!("bad key `{key}`")))
}

impl ExperimentConfig {
    /// Reads an optional file and applies `key=value` overrides on top.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            set_path(&mut table, k, parse_scalar(v))?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
    }

    pub fn gain_range_limit(&self) -> Result<Option<u32>> {
        self.array.gain_range_limit.resolve()
    }

    pub fn arch_config(&self) -> Result<ArchConfig> {
        Ok(ArchConfig {
            arch: self.array.arch,
            granularity: self.array.granularity,
            n_rows: self.array.n_rows,
            n_cols: self.array.n_cols,
            x_fmt: self.array.x_fmt,
            w_fmt: self.array.w_fmt,
            gain_range_limit: self.gain_range_limit()?,
        })
    }

    pub fn array_model(&self) -> Result<ArrayModel> {
        Ok(ArrayModel {
            n_rows: self.array.n_rows,
            n_cols: self.array.n_cols,
            w_fmt: self.array.w_fmt,
            gain_range_limit: self.gain_range_limit()?.unwrap_or(DEFAULT_GAIN_RANGE_LIMIT),
            cap_fj: self.energy.cap_fj,
            params: self.energy.params(),
        })
    }

    /// Static checks. Returns every problem found; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.trials == 0 {
            out.push("trials must be at least 1".to_string());
        }
        match self.arch_config() {
            Ok(cfg) => out.extend(cfg.diagnostics().into_iter().map(|e| e.to_string())),
            Err(e) => out.push(e.to_string()),
        }
        for (name, d, fmt) in [
            ("stimulus.x_dist", &self.stimulus.x_dist, self.array.x_fmt),
            ("stimulus.w_dist", &self.stimulus.w_dist, self.array.w_fmt),
        ] {
            if let Err(e) = d.resolve(fmt).and_then(|d| d.validate()) {
                out.push(format!("{name}: {e}"));
            }
        }
        let s = &self.sweep;
        if s.ne_min > s.ne_max || s.nm_min > s.nm_max {
            out.push(format!(
                "sweep ranges are empty: ne {}..={}, nm {}..={}",
                s.ne_min, s.ne_max, s.nm_min, s.nm_max
            ));
        } else if let Err(e) = FpFormat::new(s.ne_max, s.nm_max) {
            out.push(format!("sweep: widest format is {e}"));
        }
        if let Err(e) = self.energy.params().validate() {
            out.push(e.to_string());
        }
        if !(self.energy.cap_fj > 0.0) {
            out.push("energy.cap_fj must be positive".to_string());
        }
        if let Err(e) = self.energy.grid() {
            out.push(format!("energy grid: {e}"));
        }
        let c = &self.capsize;
        if let Err(e) = size_coupling_caps_with(c.n_m_w, c.e_max, c.c_u, c.c_p1, c.stage) {
            out.push(format!("capsize: {e}"));
        }
        out
    }
}
