//! Sweeps behind the figure reproductions and the sweep subcommands.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::adcspec::{output_sqnr, required_enob, SqnrReport};
use crate::config::ExperimentConfig;
use crate::energy::{
    energy_map, format_breakdown, headlines, ArrayModel, Dimensioning, FormatBreakdown, Headlines, MapCell,
};
use crate::error::{Error, Result};
use crate::formats::{mantissa_for_sqnr_db, FpFormat};
use crate::mac::{Arch, ArchConfig, Granularity};
use crate::output::{csv_bytes, json_bytes, write_file, Meta};
use crate::rng::derive_seed;
use crate::stimulus::DistributionSpec;

pub const FIGURES: [&str; 5] = ["fig3-annotations", "fig4", "fig5", "fig6", "fig7"];

/// Input distributions compared in the ENOB figures.
pub fn figure_distributions() -> [(&'static str, DistributionSpec); 3] {
    [
        ("uniform", DistributionSpec::UNIFORM),
        ("maxent", DistributionSpec::matched_max_entropy()),
        ("gauss-outliers", DistributionSpec::gaussian_outliers(0.01, 50.0)),
    ]
}

fn weight_format() -> FpFormat {
    FpFormat { n_e: 2, n_m: 1 }
}

fn arch_tag(cfg: &ArchConfig) -> String {
    match cfg.arch {
        Arch::Conventional => cfg.arch.label().to_string(),
        Arch::GainRanging => format!("{}:{}", cfg.arch, cfg.granularity),
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Least-squares slope of `y` over `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnobRow {
    pub ne: u32,
    pub nm: u32,
    pub arch: String,
    pub dist: String,
    pub sqnr_global_db: Option<f64>,
    pub sqnr_core_db: Option<f64>,
    pub enob_cont: Option<f64>,
    pub enob_int: Option<u32>,
}

/// ENOB requirement over the configured format grid.
pub fn enob_sweep(cfg: &ExperimentConfig) -> Result<Vec<EnobRow>> {
    let base = cfg.arch_config()?;
    let s = &cfg.sweep;
    let mut formats = Vec::new();
    for ne in s.ne_min..=s.ne_max {
        for nm in s.nm_min..=s.nm_max {
            formats.push(FpFormat::new(ne, nm)?);
        }
    }
    formats
        .iter()
        .map(|&x_fmt| {
            let arch = ArchConfig { x_fmt, ..base };
            let seed = derive_seed(cfg.seed, &[x_fmt.n_e as u64, x_fmt.n_m as u64]);
            let r = required_enob(&arch, &cfg.stimulus.x_dist, &cfg.stimulus.w_dist, cfg.trials, seed);
            let r = match r {
                Ok(r) => Some(r),
                Err(Error::Unsatisfiable(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(EnobRow {
                ne: x_fmt.n_e,
                nm: x_fmt.n_m,
                arch: arch_tag(&arch),
                dist: cfg.stimulus.x_dist.to_string(),
                sqnr_global_db: r.as_ref().map(|r| r.sqnr_global_db),
                sqnr_core_db: r.as_ref().and_then(|r| finite(r.sqnr_core_db)),
                enob_cont: r.as_ref().and_then(|r| r.enob_required_cont),
                enob_int: r.as_ref().and_then(|r| r.enob_required_int),
            })
        })
        .collect()
}

/// Single SQNR/ENOB report for the configured array and stimulus.
pub fn sqnr_report(cfg: &ExperimentConfig) -> Result<SqnrReport> {
    let arch = cfg.arch_config()?;
    match required_enob(&arch, &cfg.stimulus.x_dist, &cfg.stimulus.w_dist, cfg.trials, cfg.seed) {
        Err(Error::Unsatisfiable(_)) => {
            output_sqnr(&arch, &cfg.stimulus.x_dist, &cfg.stimulus.w_dist, cfg.trials, cfg.seed)
        }
        r => r,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig4Row {
    pub ne: u32,
    pub nm: u32,
    pub dist: String,
    pub sqnr_global_db: f64,
    /// Empty when the core rounds to no signal.
    pub sqnr_core_db: Option<f64>,
    pub sqnr_core_measured_db: f64,
    pub core_resolved: bool,
    pub ceiling_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig4Summary {
    pub nm: u32,
    pub global_db_at_ne2: Option<f64>,
    pub core_resolved_at_ne2: Option<bool>,
    pub core_below_ceiling_db_at_ne3: Option<f64>,
    /// Smallest exponent width from which each further exponent bit moves the
    /// core SQNR by at most `PLATEAU_STEP_DB`.
    pub plateau_ne: Option<u32>,
}

pub const PLATEAU_STEP_DB: f64 = 1.0;

/// Input quantization noise versus exponent width, outlier-heavy inputs.
pub fn fig4(trials: usize, seed: u64, nm: u32, ne_max: u32) -> Result<(Vec<Fig4Row>, Fig4Summary)> {
    let dist = DistributionSpec::gaussian_outliers(0.01, 50.0);
    let rows = (1..=ne_max)
        .map(|ne| {
            let x_fmt = FpFormat::new(ne, nm)?;
            let arch = ArchConfig::conventional(x_fmt, weight_format());
            let r = output_sqnr(
                &arch,
                &dist,
                &DistributionSpec::MaxEntropy(weight_format()),
                trials,
                derive_seed(seed, &[ne as u64, nm as u64]),
            )?;
            Ok(Fig4Row {
                ne,
                nm,
                dist: dist.to_string(),
                sqnr_global_db: r.sqnr_global_db,
                sqnr_core_db: finite(r.sqnr_core_db),
                sqnr_core_measured_db: r.sqnr_core_measured_db,
                core_resolved: r.core_resolved,
                ceiling_db: r.ceiling_db,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let at = |ne: u32| rows.iter().find(|r| r.ne == ne);
    let mut plateau_ne = rows.last().filter(|r| r.core_resolved).map(|r| r.ne);
    for pair in rows.windows(2).rev() {
        let step = (pair[1].sqnr_core_measured_db - pair[0].sqnr_core_measured_db).abs();
        if !pair[0].core_resolved || step > PLATEAU_STEP_DB {
            break;
        }
        plateau_ne = Some(pair[0].ne);
    }
    let summary = Fig4Summary {
        nm,
        global_db_at_ne2: at(2).map(|r| r.sqnr_global_db),
        core_resolved_at_ne2: at(2).map(|r| r.core_resolved),
        core_below_ceiling_db_at_ne3: at(3).and_then(|r| r.sqnr_core_db.map(|c| r.ceiling_db - c)),
        plateau_ne,
    };
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub ne: u32,
    pub nm: u32,
    pub dist: String,
    pub sqnr_global_db: f64,
    pub sqnr_core_db: Option<f64>,
    pub enob_conventional: f64,
    pub enob_gain_ranging: f64,
    /// Conventional minus gain-ranging requirement, in bits.
    pub gap_bits: f64,
}

/// Conventional and unit-granularity gain-ranging requirements for one input
/// format and distribution, on common random numbers.
pub fn gap_point(
    x_fmt: FpFormat,
    dist_name: &str,
    dist: &DistributionSpec,
    trials: usize,
    seed: u64,
    n_rows: usize,
) -> Result<GapRow> {
    let w = weight_format();
    let conv = ArchConfig::conventional(x_fmt, w).with_rows(n_rows);
    let gr = ArchConfig::gain_ranging(Granularity::Unit, x_fmt, w)
        .with_rows(n_rows)
        .with_limit(None);
    let wd = DistributionSpec::MaxEntropy(w);
    let c = required_enob(&conv, dist, &wd, trials, seed)?;
    let g = required_enob(&gr, dist, &wd, trials, seed)?;
    let (ec, eg) = (
        c.enob_required_cont.expect("set by required_enob"),
        g.enob_required_cont.expect("set by required_enob"),
    );
    Ok(GapRow {
        ne: x_fmt.n_e,
        nm: x_fmt.n_m,
        dist: dist_name.to_string(),
        sqnr_global_db: c.sqnr_global_db,
        sqnr_core_db: finite(c.sqnr_core_db),
        enob_conventional: ec,
        enob_gain_ranging: eg,
        gap_bits: ec - eg,
    })
}

fn gap_grid(formats: &[FpFormat], trials: usize, seed: u64, n_rows: usize) -> Result<Vec<GapRow>> {
    let dists = figure_distributions();
    let jobs: Vec<(usize, FpFormat)> = (0..dists.len())
        .flat_map(|d| formats.iter().map(move |f| (d, *f)))
        .collect();
    jobs.iter()
        .map(|&(d, f)| {
            let s = derive_seed(seed, &[d as u64, f.n_e as u64, f.n_m as u64]);
            gap_point(f, dists[d].0, &dists[d].1, trials, s, n_rows)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStats {
    pub dist: String,
    pub min_gap_bits: f64,
    pub max_gap_bits: f64,
    pub mean_gap_bits: f64,
    pub max_enob_gain_ranging: f64,
    pub slope_conventional: f64,
    pub slope_gain_ranging: f64,
}

fn gap_stats(rows: &[GapRow], axis: impl Fn(&GapRow) -> f64) -> Vec<GapStats> {
    figure_distributions()
        .iter()
        .map(|(name, _)| {
            let r: Vec<&GapRow> = rows.iter().filter(|r| r.dist == *name).collect();
            let x: Vec<f64> = r.iter().map(|r| axis(r)).collect();
            let gaps: Vec<f64> = r.iter().map(|r| r.gap_bits).collect();
            GapStats {
                dist: name.to_string(),
                min_gap_bits: gaps.iter().copied().fold(f64::INFINITY, f64::min),
                max_gap_bits: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_gap_bits: gaps.iter().sum::<f64>() / gaps.len() as f64,
                max_enob_gain_ranging: r.iter().map(|r| r.enob_gain_ranging).fold(f64::NEG_INFINITY, f64::max),
                slope_conventional: slope(&x, &r.iter().map(|r| r.enob_conventional).collect::<Vec<_>>()),
                slope_gain_ranging: slope(&x, &r.iter().map(|r| r.enob_gain_ranging).collect::<Vec<_>>()),
            }
        })
        .collect()
}

/// Required ENOB versus input exponent width at fixed mantissa width.
pub fn fig5(trials: usize, seed: u64, nm: u32, ne_max: u32) -> Result<(Vec<GapRow>, Vec<GapStats>)> {
    let formats = (1..=ne_max)
        .map(|ne| FpFormat::new(ne, nm))
        .collect::<Result<Vec<_>>>()?;
    let rows = gap_grid(&formats, trials, seed, 32)?;
    let stats = gap_stats(&rows, |r| r.ne as f64);
    Ok((rows, stats))
}

/// Required ENOB versus input mantissa width at fixed exponent width.
pub fn fig6(trials: usize, seed: u64, ne: u32, nm_max: u32) -> Result<(Vec<GapRow>, Vec<GapStats>)> {
    let formats = (1..=nm_max)
        .map(|nm| FpFormat::new(ne, nm))
        .collect::<Result<Vec<_>>>()?;
    let rows = gap_grid(&formats, trials, seed, 32)?;
    let stats = gap_stats(&rows, |r| r.nm as f64);
    Ok((rows, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Row {
    pub arch: String,
    pub signal_power_at_adc: f64,
    pub mean_n_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Summary {
    pub mean_n_eff: f64,
    pub signal_power_gain: f64,
    pub delta_enob_bits: f64,
    pub trials: usize,
}

/// Effective contributor count and signal gain for gaussian operands.
pub fn fig3(trials: usize, seed: u64) -> Result<(Vec<Fig3Row>, Fig3Summary)> {
    let fmt = FpFormat { n_e: 3, n_m: 2 };
    let dist = DistributionSpec::Gaussian { sigma: 0.25, clip: 4.0 };
    let conv = ArchConfig::conventional(fmt, fmt);
    let gr = ArchConfig::gain_ranging(Granularity::Unit, fmt, fmt).with_limit(None);
    let reports = [conv, gr]
        .par_iter()
        .map(|a| output_sqnr(a, &dist, &dist, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Fig3Row> = [conv, gr]
        .iter()
        .zip(&reports)
        .map(|(a, r)| Fig3Row {
            arch: arch_tag(a),
            signal_power_at_adc: r.signal_power_at_adc,
            mean_n_eff: r.mean_n_eff,
        })
        .collect();
    let gain = reports[1].signal_power_at_adc / reports[0].signal_power_at_adc;
    let summary = Fig3Summary {
        mean_n_eff: reports[1].mean_n_eff,
        signal_power_gain: gain,
        delta_enob_bits: 0.5 * gain.log2(),
        trials,
    };
    Ok((rows, summary))
}

/// One energy-map row. `dr_bits` counts the implicit leading bit, so the
/// INT line sits at `mantissa_bits`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapRow {
    pub dr_bits: f64,
    pub sqnr_db: f64,
    pub arch: String,
    pub granularity: String,
    pub enob: f64,
    pub dac_res: f64,
    pub adc_fj: f64,
    pub dac_fj: f64,
    pub logic_fj: f64,
    pub total_fj_per_op: f64,
    pub feasible: bool,
    pub reason: String,
    /// Stored mantissa bits plus the implicit bit.
    pub mantissa_bits: f64,
    pub optimal: bool,
}

impl From<&MapCell> for MapRow {
    fn from(c: &MapCell) -> Self {
        let p = &c.point;
        Self {
            dr_bits: p.dr_bits,
            sqnr_db: p.sqnr_db,
            arch: p.arch.label().to_string(),
            granularity: p.granularity.map_or(String::new(), |g| g.label().to_string()),
            enob: p.enob,
            dac_res: p.dac_res,
            adc_fj: c.energy.adc,
            dac_fj: c.energy.dac,
            logic_fj: c.energy.logic() + c.energy.cell_switching,
            total_fj_per_op: c.energy.total,
            feasible: p.feasible,
            reason: p.reason.map_or(String::new(), |r| r.label().to_string()),
            mantissa_bits: mantissa_for_sqnr_db(p.sqnr_db) + 1.0,
            optimal: c.optimal,
        }
    }
}

pub fn map_rows(cfg: &ExperimentConfig) -> Result<Vec<MapRow>> {
    let model = cfg.array_model()?;
    model.params.validate()?;
    let dims = Dimensioning::measure(&model)?;
    Ok(energy_map(&cfg.energy.grid()?, &model, &dims)
        .iter()
        .map(MapRow::from)
        .collect())
}

pub const NAMED_FORMATS: [(&str, &str); 3] = [("FP4_E2M1", "E2M1"), ("FP6_E3M2", "E3M2"), ("FP8_E4M3", "E4M3")];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedBreakdown {
    pub name: &'static str,
    #[serde(flatten)]
    pub breakdown: FormatBreakdown,
}

pub fn named_breakdowns(model: &ArrayModel) -> Result<Vec<NamedBreakdown>> {
    NAMED_FORMATS
        .iter()
        .map(|(name, f)| {
            Ok(NamedBreakdown {
                name,
                breakdown: format_breakdown(f.parse()?, model)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig7Summary {
    pub dimensioning: Dimensioning,
    pub headlines: Headlines,
}

pub fn fig7(cfg: &ExperimentConfig) -> Result<(Vec<MapRow>, Vec<NamedBreakdown>, Fig7Summary)> {
    let model = cfg.array_model()?;
    model.params.validate()?;
    let dims = Dimensioning::measure(&model)?;
    let rows = energy_map(&cfg.energy.grid()?, &model, &dims)
        .iter()
        .map(MapRow::from)
        .collect();
    let breakdowns = named_breakdowns(&model)?;
    let summary = Fig7Summary {
        dimensioning: dims,
        headlines: headlines(&model, &dims)?,
    };
    Ok((rows, breakdowns, summary))
}

/// Runs a named figure and writes its CSV and JSON summary into `dir`.
pub fn run_figure(name: &str, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let meta = Meta::new(&format!("figure {name}"), cfg);
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let (t, seed) = (cfg.trials, cfg.seed);
    match name {
        "fig3-annotations" => {
            let (rows, s) = fig3(t, seed)?;
            files.push((format!("{name}.csv"), csv_bytes(&meta, &rows)?));
            files.push((format!("{name}_summary.json"), json_bytes(&meta, &s)?));
        }
        "fig4" => {
            let (rows, s) = fig4(t, seed, 2, 6)?;
            files.push((format!("{name}.csv"), csv_bytes(&meta, &rows)?));
            files.push((format!("{name}_summary.json"), json_bytes(&meta, &s)?));
        }
        "fig5" | "fig6" => {
            let (rows, s) = if name == "fig5" {
                fig5(t, seed, 2, 6)?
            } else {
                fig6(t, seed, 3, 6)?
            };
            files.push((format!("{name}.csv"), csv_bytes(&meta, &rows)?));
            files.push((format!("{name}_summary.json"), json_bytes(&meta, &s)?));
        }
        "fig7" => {
            let (rows, b, s) = fig7(cfg)?;
            files.push((format!("{name}.csv"), csv_bytes(&meta, &rows)?));
            files.push((format!("{name}_breakdown.json"), json_bytes(&meta, &b)?));
            files.push((format!("{name}_summary.json"), json_bytes(&meta, &s)?));
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown figure `{name}`; expected one of {}",
                FIGURES.join(", ")
            )))
        }
    }
    files
        .into_iter()
        .map(|(f, bytes)| {
            let p = dir.join(f);
            write_file(&p, &bytes)?;
            Ok(p)
        })
        .collect()
}
