//! `grcim` command-line driver.
//!
//! Settings come from defaults, then `--config <file>`, then `--set key=value`
//! pairs, then the dedicated flags. Run `grcim validate` to see the resolved
//! configuration.
//!
//! In `energy-map` output, `dr_bits` and `mantissa_bits` count the implicit
//! leading bit: a format with `n` stored mantissa bits sits at `n + 1`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use grcim::circuit::{effective_gain, size_coupling_caps_with};
use grcim::config::{ExperimentConfig, OutputFormat};
use grcim::figures::{enob_sweep, map_rows, named_breakdowns, run_figure, sqnr_report, FIGURES};
use grcim::formats::decode;
use grcim::mac::{ideal_dot, quantize_all, simulate};
use grcim::output::{emit, json_bytes, table_bytes, Meta};
use grcim::stimulus::sample;
use grcim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "grcim",
    version,
    about = "Design-space sweeps for gain-ranging compute-in-memory MACs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo trials per point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output file or directory; stdout when omitted (figures default to `out/`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// TOML file with dotted keys, e.g. `array.n_rows = 32`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set stimulus.x_dist=uniform`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Default)]
struct ArrayFlags {
    /// `conventional` or `gain-ranging`.
    #[arg(long)]
    arch: Option<String>,
    /// `unit`, `row` or `int-weights`.
    #[arg(long)]
    granularity: Option<String>,
    #[arg(long)]
    rows: Option<usize>,
    /// Input format, e.g. `E3M2`.
    #[arg(long)]
    x_fmt: Option<String>,
    #[arg(long)]
    w_fmt: Option<String>,
    /// Input distribution, e.g. `gauss-outliers:eps=0.01,k=50`.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    w_dist: Option<String>,
    /// Maximum coupling span in bits, or `none`.
    #[arg(long)]
    limit: Option<String>,
}

impl ArrayFlags {
    fn overrides(&self) -> Vec<(String, String)> {
        [
            ("array.arch", &self.arch),
            ("array.granularity", &self.granularity),
            ("array.x_fmt", &self.x_fmt),
            ("array.w_fmt", &self.w_fmt),
            ("stimulus.x_dist", &self.dist),
            ("stimulus.w_dist", &self.w_dist),
            ("array.gain_range_limit", &self.limit),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), quote(k, v))))
        .chain(self.rows.map(|r| ("array.n_rows".to_string(), r.to_string())))
        .collect()
    }
}

/// String-valued keys must reach the TOML layer as strings.
fn quote(key: &str, v: &str) -> String {
    if key == "array.gain_range_limit" && v.parse::<u32>().is_ok() {
        v.to_string()
    } else {
        format!("{v:?}")
    }
}

#[derive(Subcommand)]
enum Command {
    /// Required ADC ENOB over a grid of input formats.
    EnobSweep {
        #[command(flatten)]
        array: ArrayFlags,
        /// Exponent widths, `lo..hi` inclusive.
        #[arg(long)]
        ne: Option<String>,
        /// Stored mantissa widths, `lo..hi` inclusive.
        #[arg(long)]
        nm: Option<String>,
    },
    /// Energy per operation over precision and dynamic range.
    EnergyMap {
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        w_fmt: Option<String>,
    },
    /// Per-component energy for FP4, FP6 and FP8 inputs (JSON).
    EnergyBreakdown,
    /// Output SQNR and ENOB for one configuration.
    Sqnr {
        #[command(flatten)]
        array: ArrayFlags,
    },
    /// Coupling capacitor sizes and their verified gains (JSON).
    Capsize {
        #[arg(long)]
        n_m_w: Option<u32>,
        #[arg(long)]
        e_max: Option<u32>,
        #[arg(long)]
        c_u: Option<f64>,
        #[arg(long)]
        c_p1: Option<f64>,
        /// `extended` or `mantissa` stage capacitance.
        #[arg(long)]
        stage: Option<String>,
    },
    /// One seeded dot product, fully traced (JSON).
    MacTrace {
        #[command(flatten)]
        array: ArrayFlags,
    },
    /// Reproduces a figure into the output directory.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        name: String,
    },
    /// Checks the resolved configuration and prints it.
    Validate,
}

fn parse_range(key: &str, s: &str) -> Result<Vec<(String, String)>> {
    let (lo, hi) = s.split_once("..").unwrap_or((s, s));
    let hi = hi.trim_start_matches('=');
    let bad = || Error::Config(format!("bad range `{s}` for --{key}"));
    let lo: u32 = lo.parse().map_err(|_| bad())?;
    let hi: u32 = hi.parse().map_err(|_| bad())?;
    Ok(vec![
        (format!("sweep.{key}_min"), lo.to_string()),
        (format!("sweep.{key}_max"), hi.to_string()),
    ])
}

fn overrides(cli: &Cli) -> Result<Vec<(String, String)>> {
    let mut out = cli
        .global
        .set
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    match &cli.command {
        Command::EnobSweep { array, ne, nm } => {
            out.extend(array.overrides());
            if let Some(r) = ne {
                out.extend(parse_range("ne", r)?);
            }
            if let Some(r) = nm {
                out.extend(parse_range("nm", r)?);
            }
        }
        Command::Sqnr { array } | Command::MacTrace { array } => out.extend(array.overrides()),
        Command::EnergyMap { rows, w_fmt } => {
            out.extend(rows.map(|r| ("array.n_rows".to_string(), r.to_string())));
            out.extend(w_fmt.as_ref().map(|w| ("array.w_fmt".to_string(), format!("{w:?}"))));
        }
        Command::Capsize {
            n_m_w,
            e_max,
            c_u,
            c_p1,
            stage,
        } => {
            out.extend(n_m_w.map(|v| ("capsize.n_m_w".to_string(), v.to_string())));
            out.extend(e_max.map(|v| ("capsize.e_max".to_string(), v.to_string())));
            out.extend(c_u.map(|v| ("capsize.c_u".to_string(), format!("{v:?}"))));
            out.extend(c_p1.map(|v| ("capsize.c_p1".to_string(), format!("{v:?}"))));
            out.extend(stage.as_ref().map(|v| ("capsize.stage".to_string(), format!("{v:?}"))));
        }
        Command::EnergyBreakdown | Command::Figure { .. } | Command::Validate => {}
    }
    let g = &cli.global;
    out.extend(g.seed.map(|v| ("seed".to_string(), v.to_string())));
    out.extend(g.trials.map(|v| ("trials".to_string(), v.to_string())));
    out.extend(g.format.map(|f| ("format".to_string(), format!("{:?}", f.extension()))));
    Ok(out)
}

#[derive(Serialize)]
struct CapRow {
    e_j: u32,
    c_e: Option<f64>,
    direct: bool,
    gain: f64,
    ideal: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct Trace {
    x: Vec<f64>,
    w: Vec<f64>,
    xq: Vec<f64>,
    wq: Vec<f64>,
    reference: f64,
    trace: grcim::MacTrace,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = ExperimentConfig::load(cli.global.config.as_deref(), &overrides(&cli)?)?;
    cfg.out = cli.global.out.clone();
    let diags = cfg.validate();
    if let Command::Validate = cli.command {
        let text = toml::to_string(&cfg).map_err(|e| Error::Config(e.to_string()))?;
        print!("{text}");
        if diags.is_empty() {
            eprintln!("configuration is valid");
            return Ok(());
        }
    }
    if !diags.is_empty() {
        return Err(Error::Config(diags.join("; ")));
    }
    let out = cfg.out.as_deref();
    let name = |stem: &str, f: OutputFormat| format!("{stem}.{}", f.extension());
    match &cli.command {
        Command::EnobSweep { .. } => {
            let rows = enob_sweep(&cfg)?;
            let meta = Meta::new("enob-sweep", &cfg);
            emit(
                out,
                &name("enob_sweep", cfg.format),
                &table_bytes(cfg.format, &meta, &rows)?,
            )?;
        }
        Command::EnergyMap { .. } => {
            let rows = map_rows(&cfg)?;
            let meta = Meta::new("energy-map", &cfg);
            emit(
                out,
                &name("energy_map", cfg.format),
                &table_bytes(cfg.format, &meta, &rows)?,
            )?;
        }
        Command::EnergyBreakdown => {
            let b = named_breakdowns(&cfg.array_model()?)?;
            let meta = Meta::new("energy-breakdown", &cfg);
            emit(out, "energy_breakdown.json", &json_bytes(&meta, &b)?)?;
        }
        Command::Sqnr { .. } => {
            let r = sqnr_report(&cfg)?;
            let meta = Meta::new("sqnr", &cfg);
            emit(out, &name("sqnr", cfg.format), &table_bytes(cfg.format, &meta, &[r])?)?;
        }
        Command::Capsize { .. } => {
            let c = &cfg.capsize;
            let net = size_coupling_caps_with(c.n_m_w, c.e_max, c.c_u, c.c_p1, c.stage)?;
            let rows = (0..=net.e_max)
                .map(|e| {
                    let gain = effective_gain(&net, e)?;
                    let ideal = (e as f64 - net.e_max as f64).exp2();
                    Ok(CapRow {
                        e_j: e,
                        c_e: net.c_e[e as usize].is_finite().then_some(net.c_e[e as usize]),
                        direct: net.is_direct(e),
                        gain,
                        ideal,
                        rel_error: (gain / ideal - 1.0).abs(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let meta = Meta::new("capsize", &cfg);
            emit(out, "capsize.json", &json_bytes(&meta, &rows)?)?;
        }
        Command::MacTrace { .. } => {
            let arch = cfg.arch_config()?;
            let n = arch.n_rows;
            let xd = cfg.stimulus.x_dist.resolve(arch.x_fmt)?;
            let wd = cfg.stimulus.w_dist.resolve(arch.w_fmt)?;
            let x: Vec<f64> = sample(&xd, n, grcim::rng::mix(cfg.seed, 1))?
                .iter()
                .map(|s| s.value)
                .collect();
            let w: Vec<f64> = sample(&wd, n, grcim::rng::mix(cfg.seed, 2))?
                .iter()
                .map(|s| s.value)
                .collect();
            let xq = quantize_all(&x, arch.x_fmt)?;
            let wq = quantize_all(&w, arch.w_fmt)?;
            let xv: Vec<f64> = xq.iter().map(|q| decode(*q, arch.x_fmt)).collect();
            let wv: Vec<f64> = wq.iter().map(|q| decode(*q, arch.w_fmt)).collect();
            let trace = Trace {
                reference: ideal_dot(&xv, &wv)?,
                trace: simulate(&xq, &wq, &arch)?,
                x,
                w,
                xq: xv,
                wq: wv,
            };
            let meta = Meta::new("mac-trace", &cfg);
            emit(out, "mac_trace.json", &json_bytes(&meta, &trace)?)?;
        }
        Command::Figure { name } => {
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            for p in run_figure(name, &cfg, &dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Validate => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
