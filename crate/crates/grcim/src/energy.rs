//! Array energy accounting and the dynamic-range by precision energy map.
//!
//! Energies are in fJ (fF times V^2). Per-operation figures divide one
//! matrix-vector multiply by `N_R * N_C * 2`.
//!
//! Design points are parameterized by precision `sqnr_db` and dynamic range
//! `dr_bits`. A precision maps to `n_m = (sqnr - 10.79) / 6.02` stored
//! mantissa bits; the minimum dynamic range (the INT line) is `n_m + 1`
//! bits, and `dr_bits - (n_m + 1)` is the excess range a format adds through
//! its exponent, `E_max - 1` for `E<ne>M<nm>`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adcspec::worst_case_signal_power;
use crate::error::{Error, Result};
use crate::formats::{format_sqnr_db, mantissa_for_sqnr_db, FpFormat};
use crate::mac::{Arch, ArchConfig, Granularity, DEFAULT_GAIN_RANGE_LIMIT};

/// Practical upper limit on energy per operation.
pub const DEFAULT_CAP_FJ: f64 = 100.0;
pub const OPS_PER_MAC: u32 = 2;
const DB_PER_BIT: f64 = 6.020_599_913_279_624;

/// Technology constants. Capacitances in fF except `k2` in aF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    pub c_gate: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub v_dd: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            c_gate: 0.7,
            k1: 100.0,
            k2: 1.0,
            k3: 50.0,
            v_dd: 0.9,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c_gate, self.k1, self.k2, self.k3, self.v_dd];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config(format!("energy parameters must be positive: {self:?}")))
        }
    }

    fn v2(&self) -> f64 {
        self.v_dd * self.v_dd
    }
}

/// One ADC conversion.
pub fn adc_energy(enob: f64, p: &EnergyParams) -> f64 {
    (p.k1 * enob + p.k2 * 1e-3 * 4f64.powf(enob)) * p.v2()
}

/// Resolution where the linear and exponential ADC terms are equal.
pub fn adc_crossover_bits(p: &EnergyParams) -> f64 {
    let f = |n: f64| p.k1 * n - p.k2 * 1e-3 * 4f64.powf(n);
    let (mut lo, mut hi) = (1.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One DAC conversion.
pub fn dac_energy(res: f64, p: &EnergyParams) -> f64 {
    p.k3 * res * p.v2()
}

/// Cell switching for a whole array in one MVM.
pub fn cell_switch_energy(n_sw: f64, n_r: usize, n_c: usize, p: &EnergyParams) -> f64 {
    0.5 * p.c_gate * p.v2() * n_sw * (n_r * n_c) as f64
}

pub fn full_adder_energy(p: &EnergyParams) -> f64 {
    6.0 * p.c_gate * p.v2()
}

/// Full adders in a binary tree summing `n` operands of `width` bits; each
/// level adds one bit of width.
pub fn adder_tree_fa_count(n: usize, width: u32) -> u64 {
    let (mut n, mut w, mut count) = (n as u64, width as u64, 0u64);
    while n > 1 {
        let pairs = n / 2;
        count += pairs * w;
        n -= pairs;
        w += 1;
    }
    count
}

pub fn adder_tree_energy(n: usize, width: u32, p: &EnergyParams) -> f64 {
    full_adder_energy(p) * adder_tree_fa_count(n, width) as f64
}

/// Array multiplier with operand widths `a` and `b` (`a = b = N` gives the
/// square N-bit case).
pub fn multiplier_energy(a: f64, b: f64, p: &EnergyParams) -> f64 {
    (1.5 * p.c_gate * p.v2() + full_adder_energy(p)) * a * b
}

pub fn decoder_energy(n_in: f64, n_out: f64, p: &EnergyParams) -> f64 {
    (0.5 * n_in + n_out + 1.0) * p.c_gate * p.v2()
}

/// Per-operation energy ledger.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub adc: f64,
    pub dac: f64,
    pub cell_switching: f64,
    pub adder_trees: f64,
    pub unit_adders: f64,
    pub multipliers: f64,
    pub decoders: f64,
    pub total: f64,
    pub ops_per_mac: u32,
}

impl EnergyBreakdown {
    pub fn logic(&self) -> f64 {
        self.adder_trees + self.unit_adders + self.multipliers + self.decoders
    }

    /// Slices in a fixed order, for pie charts.
    pub fn slices(&self) -> [(&'static str, f64); 7] {
        [
            ("adc", self.adc),
            ("dac", self.dac),
            ("cell_switching", self.cell_switching),
            ("adder_trees", self.adder_trees),
            ("unit_adders", self.unit_adders),
            ("multipliers", self.multipliers),
            ("decoders", self.decoders),
        ]
    }
}

/// Why a design point is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Infeasibility {
    EnergyCap,
    GainRangeLimit,
    NonIntInputs,
}

impl Infeasibility {
    pub fn label(&self) -> &'static str {
        match self {
            Infeasibility::EnergyCap => "energy-cap",
            Infeasibility::GainRangeLimit => "gain-range-limit",
            Infeasibility::NonIntInputs => "inputs-not-int",
        }
    }
}

/// A dimensioned configuration on the energy map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub dr_bits: f64,
    pub sqnr_db: f64,
    pub arch: Arch,
    pub granularity: Option<Granularity>,
    pub enob: f64,
    pub dac_res: f64,
    pub feasible: bool,
    pub reason: Option<Infeasibility>,
}

impl DesignPoint {
    pub fn mantissa_bits(&self) -> f64 {
        mantissa_for_sqnr_db(self.sqnr_db)
    }

    pub fn min_dr_bits(&self) -> f64 {
        self.mantissa_bits() + 1.0
    }

    pub fn excess_bits(&self) -> f64 {
        (self.dr_bits - self.min_dr_bits()).max(0.0)
    }

    /// Exponent bits a format needs to cover the excess range.
    pub fn input_exponent_bits(&self) -> f64 {
        (self.excess_bits() + 2.0).log2().ceil().max(1.0)
    }

    fn reject(&mut self, why: Infeasibility) {
        if self.feasible {
            self.feasible = false;
            self.reason = Some(why);
        }
    }
}

/// Array-level model inputs shared by every design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayModel {
    pub n_rows: usize,
    pub n_cols: usize,
    pub w_fmt: FpFormat,
    pub gain_range_limit: u32,
    pub cap_fj: f64,
    pub params: EnergyParams,
}

impl Default for ArrayModel {
    fn default() -> Self {
        Self {
            n_rows: 32,
            n_cols: 32,
            w_fmt: FpFormat { n_e: 2, n_m: 1 },
            gain_range_limit: DEFAULT_GAIN_RANGE_LIMIT,
            cap_fj: DEFAULT_CAP_FJ,
            params: EnergyParams::default(),
        }
    }
}

impl ArrayModel {
    fn one_hot_width(&self) -> u32 {
        self.gain_range_limit + 1
    }

    fn exp_sum_width(&self) -> f64 {
        self.one_hot_width() as f64 + (self.n_rows as f64).log2().ceil()
    }

    fn span(&self, point: &DesignPoint) -> f64 {
        let w_span = self.w_fmt.exponent_span() as f64;
        match (point.arch, point.granularity) {
            (Arch::Conventional, _) | (_, None) => 0.0,
            (_, Some(Granularity::Unit)) => point.excess_bits() + w_span,
            (_, Some(Granularity::Row)) => point.excess_bits(),
            (_, Some(Granularity::IntWeights)) => w_span,
        }
    }

    /// Switched bit-lines per cell.
    fn n_sw(&self, point: &DesignPoint) -> f64 {
        let aligned = (self.w_fmt.e_max().max(0) as u32 + self.w_fmt.n_m) as f64;
        let mantissa = self.w_fmt.n_m as f64 + if self.w_fmt.is_int() { 0.0 } else { 1.0 };
        match (point.arch, point.granularity) {
            (Arch::Conventional, _) | (_, None) => aligned,
            (_, Some(Granularity::Row)) => aligned + 1.0,
            (_, Some(_)) => mantissa + 1.0,
        }
    }
}

/// Worst-case shrinkage of each architecture, in bits, relative to a
/// full-scale signal: `ENOB = (SQNR + 6) / 6.02 + shrinkage + range growth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensioning {
    pub conventional: f64,
    pub unit: f64,
    pub row: f64,
    pub int_weights: f64,
}

/// Fine INT input used to measure shrinkage on the INT line.
const REFERENCE_INPUT: FpFormat = FpFormat { n_e: 0, n_m: 10 };

impl Dimensioning {
    /// Measures the shrinkage terms by Monte Carlo for the model's weights.
    pub fn measure(model: &ArrayModel) -> Result<Self> {
        let shrink = |cfg: ArchConfig| -> Result<f64> {
            let p = worst_case_signal_power(&cfg.with_rows(model.n_rows))?;
            Ok(-0.5 * (3.0 * p).log2())
        };
        let x = REFERENCE_INPUT;
        let w = model.w_fmt;
        Ok(Self {
            conventional: shrink(ArchConfig::conventional(x, w))?,
            unit: shrink(ArchConfig::gain_ranging(Granularity::Unit, x, w))?,
            row: shrink(ArchConfig::gain_ranging(Granularity::Row, x, w))?,
            int_weights: shrink(ArchConfig::gain_ranging(Granularity::IntWeights, x, w))?,
        })
    }

    pub fn shrinkage(&self, arch: Arch, granularity: Option<Granularity>) -> f64 {
        match (arch, granularity) {
            (Arch::Conventional, _) | (_, None) => self.conventional,
            (_, Some(Granularity::Unit)) => self.unit,
            (_, Some(Granularity::Row)) => self.row,
            (_, Some(Granularity::IntWeights)) => self.int_weights,
        }
    }
}

/// Dimensions ENOB and DAC resolution of a point and applies the range
/// checks. The energy cap is applied by [`evaluate`].
pub fn dimension(
    dr_bits: f64,
    sqnr_db: f64,
    arch: Arch,
    granularity: Option<Granularity>,
    model: &ArrayModel,
    dims: &Dimensioning,
) -> DesignPoint {
    let mut point = DesignPoint {
        dr_bits,
        sqnr_db,
        arch,
        granularity: if arch == Arch::Conventional { None } else { granularity },
        enob: 0.0,
        dac_res: 0.0,
        feasible: true,
        reason: None,
    };
    let base = (sqnr_db + 6.0) / DB_PER_BIT + dims.shrinkage(arch, point.granularity);
    let mantissa = point.mantissa_bits() + 1.0;
    match arch {
        Arch::Conventional => {
            point.enob = base + point.excess_bits();
            point.dac_res = mantissa + point.excess_bits();
        }
        Arch::GainRanging => {
            point.enob = base;
            point.dac_res = mantissa;
            if granularity == Some(Granularity::IntWeights) && point.excess_bits() > 1e-9 {
                point.reject(Infeasibility::NonIntInputs);
            }
            if model.span(&point) > model.gain_range_limit as f64 + 1e-9 {
                point.reject(Infeasibility::GainRangeLimit);
            }
        }
    }
    point
}

/// Design point of a named input format, dimensioned with the Monte-Carlo
/// worst case on that exact format.
pub fn dimension_format(
    x_fmt: FpFormat,
    arch: Arch,
    granularity: Option<Granularity>,
    model: &ArrayModel,
) -> Result<DesignPoint> {
    let excess = if x_fmt.is_int() {
        0.0
    } else {
        (x_fmt.e_max() - 1) as f64
    };
    let sqnr_db = format_sqnr_db(x_fmt);
    let dr_bits = mantissa_for_sqnr_db(sqnr_db) + 1.0 + excess;
    // Int-weights on a floating-point input is rejected below; its ENOB is
    // reported as if the weights were normalized per cell.
    let gran = match granularity {
        Some(Granularity::IntWeights) if !x_fmt.is_int() => Granularity::Unit,
        g => g.unwrap_or(Granularity::Unit),
    };
    let cfg = match arch {
        Arch::Conventional => ArchConfig::conventional(x_fmt, model.w_fmt),
        Arch::GainRanging => ArchConfig::gain_ranging(gran, x_fmt, model.w_fmt),
    }
    .with_rows(model.n_rows);
    let p = worst_case_signal_power(&cfg)?;
    let shrink = -0.5 * (3.0 * p).log2();
    let dims = Dimensioning {
        conventional: shrink,
        unit: shrink,
        row: shrink,
        int_weights: shrink,
    };
    let mut point = dimension(dr_bits, sqnr_db, arch, granularity, model, &dims);
    if arch == Arch::Conventional {
        // The Monte-Carlo bound already contains the format's range growth.
        point.enob -= excess;
    }
    Ok(point)
}

/// Energy per operation of a dimensioned point.
pub fn cim_energy_per_op(point: &DesignPoint, model: &ArrayModel) -> EnergyBreakdown {
    let p = &model.params;
    let (nr, nc) = (model.n_rows, model.n_cols);
    let cells = (nr * nc) as f64;
    let w_exp_bits = model.w_fmt.n_e as f64;
    let x_exp_bits = point.input_exponent_bits();
    let one_hot = model.one_hot_width();
    let mult = multiplier_energy(point.enob.ceil(), model.exp_sum_width(), p);

    let mut b = EnergyBreakdown {
        adc: nc as f64 * adc_energy(point.enob, p),
        dac: nr as f64 * dac_energy(point.dac_res, p),
        cell_switching: cell_switch_energy(model.n_sw(point), nr, nc, p),
        ops_per_mac: OPS_PER_MAC,
        ..Default::default()
    };
    match (point.arch, point.granularity) {
        (Arch::Conventional, _) | (_, None) => {}
        (_, Some(Granularity::Unit)) => {
            let sum_bits = x_exp_bits.max(w_exp_bits);
            b.unit_adders = cells * full_adder_energy(p) * sum_bits;
            b.decoders = cells * decoder_energy(sum_bits + 1.0, one_hot as f64, p);
            b.adder_trees = nc as f64 * adder_tree_energy(nr, one_hot, p);
            b.multipliers = nc as f64 * mult;
        }
        (_, Some(Granularity::Row)) => {
            b.decoders = nr as f64 * decoder_energy(x_exp_bits, one_hot as f64, p);
            b.adder_trees = adder_tree_energy(nr, one_hot, p);
            b.multipliers = nc as f64 * mult;
        }
        (_, Some(Granularity::IntWeights)) => {
            b.decoders = cells * decoder_energy(w_exp_bits, one_hot as f64, p);
            b.multipliers = nc as f64 * mult;
        }
    }
    let ops = cells * OPS_PER_MAC as f64;
    for v in [
        &mut b.adc,
        &mut b.dac,
        &mut b.cell_switching,
        &mut b.adder_trees,
        &mut b.unit_adders,
        &mut b.multipliers,
        &mut b.decoders,
    ] {
        *v /= ops;
    }
    b.total = b.adc + b.dac + b.cell_switching + b.logic();
    b
}

/// Energy plus the cap check.
pub fn evaluate(mut point: DesignPoint, model: &ArrayModel) -> (DesignPoint, EnergyBreakdown) {
    let b = cim_energy_per_op(&point, model);
    if b.total > model.cap_fj {
        point.reject(Infeasibility::EnergyCap);
    }
    (point, b)
}

/// Every architecture/granularity option at one grid position.
pub fn options() -> [(Arch, Option<Granularity>); 4] {
    [
        (Arch::Conventional, None),
        (Arch::GainRanging, Some(Granularity::Unit)),
        (Arch::GainRanging, Some(Granularity::Row)),
        (Arch::GainRanging, Some(Granularity::IntWeights)),
    ]
}

/// Grid over precision and excess dynamic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapGrid {
    pub sqnr_db: Vec<f64>,
    /// Excess range above the INT line, in bits.
    pub excess_bits: Vec<f64>,
}

impl MapGrid {
    pub fn stepped(sqnr: (f64, f64, f64), excess: (f64, f64, f64)) -> Result<Self> {
        let steps = |(lo, hi, step): (f64, f64, f64)| -> Result<Vec<f64>> {
            if !(step > 0.0) || hi < lo {
                return Err(Error::Config(format!("bad range {lo}..{hi} step {step}")));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| lo + i as f64 * step).collect())
        };
        let grid = Self {
            sqnr_db: steps(sqnr)?,
            excess_bits: steps(excess)?,
        };
        if grid.sqnr_db.is_empty() || grid.excess_bits.is_empty() {
            return Err(Error::Empty);
        }
        Ok(grid)
    }
}

impl Default for MapGrid {
    fn default() -> Self {
        Self::stepped((10.79, 52.0, 1.0), (0.0, 16.0, 0.5)).expect("static grid")
    }
}

/// One row of the energy map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub point: DesignPoint,
    pub energy: EnergyBreakdown,
    /// Cheapest feasible option at this grid position.
    pub optimal: bool,
}

/// Evaluates every option at every grid position.
pub fn energy_map(grid: &MapGrid, model: &ArrayModel, dims: &Dimensioning) -> Vec<MapCell> {
    let positions: Vec<(f64, f64)> = grid
        .sqnr_db
        .iter()
        .flat_map(|s| grid.excess_bits.iter().map(move |e| (*s, *e)))
        .collect();
    positions
        .par_iter()
        .flat_map_iter(|&(s, e)| {
            let dr = mantissa_for_sqnr_db(s) + 1.0 + e;
            let mut cells: Vec<MapCell> = options()
                .iter()
                .map(|&(arch, gran)| {
                    let (point, energy) = evaluate(dimension(dr, s, arch, gran, model, dims), model);
                    MapCell {
                        point,
                        energy,
                        optimal: false,
                    }
                })
                .collect();
            let best = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.point.feasible)
                .min_by(|a, b| a.1.energy.total.total_cmp(&b.1.energy.total))
                .map(|(i, _)| i);
            if let Some(i) = best {
                cells[i].optimal = true;
            }
            cells
        })
        .collect()
}

/// Cheapest feasible gain-ranging option at a position.
pub fn best_gain_ranging(
    dr_bits: f64,
    sqnr_db: f64,
    model: &ArrayModel,
    dims: &Dimensioning,
) -> Option<(DesignPoint, EnergyBreakdown)> {
    Granularity::ALL
        .iter()
        .map(|g| {
            evaluate(
                dimension(dr_bits, sqnr_db, Arch::GainRanging, Some(*g), model, dims),
                model,
            )
        })
        .filter(|(p, _)| p.feasible)
        .min_by(|a, b| a.1.total.total_cmp(&b.1.total))
}

/// Largest excess range (bits above the INT line) reachable at `sqnr_db`
/// within `budget_fj`, scanning in `step` increments. `None` if even the INT
/// line is out of budget.
pub fn max_excess_within(
    arch: Arch,
    sqnr_db: f64,
    budget_fj: f64,
    model: &ArrayModel,
    dims: &Dimensioning,
    step: f64,
) -> Option<f64> {
    let base = mantissa_for_sqnr_db(sqnr_db) + 1.0;
    let relaxed = ArrayModel {
        cap_fj: f64::INFINITY,
        ..*model
    };
    let fits = |excess: f64| -> bool {
        let dr = base + excess;
        match arch {
            Arch::Conventional => {
                let (p, b) = evaluate(dimension(dr, sqnr_db, arch, None, &relaxed, dims), &relaxed);
                p.feasible && b.total <= budget_fj
            }
            Arch::GainRanging => {
                best_gain_ranging(dr, sqnr_db, &relaxed, dims).is_some_and(|(_, b)| b.total <= budget_fj)
            }
        }
    };
    let n = (32.0 / step).ceil() as usize;
    (0..=n)
        .map(|i| i as f64 * step)
        .filter(|e| fits(*e))
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))))
}

/// Summary numbers of the energy study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Headlines {
    pub fp4_conventional_fj: f64,
    pub fp4_gain_ranging_fj: f64,
    pub fp4_gain_ranging_granularity: Option<Granularity>,
    pub fp4_ratio: f64,
    pub fp6_gain_ranging_fj: f64,
    pub fp6_gain_ranging_granularity: Option<Granularity>,
    pub fp6_conventional_fj: f64,
    pub fp6_conventional_feasible: bool,
    /// Conventional INT-line energy at the edge precision; the iso-energy level.
    pub edge_iso_energy_fj: f64,
    pub edge_dr_advantage_bits: Option<f64>,
    pub cap_dr_advantage_bits: Option<f64>,
    pub cap_conventional_max_excess: Option<f64>,
    pub cap_gain_ranging_max_excess: Option<f64>,
    /// Stored mantissa bits where unit granularity becomes cheaper than row
    /// granularity along the INT line.
    pub unit_row_crossover_mantissa: Option<f64>,
}

pub const EDGE_SQNR_DB: f64 = 35.0;
pub const HIGH_SQNR_DB: f64 = 47.0;

type Evaluated = (DesignPoint, EnergyBreakdown);

/// Best feasible-by-range GR option at a named format, ignoring the cap.
fn named_format(x_fmt: FpFormat, model: &ArrayModel) -> Result<(Evaluated, Option<Evaluated>)> {
    let conv = evaluate(dimension_format(x_fmt, Arch::Conventional, None, model)?, model);
    let mut best: Option<(DesignPoint, EnergyBreakdown)> = None;
    for g in Granularity::ALL {
        let r = evaluate(dimension_format(x_fmt, Arch::GainRanging, Some(g), model)?, model);
        let usable = r.0.feasible || r.0.reason == Some(Infeasibility::EnergyCap);
        if usable && best.as_ref().is_none_or(|b| r.1.total < b.1.total) {
            best = Some(r);
        }
    }
    Ok((conv, best))
}

pub fn headlines(model: &ArrayModel, dims: &Dimensioning) -> Result<Headlines> {
    let fp4: FpFormat = "E2M1".parse()?;
    let fp6: FpFormat = "E3M2".parse()?;
    let (c4, g4) = named_format(fp4, model)?;
    let (c6, g6) = named_format(fp6, model)?;
    let g4 = g4.ok_or_else(|| Error::Unsatisfiable("no gain-ranging option for E2M1".into()))?;
    let g6 = g6.ok_or_else(|| Error::Unsatisfiable("no gain-ranging option for E3M2".into()))?;

    let step = 0.01;
    let relaxed = ArrayModel {
        cap_fj: f64::INFINITY,
        ..*model
    };
    let edge_int = mantissa_for_sqnr_db(EDGE_SQNR_DB) + 1.0;
    let iso = evaluate(
        dimension(edge_int, EDGE_SQNR_DB, Arch::Conventional, None, &relaxed, dims),
        &relaxed,
    )
    .1
    .total;
    let adv = |s: f64, budget: f64| {
        let c = max_excess_within(Arch::Conventional, s, budget, model, dims, step);
        let g = max_excess_within(Arch::GainRanging, s, budget, model, dims, step);
        (c, g, c.zip(g).map(|(c, g)| g - c))
    };
    let (_, _, edge_adv) = adv(EDGE_SQNR_DB, iso);
    let (cap_c, cap_g, cap_adv) = adv(HIGH_SQNR_DB, model.cap_fj);

    let crossover = {
        let total = |s: f64, g| {
            let dr = mantissa_for_sqnr_db(s) + 1.0;
            evaluate(dimension(dr, s, Arch::GainRanging, Some(g), &relaxed, dims), &relaxed)
                .1
                .total
        };
        (0..=6000)
            .map(|i| 10.79 + i as f64 * 0.01)
            .find(|s| total(*s, Granularity::Unit) < total(*s, Granularity::Row))
            .map(mantissa_for_sqnr_db)
    };

    Ok(Headlines {
        fp4_conventional_fj: c4.1.total,
        fp4_gain_ranging_fj: g4.1.total,
        fp4_gain_ranging_granularity: g4.0.granularity,
        fp4_ratio: g4.1.total / c4.1.total,
        fp6_gain_ranging_fj: g6.1.total,
        fp6_gain_ranging_granularity: g6.0.granularity,
        fp6_conventional_fj: c6.1.total,
        fp6_conventional_feasible: c6.0.feasible,
        edge_iso_energy_fj: iso,
        edge_dr_advantage_bits: edge_adv,
        cap_dr_advantage_bits: cap_adv,
        cap_conventional_max_excess: cap_c,
        cap_gain_ranging_max_excess: cap_g,
        unit_row_crossover_mantissa: crossover,
    })
}

/// Breakdown of one named format under every option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatBreakdown {
    pub format: FpFormat,
    pub options: Vec<(DesignPoint, EnergyBreakdown)>,
}

pub fn format_breakdown(x_fmt: FpFormat, model: &ArrayModel) -> Result<FormatBreakdown> {
    let options = options()
        .iter()
        .map(|&(a, g)| dimension_format(x_fmt, a, g, model).map(|p| evaluate(p, model)))
        .collect::<Result<_>>()?;
    Ok(FormatBreakdown { format: x_fmt, options })
}
