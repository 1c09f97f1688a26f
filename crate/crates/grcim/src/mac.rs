//! Behavioral column dot product for the conventional and gain-ranging MACs.
//!
//! Both models return the analog value seen by the column ADC (`z_analog`,
//! full scale +-1) and the digital result in the averaging convention
//! `sum(x_i * w_i) / N_R`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{decode, pow2, quantize, FpFormat, FpScalar};
use crate::numeric::{sum, CompensatedSum};

/// Default maximum exponent span of the coupling stage.
pub const DEFAULT_GAIN_RANGE_LIMIT: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arch {
    Conventional,
    GainRanging,
}

/// Where exponent bookkeeping happens in a gain-ranging array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    /// Per cell, on `E_x + E_w`.
    Unit,
    /// Per row, on `E_x`; weights stored pre-shifted.
    Row,
    /// Integer inputs, weight exponents only.
    IntWeights,
}

impl Arch {
    pub fn label(&self) -> &'static str {
        match self {
            Arch::Conventional => "conventional",
            Arch::GainRanging => "gain-ranging",
        }
    }
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [Granularity::Unit, Granularity::Row, Granularity::IntWeights];

    pub fn label(&self) -> &'static str {
        match self {
            Granularity::Unit => "unit",
            Granularity::Row => "row",
            Granularity::IntWeights => "int-weights",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Arch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conventional" | "conv" | "int" => Ok(Arch::Conventional),
            "gain-ranging" | "gr" => Ok(Arch::GainRanging),
            _ => Err(Error::Config(format!("unknown architecture `{s}`"))),
        }
    }
}

impl FromStr for Granularity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Granularity::Unit),
            "row" => Ok(Granularity::Row),
            "int-weights" | "int" => Ok(Granularity::IntWeights),
            _ => Err(Error::Config(format!("unknown granularity `{s}`"))),
        }
    }
}

/// Array and number-format configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub arch: Arch,
    /// Ignored by the conventional architecture.
    pub granularity: Granularity,
    pub n_rows: usize,
    pub n_cols: usize,
    pub x_fmt: FpFormat,
    pub w_fmt: FpFormat,
    /// Maximum exponent span of the coupling stage; `None` leaves it unchecked.
    pub gain_range_limit: Option<u32>,
}

impl ArchConfig {
    pub fn conventional(x_fmt: FpFormat, w_fmt: FpFormat) -> Self {
        Self {
            arch: Arch::Conventional,
            granularity: Granularity::Unit,
            n_rows: 32,
            n_cols: 32,
            x_fmt,
            w_fmt,
            gain_range_limit: Some(DEFAULT_GAIN_RANGE_LIMIT),
        }
    }

    pub fn gain_ranging(granularity: Granularity, x_fmt: FpFormat, w_fmt: FpFormat) -> Self {
        Self {
            arch: Arch::GainRanging,
            granularity,
            ..Self::conventional(x_fmt, w_fmt)
        }
    }

    pub fn with_rows(mut self, n_rows: usize) -> Self {
        self.n_rows = n_rows;
        self
    }

    pub fn with_limit(mut self, limit: Option<u32>) -> Self {
        self.gain_range_limit = limit;
        self
    }

    /// Exponent span the coupling stage must cover.
    pub fn exponent_span(&self) -> u32 {
        match (self.arch, self.granularity) {
            (Arch::Conventional, _) => 0,
            (Arch::GainRanging, Granularity::Unit) => self.x_fmt.exponent_span() + self.w_fmt.exponent_span(),
            (Arch::GainRanging, Granularity::Row) => self.x_fmt.exponent_span(),
            (Arch::GainRanging, Granularity::IntWeights) => self.w_fmt.exponent_span(),
        }
    }

    /// Static checks; every problem found is reported.
    pub fn diagnostics(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if self.n_rows == 0 {
            out.push(Error::Config("n_rows must be at least 1".into()));
        }
        if self.n_cols == 0 {
            out.push(Error::Config("n_cols must be at least 1".into()));
        }
        if self.arch == Arch::GainRanging {
            if let Some(limit) = self.gain_range_limit {
                let span = self.exponent_span();
                if span > limit {
                    out.push(Error::RangeViolation { span, limit });
                }
            }
            if self.granularity == Granularity::IntWeights && !self.x_fmt.is_int() {
                out.push(Error::Config(format!(
                    "int-weights granularity needs INT inputs, got {}",
                    self.x_fmt
                )));
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        match self.diagnostics().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Per-column result of one simulated dot product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacTrace {
    /// Values accumulated on the column line: `x_i * w_i` for the
    /// conventional MAC, signed mantissa products for gain ranging.
    pub products: Vec<f64>,
    pub z_analog: f64,
    /// Coupling weights relative to the smallest possible one.
    pub exp_weights: Vec<f64>,
    pub exp_sum: f64,
    pub n_eff: f64,
    pub z_digital: f64,
}

fn check_lengths(xq: &[FpScalar], wq: &[FpScalar], cfg: &ArchConfig) -> Result<()> {
    if xq.len() != wq.len() {
        return Err(Error::LengthMismatch(xq.len(), wq.len()));
    }
    if xq.len() != cfg.n_rows {
        return Err(Error::LengthMismatch(xq.len(), cfg.n_rows));
    }
    Ok(())
}

/// Exact-as-possible `sum(x_i * w_i) / N`.
pub fn ideal_dot(x: &[f64], w: &[f64]) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::LengthMismatch(x.len(), w.len()));
    }
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let mut acc = CompensatedSum::new();
    for (a, b) in x.iter().zip(w) {
        let p = a * b;
        acc.add(p);
        acc.add(a.mul_add(*b, -p));
    }
    Ok(acc.value() / x.len() as f64)
}

/// Conventional direct accumulation on the fixed full scale.
pub fn int_mac(xq: &[FpScalar], wq: &[FpScalar], cfg: &ArchConfig) -> Result<MacTrace> {
    if cfg.arch != Arch::Conventional {
        return Err(Error::Config("int_mac needs the conventional architecture".into()));
    }
    check_lengths(xq, wq, cfg)?;
    let products: Vec<f64> = xq
        .iter()
        .zip(wq)
        .map(|(x, w)| decode(*x, cfg.x_fmt) * decode(*w, cfg.w_fmt))
        .collect();
    let n = products.len() as f64;
    let z = sum(products.iter().copied()) / n;
    Ok(MacTrace {
        exp_weights: vec![1.0; products.len()],
        exp_sum: n,
        n_eff: n,
        z_analog: z,
        z_digital: z,
        products,
    })
}

/// Gain-ranging accumulation: exponent-weighted average of mantissa products.
pub fn gr_mac(xq: &[FpScalar], wq: &[FpScalar], cfg: &ArchConfig) -> Result<MacTrace> {
    if cfg.arch != Arch::GainRanging {
        return Err(Error::Config("gr_mac needs the gain-ranging architecture".into()));
    }
    check_lengths(xq, wq, cfg)?;
    cfg.check()?;
    let (x_fmt, w_fmt) = (cfg.x_fmt, cfg.w_fmt);
    let (e_floor, e_top) = match cfg.granularity {
        Granularity::Unit => (x_fmt.e_min() + w_fmt.e_min(), x_fmt.e_max() + w_fmt.e_max()),
        Granularity::Row => (x_fmt.e_min(), x_fmt.e_max()),
        Granularity::IntWeights => (w_fmt.e_min(), w_fmt.e_max()),
    };

    let mut products = Vec::with_capacity(xq.len());
    let mut exp_weights = Vec::with_capacity(xq.len());
    for (x, w) in xq.iter().zip(wq) {
        let (e, m) = match cfg.granularity {
            Granularity::Unit => (x.e + w.e, x.signed_m() * w.signed_m()),
            Granularity::Row => (x.e, x.signed_m() * decode(*w, w_fmt)),
            Granularity::IntWeights => (w.e, decode(*x, x_fmt) * w.signed_m()),
        };
        products.push(m);
        exp_weights.push(pow2(e - e_floor));
    }

    let mut num = CompensatedSum::new();
    let mut sq = CompensatedSum::new();
    for (u, m) in exp_weights.iter().zip(&products) {
        num.add(u * m);
        sq.add(u * u);
    }
    let exp_sum = sum(exp_weights.iter().copied());
    let num = num.value();
    let n = xq.len() as f64;
    Ok(MacTrace {
        z_analog: num / exp_sum,
        z_digital: num * pow2(e_floor - e_top) / n,
        n_eff: exp_sum * exp_sum / sq.value(),
        exp_sum,
        exp_weights,
        products,
    })
}

/// Dispatches on `cfg.arch`.
pub fn simulate(xq: &[FpScalar], wq: &[FpScalar], cfg: &ArchConfig) -> Result<MacTrace> {
    match cfg.arch {
        Arch::Conventional => int_mac(xq, wq, cfg),
        Arch::GainRanging => gr_mac(xq, wq, cfg),
    }
}

/// Effective number of contributors of a weighted average.
pub fn n_eff(exp_weights: &[f64]) -> Result<f64> {
    if exp_weights.is_empty() {
        return Err(Error::Empty);
    }
    if exp_weights.iter().any(|u| !(*u > 0.0)) {
        return Err(Error::Config("coupling weights must be positive".into()));
    }
    let s = sum(exp_weights.iter().copied());
    let s2 = sum(exp_weights.iter().map(|u| u * u));
    Ok(s * s / s2)
}

/// Column ADC on full scale +-1.
///
/// Integer `enob` is a sign-magnitude mid-rise quantizer with `2^enob`
/// levels at odd multiples of `step / 2`, `step = 2 / 2^enob`; an exact zero
/// carries no sign and maps to zero. Fractional `enob` adds uniform noise
/// of the same variance instead. An infinite `enob` is the identity.
pub fn adc_quantize<R: Rng + ?Sized>(z: f64, enob: f64, rng: &mut R) -> f64 {
    let z = z.clamp(-1.0, 1.0);
    if enob.is_infinite() || z == 0.0 && enob.fract() == 0.0 {
        return z;
    }
    let step = 2.0 / enob.exp2();
    if enob.fract() == 0.0 {
        let level = ((z.abs() / step).floor() + 0.5) * step;
        level.min(1.0 - 0.5 * step).copysign(z)
    } else {
        (z + step * (rng.random::<f64>() - 0.5)).clamp(-1.0, 1.0)
    }
}

/// Quantizes every element of `values`.
pub fn quantize_all(values: &[f64], fmt: FpFormat) -> Result<Vec<FpScalar>> {
    values.iter().map(|v| quantize(*v, fmt)).collect()
}
