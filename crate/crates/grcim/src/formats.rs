//! Low-bit floating-point formats normalized to the unit interval.
//!
//! A format `E<ne>M<nm>` has a sign bit, `ne` exponent bits and `nm` stored
//! mantissa bits. Values are `sign * m * 2^(e - E_max)` with `E_max = 2^ne - 1`,
//! so every code lies in `[-1, 1)`. A stored exponent of zero encodes the
//! subnormal binade with effective exponent 1. `ne = 0` is a plain fixed-point
//! format with `nm` magnitude bits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_EXPONENT_BITS: u32 = 8;
const MAX_WIDTH: u32 = 32;

/// Minifloat format descriptor. Always signed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FpFormat {
    /// Exponent bits.
    pub n_e: u32,
    /// Stored mantissa bits (implicit bit excluded).
    pub n_m: u32,
}

impl FpFormat {
    pub fn new(n_e: u32, n_m: u32) -> Result<Self> {
        if n_e > MAX_EXPONENT_BITS || 1 + n_e + n_m > MAX_WIDTH {
            return Err(Error::Format(format!("E{n_e}M{n_m}")));
        }
        Ok(Self { n_e, n_m })
    }

    /// Total width in bits including the sign.
    pub fn width(&self) -> u32 {
        1 + self.n_e + self.n_m
    }

    pub fn is_int(&self) -> bool {
        self.n_e == 0
    }

    pub fn e_max(&self) -> i32 {
        (1i32 << self.n_e) - 1
    }

    /// Smallest effective exponent a code can carry.
    pub fn e_min(&self) -> i32 {
        if self.is_int() {
            0
        } else {
            1
        }
    }

    /// Number of binades a value can fall in, minus one.
    pub fn exponent_span(&self) -> u32 {
        (self.e_max() - self.e_min()) as u32
    }

    /// Smallest normal magnitude. For INT this is the half-scale anchor 0.5.
    pub fn min_normal(&self) -> f64 {
        if self.is_int() {
            0.5
        } else {
            pow2(-self.e_max())
        }
    }

    /// Largest representable magnitude.
    pub fn max_value(&self) -> f64 {
        decode(self.max_code(), *self)
    }

    fn max_code(&self) -> FpScalar {
        let full = self.significand_scale();
        FpScalar {
            negative: false,
            m: (full - 1.0) / full,
            e: self.e_max(),
            is_subnormal: false,
        }
    }

    /// Significand denominator: `2^(nm+1)` for floating point, `2^nm` for INT.
    fn significand_scale(&self) -> f64 {
        if self.is_int() {
            pow2(self.n_m as i32)
        } else {
            pow2(self.n_m as i32 + 1)
        }
    }

    /// Number of distinct bit patterns.
    pub fn code_count(&self) -> u64 {
        1u64 << self.width()
    }

    /// Decodes a raw bit pattern `sign | exponent | mantissa`.
    pub fn from_code(&self, code: u32) -> FpScalar {
        let nm = self.n_m;
        let mant_mask = (1u32 << nm) - 1;
        let mant = code & mant_mask;
        let field = (code >> nm) & ((1u32 << self.n_e) - 1);
        let negative = (code >> (nm + self.n_e)) & 1 == 1;
        if self.is_int() {
            return FpScalar {
                negative,
                m: mant as f64 / self.significand_scale(),
                e: 0,
                is_subnormal: false,
            };
        }
        let full = self.significand_scale();
        if field == 0 {
            FpScalar {
                negative,
                m: mant as f64 / full,
                e: 1,
                is_subnormal: true,
            }
        } else {
            FpScalar {
                negative,
                m: ((1u32 << nm) + mant) as f64 / full,
                e: field as i32,
                is_subnormal: false,
            }
        }
    }

    /// Encodes a scalar of this format back to its bit pattern.
    pub fn to_code(&self, v: &FpScalar) -> u32 {
        let nm = self.n_m;
        let k = (v.m * self.significand_scale()) as u32;
        let sign = (v.negative as u32) << (nm + self.n_e);
        if self.is_int() {
            return sign | k;
        }
        if v.is_subnormal {
            sign | k
        } else {
            sign | ((v.e as u32) << nm) | (k - (1u32 << nm))
        }
    }
}

impl fmt::Display for FpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}M{}", self.n_e, self.n_m)
    }
}

impl FromStr for FpFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(s.to_string());
        let rest = s.trim().strip_prefix(['E', 'e']).ok_or_else(bad)?;
        let (ne, nm) = rest.split_once(['M', 'm']).ok_or_else(bad)?;
        let n_e = ne.parse().map_err(|_| bad())?;
        let n_m = nm.parse().map_err(|_| bad())?;
        FpFormat::new(n_e, n_m)
    }
}

impl TryFrom<String> for FpFormat {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FpFormat> for String {
    fn from(f: FpFormat) -> String {
        f.to_string()
    }
}

/// A decoded value of some format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpScalar {
    pub negative: bool,
    /// Effective significand in `[0, 1)`.
    pub m: f64,
    /// Effective exponent, `max(1, stored)`; 0 for INT formats.
    pub e: i32,
    pub is_subnormal: bool,
}

impl FpScalar {
    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    /// Significand with the sign folded in.
    pub fn signed_m(&self) -> f64 {
        self.sign() * self.m
    }
}

/// Exact `2^k` for the exponent ranges used here.
pub(crate) fn pow2(k: i32) -> f64 {
    f64::from_bits(((1023 + k) as u64) << 52)
}

/// `floor(log2(a))` for positive normal `a`, read from the bit pattern.
fn floor_log2(a: f64) -> i32 {
    if a < f64::MIN_POSITIVE {
        return -1023;
    }
    ((a.to_bits() >> 52) & 0x7ff) as i32 - 1023
}

/// Rounds `x` to the nearest code of `fmt` (ties to even, saturating).
pub fn quantize(x: f64, fmt: FpFormat) -> Result<FpScalar> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let negative = x.is_sign_negative();
    let a = x.abs();
    let full = fmt.significand_scale();

    if fmt.is_int() {
        let k = (a * full).round_ties_even().min(full - 1.0);
        return Ok(FpScalar {
            negative,
            m: k / full,
            e: 0,
            is_subnormal: false,
        });
    }

    let emax = fmt.e_max();
    let mut e = if a == 0.0 {
        1
    } else {
        (floor_log2(a) + 1 + emax).clamp(1, emax)
    };
    let t = a * pow2(emax - e) * full;
    let lower = t.floor();
    let round_up = match (t - lower).partial_cmp(&0.5) {
        Some(std::cmp::Ordering::Greater) => true,
        Some(std::cmp::Ordering::Less) => false,
        // Tie: pick the neighbour whose code is even. With stored mantissa
        // bits that is the even significand; with none it is the even exponent.
        _ => {
            if fmt.n_m > 0 {
                lower as u64 % 2 == 1
            } else {
                lower + 1.0 >= full && e % 2 == 1
            }
        }
    };
    let mut k = if round_up { lower + 1.0 } else { lower };
    if k >= full {
        if e < emax && k == full {
            e += 1;
            k = full / 2.0;
        } else {
            k = full - 1.0;
        }
    }
    Ok(FpScalar {
        negative,
        m: k / full,
        e,
        is_subnormal: e == 1 && k < full / 2.0,
    })
}

/// Exact value of `v` under `fmt`.
pub fn decode(v: FpScalar, fmt: FpFormat) -> f64 {
    v.sign() * v.m * pow2(v.e - fmt.e_max())
}

/// Quantizes and decodes in one step.
pub fn round_to(x: f64, fmt: FpFormat) -> Result<f64> {
    Ok(decode(quantize(x, fmt)?, fmt))
}

/// Analytic quantization SQNR ceiling in dB for `nm` stored mantissa bits.
pub fn format_sqnr_db(fmt: FpFormat) -> f64 {
    sqnr_db_for_mantissa(fmt.n_m as f64)
}

/// Same ceiling for a continuous mantissa width.
pub fn sqnr_db_for_mantissa(n_m: f64) -> f64 {
    6.02 * n_m + 10.79
}

/// Inverse of [`sqnr_db_for_mantissa`].
pub fn mantissa_for_sqnr_db(sqnr_db: f64) -> f64 {
    (sqnr_db - 10.79) / 6.02
}

/// Smallest normal magnitude of `fmt`.
pub fn min_normal(fmt: FpFormat) -> f64 {
    fmt.min_normal()
}
