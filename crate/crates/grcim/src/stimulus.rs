//! Seeded input distributions.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{decode, FpFormat};
use crate::rng::CounterRng;

/// Default extra mantissa bits used when a max-entropy source must carry
/// sub-LSB detail relative to the format under test.
pub const DEFAULT_REFINE_BITS: u32 = 8;

/// Input distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistributionSpec {
    /// Uniform on `[-bound, bound]`.
    Uniform { bound: f64 },
    /// Uniformly random bit patterns of a format.
    MaxEntropy(FpFormat),
    /// Max-entropy of the format under test widened by `extra_bits` mantissa
    /// bits. Must be resolved against a format before sampling.
    MatchedMaxEntropy { extra_bits: u32 },
    /// Gaussian core with `3 sigma = 1/k`, saturated at `core_clip` sigmas,
    /// mixed with uniform full-scale outliers at rate `epsilon`.
    GaussianOutliers { epsilon: f64, k: f64, core_clip: f64 },
    /// Zero-mean gaussian saturated at `clip` sigmas.
    Gaussian { sigma: f64, clip: f64 },
}

/// One drawn value and whether it came from the outlier component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub value: f64,
    pub is_outlier: bool,
}

impl DistributionSpec {
    pub const UNIFORM: Self = Self::Uniform { bound: 1.0 };

    pub fn gaussian_outliers(epsilon: f64, k: f64) -> Self {
        Self::GaussianOutliers {
            epsilon,
            k,
            core_clip: 3.0,
        }
    }

    pub fn matched_max_entropy() -> Self {
        Self::MatchedMaxEntropy {
            extra_bits: DEFAULT_REFINE_BITS,
        }
    }

    pub fn has_outliers(&self) -> bool {
        matches!(self, Self::GaussianOutliers { .. })
    }

    /// Core standard deviation of the gaussian+outliers mixture.
    pub fn core_sigma(&self) -> Option<f64> {
        match *self {
            Self::GaussianOutliers { k, .. } => Some(1.0 / (3.0 * k)),
            Self::Gaussian { sigma, .. } => Some(sigma),
            _ => None,
        }
    }

    /// Binds a matched max-entropy source to the format under test.
    pub fn resolve(self, fmt: FpFormat) -> Result<Self> {
        match self {
            Self::MatchedMaxEntropy { extra_bits } => {
                Ok(Self::MaxEntropy(FpFormat::new(fmt.n_e, fmt.n_m + extra_bits)?))
            }
            other => Ok(other),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Distribution(m));
        match *self {
            Self::Uniform { bound } if !(bound > 0.0 && bound <= 1.0) => {
                bad(format!("uniform bound {bound} outside (0, 1]"))
            }
            Self::GaussianOutliers { epsilon, k, core_clip } => {
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    bad(format!("epsilon {epsilon} outside (0, 1)"))
                } else if !(k >= 1.0) {
                    bad(format!("k {k} below 1"))
                } else if !(core_clip > 0.0) {
                    bad(format!("core clip {core_clip} not positive"))
                } else {
                    Ok(())
                }
            }
            Self::Gaussian { sigma, clip } if !(sigma > 0.0 && clip > 0.0) => {
                bad(format!("gaussian sigma {sigma} / clip {clip} not positive"))
            }
            _ => Ok(()),
        }
    }

    /// Draws the sample at `index` of the stream keyed by `seed`.
    ///
    /// The caller is responsible for [`validate`](Self::validate) and
    /// [`resolve`](Self::resolve).
    pub fn sample_at(&self, seed: u64, index: u64) -> LabeledSample {
        let mut rng = CounterRng::new(seed, index);
        let plain = |value| LabeledSample {
            value,
            is_outlier: false,
        };
        match *self {
            Self::Uniform { bound } => plain(bound * (2.0 * rng.random::<f64>() - 1.0)),
            Self::MaxEntropy(fmt) => {
                let mask = if fmt.width() == 32 {
                    u32::MAX
                } else {
                    (1u32 << fmt.width()) - 1
                };
                plain(decode(fmt.from_code(rng.next_u32() & mask), fmt))
            }
            Self::MatchedMaxEntropy { .. } => plain(f64::NAN),
            Self::GaussianOutliers { epsilon, k, core_clip } => {
                if rng.random::<f64>() < epsilon {
                    LabeledSample {
                        value: 2.0 * rng.random::<f64>() - 1.0,
                        is_outlier: true,
                    }
                } else {
                    let sigma = 1.0 / (3.0 * k);
                    let z: f64 = rng.sample(StandardNormal);
                    let lim = (core_clip * sigma).min(1.0);
                    plain((sigma * z).clamp(-lim, lim))
                }
            }
            Self::Gaussian { sigma, clip } => {
                let z: f64 = rng.sample(StandardNormal);
                let lim = (clip * sigma).min(1.0);
                plain((sigma * z).clamp(-lim, lim))
            }
        }
    }
}

/// Draws `n` samples. Deterministic in `(spec, n, seed)`.
pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Vec<LabeledSample>> {
    if n == 0 {
        return Err(Error::Empty);
    }
    spec.validate()?;
    if let DistributionSpec::MatchedMaxEntropy { .. } = spec {
        return Err(Error::Distribution(
            "matched max-entropy needs a format; resolve it first".into(),
        ));
    }
    Ok((0..n as u64).map(|i| spec.sample_at(seed, i)).collect())
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Uniform { bound: 1.0 } => write!(f, "uniform"),
            Self::Uniform { bound } => write!(f, "uniform:bound={bound}"),
            Self::MaxEntropy(fmt) => write!(f, "maxent:{fmt}"),
            Self::MatchedMaxEntropy { extra_bits } => write!(f, "maxent:+{extra_bits}"),
            Self::GaussianOutliers { epsilon, k, core_clip } => {
                write!(f, "gauss-outliers:eps={epsilon},k={k}")?;
                if core_clip != 3.0 {
                    write!(f, ",clip={core_clip}")?;
                }
                Ok(())
            }
            Self::Gaussian { sigma, clip } => write!(f, "gauss:sigma={sigma},clip={clip}"),
        }
    }
}

fn parse_params(s: &str) -> Result<Vec<(&str, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Distribution(format!("expected key=value, got `{p}`")))?;
            let v = v
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Distribution(format!("bad number in `{p}`")))?;
            Ok((k.trim(), v))
        })
        .collect()
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        let unknown = |k: &str| Error::Distribution(format!("unknown parameter `{k}` in `{s}`"));
        let spec = match head {
            "uniform" => {
                let mut bound = 1.0;
                for (k, v) in parse_params(tail)? {
                    match k {
                        "bound" => bound = v,
                        _ => return Err(unknown(k)),
                    }
                }
                Self::Uniform { bound }
            }
            "maxent" => match tail {
                "" => Self::matched_max_entropy(),
                t if t.starts_with('+') => Self::MatchedMaxEntropy {
                    extra_bits: t[1..].parse().map_err(|_| Error::Distribution(s.to_string()))?,
                },
                t => Self::MaxEntropy(t.parse()?),
            },
            "gauss-outliers" => {
                let (mut epsilon, mut k, mut core_clip) = (0.01, 50.0, 3.0);
                for (key, v) in parse_params(tail)? {
                    match key {
                        "eps" | "epsilon" => epsilon = v,
                        "k" => k = v,
                        "clip" => core_clip = v,
                        _ => return Err(unknown(key)),
                    }
                }
                Self::GaussianOutliers { epsilon, k, core_clip }
            }
            "gauss" => {
                let (mut sigma, mut clip) = (0.25, 4.0);
                for (key, v) in parse_params(tail)? {
                    match key {
                        "sigma" => sigma = v,
                        "clip" => clip = v,
                        _ => return Err(unknown(key)),
                    }
                }
                Self::Gaussian { sigma, clip }
            }
            _ => return Err(Error::Distribution(format!("unknown distribution `{s}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for DistributionSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistributionSpec> for String {
    fn from(d: DistributionSpec) -> String {
        d.to_string()
    }
}
