//! Seeded random streams and the handful of samplers the model draws from.
//!
//! Every stream is a ChaCha8 generator keyed by a base seed and positioned on
//! an independent sub-stream, so a run is fully determined by
//! `(seed, stream_id)` and parallel work never shares generator state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated normal draws give up after this many rejections.
pub const MAX_REJECTIONS: usize = 1_000_000;

/// Truncation windows with less probability mass than this are refused.
pub const MIN_TRUNCATED_MASS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RandomStream {
    base_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(stream_id);
        Self {
            base_seed,
            stream_id,
            rng,
        }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream on the same base seed with a different sub-stream index.
    pub fn sibling(&self, stream_id: u64) -> Self {
        Self::new(self.base_seed, stream_id)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `[0, len)`. `len` must be positive.
    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        check_uniform(lo, hi)?;
        Ok(self.uniform_unchecked(lo, hi))
    }

    fn uniform_unchecked(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            return lo;
        }
        (lo + (hi - lo) * self.unit()).clamp(lo, hi)
    }

    /// Beta(1, w) by inverting its CDF `1 - (1 - x)^w`.
    pub fn beta_one_w(&mut self, w: f64) -> Result<f64> {
        check_beta(w)?;
        Ok(beta_one_w_inverse_cdf(self.unit(), w))
    }

    /// Normal(mu, sd), optionally truncated to `bounds` by rejection.
    pub fn normal(&mut self, mu: f64, sd: f64, bounds: Option<(f64, f64)>) -> Result<f64> {
        check_normal(mu, sd, bounds)?;
        self.normal_unchecked(mu, sd, bounds)
    }

    fn normal_unchecked(&mut self, mu: f64, sd: f64, bounds: Option<(f64, f64)>) -> Result<f64> {
        if sd == 0.0 {
            return Ok(mu);
        }
        let Some((lo, hi)) = bounds else {
            return Ok(mu + sd * self.standard_normal());
        };
        for _ in 0..MAX_REJECTIONS {
            let x = mu + sd * self.standard_normal();
            if (lo..=hi).contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::InvalidParameter(format!(
            "truncated normal N({mu}, {sd}) on [{lo}, {hi}] rejected {MAX_REJECTIONS} draws"
        )))
    }
}

/// Inverse CDF of Beta(1, w): `1 - (1 - u)^(1/w)`.
pub fn beta_one_w_inverse_cdf(u: f64, w: f64) -> f64 {
    (1.0 - (1.0 - u).powf(1.0 / w)).clamp(0.0, 1.0)
}

pub fn beta_one_w_cdf(x: f64, w: f64) -> f64 {
    1.0 - (1.0 - x.clamp(0.0, 1.0)).powf(w)
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn check_uniform(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "uniform bounds must satisfy lo <= hi, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn check_beta(w: f64) -> Result<()> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta shape w must be positive, got {w}"
        )));
    }
    Ok(())
}

fn check_normal(mu: f64, sd: f64, bounds: Option<(f64, f64)>) -> Result<()> {
    if !(mu.is_finite() && sd.is_finite()) || sd < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "normal needs finite mu and sd >= 0, got mu={mu}, sd={sd}"
        )));
    }
    let Some((lo, hi)) = bounds else {
        return Ok(());
    };
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "truncation bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mass = if sd == 0.0 {
        if (lo..=hi).contains(&mu) {
            1.0
        } else {
            0.0
        }
    } else {
        standard_normal_cdf((hi - mu) / sd) - standard_normal_cdf((lo - mu) / sd)
    };
    if mass < MIN_TRUNCATED_MASS {
        return Err(Error::InvalidParameter(format!(
            "truncation [{lo}, {hi}] keeps probability {mass:e} of N({mu}, {sd})"
        )));
    }
    Ok(())
}

/// A distribution that a model quantity is drawn from.
///
/// Serialized as a tagged object, e.g. `{"kind":"beta_one_w","w":6}` or
/// `{"kind":"normal","mu":0.5,"sd":0.1,"truncate":[0,1]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    BetaOneW {
        w: f64,
    },
    Normal {
        mu: f64,
        sd: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncate: Option<(f64, f64)>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::BetaOneW { w } => check_beta(w),
            Distribution::Normal { mu, sd, truncate } => check_normal(mu, sd, truncate),
            Distribution::Uniform { lo, hi } => check_uniform(lo, hi),
        }
    }

    /// Smallest interval guaranteed to contain every draw.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Distribution::BetaOneW { .. } => (0.0, 1.0),
            Distribution::Normal { mu, sd, truncate } => match truncate {
                Some(b) => b,
                None if sd == 0.0 => (mu, mu),
                None => (f64::NEG_INFINITY, f64::INFINITY),
            },
            Distribution::Uniform { lo, hi } => (lo, hi),
        }
    }

    /// Draws one value. Assumes `validate` has passed; only an exhausted
    /// rejection loop can fail here.
    pub fn sample(&self, stream: &mut RandomStream) -> Result<f64> {
        match *self {
            Distribution::BetaOneW { w } => Ok(beta_one_w_inverse_cdf(stream.unit(), w)),
            Distribution::Normal { mu, sd, truncate } => stream.normal_unchecked(mu, sd, truncate),
            Distribution::Uniform { lo, hi } => Ok(stream.uniform_unchecked(lo, hi)),
        }
    }
}
