//! Seeded noise models.
//!
//! Every stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`, so a
//! `(spec, clean signal)` pair always produces the same corrupted samples.
//! Uniform draws use the generator's 53-bit `f64` conversion; Gaussian draws
//! use the ziggurat sampler behind `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum NoiseKind {
    /// Each sample independently becomes 1 with probability `p/2` and 0
    /// with probability `p/2`.
    SaltPepper { p: f64 },
    /// Additive `N(0, sd^2)` clamped back to `[0, 1]`.
    Gaussian { sd: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Result<Self> {
        match kind {
            NoiseKind::SaltPepper { p } => Self::salt_pepper(p, seed),
            NoiseKind::Gaussian { sd } => Self::gaussian(sd, seed),
        }
    }

    pub fn salt_pepper(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("salt-pepper density must be in [0, 1), got {p}")));
        }
        Ok(Self {
            kind: NoiseKind::SaltPepper { p },
            seed,
        })
    }

    pub fn gaussian(sd: f64, seed: u64) -> Result<Self> {
        if !(sd.is_finite() && sd >= 0.0) {
            return Err(Error::Domain(format!("gaussian sd must be nonnegative, got {sd}")));
        }
        Ok(Self {
            kind: NoiseKind::Gaussian { sd },
            seed,
        })
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    /// `saltpepper:<p>` or `gaussian:<sd>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("noise `{s}` must look like name:value")))?;
        let v: f64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("bad noise parameter `{value}`")))?;
        let spec = match name {
            "saltpepper" | "salt-pepper" => NoiseSpec::salt_pepper(v, 0)?,
            "gaussian" => NoiseSpec::gaussian(v, 0)?,
            other => return Err(Error::Parse(format!("unknown noise kind `{other}`"))),
        };
        Ok(spec.kind)
    }
}

pub fn add_noise(clean: &[f64], spec: &NoiseSpec) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        NoiseKind::SaltPepper { p } => clean
            .iter()
            .map(|&v| {
                let u: f64 = rng.random();
                if u < 0.5 * p {
                    1.0
                } else if u < p {
                    0.0
                } else {
                    v
                }
            })
            .collect(),
        NoiseKind::Gaussian { sd } => clean
            .iter()
            .map(|&v| {
                let z: f64 = rng.sample(StandardNormal);
                (v + sd * z).clamp(0.0, 1.0)
            })
            .collect(),
    }
}
