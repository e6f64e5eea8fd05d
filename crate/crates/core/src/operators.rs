//! Neural network operators activated by a centered bell kernel.
//!
//! Max-min families evaluate
//!
//! ```text
//! Op(f; x) = max_k  c_k  ∧  phi(n x - k) / max_d phi(n x - d)
//! ```
//!
//! where the coefficient `c_k` is a sample `f(k/n)` (sampling), a cell
//! average `n int_{k/n}^{(k+1)/n} f` (Kantorovich) or a chi-weighted mean of
//! `f` over the whole domain (Durrmeyer). The linear families replace the
//! max-min pair by a normalized weighted sum.
//!
//! Coefficients depend only on `(config, signal)`, so they are built once
//! and reused for every evaluation point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{BellKernel, ChiKernel};
use crate::quadrature::{DurrmeyerIntegrator, KantorovichIntegrator, QuadratureConfig};
use crate::signal::{metric_grid, Interpolation, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "F")]
    MaxMinSampling,
    #[serde(rename = "K")]
    MaxMinKantorovich,
    #[serde(rename = "D")]
    MaxMinDurrmeyer,
    #[serde(rename = "LF")]
    LinearSampling,
    #[serde(rename = "LD")]
    LinearDurrmeyer,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::MaxMinDurrmeyer,
        Family::MaxMinKantorovich,
        Family::MaxMinSampling,
        Family::LinearSampling,
        Family::LinearDurrmeyer,
    ];

    pub const MAX_MIN: [Family; 3] = [
        Family::MaxMinDurrmeyer,
        Family::MaxMinKantorovich,
        Family::MaxMinSampling,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Family::MaxMinSampling => "F",
            Family::MaxMinKantorovich => "K",
            Family::MaxMinDurrmeyer => "D",
            Family::LinearSampling => "LF",
            Family::LinearDurrmeyer => "LD",
        }
    }

    pub fn is_max_min(self) -> bool {
        matches!(
            self,
            Family::MaxMinSampling | Family::MaxMinKantorovich | Family::MaxMinDurrmeyer
        )
    }

    pub fn is_durrmeyer(self) -> bool {
        matches!(self, Family::MaxMinDurrmeyer | Family::LinearDurrmeyer)
    }

    /// Coefficient index range for `n` on `[a, b]`.
    pub fn cell_range(self, n: u64, a: f64, b: f64) -> Result<(i64, i64)> {
        let nf = n as f64;
        let (na, nb) = (nf * a, nf * b);
        let (lo, hi) = match self {
            Family::MaxMinSampling | Family::LinearSampling => (na.ceil() as i64, nb.floor() as i64),
            Family::MaxMinKantorovich => (na.ceil() as i64, nb.floor() as i64 - 1),
            Family::MaxMinDurrmeyer | Family::LinearDurrmeyer => {
                if a.fract() != 0.0 || b.fract() != 0.0 {
                    return Err(Error::Domain(format!(
                        "Durrmeyer operators need integer endpoints, got [{a}, {b}]"
                    )));
                }
                (na as i64, nb as i64 - 1)
            }
        };
        if lo > hi {
            return Err(Error::Domain(format!(
                "no cells for family {} with n = {n} on [{a}, {b}]",
                self.code()
            )));
        }
        Ok((lo, hi))
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F" => Ok(Family::MaxMinSampling),
            "K" => Ok(Family::MaxMinKantorovich),
            "D" => Ok(Family::MaxMinDurrmeyer),
            "LF" => Ok(Family::LinearSampling),
            "LD" => Ok(Family::LinearDurrmeyer),
            other => Err(Error::Parse(format!("unknown operator family `{other}`"))),
        }
    }
}

/// How the inner maximum of a max-min family is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalStrategy {
    /// Every cell is visited and the normalizer is a separate maximum.
    Exhaustive,
    /// Walks outward from the cell nearest `n x` and stops as soon as the
    /// normalized weight cannot beat the running maximum. Exact because the
    /// bell is unimodal.
    #[default]
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub family: Family,
    pub n: u64,
    pub bell: BellKernel,
    pub chi: Option<ChiKernel>,
    pub quad: QuadratureConfig,
    pub strategy: EvalStrategy,
}

impl OperatorConfig {
    pub fn new(family: Family, n: u64, bell: BellKernel) -> Self {
        Self {
            family,
            n,
            bell,
            chi: None,
            quad: QuadratureConfig::default(),
            strategy: EvalStrategy::default(),
        }
    }

    pub fn with_chi(mut self, chi: ChiKernel) -> Self {
        self.chi = Some(chi);
        self
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_strategy(mut self, strategy: EvalStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_family(&self, family: Family) -> Self {
        Self {
            family,
            ..self.clone()
        }
    }

    pub fn with_n(&self, n: u64) -> Self {
        Self { n, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if self.family.is_durrmeyer() && self.chi.is_none() {
            return Err(Error::Domain(format!(
                "family {} needs an averaging kernel",
                self.family
            )));
        }
        Ok(())
    }
}

/// Per-cell coefficients for one `(config, signal)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub k_lo: i64,
    pub k_hi: i64,
    pub values: Vec<f64>,
    /// `int_a^b chi(nt - k) dt` per cell, Durrmeyer families only.
    pub masses: Option<Vec<f64>>,
}

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        if k < self.k_lo || k > self.k_hi {
            None
        } else {
            Some(self.values[(k - self.k_lo) as usize])
        }
    }
}

pub fn coefficients(cfg: &OperatorConfig, f: &Signal) -> Result<CoefficientVector> {
    cfg.validate()?;
    let (a, b) = f.domain();
    let n = cfg.n;
    let (k_lo, k_hi) = cfg.family.cell_range(n, a, b)?;
    let nf = n as f64;
    let (values, masses) = match cfg.family {
        Family::MaxMinSampling | Family::LinearSampling => {
            let v = (k_lo..=k_hi)
                .map(|k| f.eval_unchecked((k as f64 / nf).clamp(a, b)))
                .collect();
            (v, None)
        }
        Family::MaxMinKantorovich => {
            let integ = KantorovichIntegrator::new(f, n, &cfg.quad)?;
            let v = (k_lo..=k_hi).map(|k| integ.mean(k)).collect::<Result<Vec<_>>>()?;
            (v, None)
        }
        Family::MaxMinDurrmeyer | Family::LinearDurrmeyer => {
            let chi = cfg.chi.as_ref().expect("validated");
            let integ = DurrmeyerIntegrator::new(chi, f, n, &cfg.quad)?;
            let (means, masses) = integ.all(k_lo, k_hi)?;
            (means, Some(masses))
        }
    };
    Ok(CoefficientVector {
        k_lo,
        k_hi,
        values,
        masses,
    })
}

/// Evaluates the operator of `cfg` applied to `f` at every point of `xs`.
pub fn evaluate(cfg: &OperatorConfig, f: &Signal, xs: &[f64]) -> Result<Vec<f64>> {
    let coeffs = coefficients(cfg, f)?;
    evaluate_with(cfg, &coeffs, f.domain(), xs)
}

/// Evaluates with precomputed coefficients on the domain `[a, b]`.
pub fn evaluate_with(
    cfg: &OperatorConfig,
    coeffs: &CoefficientVector,
    (a, b): (f64, f64),
    xs: &[f64],
) -> Result<Vec<f64>> {
    if let Some(&x) = xs.iter().find(|&&x| !(x >= a && x <= b)) {
        return Err(Error::Domain(format!("x = {x} outside [{a}, {b}]")));
    }
    let eval = Evaluator::new(cfg, coeffs);
    match (cfg.family.is_max_min(), cfg.strategy) {
        (true, EvalStrategy::Pruned) => xs.par_iter().map(|&x| eval.max_min_pruned(x)).collect(),
        (true, EvalStrategy::Exhaustive) => xs
            .par_iter()
            .map_init(|| vec![0.0; coeffs.len()], |buf, &x| eval.max_min_exhaustive(x, buf))
            .collect(),
        (false, _) => xs.par_iter().map(|&x| eval.linear(x)).collect(),
    }
}

struct Evaluator<'a> {
    bell: BellKernel,
    nf: f64,
    coeffs: &'a CoefficientVector,
    coeff_max: f64,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &OperatorConfig, coeffs: &'a CoefficientVector) -> Self {
        Self {
            bell: cfg.bell,
            nf: cfg.n as f64,
            coeffs,
            coeff_max: coeffs.values.iter().copied().fold(0.0, f64::max),
        }
    }

    fn zero(&self, x: f64) -> Error {
        Error::ZeroDenominator(format!(
            "all bell weights vanish at x = {x} (cells {}..={})",
            self.coeffs.k_lo, self.coeffs.k_hi
        ))
    }

    fn max_min_exhaustive(&self, x: f64, buf: &mut [f64]) -> Result<f64> {
        let nx = self.nf * x;
        let k_lo = self.coeffs.k_lo;
        for (i, w) in buf.iter_mut().enumerate() {
            *w = self.bell.eval(nx - (k_lo + i as i64) as f64);
        }
        let denom = buf.iter().copied().fold(0.0, f64::max);
        if !(denom > 0.0) {
            return Err(self.zero(x));
        }
        Ok(self
            .coeffs
            .values
            .iter()
            .zip(buf.iter())
            .fold(0.0, |acc, (&c, &w)| acc.max(c.min(w / denom))))
    }

    fn max_min_pruned(&self, x: f64) -> Result<f64> {
        let nx = self.nf * x;
        let (k_lo, k_hi) = (self.coeffs.k_lo, self.coeffs.k_hi);
        let kc = (nx.round() as i64).clamp(k_lo, k_hi);
        let denom = self.bell.eval(nx - kc as f64);
        if !(denom > 0.0) {
            return Err(self.zero(x));
        }
        let c = &self.coeffs.values;
        let mut best = c[(kc - k_lo) as usize].min(1.0);
        if best >= self.coeff_max {
            return Ok(best);
        }
        let mut k = kc + 1;
        while k <= k_hi {
            let w = self.bell.eval(nx - k as f64) / denom;
            if w <= best {
                break;
            }
            best = best.max(c[(k - k_lo) as usize].min(w));
            if best >= self.coeff_max {
                return Ok(best);
            }
            k += 1;
        }
        let mut k = kc - 1;
        while k >= k_lo {
            let w = self.bell.eval(nx - k as f64) / denom;
            if w <= best {
                break;
            }
            best = best.max(c[(k - k_lo) as usize].min(w));
            if best >= self.coeff_max {
                break;
            }
            k -= 1;
        }
        Ok(best)
    }

    fn linear(&self, x: f64) -> Result<f64> {
        let nx = self.nf * x;
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &c) in self.coeffs.values.iter().enumerate() {
            let k = self.coeffs.k_lo + i as i64;
            let mut w = self.bell.eval(nx - k as f64);
            if let Some(m) = &self.coeffs.masses {
                w *= self.nf * m[i];
            }
            num += c * w;
            den += w;
        }
        if den > 0.0 {
            Ok(num / den)
        } else {
            Err(self.zero(x))
        }
    }
}

/// Filters samples taken on the uniform grid of `[a, b]`: the samples are
/// step-interpolated, clamped to `[0, 1]`, and the operator is evaluated
/// back on the same grid.
pub fn denoise(cfg: &OperatorConfig, (a, b): (f64, f64), noisy: &[f64]) -> Result<Vec<f64>> {
    if noisy.len() < 2 {
        return Err(Error::Domain("denoising needs at least two samples".into()));
    }
    let clamped: Vec<f64> = noisy.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let f = Signal::sampled_uniform(a, b, clamped, Interpolation::Step)?;
    evaluate(cfg, &f, &metric_grid(a, b, noisy.len()))
}

/// `1 - Op(1 - Op(noisy))`, clamping each intermediate to `[0, 1]`.
///
/// The first pass removes low impulses; the complement turns the surviving
/// high impulses into low ones for the second pass.
pub fn complement_double_pass(cfg: &OperatorConfig, domain: (f64, f64), noisy: &[f64]) -> Result<Vec<f64>> {
    let first = denoise(cfg, domain, noisy)?;
    let flipped: Vec<f64> = first.iter().map(|v| 1.0 - v.clamp(0.0, 1.0)).collect();
    let second = denoise(cfg, domain, &flipped)?;
    Ok(second.iter().map(|v| (1.0 - v).clamp(0.0, 1.0)).collect())
}
