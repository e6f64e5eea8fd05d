//! Sigmoidal activations, centered bell kernels and averaging kernels.
//!
//! A [`Sigmoid`] is one of four fixed activation shapes composed with a
//! slope. The [`BellKernel`] built from it is the centered bell
//!
//! ```text
//! phi(x) = 1/2 * (sigma(s*(x + 1)) - sigma(s*(x - 1)))
//! ```
//!
//! and a [`ChiKernel`] is the nonnegative weight used by Durrmeyer
//! coefficients. Every sup-type moment is evaluated on a uniform grid over
//! one lattice period, since the defining expressions are invariant under
//! integer shifts.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid step used for sup-type moments over one lattice period.
pub const MOMENT_GRID_STEP: f64 = 1e-3;

/// Relative change below which a truncated moment is considered converged.
pub const MOMENT_REL_TOL: f64 = 1e-9;

const MAX_TRUNC: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmoidKind {
    Logistic,
    Tanh,
    Step,
    Ramp,
}

impl SigmoidKind {
    /// The unscaled activation.
    #[inline]
    pub fn base(self, y: f64) -> f64 {
        match self {
            SigmoidKind::Logistic => 1.0 / (1.0 + (-y).exp()),
            SigmoidKind::Tanh => 0.5 * (y.tanh() + 1.0),
            SigmoidKind::Step => {
                if y < -0.5 {
                    0.0
                } else if y <= 0.5 {
                    0.5
                } else {
                    1.0
                }
            }
            SigmoidKind::Ramp => {
                if y < -0.5 {
                    0.0
                } else if y <= 0.5 {
                    y + 0.5
                } else {
                    1.0
                }
            }
        }
    }

    pub fn is_smooth(self) -> bool {
        matches!(self, SigmoidKind::Logistic | SigmoidKind::Tanh)
    }

    /// Decay exponent assumed when none is declared.
    pub fn default_alpha(self) -> f64 {
        if self.is_smooth() {
            1.0
        } else {
            5.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SigmoidKind::Logistic => "logistic",
            SigmoidKind::Tanh => "tanh",
            SigmoidKind::Step => "step",
            SigmoidKind::Ramp => "ramp",
        }
    }
}

impl std::str::FromStr for SigmoidKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(SigmoidKind::Logistic),
            "tanh" => Ok(SigmoidKind::Tanh),
            "step" => Ok(SigmoidKind::Step),
            "ramp" => Ok(SigmoidKind::Ramp),
            other => Err(Error::Parse(format!("unknown sigmoid kind `{other}`"))),
        }
    }
}

/// A nondecreasing activation `x -> kind(slope * x)` with values in `[0, 1]`.
///
/// `alpha` is the polynomial decay exponent at `-inf`. It cannot be derived
/// from the activation in general, so it is declared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub kind: SigmoidKind,
    pub slope: f64,
    pub alpha: f64,
}

impl Sigmoid {
    pub fn new(kind: SigmoidKind, slope: f64) -> Result<Self> {
        if !(slope.is_finite() && slope > 0.0) {
            return Err(Error::Domain(format!("sigmoid slope must be positive, got {slope}")));
        }
        Ok(Self {
            kind,
            slope,
            alpha: kind.default_alpha(),
        })
    }

    pub fn logistic(slope: f64) -> Self {
        Self::new(SigmoidKind::Logistic, slope).expect("positive slope")
    }

    pub fn tanh(slope: f64) -> Self {
        Self::new(SigmoidKind::Tanh, slope).expect("positive slope")
    }

    pub fn step() -> Self {
        Self::new(SigmoidKind::Step, 1.0).unwrap()
    }

    pub fn ramp() -> Self {
        Self::new(SigmoidKind::Ramp, 1.0).unwrap()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.kind.base(self.slope * x)
    }
}

/// Centered bell `phi(x) = 1/2 (sigma(s(x+1)) - sigma(s(x-1)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellKernel {
    pub sigmoid: Sigmoid,
    pub scale: f64,
}

impl BellKernel {
    pub fn new(sigmoid: Sigmoid, scale: f64) -> Self {
        assert!(scale.is_finite() && scale > 0.0, "bell scale must be positive");
        Self { sigmoid, scale }
    }

    /// Evaluates the bell.
    ///
    /// The formula is applied at `-|x|`, which equals the value at `x` by the
    /// oddness of `sigma - 1/2` and avoids cancellation between two sigmoids
    /// that are both close to one.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let u = -x.abs();
        let v = 0.5 * (self.sigmoid.eval(self.scale * (u + 1.0)) - self.sigmoid.eval(self.scale * (u - 1.0)));
        v.max(0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.sigmoid.alpha
    }

    /// Truncated partition of unity `sum_{|k| <= trunc} phi(x - k)`.
    pub fn partition_sum(&self, x: f64, trunc: i64) -> f64 {
        (-trunc..=trunc).map(|k| self.eval(x - k as f64)).sum()
    }
}

/// `max_{k_lo <= k <= k_hi} phi(n x - k)`.
///
/// Fails with [`Error::ZeroDenominator`] when every weight vanishes, which
/// happens for compactly supported bells on coarse lattices.
pub fn phi_max_over_cells(b: &BellKernel, n: u64, x: f64, k_lo: i64, k_hi: i64) -> Result<f64> {
    if k_lo > k_hi {
        return Err(Error::Domain(format!("empty cell range {k_lo}..={k_hi}")));
    }
    let nx = n as f64 * x;
    let m = (k_lo..=k_hi)
        .map(|k| b.eval(nx - k as f64))
        .fold(0.0_f64, f64::max);
    if m > 0.0 {
        Ok(m)
    } else {
        Err(Error::ZeroDenominator(format!(
            "all bell weights vanish at x = {x} for n = {n}, k in {k_lo}..={k_hi}"
        )))
    }
}

/// `sup_{|u| > n delta} phi(u)`, attained as the right limit at `n delta`
/// because the bell is nonincreasing on `[0, inf)`.
pub fn phi_tail_sup(b: &BellKernel, n: u64, delta: f64) -> f64 {
    let t = n as f64 * delta;
    b.eval(next_up(t.abs()))
}

fn next_up(t: f64) -> f64 {
    if t.is_nan() || t == f64::INFINITY {
        t
    } else if t == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(t.to_bits() + 1)
    }
}

/// `sup_x max_{|k| <= trunc} phi(x - k) |x - k|^beta`, with `|0|^0 = 1`.
///
/// The sup is taken over a grid of `[0, 1)` with step `grid_step`, then
/// refined locally around the best grid point.
pub fn m_beta(b: &BellKernel, beta: f64, trunc: usize, grid_step: f64) -> f64 {
    assert!(beta >= 0.0, "beta must be nonnegative");
    let trunc = trunc as i64;
    let term = |x: f64| -> f64 {
        let mut best = 0.0_f64;
        for k in -trunc..=trunc {
            let u = x - k as f64;
            let w = b.eval(u) * u.abs().powf(beta);
            best = best.max(w);
        }
        best
    };
    let steps = (1.0 / grid_step).ceil().max(1.0) as usize;
    let (mut best_x, mut best) = (0.0, term(0.0));
    for i in 1..steps {
        let x = i as f64 * grid_step;
        let v = term(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let sub = 200;
    for i in 0..=sub {
        let x = best_x - grid_step + 2.0 * grid_step * i as f64 / sub as f64;
        best = best.max(term(x));
    }
    best
}

/// [`m_beta`] with the truncation radius doubled until it stabilizes.
pub fn m_beta_stable(b: &BellKernel, beta: f64) -> f64 {
    let mut trunc = 16;
    let mut prev = m_beta(b, beta, trunc, MOMENT_GRID_STEP);
    while trunc < MAX_TRUNC {
        trunc *= 2;
        let next = m_beta(b, beta, trunc, MOMENT_GRID_STEP);
        if (next - prev).abs() <= MOMENT_REL_TOL * next.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        prev = next;
    }
    prev
}

/// A possibly divergent moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn finite(self, what: &str) -> Result<f64> {
        match self {
            Moment::Finite(v) => Ok(v),
            Moment::Infinite => Err(Error::NonIntegrable(format!("{what} is infinite"))),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Moment::Finite(_))
    }
}

impl std::fmt::Display for Moment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Moment::Finite(v) => write!(f, "{v}"),
            Moment::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ChiKind {
    /// `1 / (1 + c x^2)`
    Rational { c: f64 },
    /// `max(0, 1 - |x|)`
    Hat,
}

impl ChiKind {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ChiKind::Rational { c } => 1.0 / (1.0 + c * x * x),
            ChiKind::Hat => (1.0 - x.abs()).max(0.0),
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            ChiKind::Rational { c } => {
                let d = 1.0 + c * x * x;
                -2.0 * c * x / (d * d)
            }
            ChiKind::Hat => {
                if x.abs() >= 1.0 || x == 0.0 {
                    0.0
                } else {
                    -x.signum()
                }
            }
        }
    }

    /// `int_0^u chi`.
    #[inline]
    pub fn antiderivative(self, u: f64) -> f64 {
        match self {
            ChiKind::Rational { c } => {
                let r = c.sqrt();
                (r * u).atan() / r
            }
            ChiKind::Hat => {
                let a = u.abs().min(1.0);
                u.signum() * (a - 0.5 * a * a)
            }
        }
    }

    /// `int_{u0}^{u1} chi`.
    ///
    /// For the rational kernel the difference of arctangents is folded into
    /// one arctangent, `atan x - atan y = atan((x - y) / (1 + x y))` when
    /// `x y > -1`, which avoids cancellation far from the origin.
    #[inline]
    pub fn increment(self, u0: f64, u1: f64) -> f64 {
        match self {
            ChiKind::Rational { c } => {
                let p = 1.0 + c * u0 * u1;
                let r = c.sqrt();
                if p > 0.0 {
                    atan_folded(r * (u1 - u0) / p) / r
                } else {
                    ((r * u1).atan() - (r * u0).atan()) / r
                }
            }
            ChiKind::Hat => self.antiderivative(u1) - self.antiderivative(u0),
        }
    }

    /// `int_0^u v chi(v) dv`.
    #[inline]
    pub fn first_moment_antiderivative(self, u: f64) -> f64 {
        match self {
            ChiKind::Rational { c } => (c * u * u).ln_1p() / (2.0 * c),
            ChiKind::Hat => {
                let a = u.abs().min(1.0);
                0.5 * a * a - a * a * a / 3.0
            }
        }
    }

    /// Support in the `u` variable, `None` when unbounded.
    pub fn support(self) -> Option<(f64, f64)> {
        match self {
            ChiKind::Rational { .. } => None,
            ChiKind::Hat => Some((-1.0, 1.0)),
        }
    }

    pub fn l1_norm(self) -> f64 {
        match self {
            ChiKind::Rational { c } => PI / c.sqrt(),
            ChiKind::Hat => 1.0,
        }
    }
}

/// `atan(z)`, by its odd Taylor series when `|z| < 2^-7` (truncation below
/// `z^15 / 15`, far under one ulp) and by `f64::atan` otherwise.
#[inline]
fn atan_folded(z: f64) -> f64 {
    if z.abs() < 0.0078125 {
        let z2 = z * z;
        let s = 1.0 / 13.0;
        let s = 1.0 / 11.0 - z2 * s;
        let s = 1.0 / 9.0 - z2 * s;
        let s = 1.0 / 7.0 - z2 * s;
        let s = 1.0 / 5.0 - z2 * s;
        let s = 1.0 / 3.0 - z2 * s;
        z * (1.0 - z2 * s)
    } else {
        z.atan()
    }
}

/// Averaging kernel used by the Durrmeyer families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiKernel {
    pub kind: ChiKind,
    #[serde(skip)]
    constants: OnceLock<KernelConstants>,
}

impl PartialEq for ChiKernel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl ChiKernel {
    pub fn new(kind: ChiKind) -> Result<Self> {
        if let ChiKind::Rational { c } = kind {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Domain(format!("rational chi needs c > 0, got {c}")));
            }
        }
        Ok(Self {
            kind,
            constants: OnceLock::new(),
        })
    }

    pub fn rational(c: f64) -> Self {
        Self::new(ChiKind::Rational { c }).expect("positive c")
    }

    pub fn hat() -> Self {
        Self::new(ChiKind::Hat).unwrap()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.kind.eval(x)
    }

    /// Constants computed on first use with the default grid.
    pub fn constants(&self) -> &KernelConstants {
        self.constants
            .get_or_init(|| chi_constants(self, 64, MOMENT_GRID_STEP))
    }
}

/// Constants the operator theory consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    /// `int_0^1 chi`
    pub a: f64,
    pub l1_norm: Moment,
    /// `sup_t sum_k chi(t - k)`
    pub m0: f64,
    /// `int |u| chi(u) du`
    pub m1_tilde: Moment,
    /// `(beta, m_beta(phi))` pairs, filled by [`KernelConstants::with_m_beta`].
    pub m_beta: Vec<(f64, f64)>,
}

impl KernelConstants {
    pub fn with_m_beta(mut self, bell: &BellKernel, betas: &[f64]) -> Self {
        for &beta in betas {
            self.m_beta.push((beta, m_beta_stable(bell, beta)));
        }
        self
    }

    pub fn m_beta_for(&self, beta: f64) -> Option<f64> {
        self.m_beta.iter().find(|(b, _)| *b == beta).map(|(_, v)| *v)
    }
}

/// Lattice sum `sum_{|k| <= trunc} chi(t - k)` plus an Euler-Maclaurin
/// estimate of both tails.
fn chi_lattice_sum(kind: ChiKind, t: f64, trunc: i64) -> f64 {
    let mut s: f64 = (-trunc..=trunc).map(|k| kind.eval(t - k as f64)).sum();
    if kind.support().is_none() {
        let half = 0.5 * kind.l1_norm();
        for start in [trunc as f64 + 1.0 - t, trunc as f64 + 1.0 + t] {
            let integral = half - kind.antiderivative(start);
            s += integral + 0.5 * kind.eval(start) - kind.derivative(start) / 12.0;
        }
    }
    s
}

fn chi_m0(kind: ChiKind, trunc: i64, grid_step: f64) -> f64 {
    let steps = (1.0 / grid_step).ceil().max(1.0) as usize;
    (0..steps)
        .map(|i| chi_lattice_sum(kind, i as f64 * grid_step, trunc))
        .fold(0.0, f64::max)
}

/// Computes the averaging-kernel constants.
///
/// Closed forms are used for `A`, `||chi||_1` and the first absolute moment;
/// `M0` is a grid sup over one period with the truncation radius doubled
/// from `trunc` until the relative change drops below [`MOMENT_REL_TOL`].
pub fn chi_constants(c: &ChiKernel, trunc: usize, grid_step: f64) -> KernelConstants {
    let kind = c.kind;
    let a = kind.antiderivative(1.0) - kind.antiderivative(0.0);
    let (m0, m1_tilde) = match kind {
        ChiKind::Hat => (chi_m0(kind, 2, grid_step), Moment::Finite(1.0 / 3.0)),
        ChiKind::Rational { .. } => {
            let mut k = trunc.max(1) as i64;
            let mut prev = chi_m0(kind, k, grid_step);
            loop {
                k *= 2;
                let next = chi_m0(kind, k, grid_step);
                if (next - prev).abs() <= MOMENT_REL_TOL * next || k as usize >= MAX_TRUNC {
                    break (next, Moment::Infinite);
                }
                prev = next;
            }
        }
    };
    KernelConstants {
        a,
        l1_norm: Moment::Finite(kind.l1_norm()),
        m0,
        m1_tilde,
        m_beta: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [SigmoidKind; 4] = [
        SigmoidKind::Logistic,
        SigmoidKind::Tanh,
        SigmoidKind::Step,
        SigmoidKind::Ramp,
    ];

    fn bell(kind: SigmoidKind) -> BellKernel {
        BellKernel::new(Sigmoid::new(kind, 1.0).unwrap(), 1.0)
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(Sigmoid::logistic(1.0).eval(0.0), 0.5);
        assert!((Sigmoid::logistic(1.0).eval(1.0) - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert_eq!(Sigmoid::ramp().eval(0.25), 0.75);
        assert_eq!(Sigmoid::step().eval(0.3), 0.5);
        assert_eq!(Sigmoid::step().eval(-0.5), 0.5);
        assert_eq!(Sigmoid::step().eval(0.500001), 1.0);
        // slope composes before the base shape
        assert_eq!(Sigmoid::new(SigmoidKind::Ramp, 2.0).unwrap().eval(0.125), 0.75);
    }

    #[test]
    fn sigmoid_is_odd_about_half() {
        let mut x = -40.0;
        while x <= 40.0 {
            for k in ALL {
                let s = Sigmoid::new(k, 1.0).unwrap();
                assert!((s.eval(x) + s.eval(-x) - 1.0).abs() < 1e-12, "{k:?} at {x}");
            }
            x += 0.0173;
        }
    }

    #[test]
    fn sigmoid_limits_and_monotone() {
        for k in ALL {
            let s = Sigmoid::new(k, 1.0).unwrap();
            let mut prev = s.eval(-50.0);
            assert!(prev <= 1e-12);
            assert!(s.eval(50.0) >= 1.0 - 1e-12);
            for i in 1..=10_000 {
                let v = s.eval(-50.0 + i as f64 * 0.01);
                assert!(v >= prev, "{k:?}");
                prev = v;
            }
        }
        assert_eq!(Sigmoid::step().eval(-0.51), 0.0);
        assert_eq!(Sigmoid::ramp().eval(0.51), 1.0);
    }

    #[test]
    fn phi_examples() {
        let l = bell(SigmoidKind::Logistic);
        // sigma(1) - 1/2 and (sigma(3) - sigma(1)) / 2
        let s1 = 1.0 / (1.0 + (-1.0f64).exp());
        let s3 = 1.0 / (1.0 + (-3.0f64).exp());
        assert!((l.eval(0.0) - 0.231_058_578_630_004_9).abs() < 1e-14);
        assert!((l.eval(0.0) - (s1 - 0.5)).abs() < 1e-15);
        assert!((l.eval(2.0) - 0.5 * (s3 - s1)).abs() < 1e-15);
        assert!((l.eval(2.0) - 0.110_757).abs() < 1e-6);
        let r = bell(SigmoidKind::Ramp);
        assert_eq!(r.eval(0.0), 0.5);
        assert_eq!(r.eval(2.0), 0.0);
    }

    #[test]
    fn phi_shape() {
        for k in ALL {
            let b = bell(k);
            let mut prev = b.eval(0.0);
            assert!(prev <= 0.5);
            for i in 1..5000 {
                let x = i as f64 * 0.003;
                let v = b.eval(x);
                assert!(v >= 0.0 && v <= 0.5);
                assert!(v <= prev, "{k:?} increases at {x}");
                assert!((v - b.eval(-x)).abs() < 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn partition_of_unity_truncated() {
        let l = bell(SigmoidKind::Logistic);
        let r = bell(SigmoidKind::Ramp);
        for i in 0..100 {
            let x = i as f64 / 100.0;
            assert!((l.partition_sum(x, 40) - 1.0).abs() < 1e-6);
            assert!((r.partition_sum(x, 2) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn max_over_cells() {
        let l = bell(SigmoidKind::Logistic);
        let v = phi_max_over_cells(&l, 2, 0.5, 0, 1).unwrap();
        assert!((v - l.eval(0.0)).abs() < 1e-15);
        for k0 in 0..5 {
            let v = phi_max_over_cells(&l, 1, k0 as f64, 0, 4).unwrap();
            assert_eq!(v, l.eval(0.0));
        }
        let phi2 = l.eval(2.0);
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!(phi_max_over_cells(&l, 10, x, 0, 9).unwrap() >= phi2);
        }
        // compactly supported ramp bell: nothing within reach of x = 10
        let r = bell(SigmoidKind::Ramp);
        assert!(matches!(
            phi_max_over_cells(&r, 1, 10.0, 0, 1),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(phi_max_over_cells(&r, 1, 0.0, 3, 1).is_err());
    }

    #[test]
    fn tail_sup() {
        let l = bell(SigmoidKind::Logistic);
        assert!((phi_tail_sup(&l, 4, 0.5) - l.eval(2.0)).abs() < 1e-12);
        assert_eq!(phi_tail_sup(&bell(SigmoidKind::Ramp), 4, 0.5), 0.0);
        let seq: Vec<f64> = [4, 8, 16, 32].iter().map(|&n| phi_tail_sup(&l, n, 0.5)).collect();
        assert!(seq.windows(2).all(|w| w[1] <= w[0]));
        assert!(seq[3] < 1e-6);
        // step bell drops from 1/4 to 0 just past 3/2
        assert_eq!(phi_tail_sup(&bell(SigmoidKind::Step), 3, 0.5), 0.0);
    }

    #[test]
    fn tail_decay_rate() {
        let l = bell(SigmoidKind::Logistic);
        let alpha = l.alpha();
        let ratios: Vec<f64> = (1..=8)
            .map(|e| {
                let n = 1u64 << e;
                phi_tail_sup(&l, n, 0.5) / (n as f64).powf(-(1.0 + alpha))
            })
            .collect();
        // exponential decay beats any power once n delta clears the bell's bulk
        assert!(ratios.iter().all(|r| r.is_finite() && *r < 2.0), "{ratios:?}");
        assert!(ratios[3..].windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    }

    #[test]
    fn m_beta_examples() {
        let r = bell(SigmoidKind::Ramp);
        assert!((m_beta(&r, 1.0, 8, MOMENT_GRID_STEP) - 9.0 / 32.0).abs() < 1e-12);
        for k in ALL {
            let b = bell(k);
            assert!((m_beta(&b, 0.0, 8, MOMENT_GRID_STEP) - b.eval(0.0)).abs() < 1e-15);
        }
        let l = bell(SigmoidKind::Logistic);
        let m50 = m_beta(&l, 2.0, 50, MOMENT_GRID_STEP);
        let m100 = m_beta(&l, 2.0, 100, MOMENT_GRID_STEP);
        assert!(m50.is_finite() && m50 > 0.0);
        assert!((m50 - m100).abs() <= 1e-9 * m100);
        assert!((m_beta_stable(&l, 2.0) - m100).abs() <= 1e-9 * m100);
        assert!((m_beta_stable(&r, 1.0) - 9.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn chi_values() {
        assert_eq!(ChiKernel::rational(1.0).eval(0.0), 1.0);
        assert_eq!(ChiKernel::rational(1.0).eval(1.0), 0.5);
        assert_eq!(ChiKernel::hat().eval(0.25), 0.75);
        assert_eq!(ChiKernel::hat().eval(-3.0), 0.0);
        assert!(ChiKernel::new(ChiKind::Rational { c: 0.0 }).is_err());
    }

    #[test]
    fn hat_constants_closed_form() {
        let k = chi_constants(&ChiKernel::hat(), 8, MOMENT_GRID_STEP);
        assert_eq!(k.a, 0.5);
        assert_eq!(k.l1_norm, Moment::Finite(1.0));
        assert!((k.m0 - 1.0).abs() < 1e-15);
        assert_eq!(k.m1_tilde, Moment::Finite(1.0 / 3.0));
    }

    #[test]
    fn rational_constants() {
        for c in [1.0, 0.5, 0.002] {
            let chi = ChiKernel::rational(c);
            let k = chi.constants();
            let r: f64 = c.sqrt();
            assert!((k.a - r.atan() / r).abs() < 1e-15);
            assert_eq!(k.l1_norm, Moment::Finite(PI / r));
            assert_eq!(k.m1_tilde, Moment::Infinite);
            assert!(k.a <= k.l1_norm.finite("l1").unwrap());
            // sum_k 1/(1 + c (t-k)^2) = (pi/r) sinh(2 pi/r) / (cosh(2 pi/r) - cos(2 pi t)),
            // maximal at t = 0
            let q = 2.0 * PI / r;
            let exact = if q > 700.0 { PI / r } else { PI / r * q.sinh() / (q.cosh() - 1.0) };
            assert!((k.m0 - exact).abs() < 1e-8 * exact, "c={c}: {} vs {exact}", k.m0);
            assert!(k.m0 >= chi.eval(0.0));
        }
        assert!((ChiKernel::rational(1.0).constants().a - PI / 4.0).abs() < 1e-15);
        assert!(ChiKernel::rational(1.0).constants().m1_tilde.finite("M1").is_err());
    }

    #[test]
    fn antiderivatives_match_derivatives() {
        for kind in [ChiKind::Rational { c: 1.0 }, ChiKind::Rational { c: 0.3 }, ChiKind::Hat] {
            let h = 1e-6;
            for i in -30..30 {
                let u = i as f64 * 0.0737 + 0.01;
                let d = (kind.antiderivative(u + h) - kind.antiderivative(u - h)) / (2.0 * h);
                assert!((d - kind.eval(u)).abs() < 1e-7);
                let d1 = (kind.first_moment_antiderivative(u + h)
                    - kind.first_moment_antiderivative(u - h))
                    / (2.0 * h);
                assert!((d1 - u * kind.eval(u)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn increments_match_antiderivative_differences() {
        for kind in [ChiKind::Rational { c: 1.0 }, ChiKind::Rational { c: 0.001 }, ChiKind::Hat] {
            for (u0, u1) in [(-3.0, 2.0), (0.5, 0.75), (-7000.2, -7000.0), (150.0, 151.0), (-0.4, 1e-3), (12.0, 9000.0)] {
                let inc = kind.increment(u0, u1);
                let diff = kind.antiderivative(u1) - kind.antiderivative(u0);
                // the subtraction itself carries rounding of the order of its operands
                let scale = kind.antiderivative(u0).abs() + kind.antiderivative(u1).abs();
                assert!((inc - diff).abs() <= 1e-13 * diff.abs() + 4.0 * f64::EPSILON * scale, "{kind:?} {u0} {u1}: {inc} vs {diff}");
            }
        }
        // far-field piece in the rational series branch against the exact
        // value 1/(1 + u^2) integrated in closed form on a short interval
        let k = ChiKind::Rational { c: 1.0 };
        let (u0, u1) = (1000.0, 1000.5);
        let exact = ((u1 - u0) / (1.0 + u0 * u1) as f64).atan();
        assert!((k.increment(u0, u1) - exact).abs() <= 1e-22);
        for z in [1e-9, -3e-5, 0.0078, -0.00781] {
            assert!((atan_folded(z) - z.atan()).abs() <= f64::EPSILON * z.abs());
        }
    }
}
