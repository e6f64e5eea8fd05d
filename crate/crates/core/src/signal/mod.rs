//! Signals on a closed interval with values in `[0, 1]`, noise injection,
//! error metrics and file I/O.

pub mod io;
mod noise;

pub use io::{
    load_signal, pcm_to_unit, read_csv, read_wav, save_signal, unit_to_pcm, write_csv, write_wav,
    SignalFormat, WavData,
};
pub use noise::{add_noise, NoiseKind, NoiseSpec};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Nearest node; a value midway between two nodes belongs to the left one.
    Step,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    /// `offset + amplitude * sin(2 pi frequency x)`
    SineWave {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Right-closed branches: value `i` holds on `(edges[i], edges[i+1]]`,
    /// the first branch also owns the left endpoint.
    PiecewiseConstant { edges: Vec<f64>, values: Vec<f64> },
    Sampled {
        nodes: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
    },
}

/// A function `[a, b] -> [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    a: f64,
    b: f64,
    repr: Repr,
}

/// Constant pieces `values[i]` on `[edges[i], edges[i+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPieces {
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
}

/// Linear pieces between consecutive `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPieces {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_unit(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(i) => Err(Error::Domain(format!(
            "signal value {} at index {i} is outside [0, 1]",
            values[i]
        ))),
        None => Ok(()),
    }
}

fn check_domain(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::Domain(format!("invalid domain [{a}, {b}]")))
    }
}

impl Signal {
    pub fn sine_wave(a: f64, b: f64, offset: f64, amplitude: f64, frequency: f64) -> Result<Self> {
        check_domain(a, b)?;
        let amp = amplitude.abs();
        if !(offset - amp >= 0.0 && offset + amp <= 1.0) {
            return Err(Error::Domain(format!(
                "sine wave {offset} +/- {amp} leaves [0, 1]"
            )));
        }
        Ok(Self {
            a,
            b,
            repr: Repr::SineWave {
                offset,
                amplitude,
                frequency,
            },
        })
    }

    /// `breakpoints` are the interior jump locations, strictly increasing.
    pub fn piecewise_constant(a: f64, b: f64, breakpoints: &[f64], values: &[f64]) -> Result<Self> {
        check_domain(a, b)?;
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: breakpoints.len() + 1,
                got: values.len(),
            });
        }
        check_unit(values)?;
        let mut edges = Vec::with_capacity(values.len() + 1);
        edges.push(a);
        for &p in breakpoints {
            if !(p > *edges.last().unwrap() && p < b) {
                return Err(Error::Domain(format!(
                    "breakpoint {p} is not strictly increasing inside ({a}, {b})"
                )));
            }
            edges.push(p);
        }
        edges.push(b);
        Ok(Self {
            a,
            b,
            repr: Repr::PiecewiseConstant {
                edges,
                values: values.to_vec(),
            },
        })
    }

    /// Samples at arbitrary strictly increasing nodes; the domain is
    /// `[nodes[0], nodes[last]]`.
    pub fn sampled(nodes: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                got: values.len(),
            });
        }
        if nodes.len() < 2 {
            return Err(Error::Domain("a sampled signal needs at least two samples".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("sample nodes must be strictly increasing".into()));
        }
        check_unit(&values)?;
        let (a, b) = (nodes[0], *nodes.last().unwrap());
        check_domain(a, b)?;
        Ok(Self {
            a,
            b,
            repr: Repr::Sampled {
                nodes,
                values,
                interpolation,
            },
        })
    }

    /// Samples on the uniform grid `a + j (b - a) / (m - 1)`.
    pub fn sampled_uniform(a: f64, b: f64, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        check_domain(a, b)?;
        if values.len() < 2 {
            return Err(Error::Domain("a sampled signal needs at least two samples".into()));
        }
        let nodes = metric_grid(a, b, values.len());
        Self::sampled(nodes, values, interpolation)
    }

    /// Constant signal `c` on `[a, b]`.
    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::piecewise_constant(a, b, &[], &[c])
    }

    /// The four-branch test function with jumps at 0.15, 0.4 and 0.7.
    pub fn piecewise_benchmark() -> Self {
        Self::piecewise_constant(0.0, 1.0, &[0.15, 0.4, 0.7], &[0.25, 0.72, 0.35, 0.55]).unwrap()
    }

    /// `0.45 + 0.25 sin(8 pi x)` on `[0, 1]`.
    pub fn sine_g() -> Self {
        Self::sine_wave(0.0, 1.0, 0.45, 0.25, 4.0).unwrap()
    }

    /// `f(x) = x` on `[0, 1]`.
    pub fn identity() -> Self {
        Self::sampled(vec![0.0, 1.0], vec![0.0, 1.0], Interpolation::Linear).unwrap()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    /// Whether the signal has no jumps.
    pub fn is_continuous(&self) -> bool {
        match &self.repr {
            Repr::SineWave { .. } => true,
            Repr::PiecewiseConstant { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
            Repr::Sampled {
                interpolation,
                values,
                ..
            } => *interpolation == Interpolation::Linear || values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= self.a && x <= self.b) {
            return Err(Error::Domain(format!(
                "x = {x} outside [{}, {}]",
                self.a, self.b
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::SineWave {
                offset,
                amplitude,
                frequency,
            } => (offset + amplitude * (2.0 * PI * frequency * x).sin()).clamp(0.0, 1.0),
            Repr::PiecewiseConstant { edges, values } => {
                let interior = &edges[1..edges.len() - 1];
                values[interior.partition_point(|&e| e < x)]
            }
            Repr::Sampled {
                nodes,
                values,
                interpolation: Interpolation::Step,
            } => {
                // first node whose right half-cell contains x
                let j = nodes.partition_point(|&t| t < x);
                if j == 0 {
                    values[0]
                } else if j == nodes.len() {
                    values[j - 1]
                } else {
                    let mid = 0.5 * (nodes[j - 1] + nodes[j]);
                    if x <= mid {
                        values[j - 1]
                    } else {
                        values[j]
                    }
                }
            }
            Repr::Sampled {
                nodes,
                values,
                interpolation: Interpolation::Linear,
            } => {
                let j = nodes.partition_point(|&t| t <= x).clamp(1, nodes.len() - 1);
                let (x0, x1) = (nodes[j - 1], nodes[j]);
                let w = (x - x0) / (x1 - x0);
                values[j - 1] + w * (values[j] - values[j - 1])
            }
        }
    }

    /// Constant-piece decomposition, when the signal is piecewise constant.
    pub fn step_pieces(&self) -> Option<StepPieces> {
        match &self.repr {
            Repr::PiecewiseConstant { edges, values } => Some(StepPieces {
                edges: edges.clone(),
                values: values.clone(),
            }),
            Repr::Sampled {
                nodes,
                values,
                interpolation: Interpolation::Step,
            } => {
                let mut edges = Vec::with_capacity(nodes.len() + 1);
                edges.push(self.a);
                edges.extend(nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                edges.push(self.b);
                Some(StepPieces {
                    edges,
                    values: values.clone(),
                })
            }
            _ => None,
        }
    }

    pub fn linear_pieces(&self) -> Option<LinearPieces> {
        match &self.repr {
            Repr::Sampled {
                nodes,
                values,
                interpolation: Interpolation::Linear,
            } => Some(LinearPieces {
                nodes: nodes.clone(),
                values: values.clone(),
            }),
            _ => None,
        }
    }

    /// Points where the signal or its derivative may be discontinuous,
    /// including both endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        match (&self.repr, self.step_pieces()) {
            (_, Some(p)) => p.edges,
            (Repr::Sampled { nodes, .. }, None) => nodes.clone(),
            _ => vec![self.a, self.b],
        }
    }

    /// Exact antiderivative `x -> int_a^x f`.
    pub fn primitive(&self) -> Primitive<'_> {
        let prefix = match &self.repr {
            Repr::SineWave { .. } => Vec::new(),
            _ => {
                let (edges, areas): (Vec<f64>, Vec<f64>) = if let Some(p) = self.step_pieces() {
                    let areas = p
                        .values
                        .iter()
                        .zip(p.edges.windows(2))
                        .map(|(v, e)| v * (e[1] - e[0]))
                        .collect();
                    (p.edges, areas)
                } else {
                    let p = self.linear_pieces().unwrap();
                    let areas = p
                        .nodes
                        .windows(2)
                        .zip(p.values.windows(2))
                        .map(|(x, v)| 0.5 * (v[0] + v[1]) * (x[1] - x[0]))
                        .collect();
                    (p.nodes, areas)
                };
                let mut acc = 0.0;
                let mut prefix = Vec::with_capacity(edges.len());
                prefix.push(0.0);
                for a in areas {
                    acc += a;
                    prefix.push(acc);
                }
                prefix
            }
        };
        Primitive {
            signal: self,
            pieces: self.step_pieces(),
            prefix,
        }
    }

    /// `int_l^r f` for `a <= l <= r <= b`.
    pub fn integral(&self, l: f64, r: f64) -> f64 {
        let p = self.primitive();
        p.eval(r) - p.eval(l)
    }
}

/// Cached antiderivative of a [`Signal`].
#[derive(Debug, Clone)]
pub struct Primitive<'a> {
    signal: &'a Signal,
    pieces: Option<StepPieces>,
    prefix: Vec<f64>,
}

impl Primitive<'_> {
    pub fn eval(&self, x: f64) -> f64 {
        let s = self.signal;
        let x = x.clamp(s.a, s.b);
        match &s.repr {
            Repr::SineWave {
                offset,
                amplitude,
                frequency,
            } => {
                let w = 2.0 * PI * frequency;
                let anti = |t: f64| {
                    if w == 0.0 {
                        offset * t
                    } else {
                        offset * t - amplitude / w * (w * t).cos()
                    }
                };
                anti(x) - anti(s.a)
            }
            _ => {
                if let Some(p) = &self.pieces {
                    let i = p.edges.partition_point(|&e| e <= x).clamp(1, p.values.len());
                    self.prefix[i - 1] + p.values[i - 1] * (x - p.edges[i - 1])
                } else {
                    let Repr::Sampled { nodes, values, .. } = &s.repr else {
                        unreachable!()
                    };
                    let j = nodes.partition_point(|&t| t <= x).clamp(1, nodes.len() - 1);
                    let (x0, x1) = (nodes[j - 1], nodes[j]);
                    let slope = (values[j] - values[j - 1]) / (x1 - x0);
                    let dx = x - x0;
                    self.prefix[j - 1] + values[j - 1] * dx + 0.5 * slope * dx * dx
                }
            }
        }
    }
}

/// `m` evenly spaced points `a + j (b - a) / (m - 1)`, endpoints included.
pub fn metric_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (m - 1) as f64;
            (0..m)
                .map(|j| if j == m - 1 { b } else { a + j as f64 * h })
                .collect()
        }
    }
}

/// Affine map of an original range `[lo, hi]` onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub lo: f64,
    pub hi: f64,
}

impl AffineMap {
    pub fn to_unit(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
}

/// Rescales samples onto `[0, 1]` by their min and max.
///
/// A constant sequence maps to all zeros with the span `[min, min + 1]`.
pub fn normalize_unit(samples: &[f64]) -> (Vec<f64>, AffineMap) {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let map = if samples.is_empty() {
        AffineMap { lo: 0.0, hi: 1.0 }
    } else if hi > lo {
        AffineMap { lo, hi }
    } else {
        AffineMap { lo, hi: lo + 1.0 }
    };
    let unit = samples
        .iter()
        .map(|&v| map.to_unit(v).clamp(0.0, 1.0))
        .collect();
    (unit, map)
}

/// Maximum, mean absolute and mean squared error over a set of points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub me: f64,
    pub mae: f64,
    pub mse: f64,
    pub sample_count: usize,
}

pub fn error_report(approx: &[f64], reference: &[f64]) -> Result<ErrorReport> {
    if approx.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            got: approx.len(),
        });
    }
    if approx.is_empty() {
        return Err(Error::Domain("error report over zero points".into()));
    }
    let (mut me, mut sa, mut sq) = (0.0_f64, 0.0, 0.0);
    for (x, y) in approx.iter().zip(reference) {
        let d = (x - y).abs();
        me = me.max(d);
        sa += d;
        sq += d * d;
    }
    let m = approx.len() as f64;
    Ok(ErrorReport {
        me,
        mae: sa / m,
        mse: sq / m,
        sample_count: approx.len(),
    })
}

/// [`error_report`] against a signal evaluated on `grid`.
pub fn error_report_against(approx: &[f64], reference: &Signal, grid: &[f64]) -> Result<ErrorReport> {
    if approx.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: approx.len(),
        });
    }
    let r = grid.iter().map(|&x| reference.eval(x)).collect::<Result<Vec<_>>>()?;
    error_report(approx, &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn benchmark_branches() {
        let f = Signal::piecewise_benchmark();
        assert_eq!(f.eval(0.0).unwrap(), 0.25);
        assert_eq!(f.eval(0.15).unwrap(), 0.25);
        assert_eq!(f.eval(0.150001).unwrap(), 0.72);
        assert_eq!(f.eval(0.4).unwrap(), 0.72);
        assert_eq!(f.eval(0.7).unwrap(), 0.35);
        assert_eq!(f.eval(1.0).unwrap(), 0.55);
        assert!(matches!(f.eval(1.01), Err(Error::Domain(_))));
        assert!(!f.is_continuous());
    }

    #[test]
    fn sine_g_value() {
        let g = Signal::sine_g();
        assert!((g.eval(1.0 / 16.0).unwrap() - 0.7).abs() < 1e-15);
        assert!(g.is_continuous());
        assert!(Signal::sine_wave(0.0, 1.0, 0.9, 0.25, 1.0).is_err());
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(Signal::piecewise_constant(0.0, 1.0, &[0.5], &[0.2, 1.2]).is_err());
        assert!(Signal::piecewise_constant(0.0, 1.0, &[0.6, 0.5], &[0.2, 0.3, 0.4]).is_err());
        assert!(Signal::piecewise_constant(0.0, 1.0, &[1.0], &[0.2, 0.3]).is_err());
        assert!(Signal::sampled(vec![0.0, 0.0], vec![0.1, 0.2], Interpolation::Step).is_err());
        assert!(Signal::sampled(vec![0.0], vec![0.1], Interpolation::Step).is_err());
        assert!(Signal::constant(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn step_sampling_nearest_node() {
        let s = Signal::sampled_uniform(0.0, 1.0, vec![0.1, 0.2, 0.3], Interpolation::Step).unwrap();
        assert_eq!(s.eval(0.0).unwrap(), 0.1);
        assert_eq!(s.eval(0.25).unwrap(), 0.1);
        assert_eq!(s.eval(0.26).unwrap(), 0.2);
        assert_eq!(s.eval(0.5).unwrap(), 0.2);
        assert_eq!(s.eval(1.0).unwrap(), 0.3);
        let p = s.step_pieces().unwrap();
        assert_eq!(p.edges, vec![0.0, 0.25, 0.75, 1.0]);
        assert!((s.integral(0.0, 1.0) - (0.025 + 0.1 + 0.075)).abs() < 1e-15);
    }

    #[test]
    fn linear_sampling() {
        let id = Signal::identity();
        assert_eq!(id.eval(0.3).unwrap(), 0.3);
        assert!((id.integral(0.0, 0.5) - 0.125).abs() < 1e-15);
        assert!(id.is_continuous());
    }

    #[test]
    fn primitive_matches_quadrature() {
        let g = Signal::sine_g();
        let exact = 0.45 * 0.3 + 0.25 / (8.0 * PI) * (1.0 - (8.0 * PI * 0.3).cos());
        assert!((g.integral(0.0, 0.3) - exact).abs() < 1e-14);
        let f = Signal::piecewise_benchmark();
        assert!((f.integral(0.1, 0.5) - (0.05 * 0.25 + 0.25 * 0.72 + 0.1 * 0.35)).abs() < 1e-15);
        assert!((f.integral(0.15, 0.155) * 200.0 - 0.72).abs() < 1e-12);
    }

    #[test]
    fn grid_endpoints() {
        let g = metric_grid(0.0, 1.0, 8000);
        assert_eq!(g.len(), 8000);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[7999], 1.0);
        assert!((g[1] - 1.0 / 7999.0).abs() < 1e-18);
    }

    #[test]
    fn normalize_examples() {
        let (u, m) = normalize_unit(&[-1.0, 0.0, 1.0]);
        assert_eq!(u, vec![0.0, 0.5, 1.0]);
        assert_eq!(m, AffineMap { lo: -1.0, hi: 1.0 });
        let (u, m) = normalize_unit(&[3.0, 3.0]);
        assert_eq!(u, vec![0.0, 0.0]);
        assert_eq!(m, AffineMap { lo: 3.0, hi: 4.0 });
    }

    #[test]
    fn error_report_examples() {
        let r = error_report(&[0.2, 0.3], &[0.2, 0.3]).unwrap();
        assert_eq!((r.me, r.mae, r.mse), (0.0, 0.0, 0.0));
        let r = error_report(&[0.6, 0.1, 0.5], &[0.5, 0.2, 0.4]).unwrap();
        assert!((r.me - 0.1).abs() < 1e-15 && (r.mae - 0.1).abs() < 1e-15 && (r.mse - 0.01).abs() < 1e-15);
        assert!(matches!(
            error_report(&[0.1], &[0.1, 0.2]),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    proptest! {
        #[test]
        fn normalize_round_trip(xs in prop::collection::vec(-1e3..1e3f64, 2..50)) {
            let (u, m) = normalize_unit(&xs);
            for (x, v) in xs.iter().zip(&u) {
                prop_assert!((m.from_unit(*v) - x).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn error_report_consistent(pairs in prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 1..100)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = error_report(&a, &b).unwrap();
            prop_assert!(r.mae <= r.me + 1e-15);
            prop_assert!(r.mse <= r.me * r.me + 1e-15);
            prop_assert!(r.mse <= r.me * r.mae + 1e-15);
        }
    }
}
