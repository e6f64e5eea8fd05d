//! Modulus of continuity, the sup-norm error bound and convergence studies.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{m_beta_stable, BellKernel, ChiKernel, KernelConstants};
use crate::operators::{evaluate, OperatorConfig};
use crate::signal::{metric_grid, Signal};

pub const DEFAULT_OMEGA_STEP: f64 = 1e-4;
pub const DEFAULT_INFLATION: f64 = 1.05;

/// Empirical `omega(f, delta)` on a grid of step at most `grid_step`.
///
/// Pairs with `|x - y| <= delta` are scanned with a sliding window, so the
/// result is a lower bound that increases to the true modulus as the grid
/// is refined.
pub fn modulus_of_continuity(f: &Signal, delta: f64, grid_step: f64) -> Result<f64> {
    let (a, b) = f.domain();
    if !(delta > 0.0) || !(grid_step > 0.0) {
        return Err(Error::Domain(format!(
            "delta and grid step must be positive, got {delta} and {grid_step}"
        )));
    }
    if delta > b - a {
        return Err(Error::Domain(format!("delta = {delta} exceeds the domain length {}", b - a)));
    }
    let m = ((b - a) / grid_step).ceil() as usize + 1;
    let xs = metric_grid(a, b, m);
    let ys = xs.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let h = (b - a) / (m - 1) as f64;
    let w = ((delta / h) * (1.0 + 1e-12)).floor() as usize;
    Ok(window_oscillation(&ys, w))
}

/// `max_i (max - min)` over windows `ys[i..=i+w]`.
fn window_oscillation(ys: &[f64], w: usize) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0_f64;
    for (j, &y) in ys.iter().enumerate() {
        while maxq.back().is_some_and(|&i| ys[i] <= y) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&i| ys[i] >= y) {
            minq.pop_back();
        }
        minq.push_back(j);
        let start = j.saturating_sub(w);
        while maxq.front().is_some_and(|&i| i < start) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i < start) {
            minq.pop_front();
        }
        best = best.max(ys[maxq[0]] - ys[minq[0]]);
    }
    best
}

/// Inputs of the sup-norm bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: u64,
    pub delta_n: f64,
    #[serde(rename = "Delta_n")]
    pub big_delta_n: f64,
    pub alpha: f64,
    pub constants: KernelConstants,
    /// `phi(2)`
    pub phi2: f64,
    /// `m_{1 + alpha}(phi)`
    pub m_1plus_alpha: f64,
}

impl BoundInputs {
    /// Uses `delta_n = Delta_n = n^{-1/2}`.
    pub fn for_kernels(n: u64, bell: &BellKernel, chi: &ChiKernel, alpha: f64) -> Result<Self> {
        if n == 0 || !(alpha > 0.0) {
            return Err(Error::Domain(format!("need n > 0 and alpha > 0, got {n} and {alpha}")));
        }
        let d = 1.0 / (n as f64).sqrt();
        Ok(Self {
            n,
            delta_n: d,
            big_delta_n: d,
            alpha,
            constants: chi.constants().clone(),
            phi2: bell.eval(2.0),
            m_1plus_alpha: m_beta_stable(bell, 1.0 + alpha),
        })
    }

    fn check(&self) -> Result<()> {
        let vals = [
            self.n as f64,
            self.delta_n,
            self.big_delta_n,
            self.alpha,
            self.phi2,
            self.m_1plus_alpha,
            self.constants.a,
        ];
        if vals.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Domain("bound inputs must be positive and finite".into()))
        }
    }
}

/// `(omega(Delta)/A) (||chi||_1 + M1/(n Delta))
///   + max(m_{1+alpha} / (phi(2) (n delta)^{1+alpha}), omega(delta))`
pub fn sup_error_bound(inp: &BoundInputs, omega_big_delta: f64, omega_delta: f64) -> Result<f64> {
    inp.check()?;
    let k = &inp.constants;
    let m1 = k.m1_tilde.finite("first absolute moment of chi")?;
    let l1 = k.l1_norm.finite("L1 norm of chi")?;
    let nf = inp.n as f64;
    let first = omega_big_delta / k.a * (l1 + m1 / (nf * inp.big_delta_n));
    let tail = inp.m_1plus_alpha / (inp.phi2 * (nf * inp.delta_n).powf(1.0 + inp.alpha));
    Ok(first + tail.max(omega_delta))
}

/// How the bound column of a convergence study is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSettings {
    pub alpha: f64,
    pub omega_step: f64,
    /// Safety factor applied to the empirical modulus on the right side.
    pub inflation: f64,
}

impl BoundSettings {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            omega_step: DEFAULT_OMEGA_STEP,
            inflation: DEFAULT_INFLATION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub sup_error: f64,
    pub lp_error: f64,
    pub p: f64,
    pub bound: Option<f64>,
}

/// `((1/(b-a)) int |d|^p)^{1/p}` with the trapezoid rule on a uniform grid.
pub fn lp_norm(diff: &[f64], a: f64, b: f64, p: f64) -> f64 {
    let m = diff.len();
    if m < 2 {
        return diff.first().map_or(0.0, |d| d.abs());
    }
    let h = (b - a) / (m - 1) as f64;
    let pw: Vec<f64> = diff.iter().map(|d| d.abs().powf(p)).collect();
    let inner: f64 = pw[1..m - 1].iter().sum::<f64>() + 0.5 * (pw[0] + pw[m - 1]);
    (inner * h / (b - a)).powf(1.0 / p)
}

/// Runs the operator of `template` for every `n` in `ns` and records sup and
/// `L^p` errors on an `m`-point grid. With `bound` set, the Durrmeyer
/// sup-norm bound for the same `n` is attached.
pub fn convergence_study(
    template: &OperatorConfig,
    f: &Signal,
    ns: &[u64],
    p: f64,
    m: usize,
    bound: Option<&BoundSettings>,
) -> Result<Vec<ConvergenceRow>> {
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("n list must be nonempty and strictly ascending".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must be at least 1, got {p}")));
    }
    let (a, b) = f.domain();
    let grid = metric_grid(a, b, m);
    let reference = grid.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let cfg = template.with_n(n);
        let approx = evaluate(&cfg, f, &grid)?;
        let diff: Vec<f64> = approx.iter().zip(&reference).map(|(u, v)| u - v).collect();
        let sup_error = diff.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
        let bound = match bound {
            None => None,
            Some(s) => {
                let chi = template
                    .chi
                    .as_ref()
                    .ok_or_else(|| Error::Domain("bound needs an averaging kernel".into()))?;
                let inp = BoundInputs::for_kernels(n, &template.bell, chi, s.alpha)?;
                let wd = s.inflation * modulus_of_continuity(f, inp.big_delta_n.min(b - a), s.omega_step)?;
                let ws = s.inflation * modulus_of_continuity(f, inp.delta_n.min(b - a), s.omega_step)?;
                Some(sup_error_bound(&inp, wd, ws)?)
            }
        };
        rows.push(ConvergenceRow {
            n,
            sup_error,
            lp_error: lp_norm(&diff, a, b, p),
            p,
            bound,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log err` against `log n`.
///
/// Rows with zero error are skipped; `None` when fewer than two remain.
pub fn log_log_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sup_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.sup_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Sigmoid;
    use crate::operators::Family;

    fn logistic() -> BellKernel {
        BellKernel::new(Sigmoid::logistic(1.0), 1.0)
    }

    #[test]
    fn modulus_examples() {
        let c = Signal::constant(0.0, 1.0, 0.3).unwrap();
        assert_eq!(modulus_of_continuity(&c, 0.2, 1e-3).unwrap(), 0.0);
        let id = Signal::identity();
        let w = modulus_of_continuity(&id, 0.1, 1e-4).unwrap();
        assert!((w - 0.1).abs() <= 1e-4, "{w}");
        let pw = modulus_of_continuity(&Signal::piecewise_benchmark(), 0.01, 1e-4).unwrap();
        assert!((pw - 0.47).abs() < 1e-12, "{pw}");
        assert!(modulus_of_continuity(&id, 2.0, 1e-3).is_err());
    }

    #[test]
    fn modulus_monotone_in_delta() {
        let g = Signal::sine_g();
        let mut prev = 0.0;
        for d in [0.001, 0.01, 0.02, 0.05, 0.1, 0.3] {
            let w = modulus_of_continuity(&g, d, 1e-4).unwrap();
            assert!(w >= prev);
            prev = w;
        }
        assert!((prev - 0.5).abs() < 1e-6);
    }

    #[test]
    fn window_oscillation_brute_force() {
        let ys: Vec<f64> = (0..200).map(|i| (i * 37 % 101) as f64 / 100.0).collect();
        for w in [0, 1, 5, 50, 300] {
            let mut brute = 0.0_f64;
            for i in 0..ys.len() {
                for j in i..ys.len().min(i + w + 1) {
                    brute = brute.max((ys[i] - ys[j]).abs());
                }
            }
            assert_eq!(window_oscillation(&ys, w), brute);
        }
    }

    #[test]
    fn bound_for_constant_reduces_to_tail_term() {
        let inp = BoundInputs::for_kernels(100, &logistic(), &ChiKernel::hat(), 1.0).unwrap();
        let b = sup_error_bound(&inp, 0.0, 0.0).unwrap();
        let t = inp.m_1plus_alpha / (inp.phi2 * (100.0f64 * 0.1).powi(2));
        assert!((b - t).abs() < 1e-15);
    }

    #[test]
    fn bound_hand_substitution() {
        let inp = BoundInputs::for_kernels(100, &logistic(), &ChiKernel::hat(), 1.0).unwrap();
        let (wd, ws) = (0.1, 0.1);
        let b = sup_error_bound(&inp, wd, ws).unwrap();
        // A = 1/2, ||chi||_1 = 1, M1 = 1/3, n Delta = 10
        let hand = (0.1 / 0.5) * (1.0 + (1.0 / 3.0) / 10.0) + (inp.m_1plus_alpha / (inp.phi2 * 100.0)).max(0.1);
        assert!((b - hand).abs() < 1e-14);
    }

    #[test]
    fn bound_rejects_infinite_moment() {
        let inp = BoundInputs::for_kernels(25, &logistic(), &ChiKernel::rational(1.0), 1.0).unwrap();
        assert!(matches!(sup_error_bound(&inp, 0.1, 0.1), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn lp_norm_ordering() {
        let d: Vec<f64> = metric_grid(0.0, 1.0, 1001).iter().map(|x| (6.0 * x).sin() * 0.1).collect();
        let l1 = lp_norm(&d, 0.0, 1.0, 1.0);
        let l2 = lp_norm(&d, 0.0, 1.0, 2.0);
        let sup = d.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!(l1 <= l2 && l2 <= sup);
        assert!((lp_norm(&[0.1; 11], 0.0, 2.0, 3.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn study_constant_is_exact() {
        let cfg = OperatorConfig::new(Family::MaxMinDurrmeyer, 1, logistic()).with_chi(ChiKernel::hat());
        let f = Signal::constant(0.0, 1.0, 0.4).unwrap();
        let rows = convergence_study(&cfg, &f, &[5, 10], 2.0, 101, None).unwrap();
        assert!(rows.iter().all(|r| r.sup_error < 1e-12 && r.lp_error < 1e-12));
        assert!(convergence_study(&cfg, &f, &[10, 5], 2.0, 101, None).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let rows: Vec<ConvergenceRow> = [10u64, 20, 40, 80]
            .iter()
            .map(|&n| ConvergenceRow {
                n,
                sup_error: 3.0 / (n as f64).sqrt(),
                lp_error: 0.0,
                p: 1.0,
                bound: None,
            })
            .collect();
        assert!((log_log_slope(&rows).unwrap() + 0.5).abs() < 1e-12);
    }
}
