//! Integrals behind the operator coefficients.
//!
//! Durrmeyer coefficients need `int_a^b chi(n t - k) f(t) dt` and
//! `int_a^b chi(n t - k) dt` for every cell `k`. Whenever the kernel and
//! the signal representation allow it these are sums of antiderivative
//! differences; otherwise a composite midpoint rule with a fixed number of
//! panels per lattice cell is used. The adaptive Gauss-Kronrod engine is the
//! reference path used for cross-checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{ChiKernel, ChiKind};
use crate::signal::{Repr, Signal};

pub const DEFAULT_PANELS: usize = 64;
pub const DEFAULT_ADAPTIVE_TOL: f64 = 1e-10;

const MAX_INTERVALS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum QuadratureConfig {
    /// Exact antiderivative sums where available, composite midpoint with
    /// `fallback_panels` per lattice cell otherwise.
    ClosedFormPreferred { fallback_panels: usize },
    Composite { panels: usize },
    Adaptive { tol: f64 },
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig::ClosedFormPreferred {
            fallback_panels: DEFAULT_PANELS,
        }
    }
}

impl QuadratureConfig {
    pub fn composite(panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::Domain("composite quadrature needs at least one panel".into()));
        }
        Ok(QuadratureConfig::Composite { panels })
    }

    pub fn adaptive(tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Domain(format!("adaptive tolerance must be positive, got {tol}")));
        }
        Ok(QuadratureConfig::Adaptive { tol })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            QuadratureConfig::ClosedFormPreferred { fallback_panels: p }
            | QuadratureConfig::Composite { panels: p }
                if p == 0 =>
            {
                Err(Error::Domain("quadrature needs at least one panel".into()))
            }
            QuadratureConfig::Adaptive { tol } if !(tol > 0.0) => {
                Err(Error::Domain("adaptive tolerance must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = g(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = g(c - dx) + g(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature of `g` over `[lo, hi]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimates drop below `tol`.
pub fn integrate_adaptive<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::Domain(format!("integration bounds [{lo}, {hi}] are reversed")));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let (v, e) = gauss_kronrod(&g, lo, hi);
    if !(v + e).is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite integrand on [{lo}, {hi}]")));
    }
    let mut panels = vec![(lo, hi, v, e)];
    let mut total_err = e;
    while total_err > tol {
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure(format!(
                "no convergence on [{lo}, {hi}] after {MAX_INTERVALS} panels (error {total_err:e})"
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .unwrap();
        let (a, b, _, e) = panels.swap_remove(idx);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Err(Error::QuadratureFailure(format!(
                "panel [{a}, {b}] cannot be bisected further (error {total_err:e})"
            )));
        }
        let (v1, e1) = gauss_kronrod(&g, a, m);
        let (v2, e2) = gauss_kronrod(&g, m, b);
        if !(v1 + v2 + e1 + e2).is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        total_err += e1 + e2 - e;
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
        if total_err <= tol {
            // recompute to shed accumulated cancellation in the running sum
            total_err = panels.iter().map(|p| p.3).sum();
        }
    }
    Ok(panels.iter().map(|p| p.2).sum())
}

/// [`integrate_adaptive`] on each piece between consecutive `breaks`, with
/// the tolerance shared in proportion to piece length.
pub fn integrate_adaptive_pieces<G: Fn(f64) -> f64>(g: &G, breaks: &[f64], tol: f64) -> Result<f64> {
    let (lo, hi) = match (breaks.first(), breaks.last()) {
        (Some(&l), Some(&h)) if h > l => (l, h),
        _ => return Ok(0.0),
    };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += integrate_adaptive(g, w[0], w[1], tol * (w[1] - w[0]) / (hi - lo))?;
        }
    }
    Ok(total)
}

fn check_cell(n: u64, k: i64, a: f64, b: f64) -> Result<()> {
    let nf = n as f64;
    let (lo, hi) = ((nf * a).ceil() as i64, (nf * b).floor() as i64 - 1);
    if k < lo || k > hi || !(a < b) {
        return Err(Error::Domain(format!(
            "cell {k} is outside {lo}..={hi} for n = {n} on [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Sorted, deduplicated union of `points` clipped to `[lo, hi]`, endpoints included.
fn merged_breaks(lo: f64, hi: f64, points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = points.into_iter().filter(|&p| p > lo && p < hi).collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn lattice_points(n: u64, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let nf = n as f64;
    let (j0, j1) = ((nf * lo).ceil() as i64, (nf * hi).floor() as i64);
    (j0..=j1).map(move |j| j as f64 / nf)
}

/// Composite midpoint with `panels` panels on every lattice cell
/// `[j/n, (j+1)/n]` meeting `[lo, hi]`.
fn composite_lattice<G: Fn(f64) -> f64>(g: &G, n: u64, lo: f64, hi: f64, panels: usize) -> f64 {
    let breaks = merged_breaks(lo, hi, lattice_points(n, lo, hi));
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        let s: f64 = (0..panels).map(|p| g(w[0] + (p as f64 + 0.5) * h)).sum();
        total += s * h;
    }
    total
}

/// `int_a^b chi(n t - k) dt = (1/n) int_{na-k}^{nb-k} chi(u) du`.
pub fn chi_cell_mass(c: &ChiKernel, n: u64, k: i64, a: i64, b: i64, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    let (af, bf) = (a as f64, b as f64);
    check_cell(n, k, af, bf)?;
    let nf = n as f64;
    let kind = c.kind;
    let g = |t: f64| kind.eval(nf * t - k as f64);
    match *q {
        QuadratureConfig::ClosedFormPreferred { .. } => {
            Ok((kind.antiderivative(nf * bf - k as f64) - kind.antiderivative(nf * af - k as f64)) / nf)
        }
        QuadratureConfig::Composite { panels } => Ok(composite_lattice(&g, n, af, bf, panels)),
        QuadratureConfig::Adaptive { tol } => {
            let breaks = merged_breaks(af, bf, lattice_points(n, af, bf));
            integrate_adaptive_pieces(&g, &breaks, tol)
        }
    }
}

/// Numerator and denominator integrals of Durrmeyer coefficients, with the
/// per-signal setup done once and shared across cells.
pub struct DurrmeyerIntegrator<'a> {
    kind: ChiKind,
    signal: &'a Signal,
    n: u64,
    a: f64,
    b: f64,
    plan: Plan,
}

enum Plan {
    Step {
        edges: Vec<f64>,
        values: Vec<f64>,
    },
    Linear {
        nodes: Vec<f64>,
        values: Vec<f64>,
    },
    /// Midpoint tables on aligned lattice cells: `fvals[j * panels + p]` is
    /// `f` at panel `p` of cell `j0 + j`, and `table[(d + cells - 1) * panels + p]`
    /// is `chi(d + (p + 1/2) / panels)`.
    Composite {
        panels: usize,
        j0: i64,
        cells: usize,
        fvals: Vec<f64>,
        table: Vec<f64>,
    },
    Adaptive {
        tol: f64,
        breaks: Vec<f64>,
    },
}

impl<'a> DurrmeyerIntegrator<'a> {
    pub fn new(c: &ChiKernel, signal: &'a Signal, n: u64, q: &QuadratureConfig) -> Result<Self> {
        q.validate()?;
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        let (a, b) = signal.domain();
        let kind = c.kind;
        let plan = match *q {
            QuadratureConfig::ClosedFormPreferred { fallback_panels } => {
                if let Some(p) = signal.step_pieces() {
                    Plan::Step {
                        edges: p.edges,
                        values: p.values,
                    }
                } else if let Some(p) = signal.linear_pieces() {
                    Plan::Linear {
                        nodes: p.nodes,
                        values: p.values,
                    }
                } else {
                    Self::composite_plan(kind, signal, n, fallback_panels)?
                }
            }
            QuadratureConfig::Composite { panels } => Self::composite_plan(kind, signal, n, panels)?,
            QuadratureConfig::Adaptive { tol } => Plan::Adaptive {
                tol,
                breaks: merged_breaks(
                    a,
                    b,
                    signal.breakpoints().into_iter().chain(lattice_points(n, a, b)),
                ),
            },
        };
        Ok(Self {
            kind,
            signal,
            n,
            a,
            b,
            plan,
        })
    }

    fn composite_plan(kind: ChiKind, signal: &Signal, n: u64, panels: usize) -> Result<Plan> {
        let (a, b) = signal.domain();
        let nf = n as f64;
        let (na, nb) = (nf * a, nf * b);
        if na.fract() != 0.0 || nb.fract() != 0.0 {
            return Err(Error::Domain(format!(
                "composite Durrmeyer integrals need n*a and n*b integral, got {na} and {nb}"
            )));
        }
        let j0 = na as i64;
        let cells = (nb - na) as usize;
        let mut fvals = Vec::with_capacity(cells * panels);
        for j in 0..cells {
            for p in 0..panels {
                let t = ((j0 + j as i64) as f64 + (p as f64 + 0.5) / panels as f64) / nf;
                fvals.push(signal.eval_unchecked(t.clamp(a, b)));
            }
        }
        let span = 2 * cells - 1;
        let mut table = Vec::with_capacity(span * panels);
        for i in 0..span {
            let d = i as f64 - (cells as f64 - 1.0);
            for p in 0..panels {
                table.push(kind.eval(d + (p as f64 + 0.5) / panels as f64));
            }
        }
        Ok(Plan::Composite {
            panels,
            j0,
            cells,
            fvals,
            table,
        })
    }

    /// `(int chi(nt-k) f(t) dt, int chi(nt-k) dt)` over the signal domain.
    pub fn moments(&self, k: i64) -> Result<(f64, f64)> {
        let nf = self.n as f64;
        let kf = k as f64;
        let kind = self.kind;
        let (lo, hi) = match kind.support() {
            Some((s0, s1)) => (((s0 + kf) / nf).max(self.a), ((s1 + kf) / nf).min(self.b)),
            None => (self.a, self.b),
        };
        if !(hi > lo) {
            return Ok((0.0, 0.0));
        }
        match &self.plan {
            Plan::Step { edges, values } => {
                let i0 = edges.partition_point(|&e| e <= lo).saturating_sub(1);
                let i1 = edges.partition_point(|&e| e < hi).min(values.len());
                let mut num = 0.0;
                let mut den = 0.0;
                let mut u_prev = nf * lo - kf;
                for i in i0..i1 {
                    let u = nf * edges[i + 1].min(hi) - kf;
                    let d = kind.increment(u_prev, u);
                    num += values[i] * d;
                    den += d;
                    u_prev = u;
                }
                Ok((num / nf, den / nf))
            }
            Plan::Linear { nodes, values } => {
                let i0 = nodes.partition_point(|&e| e <= lo).saturating_sub(1);
                let i1 = nodes.partition_point(|&e| e < hi).min(nodes.len() - 1);
                let mut num = 0.0;
                let mut den = 0.0;
                let mut t_prev = lo;
                for i in i0..i1 {
                    let (x0, x1) = (nodes[i], nodes[i + 1]);
                    let r = x1.min(hi);
                    let (u0, u1) = (nf * t_prev - kf, nf * r - kf);
                    let slope = (values[i + 1] - values[i]) / (x1 - x0);
                    let intercept = values[i] - slope * x0;
                    let dg = kind.antiderivative(u1) - kind.antiderivative(u0);
                    let dh = kind.first_moment_antiderivative(u1) - kind.first_moment_antiderivative(u0);
                    num += (intercept + slope * kf / nf) * dg + slope / nf * dh;
                    den += dg;
                    t_prev = r;
                }
                Ok((num / nf, den / nf))
            }
            Plan::Composite {
                panels,
                j0,
                cells,
                fvals,
                table,
            } => {
                let panels = *panels;
                // only cells inside the kernel support contribute
                let jlo = ((lo * nf).floor() as i64 - j0).max(0) as usize;
                let jhi = (((hi * nf).ceil() as i64 - j0).max(0) as usize).min(*cells);
                let mut num = 0.0;
                let mut den = 0.0;
                for j in jlo..jhi {
                    let d = (*j0 + j as i64 - k) + (*cells as i64 - 1);
                    let w = &table[d as usize * panels..(d as usize + 1) * panels];
                    let f = &fvals[j * panels..(j + 1) * panels];
                    for (wp, fp) in w.iter().zip(f) {
                        num += wp * fp;
                        den += wp;
                    }
                }
                let h = 1.0 / (nf * panels as f64);
                Ok((num * h, den * h))
            }
            Plan::Adaptive { tol, breaks } => {
                let mut pts: Vec<f64> = breaks.iter().copied().filter(|&t| t > lo && t < hi).collect();
                pts.insert(0, lo);
                pts.push(hi);
                let sig = self.signal;
                let num = integrate_adaptive_pieces(
                    &|t: f64| kind.eval(nf * t - kf) * sig.eval_unchecked(t),
                    &pts,
                    *tol,
                )?;
                let den = integrate_adaptive_pieces(&|t: f64| kind.eval(nf * t - kf), &pts, *tol)?;
                Ok((num, den))
            }
        }
    }

    /// Weighted mean of the signal for cell `k`.
    pub fn mean(&self, k: i64) -> Result<f64> {
        let (num, den) = self.moments(k)?;
        if den > 0.0 {
            Ok((num / den).clamp(0.0, 1.0))
        } else {
            Err(Error::ZeroDenominator(format!("chi mass vanishes for cell {k}")))
        }
    }

    /// Means and masses for every cell in `k_lo..=k_hi`, computed in parallel.
    pub fn all(&self, k_lo: i64, k_hi: i64) -> Result<(Vec<f64>, Vec<f64>)> {
        let rows: Vec<(f64, f64)> = (k_lo..=k_hi)
            .into_par_iter()
            .map(|k| {
                let (num, den) = self.moments(k)?;
                if den > 0.0 {
                    Ok(((num / den).clamp(0.0, 1.0), den))
                } else {
                    Err(Error::ZeroDenominator(format!("chi mass vanishes for cell {k}")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().unzip())
    }
}

/// `int chi(nt-k) f(t) dt / int chi(nt-k) dt` over the signal's domain.
pub fn chi_weighted_mean(c: &ChiKernel, f: &Signal, n: u64, k: i64, q: &QuadratureConfig) -> Result<f64> {
    let (a, b) = f.domain();
    check_cell(n, k, a, b)?;
    DurrmeyerIntegrator::new(c, f, n, q)?.mean(k)
}

/// Cell average `n int_{k/n}^{(k+1)/n} f`.
pub fn kantorovich_mean(f: &Signal, n: u64, k: i64, q: &QuadratureConfig) -> Result<f64> {
    KantorovichIntegrator::new(f, n, q)?.mean(k)
}

/// Kantorovich cell averages with the signal primitive cached.
pub struct KantorovichIntegrator<'a> {
    signal: &'a Signal,
    n: u64,
    q: QuadratureConfig,
    primitive: crate::signal::Primitive<'a>,
    breaks: Vec<f64>,
}

impl<'a> KantorovichIntegrator<'a> {
    pub fn new(signal: &'a Signal, n: u64, q: &QuadratureConfig) -> Result<Self> {
        q.validate()?;
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        let breaks = match q {
            QuadratureConfig::Adaptive { .. } => signal.breakpoints(),
            _ => Vec::new(),
        };
        Ok(Self {
            signal,
            n,
            q: *q,
            primitive: signal.primitive(),
            breaks,
        })
    }

    pub fn mean(&self, k: i64) -> Result<f64> {
        let (a, b) = self.signal.domain();
        check_cell(self.n, k, a, b)?;
        let nf = self.n as f64;
        let (l, r) = (k as f64 / nf, (k + 1) as f64 / nf);
        let v = match self.q {
            QuadratureConfig::ClosedFormPreferred { .. } => nf * (self.primitive.eval(r) - self.primitive.eval(l)),
            QuadratureConfig::Composite { panels } => {
                let h = (r - l) / panels as f64;
                let s: f64 = (0..panels)
                    .map(|p| self.signal.eval_unchecked(l + (p as f64 + 0.5) * h))
                    .sum();
                s / panels as f64
            }
            QuadratureConfig::Adaptive { tol } => {
                let pts = merged_breaks(l, r, self.breaks.iter().copied());
                nf * integrate_adaptive_pieces(&|t| self.signal.eval_unchecked(t), &pts, tol / nf)?
            }
        };
        Ok(v.clamp(0.0, 1.0))
    }
}

/// Whether the Durrmeyer integrals for this signal have an exact path.
pub fn has_closed_form(f: &Signal) -> bool {
    !matches!(f.repr(), Repr::SineWave { .. })
}
