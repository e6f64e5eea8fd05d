//! Direct transcription of the max-min operators with its own kernels,
//! quadrature and loops. Shares no numerical code with the library.

#[derive(Clone, Debug)]
pub struct StepFn {
    /// Interior breakpoints, increasing; piece `i` is `(e_{i-1}, e_i]`.
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFn {
    pub fn eval(&self, x: f64) -> f64 {
        for (i, &e) in self.breaks.iter().enumerate() {
            if x <= e {
                return self.values[i];
            }
        }
        *self.values.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Chi {
    Rational(f64),
    Hat,
}

impl Chi {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Chi::Rational(c) => 1.0 / (1.0 + c * u * u),
            Chi::Hat => {
                if u.abs() < 1.0 {
                    1.0 - u.abs()
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn phi(x: f64) -> f64 {
    0.5 * (logistic(x + 1.0) - logistic(x - 1.0))
}

fn simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson on each interval between consecutive `cuts`.
pub fn integrate<G: Fn(f64) -> f64>(g: G, cuts: &[f64], tol: f64) -> f64 {
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson(&g, a, b, fa, fm, fb, whole, tol, 50);
    }
    total
}

fn cuts(f: &StepFn, lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut v = vec![lo, hi];
    v.extend(f.breaks.iter().copied().filter(|&e| e > lo && e < hi));
    v.extend(extra.iter().copied().filter(|&e| e > lo && e < hi));
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub enum Kind {
    Sampling,
    Kantorovich,
    Durrmeyer(Chi),
}

/// Coefficients for `n` on `[0, 1]`, as `(k, c_k)` pairs.
pub fn coefficients(kind: &Kind, f: &StepFn, n: u64) -> Vec<(i64, f64)> {
    let nf = n as f64;
    let mut out = Vec::new();
    match kind {
        Kind::Sampling => {
            for k in 0..=n as i64 {
                out.push((k, f.eval(k as f64 / nf)));
            }
        }
        Kind::Kantorovich => {
            for k in 0..n as i64 {
                let (lo, hi) = (k as f64 / nf, (k + 1) as f64 / nf);
                let v = nf * integrate(|t| f.eval(t), &cuts(f, lo, hi, &[]), 1e-14);
                out.push((k, v));
            }
        }
        Kind::Durrmeyer(chi) => {
            for k in 0..n as i64 {
                let kf = k as f64;
                let kinks = [(kf - 1.0) / nf, kf / nf, (kf + 1.0) / nf];
                let pts = cuts(f, 0.0, 1.0, &kinks);
                let num = integrate(|t| chi.eval(nf * t - kf) * f.eval(t), &pts, 1e-14);
                let den = integrate(|t| chi.eval(nf * t - kf), &pts, 1e-14);
                out.push((k, num / den));
            }
        }
    }
    out
}

/// `max_k min(c_k, phi(nx - k) / max_d phi(nx - d))` with plain loops.
pub fn evaluate(coeffs: &[(i64, f64)], n: u64, x: f64) -> f64 {
    let nx = n as f64 * x;
    let mut denom = 0.0;
    for &(d, _) in coeffs {
        let w = phi(nx - d as f64);
        if w > denom {
            denom = w;
        }
    }
    let mut best = 0.0;
    for &(k, c) in coeffs {
        let w = phi(nx - k as f64) / denom;
        let v = if c < w { c } else { w };
        if v > best {
            best = v;
        }
    }
    best
}
