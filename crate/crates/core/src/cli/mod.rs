//! The `maxmin` command line.

pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimates::{convergence_study, log_log_slope, BoundSettings, DEFAULT_INFLATION, DEFAULT_OMEGA_STEP};
use crate::kernels::{phi_tail_sup, BellKernel, ChiKernel, ChiKind, Sigmoid, SigmoidKind};
use crate::operators::{complement_double_pass, denoise, evaluate, EvalStrategy, Family, OperatorConfig};
use crate::quadrature::QuadratureConfig;
use crate::signal::io::{load_signal, pcm_to_unit, read_wav, unit_to_pcm, write_wav, SignalFormat, WavData};
use crate::signal::{add_noise, error_report, metric_grid, NoiseKind, NoiseSpec, Signal};
use output::{svg_plot, write_errors, write_timing, RunManifest, Table};

#[derive(Parser, Debug)]
#[command(name = "maxmin", version, about = "Max-min neural network operators: approximation, denoising and error bounds")]
pub struct Cli {
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Approximate a signal with one or more operator families
    Approximate(ApproximateArgs),
    /// Corrupt a signal with noise and filter it with one operator
    Denoise(DenoiseArgs),
    /// Time single-pass D against double-pass K and F
    Bench(BenchArgs),
    /// Convergence study with the sup-norm error bound column
    BoundCheck(BoundCheckArgs),
    /// Print kernel constants
    Moments(MomentsArgs),
    /// Re-run the command recorded in a manifest
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Preset {
    /// tanh sigmoid, s = 0.05, chi rational c = 0.001, n = 8000, salt-and-pepper p = 0.05
    #[value(name = "saltpepper")]
    #[serde(rename = "saltpepper")]
    SaltPepper,
    /// logistic slope 10, s = 0.05, chi rational c = 0.002, n = 8000, Gaussian sd = 0.05
    #[value(name = "gaussian")]
    #[serde(rename = "gaussian")]
    Gaussian,
}

impl Preset {
    pub fn sigmoid(self) -> Sigmoid {
        match self {
            Preset::SaltPepper => Sigmoid::tanh(1.0),
            Preset::Gaussian => Sigmoid::logistic(10.0),
        }
    }

    pub fn scale(self) -> f64 {
        0.05
    }

    pub fn chi(self) -> ChiKind {
        match self {
            Preset::SaltPepper => ChiKind::Rational { c: 0.001 },
            Preset::Gaussian => ChiKind::Rational { c: 0.002 },
        }
    }

    pub fn n(self) -> u64 {
        8000
    }

    pub fn noise(self) -> NoiseKind {
        match self {
            Preset::SaltPepper => NoiseKind::SaltPepper { p: 0.05 },
            Preset::Gaussian => NoiseKind::Gaussian { sd: 0.05 },
        }
    }

    /// Operator configuration of the preset for `family`.
    pub fn config(self, family: Family) -> OperatorConfig {
        OperatorConfig::new(family, self.n(), BellKernel::new(self.sigmoid(), self.scale()))
            .with_chi(ChiKernel::new(self.chi()).expect("valid preset"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadMode {
    /// Exact antiderivatives when the signal allows, composite otherwise
    Closed,
    Composite,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Pruned,
    Exhaustive,
}

#[derive(Args, Debug, Clone)]
pub struct KernelArgs {
    /// Kernel bundle; explicit kernel flags override its entries
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// Sigmoid `logistic|tanh|step|ramp[:slope]` [default: logistic:1]
    #[arg(long, value_parser = parse_sigma)]
    pub sigma: Option<(SigmoidKind, f64)>,

    /// Bell scale s [default: 1]
    #[arg(long)]
    pub scale: Option<f64>,

    /// Averaging kernel `rational:c|hat` [default: rational:1, hat for bound-check]
    #[arg(long, value_parser = parse_chi)]
    pub chi: Option<ChiKind>,

    /// Decay exponent of the sigmoid at -inf [default: 1 for logistic/tanh, 5 for step/ramp]
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Quadrature for Durrmeyer and Kantorovich coefficients
    #[arg(long, value_enum, default_value_t = QuadMode::Closed)]
    pub quadrature: QuadMode,

    /// Midpoint panels per lattice cell for composite quadrature
    #[arg(long, default_value_t = crate::quadrature::DEFAULT_PANELS)]
    pub panels: usize,

    /// Absolute tolerance of adaptive quadrature
    #[arg(long, default_value_t = crate::quadrature::DEFAULT_ADAPTIVE_TOL)]
    pub tol: f64,

    /// Inner maximum strategy [default: pruned, exhaustive for bench]
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
}

#[derive(Args, Debug, Clone)]
pub struct ApproximateArgs {
    /// Builtin `piecewise|sine-g|identity` or a .csv/.wav path
    #[arg(long, default_value = "piecewise")]
    pub signal: String,

    /// Comma-separated families from D,K,F,LF,LD
    #[arg(long, value_delimiter = ',', default_value = "D,K,F")]
    pub families: Vec<Family>,

    /// Operator index n [default: 200, or the preset's n]
    #[arg(long)]
    pub n: Option<u64>,

    /// Points of the evaluation grid
    #[arg(long, default_value_t = 8000)]
    pub grid: usize,

    #[command(flatten)]
    pub kernel: KernelArgs,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Also write plot.svg
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args, Debug, Clone)]
pub struct DenoiseArgs {
    /// Builtin `piecewise|sine-g|identity` or a .csv/.wav path
    #[arg(long, default_value = "sine-g")]
    pub signal: String,

    /// Operator family
    #[arg(long, default_value = "D")]
    pub family: Family,

    /// Operator index n [default: 8000, or the preset's n]
    #[arg(long)]
    pub n: Option<u64>,

    /// Samples of a builtin or CSV signal
    #[arg(long, default_value_t = 8000)]
    pub grid: usize,

    /// `saltpepper:p` or `gaussian:sd` [default: saltpepper:0.05, or the preset's noise]
    #[arg(long)]
    pub noise: Option<NoiseKind>,

    /// Noise seed
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Filter as 1 - Op(1 - Op(noisy))
    #[arg(long)]
    pub double_pass: bool,

    /// Samples per window for WAV input
    #[arg(long, default_value_t = 8000)]
    pub window: usize,

    #[command(flatten)]
    pub kernel: KernelArgs,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Also write plot.svg
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Builtin `piecewise|sine-g|identity` or a .csv/.wav path
    #[arg(long, default_value = "sine-g")]
    pub signal: String,

    /// Operator index n [default: 8000, or the preset's n]
    #[arg(long)]
    pub n: Option<u64>,

    /// Samples of the noisy signal
    #[arg(long, default_value_t = 8000)]
    pub grid: usize,

    /// `saltpepper:p` or `gaussian:sd` [default: saltpepper:0.05, or the preset's noise]
    #[arg(long)]
    pub noise: Option<NoiseKind>,

    /// Noise seed
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Repetitions per family; the median is reported
    #[arg(long, default_value_t = 3)]
    pub reps: usize,

    #[command(flatten)]
    pub kernel: KernelArgs,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct BoundCheckArgs {
    /// Builtin `piecewise|sine-g|identity` or a .csv/.wav path
    #[arg(long, default_value = "identity")]
    pub signal: String,

    /// Operator family
    #[arg(long, default_value = "D")]
    pub family: Family,

    /// Comma-separated ascending values of n
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    pub ns: Vec<u64>,

    /// Exponent of the L^p error column
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,

    /// Points of the evaluation grid
    #[arg(long, default_value_t = 8000)]
    pub grid: usize,

    /// Grid step of the empirical modulus of continuity
    #[arg(long, default_value_t = DEFAULT_OMEGA_STEP)]
    pub omega_step: f64,

    /// Safety factor on the empirical modulus in the bound
    #[arg(long, default_value_t = DEFAULT_INFLATION)]
    pub inflation: f64,

    #[command(flatten)]
    pub kernel: KernelArgs,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct MomentsArgs {
    /// Comma-separated orders beta of the generalized bell moment
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub betas: Vec<f64>,

    /// Operator index for the tail value phi(n delta), delta = n^{-1/2}
    #[arg(long, default_value_t = 100)]
    pub n: u64,

    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// manifest.json of an earlier run
    pub manifest: PathBuf,

    /// Output directory of the replay
    #[arg(long, default_value = "replay")]
    pub out: PathBuf,
}

fn parse_sigma(s: &str) -> std::result::Result<(SigmoidKind, f64), String> {
    let (kind, slope) = match s.split_once(':') {
        Some((k, v)) => (k, v.parse::<f64>().map_err(|_| format!("bad slope `{v}`"))?),
        None => (s, 1.0),
    };
    let kind: SigmoidKind = kind.parse().map_err(|e: Error| e.to_string())?;
    Sigmoid::new(kind, slope).map_err(|e| e.to_string())?;
    Ok((kind, slope))
}

fn parse_chi(s: &str) -> std::result::Result<ChiKind, String> {
    let kind = match s.split_once(':') {
        Some(("rational", c)) => ChiKind::Rational {
            c: c.parse().map_err(|_| format!("bad rational constant `{c}`"))?,
        },
        None if s == "hat" => ChiKind::Hat,
        None if s == "rational" => ChiKind::Rational { c: 1.0 },
        _ => return Err(format!("expected `rational:c` or `hat`, got `{s}`")),
    };
    ChiKernel::new(kind).map_err(|e| e.to_string())?;
    Ok(kind)
}

/// Kernel choices after presets and defaults are applied.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedKernel {
    pub preset: Option<Preset>,
    pub sigmoid: Sigmoid,
    pub scale: f64,
    pub chi: ChiKind,
    pub quadrature: QuadratureConfig,
    pub strategy: EvalStrategy,
}

impl KernelArgs {
    pub fn resolve(&self, default_chi: ChiKind, default_strategy: EvalStrategy) -> Result<ResolvedKernel> {
        let mut sigmoid = match (self.sigma, self.preset) {
            (Some((kind, slope)), _) => Sigmoid::new(kind, slope)?,
            (None, Some(p)) => p.sigmoid(),
            (None, None) => Sigmoid::logistic(1.0),
        };
        if let Some(a) = self.alpha {
            sigmoid = sigmoid.with_alpha(a)?;
        }
        let scale = self.scale.or(self.preset.map(Preset::scale)).unwrap_or(1.0);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!("bell scale must be positive, got {scale}")));
        }
        let chi = self.chi.or(self.preset.map(Preset::chi)).unwrap_or(default_chi);
        let quadrature = match self.quadrature {
            QuadMode::Closed => {
                QuadratureConfig::composite(self.panels)?;
                QuadratureConfig::ClosedFormPreferred {
                    fallback_panels: self.panels,
                }
            }
            QuadMode::Composite => QuadratureConfig::composite(self.panels)?,
            QuadMode::Adaptive => QuadratureConfig::adaptive(self.tol)?,
        };
        let strategy = match self.strategy {
            Some(StrategyArg::Pruned) => EvalStrategy::Pruned,
            Some(StrategyArg::Exhaustive) => EvalStrategy::Exhaustive,
            None => default_strategy,
        };
        Ok(ResolvedKernel {
            preset: self.preset,
            sigmoid,
            scale,
            chi,
            quadrature,
            strategy,
        })
    }

    fn n_or(&self, n: Option<u64>, default: u64) -> u64 {
        n.or(self.preset.map(Preset::n)).unwrap_or(default)
    }

    fn noise_or(&self, noise: Option<NoiseKind>) -> NoiseKind {
        noise
            .or(self.preset.map(Preset::noise))
            .unwrap_or(NoiseKind::SaltPepper { p: 0.05 })
    }
}

impl ResolvedKernel {
    pub fn config(&self, family: Family, n: u64) -> Result<OperatorConfig> {
        Ok(OperatorConfig::new(family, n, BellKernel::new(self.sigmoid, self.scale))
            .with_chi(ChiKernel::new(self.chi)?)
            .with_quadrature(self.quadrature)
            .with_strategy(self.strategy))
    }
}

/// Builtin signal by name, or a CSV/WAV file.
pub fn resolve_signal(spec: &str) -> Result<Signal> {
    match spec {
        "piecewise" => Ok(Signal::piecewise_benchmark()),
        "sine-g" => Ok(Signal::sine_g()),
        "identity" => Ok(Signal::identity()),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(Error::Parse(format!(
                    "`{path}` is neither a builtin signal (piecewise, sine-g, identity) nor an existing file"
                )));
            }
            load_signal(p, SignalFormat::from_path(p)?)
        }
    }
}

fn sample(f: &Signal, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter().map(|&x| f.eval(x)).collect()
}

/// Suffix-free label: `K` for one pass, `K2` for the complement double pass.
fn pass_label(family: Family, double: bool) -> String {
    if double {
        format!("{}2", family.code())
    } else {
        family.code().to_string()
    }
}

/// Filters `noisy` once (`passes = 1`) or with the complement double pass.
pub fn filter(cfg: &OperatorConfig, domain: (f64, f64), noisy: &[f64], double: bool) -> Result<Vec<f64>> {
    if double {
        complement_double_pass(cfg, domain, noisy)
    } else {
        denoise(cfg, domain, noisy)
    }
}

/// Median wall time of single-pass D and double-pass K and F on `noisy`.
///
/// `template` supplies the kernels and `n`; the family is overridden.
pub fn bench_timings(template: &OperatorConfig, domain: (f64, f64), noisy: &[f64], reps: usize) -> Result<Vec<(String, u32, f64)>> {
    let reps = reps.max(1);
    let mut rows = Vec::new();
    for (family, double) in [
        (Family::MaxMinDurrmeyer, false),
        (Family::MaxMinKantorovich, true),
        (Family::MaxMinSampling, true),
    ] {
        let cfg = template.with_family(family);
        let mut times = Vec::with_capacity(reps);
        for _ in 0..reps {
            let t = Instant::now();
            let out = filter(&cfg, domain, noisy, double)?;
            times.push(t.elapsed().as_secs_f64());
            std::hint::black_box(out);
        }
        times.sort_by(f64::total_cmp);
        rows.push((family.code().to_string(), if double { 2 } else { 1 }, times[reps / 2]));
    }
    Ok(rows)
}

struct Run {
    command: &'static str,
    params: serde_json::Value,
    outputs: Vec<String>,
}

/// Parses `args` (without the program name) and runs the command.
///
/// Returns the process exit status: 0 on success, 2 for usage errors and 1
/// for every other failure, with one diagnostic line on stderr.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once("maxmin".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            1
        }
    }
}

/// Runs a parsed command line; `argv` is recorded in the manifest.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Domain("--threads must be positive".into()));
        }
        // A global pool can only be installed once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let start = Instant::now();
    let (out, run) = match &cli.command {
        Command::Approximate(a) => (a.out.clone(), approximate(a)?),
        Command::Denoise(a) => (a.out.clone(), denoise_cmd(a)?),
        Command::Bench(a) => (a.out.clone(), bench(a)?),
        Command::BoundCheck(a) => (a.out.clone(), bound_check(a)?),
        Command::Moments(a) => return moments(a),
        Command::Replay(a) => return replay(a),
    };
    let manifest = RunManifest {
        tool: "maxmin".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: run.command.into(),
        argv: argv.to_vec(),
        params: run.params,
        outputs: run.outputs,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    manifest.write(&out)?;
    Ok(())
}

fn approximate(a: &ApproximateArgs) -> Result<Run> {
    if a.families.is_empty() {
        return Err(Error::Parse("--families is empty".into()));
    }
    let kernel = a.kernel.resolve(ChiKind::Rational { c: 1.0 }, EvalStrategy::Pruned)?;
    let n = a.kernel.n_or(a.n, 200);
    let f = resolve_signal(&a.signal)?;
    let (lo, hi) = f.domain();
    let xs = metric_grid(lo, hi, a.grid);
    let reference = sample(&f, &xs)?;
    let mut table = Table::new().column("x", xs.clone()).column("reference", reference.clone());
    let mut errors = Vec::new();
    let mut series = Vec::new();
    for &family in &a.families {
        let cfg = kernel.config(family, n)?;
        let ys = evaluate(&cfg, &f, &xs)?;
        let r = error_report(&ys, &reference)?;
        println!("{family}\tME {:.6}\tMAE {:.6}\tMSE {:.6}", r.me, r.mae, r.mse);
        errors.push((family.code().to_string(), r));
        table = table.column(format!("approx_{family}"), ys.clone());
        series.push((format!("{family}"), ys));
    }
    fs::create_dir_all(&a.out)?;
    table.write(&a.out.join("points.csv"))?;
    write_errors(&a.out.join("errors.csv"), &errors)?;
    let mut outputs = vec!["points.csv".to_string(), "errors.csv".to_string()];
    if a.svg {
        let mut s: Vec<(&str, &[f64])> = vec![("reference", &reference)];
        s.extend(series.iter().map(|(k, v)| (k.as_str(), v.as_slice())));
        fs::write(a.out.join("plot.svg"), svg_plot(&xs, &s))?;
        outputs.push("plot.svg".into());
    }
    Ok(Run {
        command: "approximate",
        params: json!({
            "signal": a.signal,
            "families": a.families,
            "n": n,
            "grid": a.grid,
            "kernel": kernel,
        }),
        outputs,
    })
}

fn denoise_cmd(a: &DenoiseArgs) -> Result<Run> {
    let kernel = a.kernel.resolve(ChiKind::Rational { c: 1.0 }, EvalStrategy::Pruned)?;
    let n = a.kernel.n_or(a.n, 8000);
    let noise = NoiseSpec::new(a.kernel.noise_or(a.noise), a.seed)?;
    let cfg = kernel.config(a.family, n)?;
    let label = pass_label(a.family, a.double_pass);
    fs::create_dir_all(&a.out)?;
    let is_wav = Path::new(&a.signal)
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));

    let (xs, clean, noisy, filtered, mut outputs): (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<String>) = if is_wav {
        let data = read_wav(Path::new(&a.signal))?;
        let clean: Vec<f64> = data.samples.iter().map(|&v| pcm_to_unit(v)).collect();
        let noisy = add_noise(&clean, &noise);
        let filtered = filter_windows(&cfg, &noisy, a.window, a.double_pass)?;
        let rate = data.sample_rate;
        for (name, v) in [("noisy.wav", &noisy), ("filtered.wav", &filtered)] {
            write_wav(
                &a.out.join(name),
                &WavData {
                    sample_rate: rate,
                    samples: v.iter().map(|&u| unit_to_pcm(u)).collect(),
                },
            )?;
        }
        let xs: Vec<f64> = (0..clean.len()).map(|i| i as f64 / rate as f64).collect();
        (xs, clean, noisy, filtered, vec!["noisy.wav".to_string(), "filtered.wav".to_string()])
    } else {
        let f = resolve_signal(&a.signal)?;
        let domain = f.domain();
        let xs = metric_grid(domain.0, domain.1, a.grid);
        let clean = sample(&f, &xs)?;
        let noisy = add_noise(&clean, &noise);
        let filtered = filter(&cfg, domain, &noisy, a.double_pass)?;
        (xs, clean, noisy, filtered, Vec::new())
    };

    let r_noisy = error_report(&noisy, &clean)?;
    let r = error_report(&filtered, &clean)?;
    println!("noisy\tME {:.6}\tMAE {:.6}\tMSE {:.6}", r_noisy.me, r_noisy.mae, r_noisy.mse);
    println!("{label}\tME {:.6}\tMAE {:.6}\tMSE {:.6}", r.me, r.mae, r.mse);
    Table::new()
        .column("x", xs.clone())
        .column("reference", clean.clone())
        .column("noisy", noisy.clone())
        .column(format!("approx_{label}"), filtered.clone())
        .write(&a.out.join("points.csv"))?;
    write_errors(&a.out.join("errors.csv"), &[("noisy".into(), r_noisy), (label.clone(), r)])?;
    outputs.push("points.csv".into());
    outputs.push("errors.csv".into());
    if a.svg {
        let s: [(&str, &[f64]); 3] = [("noisy", &noisy), ("reference", &clean), (&label, &filtered)];
        fs::write(a.out.join("plot.svg"), svg_plot(&xs, &s))?;
        outputs.push("plot.svg".into());
    }
    Ok(Run {
        command: "denoise",
        params: json!({
            "signal": a.signal,
            "family": a.family,
            "double_pass": a.double_pass,
            "n": n,
            "grid": a.grid,
            "window": a.window,
            "noise": noise,
            "kernel": kernel,
        }),
        outputs,
    })
}

/// Filters consecutive windows, each mapped onto `[0, 1]`.
fn filter_windows(cfg: &OperatorConfig, noisy: &[f64], window: usize, double: bool) -> Result<Vec<f64>> {
    if window < 2 {
        return Err(Error::Domain("--window must be at least 2".into()));
    }
    let mut out = Vec::with_capacity(noisy.len());
    for chunk in noisy.chunks(window) {
        if chunk.len() < 2 {
            out.extend(chunk.iter().map(|v| v.clamp(0.0, 1.0)));
        } else {
            out.extend(filter(cfg, (0.0, 1.0), chunk, double)?);
        }
    }
    Ok(out)
}

fn bench(a: &BenchArgs) -> Result<Run> {
    let kernel = a.kernel.resolve(ChiKind::Rational { c: 1.0 }, EvalStrategy::Exhaustive)?;
    let n = a.kernel.n_or(a.n, 8000);
    let noise = NoiseSpec::new(a.kernel.noise_or(a.noise), a.seed)?;
    let f = resolve_signal(&a.signal)?;
    let domain = f.domain();
    let clean = sample(&f, &metric_grid(domain.0, domain.1, a.grid))?;
    let noisy = add_noise(&clean, &noise);
    let template = kernel.config(Family::MaxMinDurrmeyer, n)?;
    let rows = bench_timings(&template, domain, &noisy, a.reps)?;
    for (fam, passes, secs) in &rows {
        println!("{fam}\tpasses {passes}\t{secs:.6} s");
    }
    fs::create_dir_all(&a.out)?;
    write_timing(&a.out.join("timing.csv"), &rows)?;
    Ok(Run {
        command: "bench",
        params: json!({
            "signal": a.signal,
            "n": n,
            "grid": a.grid,
            "reps": a.reps,
            "noise": noise,
            "kernel": kernel,
        }),
        outputs: vec!["timing.csv".into()],
    })
}

fn bound_check(a: &BoundCheckArgs) -> Result<Run> {
    let kernel = a.kernel.resolve(ChiKind::Hat, EvalStrategy::Pruned)?;
    let f = resolve_signal(&a.signal)?;
    if !f.is_continuous() {
        eprintln!("warning: the bound assumes a continuous signal");
    }
    let template = kernel.config(a.family, a.ns.first().copied().unwrap_or(1))?;
    let settings = BoundSettings {
        alpha: kernel.sigmoid.alpha,
        omega_step: a.omega_step,
        inflation: a.inflation,
    };
    let rows = convergence_study(&template, &f, &a.ns, a.p, a.grid, Some(&settings))?;
    let mut s = String::from("n,sup_error,lp_error,p,bound,holds\n");
    for r in &rows {
        let b = r.bound.expect("bound requested");
        let holds = r.sup_error <= b;
        println!("n {}\tsup {:.6}\tL{} {:.6}\tbound {:.6}\t{}", r.n, r.sup_error, r.p, r.lp_error, b, if holds { "ok" } else { "VIOLATED" });
        s.push_str(&format!("{},{:?},{:?},{:?},{:?},{}\n", r.n, r.sup_error, r.lp_error, r.p, b, holds));
    }
    if let Some(slope) = log_log_slope(&rows) {
        println!("log-log slope {slope:.4}");
    }
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("convergence.csv"), s)?;
    Ok(Run {
        command: "bound-check",
        params: json!({
            "signal": a.signal,
            "family": a.family,
            "ns": a.ns,
            "p": a.p,
            "grid": a.grid,
            "bound": settings,
            "kernel": kernel,
        }),
        outputs: vec!["convergence.csv".into()],
    })
}

fn moments(a: &MomentsArgs) -> Result<()> {
    let kernel = a.kernel.resolve(ChiKind::Rational { c: 1.0 }, EvalStrategy::Pruned)?;
    let bell = BellKernel::new(kernel.sigmoid, kernel.scale);
    let chi = ChiKernel::new(kernel.chi)?;
    let constants = chi.constants().clone().with_m_beta(&bell, &a.betas);
    let delta = 1.0 / (a.n as f64).sqrt();
    let report = json!({
        "sigmoid": kernel.sigmoid,
        "scale": kernel.scale,
        "chi": kernel.chi,
        "phi0": bell.eval(0.0),
        "phi2": bell.eval(2.0),
        "n": a.n,
        "phi_tail_sup": phi_tail_sup(&bell, a.n, delta),
        "constants": constants,
    });
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let m = RunManifest::read(&a.manifest)?;
    let args = m.replay_args(&a.out);
    let cli = Cli::try_parse_from(std::iter::once("maxmin".to_string()).chain(args.iter().cloned()))
        .map_err(|e| Error::Parse(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::Parse("a manifest cannot replay another replay".into()));
    }
    execute(&cli, &args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_and_chi_parsing() {
        assert_eq!(parse_sigma("tanh:2").unwrap(), (SigmoidKind::Tanh, 2.0));
        assert_eq!(parse_sigma("logistic").unwrap(), (SigmoidKind::Logistic, 1.0));
        assert!(parse_sigma("relu").is_err());
        assert!(parse_sigma("tanh:x").is_err());
        assert_eq!(parse_chi("hat").unwrap(), ChiKind::Hat);
        assert_eq!(parse_chi("rational:0.5").unwrap(), ChiKind::Rational { c: 0.5 });
        assert!(parse_chi("rational:-1").is_err());
        assert!(parse_chi("box").is_err());
    }

    #[test]
    fn preset_and_overrides() {
        let cli = Cli::try_parse_from(["maxmin", "denoise", "--preset", "gaussian", "--scale", "0.1"]).unwrap();
        let Command::Denoise(d) = cli.command else { panic!() };
        let k = d.kernel.resolve(ChiKind::Hat, EvalStrategy::Pruned).unwrap();
        assert_eq!(k.sigmoid, Sigmoid::logistic(10.0));
        assert_eq!(k.scale, 0.1);
        assert_eq!(k.chi, ChiKind::Rational { c: 0.002 });
        assert_eq!(d.kernel.n_or(d.n, 1), 8000);
        assert_eq!(d.kernel.noise_or(d.noise), NoiseKind::Gaussian { sd: 0.05 });
    }

    #[test]
    fn unknown_flags_rejected() {
        assert_eq!(run_cli(["approximate", "--bogus"]), 2);
        assert!(Cli::try_parse_from(["maxmin", "approximate", "--families", "D,Q"]).is_err());
    }

    #[test]
    fn runtime_errors_exit_one() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().display().to_string();
        assert_eq!(run_cli(["approximate", "--signal", "nope", "--out", &out]), 1);
        assert_eq!(run_cli(["bound-check", "--chi", "rational:1", "--ns", "5,10", "--grid", "50", "--out", &out]), 1);
    }
}
