//! Argument parsing and command dispatch for the `cantor-spectra` binary.

use std::io::Write;
use std::path::PathBuf;

use cantor_spectra::cache::Cache;
use cantor_spectra::format::{json_number, round_value};
use cantor_spectra::interval::{minkowski_sum, IntervalSet};
use cantor_spectra::measures::{
    convolve, default_granularity, dimension_via_lyapunov, estimate_lyapunov, measure_dimension_estimate, BandMeasure,
    EpsRange,
};
use cantor_spectra::phase::{self, Axis, DimensionConfig};
use cantor_spectra::spectrum::{
    self, band_dos, cover_from, default_window, finite_chain_dos, BandSet, DEFAULT_RESOLUTION,
};
use cantor_spectra::trace::{classify_orbit, OrbitParams, OrbitStatus};
use cantor_spectra::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

/// Parsed command line.
#[derive(Parser, Debug, Clone, PartialEq)]
#[command(
    name = "cantor-spectra",
    version,
    about = "Spectra, sum sets and density-of-states measures of the Fibonacci Hamiltonian"
)]
#[command(allow_negative_numbers = true)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Band-set cache directory (falls back to $CANTOR_SPECTRA_CACHE).
    #[arg(long, global = true, value_name = "DIR")]
    pub cache: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = positive_count)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Classify the trace-map orbit of one energy.
    Orbit(OrbitArgs),
    /// Outer cover of the spectrum from two consecutive band levels.
    Spectrum(SpectrumArgs),
    /// Cover of the square-model spectrum Σ_λ₁ + Σ_λ₂.
    Sumset(SumsetArgs),
    /// Band density of states, optionally checked against a finite chain.
    Dos(DosArgs),
    /// Convolve two band measures.
    Convolve(ConvolveArgs),
    /// Local scaling dimension of a band measure.
    Dimension(DimensionArgs),
    /// Classify a grid of coupling pairs.
    Phase(PhaseArgs),
    /// Trace-map Lyapunov exponent over the band density of states.
    Lyapunov(LyapunovArgs),
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct OrbitArgs {
    #[arg(long, value_parser = finite)]
    pub energy: f64,
    #[arg(long, value_parser = non_negative)]
    pub lambda: f64,
    #[arg(long, default_value_t = 200, value_parser = positive_count)]
    pub max_iter: usize,
    #[arg(long = "escape", default_value_t = 10.0, value_parser = positive)]
    pub escape_norm: f64,
}

#[derive(Args, Debug, Clone, Copy, PartialEq)]
pub struct LevelArgs {
    #[arg(long, default_value_t = 12, value_parser = level)]
    pub level: usize,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION, value_parser = positive)]
    pub resolution: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    #[arg(long, value_parser = non_negative)]
    pub lambda: f64,
    #[command(flatten)]
    pub level: LevelArgs,
    /// JSON output (default).
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// `lo,hi` rows instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

impl SpectrumArgs {
    pub fn format(&self) -> OutputFormat {
        if self.csv {
            OutputFormat::Csv
        } else {
            OutputFormat::Json
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct SumsetArgs {
    #[arg(long, value_parser = non_negative)]
    pub lambda1: f64,
    #[arg(long, value_parser = non_negative)]
    pub lambda2: f64,
    #[command(flatten)]
    pub level: LevelArgs,
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct DosArgs {
    #[arg(long, value_parser = non_negative)]
    pub lambda: f64,
    #[command(flatten)]
    pub level: LevelArgs,
    /// Compare against the counting function of a chain with this many sites.
    #[arg(long, value_parser = sites)]
    pub oracle_sites: Option<usize>,
    /// Energies in the comparison grid.
    #[arg(long, default_value_t = 2001, value_parser = grid_points, requires = "oracle_sites")]
    pub oracle_grid: usize,
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct ConvolveArgs {
    /// Band measure JSON files; give exactly two.
    #[arg(long = "in", value_name = "FILE", num_args = 1, required = true)]
    pub inputs: Vec<PathBuf>,
    /// Re-partition cell width (default: support diameter / 2¹⁶).
    #[arg(long, value_parser = positive)]
    pub granularity: Option<f64>,
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct DimensionArgs {
    #[arg(long, value_name = "FILE")]
    pub measure: PathBuf,
    #[arg(long, default_value_t = 300, value_parser = samples)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Finest radius (default: median atom length).
    #[arg(long, value_parser = positive)]
    pub eps_min: Option<f64>,
    /// Coarsest radius (default: support diameter / 8).
    #[arg(long, value_parser = positive)]
    pub eps_max: Option<f64>,
    #[arg(long, default_value_t = phase::MEASURE_SCALES, value_parser = scales)]
    pub scales: usize,
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct PhaseArgs {
    /// λ₁ axis as `lo:hi:n`.
    #[arg(long, value_parser = axis)]
    pub l1: Axis,
    /// λ₂ axis as `lo:hi:n`.
    #[arg(long, value_parser = axis)]
    pub l2: Axis,
    #[command(flatten)]
    pub level: LevelArgs,
    #[arg(long, default_value_t = phase::DEFAULT_MARGIN, value_parser = non_negative)]
    pub margin: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 300, value_parser = samples)]
    pub samples: usize,
    /// Directory for cells.csv, diagram.pgm and provenance.json.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(allow_negative_numbers = true)]
pub struct LyapunovArgs {
    #[arg(long, value_parser = positive)]
    pub lambda: f64,
    #[command(flatten)]
    pub level: LevelArgs,
    #[arg(long, default_value_t = 500, value_parser = positive_count)]
    pub energies: usize,
    #[arg(long, default_value_t = 20, value_parser = lyapunov_steps)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entropy for the dimension ratio. Not computed here; log((1+√5)/2) ≈ 0.4812
    /// is a literature value suggested as an external input.
    #[arg(long, value_parser = positive)]
    pub entropy: Option<f64>,
}

fn number(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("{e}"))
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let x = number(s)?;
    x.is_finite().then_some(x).ok_or_else(|| "must be finite".into())
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let x = finite(s)?;
    (x >= 0.0).then_some(x).ok_or_else(|| "must be ≥ 0".into())
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let x = finite(s)?;
    (x > 0.0).then_some(x).ok_or_else(|| "must be > 0".into())
}

fn bounded_count(s: &str, lo: usize, hi: usize) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    (lo..=hi)
        .contains(&n)
        .then_some(n)
        .ok_or_else(|| format!("must lie in {lo}..={hi}"))
}

fn positive_count(s: &str) -> std::result::Result<usize, String> {
    bounded_count(s, 1, usize::MAX)
}

fn level(s: &str) -> std::result::Result<usize, String> {
    bounded_count(s, 1, spectrum::MAX_LEVEL as usize - 1)
}

fn sites(s: &str) -> std::result::Result<usize, String> {
    bounded_count(s, 2, 10_000_000)
}

fn grid_points(s: &str) -> std::result::Result<usize, String> {
    bounded_count(s, 2, 10_000_000)
}

fn samples(s: &str) -> std::result::Result<usize, String> {
    bounded_count(s, 100, 10_000_000)
}

fn scales(s: &str) -> std::result::Result<usize, String> {
    bounded_count(s, 4, 1000)
}

fn lyapunov_steps(s: &str) -> std::result::Result<usize, String> {
    bounded_count(s, 1, cantor_spectra::measures::MAX_LYAPUNOV_STEPS)
}

fn axis(s: &str) -> std::result::Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err("expected lo:hi:n".into());
    };
    let n = n.parse::<usize>().map_err(|e| format!("n: {e}"))?;
    Axis::new(positive(lo)?, positive(hi)?, n).map_err(|e| e.to_string())
}

/// Parses `argv` (program name first); failures carry exit code 2.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}

fn emit(out: &mut dyn Write, mut value: Value) -> Result<()> {
    if let Value::Object(map) = &mut value {
        map.insert("schema_version".into(), json!(1));
    }
    round_value(&mut value);
    let text = serde_json::to_string(&value)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn intervals_value(set: &IntervalSet) -> Value {
    json!(set.intervals().iter().map(|iv| [iv.lo, iv.hi]).collect::<Vec<_>>())
}

fn read_measure(path: &PathBuf) -> Result<BandMeasure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    BandMeasure::from_json(&text)
}

fn measure_value(m: &BandMeasure) -> Value {
    json!(m.atoms().iter().map(|a| [a.lo, a.hi, a.weight]).collect::<Vec<_>>())
}

struct Context {
    cache: Option<Cache>,
}

impl Context {
    fn band_pair(&self, lambda: f64, lv: LevelArgs) -> Result<(BandSet, BandSet)> {
        match &self.cache {
            Some(c) => c.band_pair(lambda, lv.level, lv.resolution),
            None => spectrum::band_pair(lambda, lv.level, lv.resolution),
        }
    }

    fn cover(&self, lambda: f64, lv: LevelArgs) -> Result<IntervalSet> {
        let (lower, upper) = self.band_pair(lambda, lv)?;
        Ok(cover_from(&lower, &upper))
    }

    fn band_measure(&self, lambda: f64, lv: LevelArgs) -> Result<BandMeasure> {
        match &self.cache {
            Some(c) => BandMeasure::equal_weights(&c.band_set(lambda, lv.level, lv.resolution)?.band_list),
            None => band_dos(lambda, lv.level, lv.resolution),
        }
    }
}

fn run_orbit(args: &OrbitArgs, out: &mut dyn Write) -> Result<()> {
    let params = OrbitParams::new(args.max_iter, args.escape_norm)?;
    let r = classify_orbit(args.energy, args.lambda, params)?;
    let status = match r.status {
        OrbitStatus::Bounded { .. } => "bounded_up_to",
        OrbitStatus::Escaped { .. } => "escaped",
    };
    emit(
        out,
        json!({
            "status": status,
            "steps": r.steps(),
            "max_norm": r.max_norm,
            "invariant_drift": r.invariant_drift,
        }),
    )
}

fn run_spectrum(ctx: &Context, args: &SpectrumArgs, out: &mut dyn Write) -> Result<()> {
    let cover = ctx.cover(args.lambda, args.level)?;
    match args.format() {
        OutputFormat::Csv => {
            let mut text = String::from("lo,hi\n");
            for iv in cover.intervals() {
                text.push_str(&format!("{},{}\n", json_number(iv.lo), json_number(iv.hi)));
            }
            out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
        }
        OutputFormat::Json => emit(
            out,
            json!({
                "lambda": args.lambda,
                "level": args.level.level,
                "resolution": args.level.resolution,
                "measure": cover.measure(),
                "components": cover.len(),
                "intervals": intervals_value(&cover),
            }),
        ),
    }
}

fn run_sumset(ctx: &Context, args: &SumsetArgs, out: &mut dyn Write) -> Result<()> {
    let a = ctx.cover(args.lambda1, args.level)?;
    let b = if args.lambda2 == args.lambda1 {
        a.clone()
    } else {
        ctx.cover(args.lambda2, args.level)?
    };
    let sum = minkowski_sum(&a, &b);
    emit(
        out,
        json!({
            "lambda1": args.lambda1,
            "lambda2": args.lambda2,
            "level": args.level.level,
            "resolution": args.level.resolution,
            "measure": sum.measure(),
            "components": sum.len(),
            "intervals": intervals_value(&sum),
        }),
    )
}

fn run_dos(ctx: &Context, args: &DosArgs, out: &mut dyn Write) -> Result<()> {
    let m = ctx.band_measure(args.lambda, args.level)?;
    let mut value = json!({
        "lambda": args.lambda,
        "level": args.level.level,
        "resolution": args.level.resolution,
        "atoms": measure_value(&m),
    });
    if let Some(n) = args.oracle_sites {
        let window = default_window(args.lambda);
        let g = args.oracle_grid;
        let grid: Vec<f64> = (0..g)
            .map(|i| window.lo + window.len() * i as f64 / (g - 1) as f64)
            .collect();
        let chain = finite_chain_dos(args.lambda, n, &grid)?;
        let sup = chain.iter().map(|&(e, f)| (m.cdf(e) - f).abs()).fold(0.0, f64::max);
        value["oracle"] = json!({ "sites": n, "grid_points": g, "sup_distance": sup });
    }
    emit(out, value)
}

fn run_convolve(args: &ConvolveArgs, out: &mut dyn Write) -> Result<()> {
    let [a, b] = &args.inputs[..] else {
        return Err(Error::param(
            "in",
            format!("expected exactly two inputs, got {}", args.inputs.len()),
        ));
    };
    let (m1, m2) = (read_measure(a)?, read_measure(b)?);
    let g = args.granularity.unwrap_or_else(|| default_granularity(&m1, &m2));
    let c = convolve(&m1, &m2, g)?;
    emit(out, json!({ "granularity": g, "atoms": measure_value(&c) }))
}

fn run_dimension(args: &DimensionArgs, out: &mut dyn Write) -> Result<()> {
    let m = read_measure(&args.measure)?;
    let eps_min = args.eps_min.unwrap_or_else(|| {
        let mut lens: Vec<f64> = m.atoms().iter().map(|a| a.hi - a.lo).collect();
        lens.sort_by(f64::total_cmp);
        lens[lens.len() / 2]
    });
    let eps_max = args.eps_max.unwrap_or(m.support_hull().len() / 8.0);
    let range = EpsRange::new(eps_min, eps_max, args.scales)?;
    let est = measure_dimension_estimate(&m, args.samples, range, args.seed)?;
    emit(
        out,
        json!({
            "lower": est.lower,
            "median": est.median,
            "upper": est.upper,
            "sample_count": est.sample_count,
            "seed": args.seed,
            "eps_min": eps_min,
            "eps_max": eps_max,
            "scales": args.scales,
        }),
    )
}

fn run_phase(ctx: &Context, args: &PhaseArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = DimensionConfig {
        level: args.level.level,
        resolution: args.level.resolution,
        samples: args.samples,
        seed: args.seed,
    };
    let diagram = phase::sweep(args.l1, args.l2, &cfg, args.margin, ctx.cache.as_ref())?;
    if let Some(dir) = &args.out {
        diagram.write_outputs(dir)?;
    }
    let counts: serde_json::Map<String, Value> = [
        phase::Regime::Acds,
        phase::Regime::Pmsd,
        phase::Regime::Zmsp,
        phase::Regime::Unresolved,
    ]
    .into_iter()
    .map(|r| (r.label().to_string(), json!(diagram.count(r))))
    .collect();
    emit(
        out,
        json!({
            "grid": { "l1": args.l1, "l2": args.l2 },
            "counts": counts,
            "unresolved_fraction": diagram.unresolved_fraction(),
            "inconsistent_cells": diagram.cells.iter().filter(|c| c.inconsistent).count(),
            "dims_computed": diagram.dims_computed,
            "cache_hit_rate": diagram.cache_hit_rate(),
        }),
    )
}

fn run_lyapunov(ctx: &Context, args: &LyapunovArgs, out: &mut dyn Write) -> Result<()> {
    let m = ctx.band_measure(args.lambda, args.level)?;
    let est = estimate_lyapunov(args.lambda, &m, args.energies, args.steps, args.seed)?;
    let mut value = json!({
        "lambda": args.lambda,
        "level": args.level.level,
        "steps": args.steps,
        "exponent": est.exponent,
        "bounded_count": est.bounded_count,
        "discard_fraction": est.discard_fraction,
    });
    if let Some(h) = args.entropy {
        let d = dimension_via_lyapunov(h, est.exponent)?;
        value["entropy"] = json!(h);
        value["dimension"] = json!(d.dimension);
        value["ratio"] = json!(d.ratio);
        value["inconsistent"] = json!(d.inconsistent);
    }
    emit(out, value)
}

/// Executes `cfg`, writing the primary output to `out`.
pub fn run_to(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let cache = match &cfg.cache {
        Some(dir) => Some(Cache::new(dir)?),
        None => Cache::from_env()?,
    };
    let ctx = Context { cache };
    let dispatch = || -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match &cfg.command {
            Command::Orbit(a) => run_orbit(a, &mut buf),
            Command::Spectrum(a) => run_spectrum(&ctx, a, &mut buf),
            Command::Sumset(a) => run_sumset(&ctx, a, &mut buf),
            Command::Dos(a) => run_dos(&ctx, a, &mut buf),
            Command::Convolve(a) => run_convolve(a, &mut buf),
            Command::Dimension(a) => run_dimension(a, &mut buf),
            Command::Phase(a) => run_phase(&ctx, a, &mut buf),
            Command::Lyapunov(a) => run_lyapunov(&ctx, a, &mut buf),
        }?;
        Ok(buf)
    };
    let bytes = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::param("threads", e.to_string()))?
            .install(dispatch),
        None => dispatch(),
    }?;
    out.write_all(&bytes).map_err(|e| Error::io("<stdout>", e))
}

/// Machine-readable report of a failed run.
pub fn error_json(err: &Error) -> String {
    json!({
        "schema_version": 1,
        "error": { "kind": err.kind(), "message": err.to_string() },
    })
    .to_string()
}

/// Runs `cfg` against stdout; returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run_to(cfg, &mut lock).and_then(|_| lock.flush().map_err(|e| Error::io("<stdout>", e))) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            1
        }
    }
}
