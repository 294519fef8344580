//! Regime classification of the coupling-constant plane.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxcount::{box_dimension_estimate, geometric_scales};
use crate::cache::Cache;
use crate::error::{Error, Result};
use crate::format::{json_number, round_value};
use crate::measures::{measure_dimension_estimate, BandMeasure, DimensionEstimate, EpsRange};
use crate::spectrum::{band_pair, cover_from, BandSet};

pub const DEFAULT_MARGIN: f64 = 0.05;
pub const BOX_SCALES: usize = 10;
pub const MEASURE_SCALES: usize = 11;
pub const NEAR_ZERO_SLOPE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "ACDS")]
    Acds,
    #[serde(rename = "PMSD")]
    Pmsd,
    #[serde(rename = "ZMSP")]
    Zmsp,
    #[serde(rename = "UNRESOLVED")]
    Unresolved,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Acds => "ACDS",
            Regime::Pmsd => "PMSD",
            Regime::Zmsp => "ZMSP",
            Regime::Unresolved => "UNRESOLVED",
        }
    }

    pub fn gray(self) -> u8 {
        match self {
            Regime::Acds => 224,
            Regime::Pmsd => 160,
            Regime::Zmsp => 64,
            Regime::Unresolved => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub regime: Regime,
    /// Set when `dim_nu_sum > dim_sigma_sum + 2·margin`.
    pub inconsistent: bool,
}

pub fn classify(dim_sigma_sum: f64, dim_nu_sum: f64, margin: f64) -> Result<Classification> {
    if !(margin >= 0.0) {
        return Err(Error::param("margin", "must be non-negative"));
    }
    let regime = if dim_nu_sum > 1.0 + margin {
        Regime::Acds
    } else if dim_sigma_sum < 1.0 - margin {
        Regime::Zmsp
    } else if dim_sigma_sum > 1.0 + margin && dim_nu_sum < 1.0 - margin {
        Regime::Pmsd
    } else {
        Regime::Unresolved
    };
    Ok(Classification {
        regime,
        inconsistent: dim_nu_sum > dim_sigma_sum + 2.0 * margin,
    })
}

/// Estimator settings shared by every cell of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionConfig {
    pub level: usize,
    pub resolution: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        DimensionConfig {
            level: 12,
            resolution: crate::spectrum::DEFAULT_RESOLUTION,
            samples: 300,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaDims {
    pub lambda: f64,
    pub dim_sigma: f64,
    pub dim_sigma_r2: f64,
    /// Scaling estimate of the band measure; `median` is the point estimate.
    pub dim_nu: DimensionEstimate,
    pub eps_min: f64,
    pub eps_max: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Scale window `[median band length, cover diameter / 8]`.
fn scale_window(lower: &BandSet, diameter: f64) -> (f64, f64) {
    let mut lens: Vec<f64> = lower.band_list.iter().map(|b| b.len()).collect();
    (median(&mut lens), diameter / 8.0)
}

fn load_pair(lambda: f64, cfg: &DimensionConfig, cache: Option<&Cache>) -> Result<(BandSet, BandSet)> {
    match cache {
        Some(c) => c.band_pair(lambda, cfg.level, cfg.resolution),
        None => band_pair(lambda, cfg.level, cfg.resolution),
    }
}

fn box_dim(lower: &BandSet, upper: &BandSet) -> Result<(f64, f64, f64, f64)> {
    let cover = cover_from(lower, upper);
    let (eps_min, eps_max) = scale_window(lower, cover.diameter());
    if !(eps_min > 0.0 && eps_min < eps_max) {
        return Err(Error::EstimationFailed(format!(
            "empty scale window [{eps_min}, {eps_max}] at λ = {}",
            lower.lambda
        )));
    }
    let est = box_dimension_estimate(&cover, &geometric_scales(eps_max, eps_min, BOX_SCALES))?;
    Ok((est.estimate, est.fit_r2, eps_min, eps_max))
}

/// Box dimension of the level-`k` cover of `Σ_λ`.
pub fn dim_sigma_for_lambda(lambda: f64, cfg: &DimensionConfig, cache: Option<&Cache>) -> Result<f64> {
    let (lower, upper) = load_pair(lambda, cfg, cache)?;
    Ok(box_dim(&lower, &upper)?.0)
}

/// Box dimension of the spectral cover and scaling dimension of the band
/// measure, over a common scale window.
pub fn dims_for_lambda(lambda: f64, cfg: &DimensionConfig, cache: Option<&Cache>) -> Result<LambdaDims> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", "must be positive"));
    }
    let (lower, upper) = load_pair(lambda, cfg, cache)?;
    let (dim_sigma, dim_sigma_r2, eps_min, eps_max) = box_dim(&lower, &upper)?;
    let nu = BandMeasure::equal_weights(&lower.band_list)?;
    let range = EpsRange::new(eps_min, eps_max, MEASURE_SCALES)?;
    let dim_nu = measure_dimension_estimate(&nu, cfg.samples, range, cfg.seed)?;
    Ok(LambdaDims {
        lambda,
        dim_sigma,
        dim_sigma_r2,
        dim_nu,
        eps_min,
        eps_max,
    })
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::param("axis", "need 0 < lo ≤ hi"));
        }
        if n == 0 || (n == 1 && lo != hi) {
            return Err(Error::param("axis", "need n ≥ 2, or n = 1 with lo = hi"));
        }
        Ok(Axis { lo, hi, n })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * (i as f64 / (self.n - 1) as f64))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub lambda1: f64,
    pub lambda2: f64,
    pub dim_sigma1: f64,
    pub dim_sigma2: f64,
    pub dim_nu1: f64,
    pub dim_nu2: f64,
    pub regime: Regime,
    pub inconsistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub level: usize,
    pub resolution: f64,
    pub samples: usize,
    pub seed: u64,
    pub margin: f64,
    pub box_scales: usize,
    pub measure_scales: usize,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub l1: Axis,
    pub l2: Axis,
    /// Row-major: row `i` is the `i`-th value of λ₂, column `j` of λ₁.
    pub cells: Vec<PhaseCell>,
    pub lambdas: Vec<LambdaDims>,
    pub provenance: Provenance,
    pub dims_computed: usize,
    pub dims_lookups: usize,
}

impl PhaseDiagram {
    pub fn cell(&self, row: usize, col: usize) -> &PhaseCell {
        &self.cells[row * self.l1.n + col]
    }

    pub fn count(&self, regime: Regime) -> usize {
        self.cells.iter().filter(|c| c.regime == regime).count()
    }

    pub fn unresolved_fraction(&self) -> f64 {
        self.count(Regime::Unresolved) as f64 / self.cells.len() as f64
    }

    pub fn cache_hit_rate(&self) -> f64 {
        1.0 - self.dims_computed as f64 / self.dims_lookups as f64
    }

    pub fn cells_csv(&self) -> String {
        let mut out = String::from("lambda1,lambda2,dim_sigma1,dim_sigma2,dim_nu1,dim_nu2,regime\n");
        for c in &self.cells {
            let nums = [c.lambda1, c.lambda2, c.dim_sigma1, c.dim_sigma2, c.dim_nu1, c.dim_nu2];
            for v in nums {
                out.push_str(&json_number(v));
                out.push(',');
            }
            let _ = writeln!(out, "{}", c.regime.label());
        }
        out
    }

    /// Binary greyscale image with one pixel per cell.
    pub fn pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.l1.n, self.l2.n).into_bytes();
        out.extend(self.cells.iter().map(|c| c.regime.gray()));
        out
    }

    pub fn provenance_json(&self) -> Result<String> {
        let mut value = serde_json::json!({
            "schema_version": 1,
            "grid": { "l1": self.l1, "l2": self.l2 },
            "provenance": self.provenance,
            "counts": {
                "ACDS": self.count(Regime::Acds),
                "PMSD": self.count(Regime::Pmsd),
                "ZMSP": self.count(Regime::Zmsp),
                "UNRESOLVED": self.count(Regime::Unresolved),
            },
            "unresolved_fraction": self.unresolved_fraction(),
            "dims_computed": self.dims_computed,
            "dims_lookups": self.dims_lookups,
            "lambdas": self.lambdas,
        });
        round_value(&mut value);
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, bytes: &[u8]| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(path, e))
        };
        write("cells.csv", self.cells_csv().as_bytes())?;
        write("diagram.pgm", &self.pgm())?;
        write("provenance.json", self.provenance_json()?.as_bytes())
    }
}

/// Classifies every cell of the grid. Dimensions are computed once per
/// distinct coupling in a first parallel pass; cells are then classified in a
/// second pass.
pub fn sweep(l1: Axis, l2: Axis, cfg: &DimensionConfig, margin: f64, cache: Option<&Cache>) -> Result<PhaseDiagram> {
    classify(0.0, 0.0, margin)?;
    let xs = l1.values();
    let ys = l2.values();
    let distinct: BTreeMap<u64, f64> = xs.iter().chain(&ys).map(|&v| (v.to_bits(), v)).collect();
    let lambdas: Vec<f64> = distinct.values().copied().collect();
    let dims: Vec<LambdaDims> = lambdas
        .par_iter()
        .map(|&lam| dims_for_lambda(lam, cfg, cache))
        .collect::<Result<_>>()?;
    let by_bits: BTreeMap<u64, &LambdaDims> = dims.iter().map(|d| (d.lambda.to_bits(), d)).collect();

    let cells: Vec<PhaseCell> = (0..ys.len() * xs.len())
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / xs.len(), idx % xs.len());
            let a = by_bits[&xs[col].to_bits()];
            let b = by_bits[&ys[row].to_bits()];
            let c = classify(a.dim_sigma + b.dim_sigma, a.dim_nu.median + b.dim_nu.median, margin)
                .expect("margin already validated");
            PhaseCell {
                lambda1: a.lambda,
                lambda2: b.lambda,
                dim_sigma1: a.dim_sigma,
                dim_sigma2: b.dim_sigma,
                dim_nu1: a.dim_nu.median,
                dim_nu2: b.dim_nu.median,
                regime: c.regime,
                inconsistent: c.inconsistent,
            }
        })
        .collect();

    Ok(PhaseDiagram {
        l1,
        l2,
        dims_computed: dims.len(),
        dims_lookups: 2 * cells.len(),
        cells,
        lambdas: dims,
        provenance: Provenance {
            level: cfg.level,
            resolution: cfg.resolution,
            samples: cfg.samples,
            seed: cfg.seed,
            margin,
            box_scales: BOX_SCALES,
            measure_scales: MEASURE_SCALES,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub from: f64,
    pub to: f64,
    pub slope: f64,
    pub near_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub lambdas: Vec<f64>,
    pub dims: Vec<f64>,
    pub slopes: Vec<Slope>,
    /// Indices `i` where slopes `i` and `i + 1` have opposite signs.
    pub sign_changes: Vec<usize>,
    pub all_negative: bool,
}

/// Finite-difference slopes of `dims` against `lambdas`.
pub fn monotonicity_from(lambdas: &[f64], dims: &[f64]) -> Result<MonotonicityReport> {
    if lambdas.len() < 2 || lambdas.len() != dims.len() {
        return Err(Error::param(
            "lambdas",
            "need at least two points with one dimension each",
        ));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("lambdas", "must be strictly increasing"));
    }
    let slopes: Vec<Slope> = lambdas
        .windows(2)
        .zip(dims.windows(2))
        .map(|(l, d)| {
            let slope = (d[1] - d[0]) / (l[1] - l[0]);
            Slope {
                from: l[0],
                to: l[1],
                slope,
                near_zero: slope.abs() < NEAR_ZERO_SLOPE,
            }
        })
        .collect();
    let sign_changes = slopes
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].slope * w[1].slope < 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(MonotonicityReport {
        lambdas: lambdas.to_vec(),
        dims: dims.to_vec(),
        all_negative: slopes.iter().all(|s| s.slope < 0.0),
        slopes,
        sign_changes,
    })
}

/// [`monotonicity_from`] applied to freshly estimated `dim_H Σ_λ`.
pub fn monotonicity_report(
    lambdas: &[f64],
    cfg: &DimensionConfig,
    cache: Option<&Cache>,
) -> Result<MonotonicityReport> {
    let dims: Vec<f64> = lambdas
        .par_iter()
        .map(|&l| dim_sigma_for_lambda(l, cfg, cache))
        .collect::<Result<_>>()?;
    monotonicity_from(lambdas, &dims)
}
