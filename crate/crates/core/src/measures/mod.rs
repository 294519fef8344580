//! Probability measures made of uniformly weighted intervals, their
//! convolutions, and local-dimension estimators.

mod convolve;
mod lyapunov;
mod scaling;

pub use convolve::{convolve, default_granularity, CONVOLVE_BUDGET};
pub use lyapunov::{
    dimension_via_lyapunov, estimate_lyapunov, LyapunovDimension, LyapunovEstimate, MAX_LYAPUNOV_STEPS,
};
pub use scaling::{
    convolution_dim_bound, measure_dimension_estimate, scaling_exponent, singularity_verdict, DimensionEstimate,
    EpsRange, ScalingReport, Verdict,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Tolerance on the total weight accepted by [`BandMeasure::new`].
pub const WEIGHT_TOL: f64 = 1e-9;

/// Weight spread uniformly over `[lo, hi]`; a point mass when `lo == hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", from = "[f64; 3]")]
pub struct Atom {
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

impl Atom {
    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.lo,
            hi: self.hi,
        }
    }
}

impl From<Atom> for [f64; 3] {
    fn from(a: Atom) -> Self {
        [a.lo, a.hi, a.weight]
    }
}

impl From<[f64; 3]> for Atom {
    fn from([lo, hi, weight]: [f64; 3]) -> Self {
        Atom { lo, hi, weight }
    }
}

/// Sorted atoms with disjoint interiors and total weight 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct BandMeasure {
    atoms: Vec<Atom>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for BandMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        BandMeasure::new(raw.atoms)
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl BandMeasure {
    /// Validates the atoms and rescales their weights to sum to exactly one.
    ///
    /// Atoms must be sorted with `prev.hi ≤ next.lo`, carry positive finite
    /// weights, and sum to 1 within [`WEIGHT_TOL`].
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::param("atoms", "a measure needs at least one atom"));
        }
        for a in &atoms {
            Interval::new(a.lo, a.hi)?;
            if !a.lo.is_finite() || !a.hi.is_finite() {
                return Err(Error::param("atoms", "endpoints must be finite"));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::param("atoms", format!("weight {} is not positive", a.weight)));
            }
        }
        if let Some(w) = atoms.windows(2).find(|w| w[0].hi > w[1].lo) {
            return Err(Error::param(
                "atoms",
                format!(
                    "atoms [{}, {}] and [{}, {}] overlap or are unsorted",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                ),
            ));
        }
        let total = compensated_sum(atoms.iter().map(|a| a.weight));
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::param("atoms", format!("weights sum to {total}, not 1")));
        }
        Ok(Self::renormalized(atoms, total))
    }

    pub(crate) fn renormalized(mut atoms: Vec<Atom>, total: f64) -> Self {
        for a in &mut atoms {
            a.weight /= total;
        }
        let mut cumulative = Vec::with_capacity(atoms.len() + 1);
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        cumulative.push(0.0);
        for a in &atoms {
            let y = a.weight - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            cumulative.push(sum);
        }
        BandMeasure { atoms, cumulative }
    }

    /// Equal weight on each interval; intervals must be sorted and may touch.
    pub fn equal_weights(intervals: &[Interval]) -> Result<Self> {
        let n = intervals.len() as f64;
        BandMeasure::new(
            intervals
                .iter()
                .map(|iv| Atom {
                    lo: iv.lo,
                    hi: iv.hi,
                    weight: 1.0 / n,
                })
                .collect(),
        )
    }

    pub fn point(x: f64) -> Self {
        Self::renormalized(
            vec![Atom {
                lo: x,
                hi: x,
                weight: 1.0,
            }],
            1.0,
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.weight))
    }

    pub fn support_hull(&self) -> Interval {
        Interval {
            lo: self.atoms[0].lo,
            hi: self.atoms[self.atoms.len() - 1].hi,
        }
    }

    /// `μ((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.hi <= x);
        self.cumulative[idx] + self.partial(idx, x)
    }

    /// `μ((−∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.hi < x);
        self.cumulative[idx] + self.partial(idx, x)
    }

    fn partial(&self, idx: usize, x: f64) -> f64 {
        match self.atoms.get(idx) {
            Some(a) if a.lo < x && a.hi > a.lo => a.weight * ((x - a.lo) / (a.hi - a.lo)).min(1.0),
            _ => 0.0,
        }
    }

    /// Mass of the open ball `(x − ε, x + ε)`.
    pub fn ball_mass(&self, x: f64, eps: f64) -> f64 {
        (self.cdf_left(x + eps) - self.cdf(x - eps)).max(0.0)
    }

    /// Inverse of the cdf at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let idx = (self.cumulative.partition_point(|&c| c <= u).max(1) - 1).min(self.atoms.len() - 1);
        let a = self.atoms[idx];
        let t = ((u - self.cumulative[idx]) / a.weight).clamp(0.0, 1.0);
        a.lo + t * (a.hi - a.lo)
    }

    /// Deterministic sample `index` of the stream keyed by `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.quantile(rng.random::<f64>())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
