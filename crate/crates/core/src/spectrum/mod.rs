//! Spectra of the Fibonacci Hamiltonian from the half-trace recursion.

mod bands;
mod dos;

pub use bands::{band_hierarchy, SCAN_BUDGET};
pub use dos::{band_dos, fibonacci_potential, fibonacci_word, finite_chain_dos, ALPHA};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{minkowski_sum, normalize, Interval, IntervalSet};
use crate::trace::OrbitParams;

/// Largest level accepted by [`half_trace`].
pub const MAX_LEVEL: i64 = 40;

/// Default scan step in energy units.
pub const DEFAULT_RESOLUTION: f64 = 1e-4;

/// Degree of `a_k` in `E`: 0, 1, 1, 2, 3, 5, … for `k = −1, 0, 1, …`.
pub fn fibonacci_degree(k: i64) -> u64 {
    assert!(k >= -1, "degree is defined for k ≥ −1");
    let (mut prev, mut cur) = (0u64, 1u64);
    for _ in 0..k.max(0) {
        (prev, cur) = (cur, prev + cur);
    }
    if k == -1 {
        0
    } else {
        cur
    }
}

/// `a_k(E)` without range checks; evaluated exactly as repeated trace steps.
pub(crate) fn half_trace_raw(energy: f64, lambda: f64, k: i64) -> f64 {
    match k {
        -1 => 1.0,
        0 => energy / 2.0,
        _ => {
            let (mut x, mut y, mut z) = ((energy - lambda) / 2.0, energy / 2.0, 1.0);
            for _ in 1..k {
                (x, y, z) = (2.0 * x * y - z, x, y);
            }
            x
        }
    }
}

/// Half-trace `a_k(E)` with `(a₁, a₀, a₋₁) = ((E − λ)/2, E/2, 1)`.
pub fn half_trace(energy: f64, lambda: f64, k: i64) -> Result<f64> {
    if k < -1 {
        return Err(Error::param("k", format!("{k} is below −1")));
    }
    if k > MAX_LEVEL {
        return Err(Error::param("k", format!("{k} exceeds {MAX_LEVEL}")));
    }
    Ok(half_trace_raw(energy, lambda, k))
}

/// Energy window `[−3 − λ, 3 + λ]`, which contains every band.
pub fn default_window(lambda: f64) -> Interval {
    Interval {
        lo: -3.0 - lambda,
        hi: 3.0 + lambda,
    }
}

/// Level-`k` bands `σ_k = {E : |a_k(E)| ≤ 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    pub lambda: f64,
    pub level: usize,
    pub resolution: f64,
    /// Connected components of `σ_k` inside the window.
    pub bands: IntervalSet,
    /// One band per root of `a_k`, before merging touching neighbours.
    pub band_list: Vec<Interval>,
}

fn check_inputs(lambda: f64, resolution: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", "must be finite and non-negative"));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::param("resolution", "must be positive"));
    }
    Ok(())
}

fn check_window(window: Interval, resolution: f64) -> Result<()> {
    let points = (window.len() / resolution).ceil() + 1.0;
    if points > SCAN_BUDGET as f64 {
        return Err(Error::BudgetExceeded {
            what: "band scan point",
            requested: points.min(u128::MAX as f64) as u128,
            cap: SCAN_BUDGET,
        });
    }
    Ok(())
}

fn band_set_from(lambda: f64, level: usize, resolution: f64, raw: Vec<Interval>, window: Interval) -> BandSet {
    let band_list: Vec<Interval> = raw
        .into_iter()
        .filter_map(|iv| {
            let lo = iv.lo.max(window.lo);
            let hi = iv.hi.min(window.hi);
            (lo <= hi).then_some(Interval { lo, hi })
        })
        .collect();
    let bands = normalize(band_list.iter().copied()).expect("bands are ordered intervals");
    BandSet {
        lambda,
        level,
        resolution,
        bands,
        band_list,
    }
}

pub fn band_set(lambda: f64, level: usize, window: Interval, resolution: f64) -> Result<BandSet> {
    check_inputs(lambda, resolution)?;
    check_window(window, resolution)?;
    let mut levels = band_hierarchy(lambda, level, resolution)?;
    let raw = levels.swap_remove(level);
    Ok(band_set_from(lambda, level, resolution, raw, window))
}

/// Band sets for levels `k` and `k + 1` from one pass through the hierarchy.
pub fn band_pair(lambda: f64, level: usize, resolution: f64) -> Result<(BandSet, BandSet)> {
    check_inputs(lambda, resolution)?;
    let window = default_window(lambda);
    check_window(window, resolution)?;
    let mut levels = band_hierarchy(lambda, level + 1, resolution)?;
    let upper = levels.pop().expect("hierarchy has level k + 1");
    let lower = levels.pop().expect("hierarchy has level k");
    Ok((
        band_set_from(lambda, level, resolution, lower, window),
        band_set_from(lambda, level + 1, resolution, upper, window),
    ))
}

/// Outer cover `σ_k ∪ σ_{k+1}` of `Σ_λ`.
pub fn spectrum_approximant(lambda: f64, level: usize, resolution: f64) -> Result<IntervalSet> {
    let (lower, upper) = band_pair(lambda, level, resolution)?;
    Ok(cover_from(&lower, &upper))
}

pub fn cover_from(lower: &BandSet, upper: &BandSet) -> IntervalSet {
    lower.bands.union(&upper.bands)
}

/// Outer cover of the square-model spectrum `Σ_{λ₁} + Σ_{λ₂}`.
pub fn sum_spectrum(lambda1: f64, lambda2: f64, level: usize, resolution: f64) -> Result<IntervalSet> {
    let a = spectrum_approximant(lambda1, level, resolution)?;
    let b = if lambda2 == lambda1 {
        a.clone()
    } else {
        spectrum_approximant(lambda2, level, resolution)?
    };
    Ok(minkowski_sum(&a, &b))
}

/// Orbit budget (`k + 3` steps, escape radius 5) resolving the same energy
/// scale as the level-`k` cover.
pub fn matched_orbit_params(level: usize) -> OrbitParams {
    OrbitParams {
        max_iter: level + 3,
        escape_norm: 5.0,
    }
}
