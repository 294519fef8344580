//! Density-of-states approximants and the finite-chain counting oracle.

use rayon::prelude::*;

use super::{band_set, default_window};
use crate::error::{Error, Result};
use crate::measures::BandMeasure;

/// Frequency `α = (√5 − 1)/2` of the Fibonacci potential.
pub const ALPHA: f64 = 0.618_033_988_749_894_9;

/// `V(n) = λ·χ_{[1−α, 1)}(nα mod 1)` for `n = 1..=n_sites`.
pub fn fibonacci_potential(lambda: f64, n_sites: usize) -> Vec<f64> {
    (1..=n_sites)
        .map(|n| {
            let frac = (n as f64 * ALPHA).fract();
            if frac >= 1.0 - ALPHA {
                lambda
            } else {
                0.0
            }
        })
        .collect()
}

/// First `len` symbols of the fixed point of `a ↦ ab, b ↦ a` (`a` as 1, `b` as 0).
pub fn fibonacci_word(len: usize) -> Vec<u8> {
    let mut word = vec![1u8];
    while word.len() < len {
        word = word
            .iter()
            .flat_map(|&s| if s == 1 { vec![1, 0] } else { vec![1] })
            .collect();
    }
    word.truncate(len);
    word
}

/// Number of eigenvalues below `energy` of the tridiagonal matrix with the given
/// diagonal and unit off-diagonal, by counting negative Sturm pivots.
fn sturm_count(diag: &[f64], energy: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - energy } else { d - energy - 1.0 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (1.0 + d.abs() + energy.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Normalized eigenvalue counting function of the `n_sites` Fibonacci chain
/// with free boundary conditions, evaluated on `grid`.
pub fn finite_chain_dos(lambda: f64, n_sites: usize, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if n_sites < 2 {
        return Err(Error::param("n_sites", "at least two sites are required"));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::param("energy_grid", "must be sorted"));
    }
    let diag = fibonacci_potential(lambda, n_sites);
    Ok(grid
        .par_iter()
        .map(|&e| (e, sturm_count(&diag, e) as f64 / n_sites as f64))
        .collect())
}

/// Level-`k` DOS approximant: weight `1/count` on each band of `σ_k`.
pub fn band_dos(lambda: f64, level: usize, resolution: f64) -> Result<BandMeasure> {
    let bands = band_set(lambda, level, default_window(lambda), resolution)?;
    BandMeasure::equal_weights(&bands.band_list)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn potential_starts_like_the_word() {
        assert_eq!(fibonacci_potential(1.0, 5), [1.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(fibonacci_word(8), [1, 0, 1, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn free_chain_counts() {
        let out = finite_chain_dos(0.0, 1000, &[-2.001, 0.0, 2.001]).unwrap();
        assert_eq!(out[0].1, 0.0);
        assert!((out[1].1 - 0.5).abs() < 0.01);
        assert_eq!(out[2].1, 1.0);
    }

    #[test]
    fn counting_function_is_monotone() {
        let g = grid(-3.0, 4.0, 400);
        let out = finite_chain_dos(1.0, 500, &g).unwrap();
        assert!(out.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(finite_chain_dos(1.0, 500, &[1e3]).unwrap()[0].1, 1.0);
        assert!(finite_chain_dos(1.0, 1, &g).is_err());
    }

    #[test]
    fn single_free_band() {
        let m = band_dos(0.0, 1, 1e-4).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(
            (m.atoms()[0].lo, m.atoms()[0].hi, m.atoms()[0].weight),
            (-2.0, 2.0, 1.0)
        );
    }
}
