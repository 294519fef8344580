//! Box-counting dimension of interval unions on a grid anchored at the infimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::IntervalSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxEstimate {
    pub estimate: f64,
    pub fit_r2: f64,
}

/// `n` geometrically spaced sizes from `largest` down to `smallest`.
pub fn geometric_scales(largest: f64, smallest: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![largest];
    }
    let ratio = (smallest / largest).ln() / (n - 1) as f64;
    (0..n).map(|i| largest * (ratio * i as f64).exp()).collect()
}

/// Number of grid boxes `[inf + jε, inf + (j+1)ε)` meeting `s`.
pub fn box_count(s: &IntervalSet, eps: f64) -> u64 {
    let Some(hull) = s.hull() else {
        return 0;
    };
    let origin = hull.lo;
    let mut count = 0u64;
    let mut last: Option<i64> = None;
    for iv in s.intervals() {
        let j_lo = ((iv.lo - origin) / eps + 1e-9).floor() as i64;
        let j_hi = (((iv.hi - origin) / eps - 1e-9).ceil() as i64 - 1).max(j_lo);
        let start = match last {
            Some(l) if l >= j_lo => l + 1,
            _ => j_lo,
        };
        if j_hi >= start {
            count += (j_hi - start + 1) as u64;
        }
        last = Some(last.map_or(j_hi, |l| l.max(j_hi)));
    }
    count
}

/// Ordinary least squares fit; returns `(slope, r²)`.
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Slope of `log N(ε)` against `log(1/ε)` over the given box sizes.
pub fn box_dimension_estimate(s: &IntervalSet, scales: &[f64]) -> Result<BoxEstimate> {
    if s.is_empty() {
        return Err(Error::param("s", "cannot estimate the dimension of an empty set"));
    }
    if scales.len() < 4 {
        return Err(Error::param("scales", "at least 4 box sizes are required"));
    }
    if scales.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::param("scales", "box sizes must be positive and finite"));
    }
    let diam = s.diameter();
    if diam == 0.0 {
        return Ok(BoxEstimate {
            estimate: 0.0,
            fit_r2: 1.0,
        });
    }
    if let Some(&e) = scales.iter().find(|&&e| e >= diam) {
        return Err(Error::param(
            "scales",
            format!("box size {e} is not smaller than the diameter {diam}"),
        ));
    }
    let xs: Vec<f64> = scales.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|&e| (box_count(s, e) as f64).ln()).collect();
    let (estimate, fit_r2) = ols(&xs, &ys);
    Ok(BoxEstimate { estimate, fit_r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{approximant, middle_alpha_system};

    #[test]
    fn full_interval() {
        let s = IntervalSet::from_pairs(&[(0.0, 1.0)]).unwrap();
        let scales: Vec<f64> = (3..=10).map(|k| 2f64.powi(-k)).collect();
        for &e in &scales {
            assert_eq!(box_count(&s, e), (1.0 / e).round() as u64);
        }
        let est = box_dimension_estimate(&s, &scales).unwrap();
        assert!((est.estimate - 1.0).abs() < 0.01);
        assert!(est.fit_r2 > 0.999);
    }

    #[test]
    fn middle_third_ternary_grid() {
        let s = approximant(&middle_alpha_system(1.0 / 3.0).unwrap(), 12).unwrap();
        let scales: Vec<f64> = (2..=8).map(|k| 3f64.powi(-k)).collect();
        for (k, &e) in (2..=8).zip(&scales) {
            assert_eq!(box_count(&s, e), 1u64 << k);
        }
        let est = box_dimension_estimate(&s, &scales).unwrap();
        assert!((est.estimate - 2f64.ln() / 3f64.ln()).abs() < 0.02);
    }

    #[test]
    fn degenerate_and_invalid() {
        let point = IntervalSet::from_pairs(&[(0.3, 0.3)]).unwrap();
        assert_eq!(
            box_dimension_estimate(&point, &[0.1, 0.01, 0.001, 0.0001])
                .unwrap()
                .estimate,
            0.0
        );
        let s = IntervalSet::from_pairs(&[(0.0, 1.0)]).unwrap();
        assert!(box_dimension_estimate(&s, &[0.1, 0.01, 0.001]).is_err());
        assert!(box_dimension_estimate(&s, &[2.0, 0.1, 0.01, 0.001]).is_err());
    }

    #[test]
    fn scales_are_geometric() {
        let sc = geometric_scales(1.0, 1e-3, 4);
        for (a, b) in sc.iter().zip([1.0, 0.1, 0.01, 0.001]) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
