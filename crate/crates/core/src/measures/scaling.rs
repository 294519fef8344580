use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BandMeasure;
use crate::error::{Error, Result};

/// Radii `eps_max > ε₁ > … > ε_n = eps_min` used by the local estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsRange {
    pub eps_min: f64,
    pub eps_max: f64,
    pub n_scales: usize,
}

impl EpsRange {
    pub fn new(eps_min: f64, eps_max: f64, n_scales: usize) -> Result<Self> {
        if !(eps_min > 0.0 && eps_min < eps_max && eps_max.is_finite()) {
            return Err(Error::param("eps", "need 0 < eps_min < eps_max"));
        }
        if n_scales < 4 {
            return Err(Error::param("n_scales", "at least 4 scales are required"));
        }
        Ok(EpsRange {
            eps_min,
            eps_max,
            n_scales,
        })
    }

    fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.eps_min / self.eps_max).ln() / self.n_scales as f64;
        (1..=self.n_scales).map(move |i| {
            if i == self.n_scales {
                self.eps_min
            } else {
                self.eps_max * (step * i as f64).exp()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub point: f64,
    /// `(ε, log(μ(B(x, ε))/μ(B(x, eps_max))) / log(ε/eps_max))`, ε decreasing.
    pub exponents: Vec<(f64, f64)>,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    pub no_mass: bool,
}

/// Local scaling exponents of `m` at `x`, measured relative to the ball of
/// radius `eps_max`. The lower and upper values are the extremes over the
/// finer half of the scales.
pub fn scaling_exponent(m: &BandMeasure, x: f64, range: EpsRange) -> ScalingReport {
    let anchor = m.ball_mass(x, range.eps_max);
    if anchor <= 0.0 {
        return ScalingReport {
            point: x,
            exponents: Vec::new(),
            alpha_lower: f64::NAN,
            alpha_upper: f64::NAN,
            no_mass: true,
        };
    }
    let exponents: Vec<(f64, f64)> = range
        .radii()
        .map(|eps| {
            let mass = m.ball_mass(x, eps);
            let alpha = if mass > 0.0 {
                ((mass / anchor).ln() / (eps / range.eps_max).ln()).max(0.0)
            } else {
                f64::INFINITY
            };
            (eps, alpha)
        })
        .collect();
    let fine = &exponents[exponents.len() / 2..];
    let alpha_lower = fine.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let alpha_upper = fine.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    ScalingReport {
        point: x,
        exponents,
        alpha_lower,
        alpha_upper,
        no_mass: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// 5th percentile of the sampled lower exponents.
    pub lower: f64,
    /// 95th percentile of the sampled lower exponents.
    pub upper: f64,
    pub median: f64,
    pub sample_count: usize,
}

/// Linear-interpolation percentile of sorted data, `q ∈ [0, 1]`.
pub(crate) fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(&next) if frac > 0.0 => sorted[i] + frac * (next - sorted[i]),
        _ => sorted[i],
    }
}

/// Percentile summary of `alpha_lower` at points drawn from `m`.
pub fn measure_dimension_estimate(
    m: &BandMeasure,
    n_samples: usize,
    range: EpsRange,
    seed: u64,
) -> Result<DimensionEstimate> {
    if n_samples < 100 {
        return Err(Error::param("n_samples", "at least 100 samples are required"));
    }
    let mut alphas: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            scaling_exponent(m, m.sample(seed, i), range)
                .alpha_lower
                .clamp(0.0, 1.0)
        })
        .collect();
    alphas.sort_by(f64::total_cmp);
    Ok(DimensionEstimate {
        lower: percentile(&alphas, 0.05),
        upper: percentile(&alphas, 0.95),
        median: percentile(&alphas, 0.5),
        sample_count: n_samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Singular,
    Inconclusive,
}

/// `Singular` when `d1.upper + d2.upper < 1 − margin`.
pub fn singularity_verdict(d1: &DimensionEstimate, d2: &DimensionEstimate, margin: f64) -> Result<Verdict> {
    if !(margin > 0.0) {
        return Err(Error::param("margin", "must be positive"));
    }
    Ok(if d1.upper + d2.upper < 1.0 - margin {
        Verdict::Singular
    } else {
        Verdict::Inconclusive
    })
}

pub fn convolution_dim_bound(d1: f64, d2: f64) -> f64 {
    (d1 + d2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{approximant, middle_alpha_system};
    use crate::measures::Atom;

    fn uniform() -> BandMeasure {
        BandMeasure::new(vec![Atom {
            lo: 0.0,
            hi: 1.0,
            weight: 1.0,
        }])
        .unwrap()
    }

    fn cantor_measure(depth: u32) -> BandMeasure {
        let set = approximant(&middle_alpha_system(1.0 / 3.0).unwrap(), depth).unwrap();
        BandMeasure::equal_weights(set.intervals()).unwrap()
    }

    #[test]
    fn uniform_exponents_are_one() {
        let r = scaling_exponent(&uniform(), 0.5, EpsRange::new(1e-4, 0.25, 8).unwrap());
        assert_eq!(r.exponents.len(), 8);
        assert!(r.exponents.iter().all(|&(_, a)| (a - 1.0).abs() < 1e-9));
        assert!(r.exponents.windows(2).all(|w| w[0].0 > w[1].0));
    }

    #[test]
    fn point_mass_exponents_are_zero() {
        let r = scaling_exponent(&BandMeasure::point(0.0), 0.0, EpsRange::new(1e-6, 0.1, 6).unwrap());
        assert!(r.exponents.iter().all(|&(_, a)| a == 0.0));
        assert_eq!((r.alpha_lower, r.alpha_upper), (0.0, 0.0));
    }

    #[test]
    fn no_mass_flag() {
        let r = scaling_exponent(&uniform(), 5.0, EpsRange::new(1e-3, 0.1, 4).unwrap());
        assert!(r.no_mass && r.exponents.is_empty());
    }

    #[test]
    fn cantor_point_exponents() {
        let m = cantor_measure(10);
        let r = scaling_exponent(&m, 0.25, EpsRange::new(3f64.powi(-8), 3f64.powi(-3), 10).unwrap());
        let d = 2f64.ln() / 3f64.ln();
        assert!(
            (r.alpha_lower - d).abs() < 0.05 && (r.alpha_upper - d).abs() < 0.05,
            "{r:?}"
        );
    }

    #[test]
    fn dimension_estimates() {
        let u = measure_dimension_estimate(&uniform(), 400, EpsRange::new(1e-5, 1e-2, 8).unwrap(), 1).unwrap();
        assert!((u.lower - 1.0).abs() < 0.05 && (u.upper - 1.0).abs() < 0.05);
        let p = measure_dimension_estimate(&BandMeasure::point(2.0), 100, EpsRange::new(1e-5, 1e-2, 8).unwrap(), 1)
            .unwrap();
        assert_eq!((p.lower, p.upper), (0.0, 0.0));
        let range = EpsRange::new(3f64.powi(-10), 3f64.powi(-1), 12).unwrap();
        let c = measure_dimension_estimate(&cantor_measure(12), 400, range, 3).unwrap();
        let d = 2f64.ln() / 3f64.ln();
        assert!((c.lower - d).abs() < 0.05 && (c.upper - d).abs() < 0.05, "{c:?}");
    }

    #[test]
    fn verdict_rule() {
        let est = |upper| DimensionEstimate {
            lower: 0.0,
            upper,
            median: upper,
            sample_count: 100,
        };
        assert_eq!(
            singularity_verdict(&est(0.3), &est(0.4), 0.05).unwrap(),
            Verdict::Singular
        );
        assert_eq!(
            singularity_verdict(&est(0.6), &est(0.6), 0.05).unwrap(),
            Verdict::Inconclusive
        );
        assert_eq!(
            singularity_verdict(&est(0.45), &est(0.5), 0.1).unwrap(),
            Verdict::Inconclusive
        );
        assert!(singularity_verdict(&est(0.1), &est(0.1), 0.0).is_err());
        assert!((convolution_dim_bound(0.3, 0.4) - 0.7).abs() < 1e-15);
        assert_eq!(convolution_dim_bound(0.9, 0.9), 1.0);
    }

    #[test]
    fn percentiles() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.0);
        assert_eq!(percentile(&v, 0.05), 0.2);
        assert_eq!(percentile(&[7.0], 0.95), 7.0);
    }
}
