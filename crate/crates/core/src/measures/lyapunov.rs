use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BandMeasure;
use crate::error::{Error, Result};
use crate::trace::{classify_from, initial_point, jacobian, trace_step, OrbitParams};

/// Largest horizon accepted by [`estimate_lyapunov`].
pub const MAX_LYAPUNOV_STEPS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub exponent: f64,
    pub bounded_count: usize,
    pub discard_fraction: f64,
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// `(1/n) log ‖D(Tⁿ)(p₀)‖` with the Frobenius norm, renormalizing each step.
pub(crate) fn growth_rate(energy: f64, lambda: f64, n_steps: usize) -> f64 {
    let mut p = initial_point(energy, lambda);
    let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut log_norm = 0.0;
    for _ in 0..n_steps {
        m = mat_mul(&jacobian(p), &m);
        p = trace_step(p);
        let norm = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        log_norm += norm.ln();
        for v in m.iter_mut().flatten() {
            *v /= norm;
        }
    }
    log_norm / n_steps as f64
}

/// Mean growth rate of the trace-map derivative over energies drawn from `m`
/// whose orbits show no escape within `n_steps`.
pub fn estimate_lyapunov(
    lambda: f64,
    m: &BandMeasure,
    n_energies: usize,
    n_steps: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", "must be positive"));
    }
    if n_steps == 0 || n_steps > MAX_LYAPUNOV_STEPS {
        return Err(Error::param("n_steps", format!("must lie in 1..={MAX_LYAPUNOV_STEPS}")));
    }
    if n_energies == 0 {
        return Err(Error::param("n_energies", "must be positive"));
    }
    let params = OrbitParams {
        max_iter: n_steps,
        ..OrbitParams::default()
    };
    let rates: Vec<Option<f64>> = (0..n_energies as u64)
        .into_par_iter()
        .map(|i| {
            let e = m.sample(seed, i);
            classify_from(initial_point(e, lambda), params)
                .is_bounded()
                .then(|| growth_rate(e, lambda, n_steps))
        })
        .collect();
    let kept: Vec<f64> = rates.into_iter().flatten().collect();
    if (kept.len() as f64) < 0.1 * n_energies as f64 || kept.is_empty() {
        return Err(Error::EstimationFailed(format!(
            "only {} of {} sampled orbits stayed bounded for {} steps",
            kept.len(),
            n_energies,
            n_steps
        )));
    }
    Ok(LyapunovEstimate {
        exponent: kept.iter().sum::<f64>() / kept.len() as f64,
        bounded_count: kept.len(),
        discard_fraction: 1.0 - kept.len() as f64 / n_energies as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovDimension {
    /// `entropy / lyapunov`, capped at 1.
    pub dimension: f64,
    pub ratio: f64,
    /// Set when the ratio exceeds 1.
    pub inconsistent: bool,
}

pub fn dimension_via_lyapunov(entropy: f64, lyapunov: f64) -> Result<LyapunovDimension> {
    if !(lyapunov > 0.0) {
        return Err(Error::param("lyapunov", "must be positive"));
    }
    if !(entropy > 0.0) {
        return Err(Error::param("entropy", "must be positive"));
    }
    let ratio = entropy / lyapunov;
    Ok(LyapunovDimension {
        dimension: ratio.min(1.0),
        ratio,
        inconsistent: ratio > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TracePoint;

    #[test]
    fn jacobian_at_periodic_point() {
        assert_eq!(
            jacobian(TracePoint::new(0.0, 0.0, 1.0)),
            [[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn period_six_derivative() {
        let mut p = TracePoint::new(0.0, 0.0, 1.0);
        let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for _ in 0..6 {
            m = mat_mul(&jacobian(p), &m);
            p = trace_step(p);
        }
        assert_eq!(p, TracePoint::new(0.0, 0.0, 1.0));
        assert_eq!(m, [[13.0, 8.0, 0.0], [8.0, 5.0, 0.0], [0.0, 0.0, 1.0]]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((growth_rate(0.0, 0.0, 30) - phi.ln()).abs() < 0.02);
    }

    #[test]
    fn lyapunov_dimension_examples() {
        assert_eq!(dimension_via_lyapunov(0.5, 1.0).unwrap().dimension, 0.5);
        assert_eq!(dimension_via_lyapunov(0.5, 0.5).unwrap().dimension, 1.0);
        let flagged = dimension_via_lyapunov(0.7, 0.5).unwrap();
        assert!(flagged.inconsistent && (flagged.ratio - 1.4).abs() < 1e-15);
        assert!(dimension_via_lyapunov(0.5, 0.0).is_err());
    }

    #[test]
    fn input_validation() {
        let m = BandMeasure::point(0.0);
        assert!(estimate_lyapunov(0.0, &m, 10, 10, 1).is_err());
        assert!(estimate_lyapunov(1.0, &m, 10, 31, 1).is_err());
    }
}
