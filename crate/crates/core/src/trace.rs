//! The Fibonacci trace map, its invariant, and orbit classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl TracePoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        TracePoint { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_norm(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

/// `T(x, y, z) = (2xy − z, x, y)`.
pub fn trace_step(p: TracePoint) -> TracePoint {
    TracePoint {
        x: 2.0 * p.x * p.y - p.z,
        y: p.x,
        z: p.y,
    }
}

/// `G(x, y, z) = x² + y² + z² − 2xyz − 1`.
pub fn fricke_vogt(p: TracePoint) -> f64 {
    p.x * p.x + p.y * p.y + p.z * p.z - 2.0 * p.x * p.y * p.z - 1.0
}

/// Point `((E − λ)/2, E/2, 1)` on the line of initial conditions.
pub fn initial_point(energy: f64, lambda: f64) -> TracePoint {
    TracePoint {
        x: (energy - lambda) / 2.0,
        y: energy / 2.0,
        z: 1.0,
    }
}

pub fn surface_residual(p: TracePoint, lambda: f64) -> f64 {
    fricke_vogt(p) - lambda * lambda / 4.0
}

/// Derivative of the trace map at `p`, row-major.
pub fn jacobian(p: TracePoint) -> [[f64; 3]; 3] {
    [[2.0 * p.y, 2.0 * p.x, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
}

/// Iteration budget and escape radius for orbit classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitParams {
    pub max_iter: usize,
    pub escape_norm: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            max_iter: 200,
            escape_norm: 10.0,
        }
    }
}

impl OrbitParams {
    pub fn new(max_iter: usize, escape_norm: f64) -> Result<Self> {
        let params = OrbitParams { max_iter, escape_norm };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        if !(self.escape_norm > 2.0) {
            return Err(Error::param("escape_norm", "must exceed 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitStatus {
    /// No escape detected within the budget; not a certificate.
    Bounded {
        steps_run: usize,
    },
    Escaped {
        escape_step: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub status: OrbitStatus,
    pub max_norm: f64,
    /// Largest `|G(pₙ) − G(p₀)|` over the steps that stayed inside the escape radius.
    pub invariant_drift: f64,
}

impl OrbitResult {
    pub fn is_bounded(&self) -> bool {
        matches!(self.status, OrbitStatus::Bounded { .. })
    }

    pub fn steps(&self) -> usize {
        match self.status {
            OrbitStatus::Bounded { steps_run } => steps_run,
            OrbitStatus::Escaped { escape_step } => escape_step,
        }
    }
}

/// Classifies the forward orbit of `p0`.
///
/// Escape is declared at step `n` when the max-norm exceeds the escape radius
/// and has strictly increased over each of the last three steps, or as soon as
/// a coordinate becomes non-finite.
pub fn classify_from(p0: TracePoint, params: OrbitParams) -> OrbitResult {
    let g0 = fricke_vogt(p0);
    let mut p = p0;
    let mut norms = [p0.max_norm(); 4];
    let mut max_norm = norms[0];
    let mut drift = 0.0_f64;
    for n in 1..=params.max_iter {
        p = trace_step(p);
        if !p.is_finite() {
            return OrbitResult {
                status: OrbitStatus::Escaped { escape_step: n },
                max_norm: f64::INFINITY,
                invariant_drift: drift,
            };
        }
        let m = p.max_norm();
        max_norm = max_norm.max(m);
        norms.rotate_left(1);
        norms[3] = m;
        if m <= params.escape_norm {
            drift = drift.max((fricke_vogt(p) - g0).abs());
        } else if n >= 3 && norms[3] > norms[2] && norms[2] > norms[1] && norms[1] > norms[0] {
            return OrbitResult {
                status: OrbitStatus::Escaped { escape_step: n },
                max_norm,
                invariant_drift: drift,
            };
        }
    }
    OrbitResult {
        status: OrbitStatus::Bounded {
            steps_run: params.max_iter,
        },
        max_norm,
        invariant_drift: drift,
    }
}

/// Sütő's test for `E ∈ Σ_λ`, truncated to the given budget.
pub fn classify_orbit(energy: f64, lambda: f64, params: OrbitParams) -> Result<OrbitResult> {
    params.validate()?;
    if !(lambda >= 0.0) {
        return Err(Error::param("lambda", "must be non-negative"));
    }
    Ok(classify_from(initial_point(energy, lambda), params))
}
