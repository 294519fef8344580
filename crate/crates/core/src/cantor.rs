//! Affine dynamically defined Cantor sets and their classical invariants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

/// Default cap on the number of intervals an approximant may contain.
pub const APPROXIMANT_CAP: u128 = 1 << 24;

/// Affine contraction `x ↦ ratio·x + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub ratio: f64,
    pub offset: f64,
}

impl Branch {
    pub fn apply(&self, x: f64) -> f64 {
        self.ratio * x + self.offset
    }

    pub fn image(&self, iv: Interval) -> Interval {
        Interval {
            lo: self.apply(iv.lo),
            hi: self.apply(iv.hi),
        }
    }
}

/// Base interval together with the inverse branches of an expanding map.
///
/// Branches are stored sorted by the position of their image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorSystem {
    base: Interval,
    branches: Vec<Branch>,
}

impl CantorSystem {
    pub fn new(base: Interval, branches: Vec<Branch>) -> Result<Self> {
        if base.lo >= base.hi || !base.lo.is_finite() || !base.hi.is_finite() {
            return Err(Error::param("base", "must be a finite interval of positive length"));
        }
        if branches.len() < 2 {
            return Err(Error::param("branches", "at least two branches are required"));
        }
        let mut branches = branches;
        for b in &branches {
            if !(b.ratio > 0.0 && b.ratio < 1.0) || !b.offset.is_finite() {
                return Err(Error::param(
                    "branches",
                    format!("ratio {} must lie in (0, 1) with a finite offset", b.ratio),
                ));
            }
            if !base.contains_interval(&b.image(base)) {
                return Err(Error::param("branches", "every branch image must lie inside the base"));
            }
        }
        branches.sort_by(|a, b| a.image(base).lo.total_cmp(&b.image(base).lo));
        for w in branches.windows(2) {
            if w[0].image(base).hi >= w[1].image(base).lo {
                return Err(Error::param(
                    "branches",
                    "branch images must be pairwise disjoint with positive gaps",
                ));
            }
        }
        Ok(CantorSystem { base, branches })
    }

    pub fn base(&self) -> Interval {
        self.base
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.ratio).collect()
    }
}

/// Two-branch system on `[0, 1]` removing the open middle of relative size `1 − 2a`.
pub fn middle_alpha_system(a: f64) -> Result<CantorSystem> {
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::param("a", format!("{a} is outside (0, 1/2)")));
    }
    CantorSystem::new(
        Interval { lo: 0.0, hi: 1.0 },
        vec![
            Branch { ratio: a, offset: 0.0 },
            Branch {
                ratio: a,
                offset: 1.0 - a,
            },
        ],
    )
}

/// Depth-`depth` approximant, capped at [`APPROXIMANT_CAP`] intervals.
pub fn approximant(sys: &CantorSystem, depth: u32) -> Result<IntervalSet> {
    approximant_with_cap(sys, depth, APPROXIMANT_CAP)
}

pub fn approximant_with_cap(sys: &CantorSystem, depth: u32, cap: u128) -> Result<IntervalSet> {
    let count = (sys.branches.len() as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::BudgetExceeded {
            what: "approximant interval",
            requested: count,
            cap,
        });
    }
    let mut level = vec![sys.base];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * sys.branches.len());
        for b in &sys.branches {
            next.extend(level.iter().map(|&iv| b.image(iv)));
        }
        level = next;
    }
    Ok(IntervalSet::from_sorted(level))
}

/// Root `s ∈ (0, 1]` of `Σ rᵢ^s = 1`, by bisection.
pub fn moran_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.len() < 2 {
        return Err(Error::param("ratios", "at least two ratios are required"));
    }
    if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::param("ratios", "every ratio must lie in (0, 1)"));
    }
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    if f(1.0) > 0.0 {
        return Err(Error::param("ratios", "ratios sum above 1; the root exceeds 1"));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn similarity_dimension(sys: &CantorSystem) -> f64 {
    moran_dimension(&sys.ratios()).expect("a valid system has disjoint branches inside its base")
}

/// Relative slack used when comparing gap lengths.
const GAP_TIE: f64 = 1e-9;

/// Newhouse thickness from the gaps visible at `depth`.
///
/// Each gap's bridges extend outward to the nearest gap at least as long, or
/// to the end of the hull; the result is the minimum over gaps of the shorter
/// bridge divided by the gap length.
pub fn thickness(sys: &CantorSystem, depth: u32) -> Result<f64> {
    if depth == 0 {
        return Err(Error::param("depth", "thickness needs depth ≥ 1"));
    }
    let set = approximant(sys, depth)?;
    Ok(thickness_of(&set))
}

/// Thickness of a finite interval union (infinite when there are no gaps).
pub fn thickness_of(set: &IntervalSet) -> f64 {
    let Some(hull) = set.hull() else {
        return 0.0;
    };
    let gaps = set.gaps();
    let n = gaps.len();
    let dominates = |other: &Interval, g: &Interval| other.len() >= g.len() * (1.0 - GAP_TIE);

    let mut left_stop = vec![hull.lo; n];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..n {
        while let Some(&j) = stack.last() {
            if dominates(&gaps[j], &gaps[i]) {
                break;
            }
            stack.pop();
        }
        if let Some(&j) = stack.last() {
            left_stop[i] = gaps[j].hi;
        }
        stack.push(i);
    }

    let mut right_stop = vec![hull.hi; n];
    stack.clear();
    for i in (0..n).rev() {
        while let Some(&j) = stack.last() {
            if dominates(&gaps[j], &gaps[i]) {
                break;
            }
            stack.pop();
        }
        if let Some(&j) = stack.last() {
            right_stop[i] = gaps[j].lo;
        }
        stack.push(i);
    }

    gaps.iter()
        .enumerate()
        .map(|(i, g)| {
            let left = g.lo - left_stop[i];
            let right = right_stop[i] - g.hi;
            left.min(right) / g.len()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn gap_lemma_check(tau1: f64, tau2: f64) -> bool {
    tau1 * tau2 > 1.0
}

pub fn dim_sum_bound(d1: f64, d2: f64) -> f64 {
    (d1 + d2).min(1.0)
}
