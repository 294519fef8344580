//! Root isolation for the half-trace polynomials.
//!
//! Level `j` bands are located inside the components of `σ_{j−1} ∪ σ_{j−2}`.
//! Every band contains exactly one root of `a_j`, so roots are found first by
//! sign-change scanning and bisection, the root count is checked against the
//! Fibonacci degree, and band edges are then bisected on `|a_j| − 1` on either
//! side of each root.

use rayon::prelude::*;

use super::{fibonacci_degree, half_trace_raw};
use crate::error::{Error, Result};
use crate::interval::{normalize, Interval};

/// Maximum number of scan samples per level.
pub const SCAN_BUDGET: u128 = 10_000_000;

const MIN_SAMPLES_PER_REGION: f64 = 32.0;
const REFINEMENTS: u32 = 6;
const TOUCH_TOL: f64 = 1e-9;

/// Bisection to machine precision on a bracket where `f(a)` and `f(b)` have
/// opposite signs (`neg_at_a` gives the sign at `a`). Returns the final
/// bracket endpoint with the smaller `|f|`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, neg_at_a: bool) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// Location and value of the maximum of `h` on `[a, b]` by golden-section search.
fn golden_max(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..200 {
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    if hc >= hd {
        (c, hc)
    } else {
        (d, hd)
    }
}

struct RegionScan {
    roots: Vec<f64>,
    /// Largest-|a| sample strictly between consecutive roots: `(E, |a(E)|)`.
    splits: Vec<(f64, f64)>,
}

fn scan_region(region: Interval, step: f64, f: &(impl Fn(f64) -> f64 + Sync)) -> RegionScan {
    let pad = 1e-9 * (1.0 + region.lo.abs().max(region.hi.abs())) * step.min(1.0);
    let lo = region.lo - pad;
    let hi = region.hi + pad;
    let n = (((hi - lo) / step).ceil() as usize).max(MIN_SAMPLES_PER_REGION as usize);
    let at = |i: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / n as f64)
        }
    };

    let mut roots = Vec::new();
    let mut splits = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    let mut x_prev = at(0);
    let mut v_prev = f(x_prev);
    for i in 1..=n {
        let x = at(i);
        let v = f(x);
        if (v < 0.0) != (v_prev < 0.0) {
            let root = bisect(f, x_prev, x, v_prev < 0.0);
            if !roots.is_empty() {
                splits.push(best.unwrap_or((root, 0.0)));
            }
            roots.push(root);
            best = None;
        }
        if !roots.is_empty() && best.is_none_or(|(_, b)| v.abs() > b) {
            best = Some((x, v.abs()));
        }
        x_prev = x;
        v_prev = v;
    }
    RegionScan { roots, splits }
}

fn scan_points(regions: &[Interval], resolution: f64, refine: u32) -> u128 {
    regions
        .iter()
        .map(|r| {
            let step = region_step(r, resolution, refine);
            ((r.len() / step).ceil().max(MIN_SAMPLES_PER_REGION) as u128) + 1
        })
        .sum()
}

fn region_step(region: &Interval, resolution: f64, refine: u32) -> f64 {
    let base = resolution.min(region.len() / MIN_SAMPLES_PER_REGION);
    let step = base / 4f64.powi(refine as i32);
    if step > 0.0 {
        step
    } else {
        resolution
    }
}

/// Roots of `a_level` inside `regions`, with a split point between each pair.
fn isolate_roots(
    lambda: f64,
    level: usize,
    regions: &[Interval],
    resolution: f64,
) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
    let expected = fibonacci_degree(level as i64);
    let f = |e: f64| half_trace_raw(e, lambda, level as i64);
    let mut found = 0;
    for refine in 0..=REFINEMENTS {
        let points = scan_points(regions, resolution, refine);
        if points > SCAN_BUDGET {
            if refine == 0 {
                return Err(Error::BudgetExceeded {
                    what: "band scan point",
                    requested: points,
                    cap: SCAN_BUDGET,
                });
            }
            break;
        }
        let scans: Vec<RegionScan> = regions
            .par_iter()
            .map(|r| scan_region(*r, region_step(r, resolution, refine), &f))
            .collect();
        let mut roots = Vec::with_capacity(expected as usize);
        let mut splits = Vec::with_capacity(expected as usize);
        for (idx, scan) in scans.into_iter().enumerate() {
            if scan.roots.is_empty() {
                continue;
            }
            if !roots.is_empty() {
                // Consecutive regions are separated by a gap lying outside σ_level.
                let gap_mid = 0.5 * (regions[idx - 1].hi + regions[idx].lo);
                splits.push((gap_mid, f(gap_mid).abs()));
            }
            roots.extend(scan.roots);
            splits.extend(scan.splits);
        }
        found = roots.len();
        if found as u64 == expected {
            return Ok((roots, splits));
        }
    }
    Err(Error::IncompleteBands { level, found, expected })
}

fn edge_fn(lambda: f64, level: usize) -> impl Fn(f64) -> f64 + Sync {
    move |e: f64| {
        let a = half_trace_raw(e, lambda, level as i64);
        if a.is_nan() {
            f64::INFINITY
        } else {
            a.abs() - 1.0
        }
    }
}

/// Bands of one level from its roots: one interval per root, in order.
fn bands_from_roots(lambda: f64, level: usize, roots: &[f64], splits: &[(f64, f64)], resolution: f64) -> Vec<Interval> {
    let g = edge_fn(lambda, level);
    let m = roots.len();

    // Interior edges: (hi of band i, lo of band i+1).
    let interior: Vec<(f64, f64)> = (0..m.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let (r0, r1) = (roots[i], roots[i + 1]);
            let (mut x, mut v) = splits[i];
            if !(v > 1.0 && x > r0 && x < r1) {
                let (xm, hm) = golden_max(|e| g(e), r0, r1);
                if hm <= TOUCH_TOL {
                    return (xm, xm);
                }
                x = xm;
                v = hm + 1.0;
            }
            debug_assert!(v > 1.0);
            (bisect(&g, r0, x, true), bisect(&g, x, r1, false))
        })
        .collect();

    let outward = |root: f64, dir: f64| {
        let mut delta = (resolution * 1e-3).max(1e-12 * (1.0 + root.abs()));
        while !(g(root + dir * delta) > 0.0) && delta < 1e6 {
            delta *= 2.0;
        }
        bisect(&g, root, root + dir * delta, true)
    };

    let mut bands = Vec::with_capacity(m);
    for i in 0..m {
        let lo = if i == 0 {
            outward(roots[0], -1.0)
        } else {
            interior[i - 1].1
        };
        let hi = if i + 1 == m {
            outward(roots[m - 1], 1.0)
        } else {
            interior[i].0
        };
        bands.push(Interval { lo, hi });
    }
    bands
}

/// Raw band lists for levels `0..=max_level`, one interval per half-trace root.
pub fn band_hierarchy(lambda: f64, max_level: usize, resolution: f64) -> Result<Vec<Vec<Interval>>> {
    let mut levels = vec![vec![Interval { lo: -2.0, hi: 2.0 }]];
    if max_level >= 1 {
        levels.push(vec![Interval {
            lo: lambda - 2.0,
            hi: lambda + 2.0,
        }]);
    }
    for level in 2..=max_level {
        let cover = normalize(levels[level - 1].iter().chain(&levels[level - 2]).copied())?;
        let (roots, splits) = isolate_roots(lambda, level, cover.intervals(), resolution)?;
        levels.push(bands_from_roots(lambda, level, &roots, &splits, resolution));
    }
    Ok(levels)
}
