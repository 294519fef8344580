//! Closed intervals and normalized finite unions of them.
//!
//! [`IntervalSet`] is the common currency of the crate: Cantor-set
//! approximants, spectral band covers and their Minkowski sums are all
//! represented as sorted unions of disjoint closed intervals.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]`; `lo == hi` represents a single point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let iv = Interval { lo, hi };
        iv.validate()?;
        Ok(iv)
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn validate(&self) -> Result<()> {
        // NaN fails this comparison as well.
        if self.lo <= self.hi {
            Ok(())
        } else {
            Err(Error::InvalidInterval {
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        Interval::new(lo, hi)
    }
}

/// Sorted union of pairwise disjoint closed intervals.
///
/// Consecutive members satisfy `prev.hi < next.lo`; overlapping and touching
/// inputs are merged on construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntervalSet")]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

#[derive(Deserialize)]
struct RawIntervalSet {
    intervals: Vec<Interval>,
}

impl TryFrom<RawIntervalSet> for IntervalSet {
    type Error = Error;

    fn try_from(raw: RawIntervalSet) -> Result<Self> {
        normalize(raw.intervals)
    }
}

/// Sorts `raw` and merges overlapping or touching members.
pub fn normalize(raw: impl IntoIterator<Item = Interval>) -> Result<IntervalSet> {
    let mut items: Vec<Interval> = raw.into_iter().collect();
    for iv in &items {
        iv.validate()?;
    }
    items.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    Ok(IntervalSet {
        intervals: merge_sorted(items),
    })
}

fn merge_sorted(items: impl IntoIterator<Item = Interval>) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    for iv in items {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn single(iv: Interval) -> Self {
        IntervalSet { intervals: vec![iv] }
    }

    /// Builds a set from `(lo, hi)` pairs, normalizing.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        normalize(pairs.iter().map(|&(lo, hi)| Interval { lo, hi }))
    }

    /// Builds a set from intervals already sorted by `lo`, merging overlaps.
    pub(crate) fn from_sorted(intervals: Vec<Interval>) -> Self {
        debug_assert!(intervals.windows(2).all(|w| w[0].lo <= w[1].lo));
        IntervalSet {
            intervals: merge_sorted(intervals),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure: the sum of member lengths.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn hull(&self) -> Option<Interval> {
        Some(Interval {
            lo: self.intervals.first()?.lo,
            hi: self.intervals.last()?.hi,
        })
    }

    pub fn diameter(&self) -> f64 {
        self.hull().map_or(0.0, |h| h.len())
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.lo <= x);
        idx > 0 && x <= self.intervals[idx - 1].hi
    }

    /// True when every member of `self` lies inside a single member of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals.iter().all(|iv| {
            let idx = other.intervals.partition_point(|o| o.lo <= iv.lo);
            idx > 0 && other.intervals[idx - 1].contains_interval(iv)
        })
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let take_left = j == other.len() || (i < self.len() && self.intervals[i].lo <= other.intervals[j].lo);
            if take_left {
                all.push(self.intervals[i]);
                i += 1;
            } else {
                all.push(other.intervals[j]);
                j += 1;
            }
        }
        IntervalSet {
            intervals: merge_sorted(all),
        }
    }

    /// Intersection with a single interval.
    pub fn clip(&self, window: Interval) -> IntervalSet {
        let intervals = self
            .intervals
            .iter()
            .filter_map(|iv| {
                let lo = iv.lo.max(window.lo);
                let hi = iv.hi.min(window.hi);
                (lo <= hi).then_some(Interval { lo, hi })
            })
            .collect();
        IntervalSet { intervals }
    }

    /// Gaps between consecutive members, in order.
    pub fn gaps(&self) -> Vec<Interval> {
        self.intervals
            .windows(2)
            .map(|w| Interval {
                lo: w[0].hi,
                hi: w[1].lo,
            })
            .collect()
    }

    /// Distance from `x` to the nearest point of the set.
    pub fn distance_to(&self, x: f64) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        let idx = self.intervals.partition_point(|iv| iv.lo <= x);
        let mut best = f64::INFINITY;
        if idx > 0 {
            let iv = self.intervals[idx - 1];
            best = best.min(if x <= iv.hi { 0.0 } else { x - iv.hi });
        }
        if idx < self.len() {
            best = best.min(self.intervals[idx].lo - x);
        }
        best
    }

    /// Hausdorff distance between two non-empty interval unions.
    pub fn hausdorff_distance(&self, other: &IntervalSet) -> f64 {
        directed_hausdorff(self, other).max(directed_hausdorff(other, self))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lo,hi\n");
        for iv in &self.intervals {
            let _ = writeln!(out, "{},{}", iv.lo, iv.hi);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("lo")) {
                continue;
            }
            let parsed = line
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
            let (lo, hi) =
                parsed.ok_or_else(|| Error::param("csv", format!("line {}: expected `lo,hi`", lineno + 1)))?;
            raw.push(Interval { lo, hi });
        }
        normalize(raw)
    }
}

/// sup over `a` of the distance to `b`. The distance function to `b` is
/// piecewise linear, so the supremum is attained at an endpoint of `a` or at
/// the midpoint of a gap of `b` lying inside `a`.
fn directed_hausdorff(a: &IntervalSet, b: &IntervalSet) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for iv in a.intervals() {
        worst = worst.max(b.distance_to(iv.lo)).max(b.distance_to(iv.hi));
    }
    for gap in b.gaps() {
        let mid = 0.5 * (gap.lo + gap.hi);
        if a.contains(mid) {
            worst = worst.max(0.5 * gap.len());
        }
    }
    worst
}

#[derive(PartialEq)]
struct HeapEntry {
    lo: f64,
    hi: f64,
    left: usize,
    right: usize,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lo
            .total_cmp(&other.lo)
            .then(self.hi.total_cmp(&other.hi))
            .then(self.left.cmp(&other.left))
    }
}

/// Separation below which two summed intervals count as touching: a few
/// dozen ulps of the largest endpoint magnitude involved.
pub fn sum_slack(a: &IntervalSet, b: &IntervalSet) -> f64 {
    let mag = |s: &IntervalSet| s.hull().map_or(0.0, |h| h.lo.abs().max(h.hi.abs()));
    64.0 * f64::EPSILON * (mag(a) + mag(b))
}

/// Minkowski sum `{a + b : a ∈ A, b ∈ B}` of two interval unions.
///
/// Each member of `a` contributes a translate of `b` that is already sorted,
/// so the translates are merged lazily through a heap instead of sorting all
/// `|A|·|B|` pairwise sums. Sums closer than [`sum_slack`] merge. An empty
/// input yields an empty result.
pub fn minkowski_sum(a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    if a.is_empty() || b.is_empty() {
        return IntervalSet::empty();
    }
    let (outer, inner) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let slack = sum_slack(a, b);
    let entry = |left: usize, right: usize| {
        let x = outer.intervals[left];
        let y = inner.intervals[right];
        Reverse(HeapEntry {
            lo: x.lo + y.lo,
            hi: x.hi + y.hi,
            left,
            right,
        })
    };
    let mut heap: BinaryHeap<Reverse<HeapEntry>> = (0..outer.len()).map(|i| entry(i, 0)).collect();
    let mut out: Vec<Interval> = Vec::new();
    while let Some(Reverse(top)) = heap.pop() {
        match out.last_mut() {
            Some(last) if top.lo <= last.hi + slack => last.hi = last.hi.max(top.hi),
            _ => out.push(Interval { lo: top.lo, hi: top.hi }),
        }
        if top.right + 1 < inner.len() {
            heap.push(entry(top.left, top.right + 1));
        }
    }
    IntervalSet { intervals: out }
}
