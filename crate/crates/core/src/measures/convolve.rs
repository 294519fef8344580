use super::{compensated_sum, Atom, BandMeasure};
use crate::error::{Error, Result};

/// Cap on atom pairs and on output cells.
pub const CONVOLVE_BUDGET: u128 = 10_000_000;

/// Support diameter of `m1 ∗ m2` divided by 2¹⁶.
pub fn default_granularity(m1: &BandMeasure, m2: &BandMeasure) -> f64 {
    let (h1, h2) = (m1.support_hull(), m2.support_hull());
    (h1.len() + h2.len()) / 65536.0
}

/// Left-continuous cdf of `X + Y` with `X`, `Y` uniform on the two atoms.
struct PairLaw {
    start: f64,
    short: f64,
    long: f64,
}

impl PairLaw {
    fn new(a: &Atom, b: &Atom) -> Self {
        let (p, q) = (a.hi - a.lo, b.hi - b.lo);
        PairLaw {
            start: a.lo + b.lo,
            short: p.min(q),
            long: p.max(q),
        }
    }

    fn end(&self) -> f64 {
        self.start + self.short + self.long
    }

    fn cdf_left(&self, t: f64) -> f64 {
        let u = t - self.start;
        let (p, q) = (self.short, self.long);
        if u <= 0.0 {
            return 0.0;
        }
        if q == 0.0 {
            return 1.0;
        }
        if u >= p + q {
            return 1.0;
        }
        if p == 0.0 {
            return u / q;
        }
        if u <= p {
            u * u / (2.0 * p * q)
        } else if u <= q {
            (u - p / 2.0) / q
        } else {
            let r = p + q - u;
            1.0 - r * r / (2.0 * p * q)
        }
    }
}

/// Convolution `m1 ∗ m2`, re-partitioned onto cells of width `granularity`
/// anchored at the left end of the support.
///
/// Each pair of atoms contributes the exact law of a sum of two independent
/// uniforms; within a cell the accumulated mass is spread uniformly over the
/// hull of the contributions that reach it.
pub fn convolve(m1: &BandMeasure, m2: &BandMeasure, granularity: f64) -> Result<BandMeasure> {
    if !(granularity > 0.0 && granularity.is_finite()) {
        return Err(Error::param("merge_granularity", "must be positive"));
    }
    let pairs = m1.atoms().len() as u128 * m2.atoms().len() as u128;
    if pairs > CONVOLVE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "convolution pair",
            requested: pairs,
            cap: CONVOLVE_BUDGET,
        });
    }
    let origin = m1.support_hull().lo + m2.support_hull().lo;
    let top = m1.support_hull().hi + m2.support_hull().hi;
    let cells_f = ((top - origin) / granularity).floor() + 1.0;
    if cells_f > CONVOLVE_BUDGET as f64 {
        return Err(Error::BudgetExceeded {
            what: "convolution cell",
            requested: cells_f.min(u128::MAX as f64) as u128,
            cap: CONVOLVE_BUDGET,
        });
    }
    let cells = cells_f as usize;
    let cell_of = |t: f64| (((t - origin) / granularity).floor().max(0.0) as usize).min(cells - 1);
    let edge = |c: usize| origin + c as f64 * granularity;

    let mut mass = vec![0.0_f64; cells];
    let mut comp = vec![0.0_f64; cells];
    let mut lo = vec![f64::INFINITY; cells];
    let mut hi = vec![f64::NEG_INFINITY; cells];
    for a in m1.atoms() {
        for b in m2.atoms() {
            let law = PairLaw::new(a, b);
            let w = a.weight * b.weight;
            let (c0, c1) = (cell_of(law.start), cell_of(law.end()));
            let mut below = 0.0;
            for c in c0..=c1 {
                let above = if c == c1 { 1.0 } else { law.cdf_left(edge(c + 1)) };
                let share = w * (above - below);
                below = above;
                if share <= 0.0 {
                    continue;
                }
                let y = share - comp[c];
                let t = mass[c] + y;
                comp[c] = (t - mass[c]) - y;
                mass[c] = t;
                let seg_lo = if c == c0 { law.start } else { edge(c) };
                let seg_hi = if c == c1 { law.end() } else { edge(c + 1) };
                lo[c] = lo[c].min(seg_lo);
                hi[c] = hi[c].max(seg_hi);
            }
        }
    }

    let mut atoms: Vec<Atom> = Vec::new();
    for c in 0..cells {
        if mass[c] <= 0.0 {
            continue;
        }
        let mut atom = Atom {
            lo: lo[c],
            hi: hi[c],
            weight: mass[c],
        };
        if let Some(prev) = atoms.last() {
            atom.lo = atom.lo.max(prev.hi);
            atom.hi = atom.hi.max(atom.lo);
        }
        atoms.push(atom);
    }
    let total = compensated_sum(atoms.iter().map(|a| a.weight));
    Ok(BandMeasure::renormalized(atoms, total))
}
