use cantor_spectra::boxcount::{box_dimension_estimate, geometric_scales};
use cantor_spectra::cantor::{approximant, middle_alpha_system};
use cantor_spectra::measures::*;
use cantor_spectra::spectrum::{band_set, default_window, DEFAULT_RESOLUTION};
use proptest::prelude::*;

/// Sorted, disjoint atoms with positive lengths and weights summing to one.
fn measure(max_atoms: usize) -> impl Strategy<Value = BandMeasure> {
    prop::collection::vec((0.01..1.0f64, 0.0..1.0f64, 0.05..1.0f64), 1..=max_atoms).prop_map(|parts| {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let mut pos = -3.0;
        let atoms = parts
            .into_iter()
            .map(|(len, gap, w)| {
                let atom = Atom {
                    lo: pos,
                    hi: pos + len,
                    weight: w / total,
                };
                pos += len + gap;
                atom
            })
            .collect();
        BandMeasure::new(atoms).unwrap()
    })
}

/// Exact cdf of `X + Y` by summing the trapezoid law of every atom pair.
fn brute_cdf(m1: &BandMeasure, m2: &BandMeasure, t: f64) -> f64 {
    let mut total = 0.0;
    for a in m1.atoms() {
        for b in m2.atoms() {
            let (p, q) = {
                let (x, y) = (a.hi - a.lo, b.hi - b.lo);
                (x.min(y), x.max(y))
            };
            let u = t - a.lo - b.lo;
            let f = if u <= 0.0 {
                0.0
            } else if u >= p + q {
                1.0
            } else if u <= p {
                u * u / (2.0 * p * q)
            } else if u <= q {
                (u - p / 2.0) / q
            } else {
                1.0 - (p + q - u).powi(2) / (2.0 * p * q)
            };
            total += a.weight * b.weight * f;
        }
    }
    total
}

fn density_bound(m1: &BandMeasure, m2: &BandMeasure) -> f64 {
    let mut total = 0.0;
    for a in m1.atoms() {
        for b in m2.atoms() {
            total += a.weight * b.weight / (a.hi - a.lo).max(b.hi - b.lo);
        }
    }
    total
}

fn grid(m1: &BandMeasure, m2: &BandMeasure, n: usize) -> Vec<f64> {
    let lo = m1.support_hull().lo + m2.support_hull().lo - 0.1;
    let hi = m1.support_hull().hi + m2.support_hull().hi + 0.1;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn cantor_measure(depth: u32) -> BandMeasure {
    let set = approximant(&middle_alpha_system(1.0 / 3.0).unwrap(), depth).unwrap();
    BandMeasure::equal_weights(set.intervals()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn convolution_conserves_mass(m1 in measure(40), m2 in measure(40)) {
        let c = convolve(&m1, &m2, default_granularity(&m1, &m2)).unwrap();
        prop_assert!((c.total_weight() - 1.0).abs() <= 1e-10);
        let raw: f64 = c.atoms().iter().map(|a| a.weight).sum();
        prop_assert!((raw - 1.0).abs() <= 1e-10);
        prop_assert!(c.atoms().windows(2).all(|w| w[0].hi <= w[1].lo));
    }

    #[test]
    fn convolution_commutes(m1 in measure(30), m2 in measure(30)) {
        let g = default_granularity(&m1, &m2);
        let (ab, ba) = (convolve(&m1, &m2, g).unwrap(), convolve(&m2, &m1, g).unwrap());
        for t in grid(&m1, &m2, 1000) {
            prop_assert!((ab.cdf(t) - ba.cdf(t)).abs() <= 1e-10, "t = {}", t);
        }
    }

    #[test]
    fn convolution_matches_double_sum(m1 in measure(32), m2 in measure(32), coarse in 0usize..3) {
        let g = default_granularity(&m1, &m2) * [1.0, 64.0, 4096.0][coarse];
        let c = convolve(&m1, &m2, g).unwrap();
        let tol = g * density_bound(&m1, &m2) + 1e-12;
        for t in grid(&m1, &m2, 1000) {
            prop_assert!((c.cdf(t) - brute_cdf(&m1, &m2, t)).abs() <= tol, "t = {}", t);
        }
        let origin = m1.support_hull().lo + m2.support_hull().lo;
        for j in 0..50 {
            let t = origin + j as f64 * g;
            prop_assert!((c.cdf(t) - brute_cdf(&m1, &m2, t)).abs() <= 1e-12, "cell edge {}", j);
        }
    }

    #[test]
    fn verdict_is_monotone(
        l1 in 0.0..1.0f64, u1 in 0.0..1.0f64, l2 in 0.0..1.0f64, u2 in 0.0..1.0f64,
        d1 in 0.0..1.0f64, d2 in 0.0..1.0f64, margin in 0.001..0.2f64,
    ) {
        let est = |lo: f64, hi: f64| DimensionEstimate {
            lower: lo.min(hi),
            upper: lo.max(hi),
            median: 0.5 * (lo + hi),
            sample_count: 100,
        };
        let (a, b) = (est(l1, u1), est(l2, u2));
        let shrink = |e: &DimensionEstimate, by: f64| DimensionEstimate {
            lower: e.lower * (1.0 - by),
            upper: e.upper * (1.0 - by),
            median: e.median * (1.0 - by),
            ..*e
        };
        if singularity_verdict(&a, &b, margin).unwrap() == Verdict::Singular {
            prop_assert_eq!(singularity_verdict(&shrink(&a, d1), &shrink(&b, d2), margin).unwrap(), Verdict::Singular);
        }
    }

    #[test]
    fn samples_are_reproducible(m in measure(20), seed in any::<u64>(), index in any::<u64>()) {
        let x = m.sample(seed, index);
        prop_assert_eq!(x.to_bits(), m.sample(seed, index).to_bits());
        let hull = m.support_hull();
        prop_assert!(x >= hull.lo && x <= hull.hi);
    }

    #[test]
    fn json_round_trip(m in measure(20)) {
        let back = BandMeasure::from_json(&m.to_json().unwrap()).unwrap();
        for t in grid(&m, &BandMeasure::point(0.0), 200) {
            prop_assert!((back.cdf(t) - m.cdf(t)).abs() <= 1e-15);
        }
    }
}

#[test]
fn self_convolution_of_cantor_measure_obeys_sum_bound() {
    let m = cantor_measure(10);
    let c = convolve(&m, &m, default_granularity(&m, &m)).unwrap();
    assert!((c.total_weight() - 1.0).abs() <= 1e-10);
    let range = EpsRange::new(3f64.powi(-9), 3f64.powi(-2), 11).unwrap();
    let est = measure_dimension_estimate(&c, 300, range, 4).unwrap();
    let d = 2f64.ln() / 3f64.ln();
    assert!(est.upper <= (2.0 * d).min(1.0) + 0.05, "{est:?}");
    assert!(est.median <= convolution_dim_bound(d, d) + 0.05);
}

#[test]
fn cantor_measure_dimension() {
    let m = cantor_measure(12);
    let range = EpsRange::new(3f64.powi(-10), 3f64.powi(-2), 11).unwrap();
    let est = measure_dimension_estimate(&m, 300, range, 9).unwrap();
    let d = 2f64.ln() / 3f64.ln();
    assert!((est.median - d).abs() <= 0.05, "{est:?}");
}

#[test]
fn measure_dimension_below_support_dimension() {
    for lambda in [1.0, 2.0, 4.0] {
        let bs = band_set(lambda, 12, default_window(lambda), DEFAULT_RESOLUTION).unwrap();
        let m = BandMeasure::equal_weights(&bs.band_list).unwrap();
        let diam = bs.bands.diameter();
        let mut lens: Vec<f64> = bs.band_list.iter().map(|b| b.len()).collect();
        lens.sort_by(f64::total_cmp);
        let fine = lens[lens.len() / 2];
        let boxes = box_dimension_estimate(&bs.bands, &geometric_scales(diam / 8.0, fine, 10)).unwrap();
        let est = measure_dimension_estimate(&m, 300, EpsRange::new(fine, diam / 8.0, 11).unwrap(), 0).unwrap();
        assert!(
            est.median <= boxes.estimate + 0.05,
            "λ = {lambda}: {est:?} vs {boxes:?}"
        );
    }
}

#[test]
fn lyapunov_growth_on_free_spectrum() {
    let m = BandMeasure::equal_weights(&[cantor_spectra::interval::Interval { lo: -1.9, hi: 1.9 }]).unwrap();
    let est = estimate_lyapunov(0.5, &m, 200, 20, 1).unwrap();
    assert!(est.exponent.is_finite() && est.exponent > 0.0);
    assert!(est.discard_fraction >= 0.0 && est.discard_fraction < 0.9);
    assert_eq!(est, estimate_lyapunov(0.5, &m, 200, 20, 1).unwrap());
}
