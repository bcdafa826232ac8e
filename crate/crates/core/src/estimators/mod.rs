//! Estimators over node samples and ego networks.
//!
//! Samples are sequences of [`NodeObservation`]s with repetitions kept, so a
//! pooled Metropolis-Hastings trace is used as is. Random-walk samples are
//! degree-biased; the estimators do not reweight them.

mod histogram;
mod privacy;
mod report;
mod structure;

pub use histogram::{
    chi_square, distribution_distance, Binning, Distance, DistanceKind, HistKind, Histogram,
    CHI_SQUARE_MIN_EXPECTED,
};
pub use privacy::{privacy_awareness, PaBin, PaCell, PrivacyAwareness};
pub use report::{truth_report, EstimateOptions, EstimateReport, Scalar};
pub use structure::{
    assortativity, assortativity_from_pairs, clustering, graph_assortativity, graph_clustering, ClusteringEstimate,
    CurvePoint,
};

use std::collections::BTreeMap;

use crate::crawl::NodeObservation;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EstimateError {
    #[error("empty sample")]
    EmptySample,
    #[error("logarithmic bins need positive values, got {0}")]
    NonPositive(f64),
    #[error("histograms use different binnings or are not pdfs")]
    IncompatibleBinning,
    #[error("power-law fit needs at least two values >= k_min, got {0}")]
    TooFewTail(usize),
    #[error("power-law estimate diverges: every value equals k_min")]
    Divergent,
    #[error("statistic undefined: zero variance")]
    ZeroVariance,
    #[error("need at least {min} edges, got {got}")]
    TooFewEdges { got: usize, min: usize },
    #[error("no ego network with at least two neighbors")]
    NoUsableEgo,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub fn degree_distribution(
    samples: &[NodeObservation],
    kind: HistKind,
    binning: Binning,
) -> Result<Histogram, EstimateError> {
    let ks: Vec<f64> = samples.iter().map(|o| o.degree as f64).collect();
    Histogram::from_values(&ks, binning, kind)
}

pub fn mean_degree(samples: &[NodeObservation]) -> Result<f64, EstimateError> {
    if samples.is_empty() {
        return Err(EstimateError::EmptySample);
    }
    Ok(samples.iter().map(|o| o.degree as f64).sum::<f64>() / samples.len() as f64)
}

/// Lower median for even sample sizes.
pub fn median_degree(samples: &[NodeObservation]) -> Result<f64, EstimateError> {
    if samples.is_empty() {
        return Err(EstimateError::EmptySample);
    }
    let mut ks: Vec<u32> = samples.iter().map(|o| o.degree).collect();
    let mid = (ks.len() - 1) / 2;
    let (_, m, _) = ks.select_nth_unstable(mid);
    Ok(*m as f64)
}

/// Fraction of the sample in each region, region 0 included.
pub fn region_mass(samples: &[NodeObservation]) -> BTreeMap<u16, f64> {
    let mut counts: BTreeMap<u16, usize> = BTreeMap::new();
    for o in samples {
        *counts.entry(o.region).or_default() += 1;
    }
    let n = samples.len() as f64;
    counts.into_iter().map(|(r, c)| (r, c as f64 / n)).collect()
}

/// `j * space / points` for `j = 1..=points`.
pub fn uniform_grid(space: u64, points: usize) -> Vec<f64> {
    (1..=points).map(|j| j as f64 * space as f64 / points as f64).collect()
}

/// Empirical `P(user_id <= g)` at each grid point.
pub fn userid_cdf(samples: &[NodeObservation], grid: &[f64]) -> Vec<f64> {
    let mut ids: Vec<f64> = samples.iter().map(|o| o.user_id as f64).collect();
    ids.sort_by(f64::total_cmp);
    let n = ids.len().max(1) as f64;
    grid.iter().map(|&g| ids.partition_point(|&x| x <= g) as f64 / n).collect()
}

/// Two-sample Kolmogorov-Smirnov distance between empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, EstimateError> {
    if a.is_empty() || b.is_empty() {
        return Err(EstimateError::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Continuous maximum-likelihood exponent `1 + n / sum(ln(k / k_min))` over
/// the values `k >= k_min`.
pub fn powerlaw_exponent(values: &[f64], k_min: f64) -> Result<f64, EstimateError> {
    if k_min.is_nan() || k_min <= 0.0 {
        return Err(EstimateError::InvalidArgument(format!("k_min must be positive, got {k_min}")));
    }
    let tail: Vec<f64> = values.iter().copied().filter(|&k| k >= k_min).collect();
    if tail.len() < 2 {
        return Err(EstimateError::TooFewTail(tail.len()));
    }
    let s: f64 = tail.iter().map(|k| (k / k_min).ln()).sum();
    if s == 0.0 {
        return Err(EstimateError::Divergent);
    }
    Ok(1.0 + tail.len() as f64 / s)
}

/// Separate exponents below and above `boundary`: the low regime fits
/// `[k_min, boundary)` with `k_min`, the high regime fits `[boundary, inf)`
/// with `boundary` as its minimum.
pub fn powerlaw_two_regime(values: &[f64], k_min: f64, boundary: f64) -> Result<(f64, f64), EstimateError> {
    let low: Vec<f64> = values.iter().copied().filter(|&k| k < boundary).collect();
    Ok((powerlaw_exponent(&low, k_min)?, powerlaw_exponent(values, boundary)?))
}

/// `P(X >= i0)` for `X ~ Binomial(n, p)`, summed in log space.
pub fn binomial_tail(n: u64, p: f64, i0: u64) -> f64 {
    assert!((0.0..=1.0).contains(&p) && i0 <= n, "binomial_tail needs 0 <= p <= 1 and i0 <= n");
    if i0 == 0 {
        return 1.0;
    }
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    // ln C(n, i) built incrementally from ln C(n, 0) = 0
    let mut ln_c = 0.0;
    let mut terms = Vec::with_capacity((n - i0 + 1) as usize);
    for i in 0..=n {
        if i >= i0 {
            terms.push(ln_c + i as f64 * lp + (n - i) as f64 * lq);
        }
        if i < n {
            ln_c += ((n - i) as f64 / (i + 1) as f64).ln();
        }
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NodeId, PrivacySettings};
    use crate::rng::seeded;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::Rng;

    pub(crate) fn obs(degree: u32, region: u16, user_id: u32) -> NodeObservation {
        NodeObservation { node: NodeId(user_id), user_id, degree, region, privacy: PrivacySettings::DEFAULT }
    }

    fn with_degrees(ks: &[u32]) -> Vec<NodeObservation> {
        ks.iter().map(|&k| obs(k, 0, 0)).collect()
    }

    #[test]
    fn degree_basics() {
        let s = with_degrees(&[1, 1, 2]);
        let h = degree_distribution(&s, HistKind::Pdf, Binning::Unit).unwrap();
        assert_eq!(h.mass, vec![2.0 / 3.0, 1.0 / 3.0]);
        let c = degree_distribution(&s, HistKind::Ccdf, Binning::Unit).unwrap();
        assert_eq!(c.mass[0], 1.0);
        let s = with_degrees(&[1, 2, 3]);
        assert_eq!(mean_degree(&s).unwrap(), 2.0);
        assert_eq!(median_degree(&s).unwrap(), 2.0);
        assert_eq!(median_degree(&with_degrees(&[4, 1, 3, 2])).unwrap(), 2.0);
        assert_eq!(mean_degree(&[]), Err(EstimateError::EmptySample));
        assert_eq!(median_degree(&[]), Err(EstimateError::EmptySample));
    }

    #[test]
    fn regions_and_ids() {
        let s = vec![obs(1, 3, 10), obs(1, 3, 20)];
        assert_eq!(region_mass(&s), BTreeMap::from([(3, 1.0)]));
        let one = vec![obs(1, 0, 50)];
        assert_eq!(userid_cdf(&one, &[49.0, 50.0, 51.0]), vec![0.0, 1.0, 1.0]);
        assert_eq!(uniform_grid(100, 4), vec![25.0, 50.0, 75.0, 100.0]);
    }

    #[test]
    fn ks_cases() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.5);
    }

    #[test]
    fn powerlaw_closed_form() {
        let e = std::f64::consts::E;
        let a = powerlaw_exponent(&[1.0, e, e * e], 1.0).unwrap();
        assert!((a - 2.0).abs() < 1e-12);
        assert_eq!(powerlaw_exponent(&[3.0, 3.0, 3.0], 3.0), Err(EstimateError::Divergent));
        assert_eq!(powerlaw_exponent(&[3.0, 1.0], 2.0), Err(EstimateError::TooFewTail(1)));
    }

    #[test]
    fn powerlaw_recovers_pareto() {
        let mut rng = seeded(25);
        let xs: Vec<f64> = (0..100_000).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / 1.5)).collect();
        let a = powerlaw_exponent(&xs, 1.0).unwrap();
        assert!((a - 2.5).abs() < 0.05, "{a}");
    }

    #[test]
    fn powerlaw_two_regimes() {
        let mut rng = seeded(4);
        let mut xs: Vec<f64> = (0..50_000).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / 2.0)).collect();
        xs.retain(|&x| x < 100.0);
        xs.extend((0..20_000).map(|_| 100.0 * (1.0 - rng.random::<f64>()).powf(-1.0 / 1.5)));
        let (_, hi) = powerlaw_two_regime(&xs, 1.0, 100.0).unwrap();
        assert!((hi - 2.5).abs() < 0.05, "{hi}");
    }

    fn exact_tail(n: u64, p: (i64, i64), i0: u64) -> f64 {
        let p = BigRational::new(BigInt::from(p.0), BigInt::from(p.1));
        let q = BigRational::from_integer(BigInt::from(1)) - &p;
        let mut total = BigRational::from_integer(BigInt::from(0));
        for i in i0..=n {
            let mut c = BigInt::from(1);
            for j in 0..i {
                c = c * BigInt::from(n - j) / BigInt::from(j + 1);
            }
            let mut term = BigRational::from_integer(c);
            for _ in 0..i {
                term *= &p;
            }
            for _ in 0..(n - i) {
                term *= &q;
            }
            total += term;
        }
        let (num, den) = (total.numer().clone(), total.denom().clone());
        // 60 significant digits is plenty for an f64 comparison
        let scaled: BigInt = num * BigInt::from(10).pow(60) / den;
        scaled.to_string().parse::<f64>().unwrap() / 1e60
    }

    #[test]
    fn binomial_tail_against_exact_rationals() {
        assert_eq!(binomial_tail(10, 0.3, 0), 1.0);
        assert!((binomial_tail(2, 0.5, 2) - 0.25).abs() < 1e-15);
        for n in 1..=20u64 {
            for &(a, b) in &[(3i64, 10i64), (1, 2), (1, 7), (9, 10)] {
                for i0 in 0..=n {
                    let got = binomial_tail(n, a as f64 / b as f64, i0);
                    let want = exact_tail(n, (a, b), i0);
                    assert!((got - want).abs() < 1e-12, "n={n} p={a}/{b} i0={i0}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn binomial_tail_single_chain_deviation() {
        // 1000 hits in one region of expected mass 0.006 over 81000 draws
        let t = binomial_tail(81_000, 0.006, 1_000);
        assert!((t.log10() + 92.4612).abs() < 1e-3, "{t:e}");
    }

    proptest! {
        #[test]
        fn powerlaw_scale_invariant(xs in prop::collection::vec(1.0f64..1000.0, 3..100), c in 0.1f64..100.0) {
            let k_min = 1.0;
            if let Ok(a) = powerlaw_exponent(&xs, k_min) {
                let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
                let b = powerlaw_exponent(&scaled, k_min * c).unwrap();
                prop_assert!((a - b).abs() < 1e-9 * a);
            }
        }
    }
}
