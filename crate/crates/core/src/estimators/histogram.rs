use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EstimateError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binning {
    /// Bin `k` is `[k, k + 1)`.
    Unit,
    /// Bin `i` is `[base^(i/b), base^((i+1)/b))` with `b = bins_per_decade`.
    Log { base: f64, bins_per_decade: u32 },
}

impl Binning {
    pub const LOG10: Binning = Binning::Log { base: 10.0, bins_per_decade: 10 };

    pub fn index(self, x: f64) -> Result<i64, EstimateError> {
        match self {
            Binning::Unit => Ok(x.floor() as i64),
            Binning::Log { base, bins_per_decade } => {
                if x <= 0.0 {
                    return Err(EstimateError::NonPositive(x));
                }
                let b = bins_per_decade as f64;
                let mut i = (x.log(base) * b).floor() as i64;
                // guard against log rounding at exact edges
                if self.low(i + 1) <= x {
                    i += 1;
                } else if self.low(i) > x {
                    i -= 1;
                }
                Ok(i)
            }
        }
    }

    pub fn low(self, i: i64) -> f64 {
        match self {
            Binning::Unit => i as f64,
            Binning::Log { base, bins_per_decade } => base.powf(i as f64 / bins_per_decade as f64),
        }
    }

    pub fn high(self, i: i64) -> f64 {
        self.low(i + 1)
    }

    fn validate(self) -> Result<(), EstimateError> {
        match self {
            Binning::Log { base, bins_per_decade } if base.is_nan() || base <= 1.0 || bins_per_decade == 0 => {
                Err(EstimateError::InvalidArgument(format!("bad log binning: base {base}, {bins_per_decade} bins")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistKind {
    Pdf,
    /// `P(X >= low)` at each bin's lower edge.
    Ccdf,
}

/// Binned distribution over the contiguous bin range `first..first + mass.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub binning: Binning,
    pub kind: HistKind,
    pub first: i64,
    pub mass: Vec<f64>,
    /// Number of (weighted) observations behind the histogram.
    pub samples: usize,
}

impl Histogram {
    pub fn from_values(values: &[f64], binning: Binning, kind: HistKind) -> Result<Self, EstimateError> {
        Self::weighted(values.iter().map(|&v| (v, 1.0)), binning, kind, values.len())
    }

    /// Histogram of `(value, weight)` pairs; weights need not be normalized.
    pub fn weighted(
        items: impl IntoIterator<Item = (f64, f64)>,
        binning: Binning,
        kind: HistKind,
        samples: usize,
    ) -> Result<Self, EstimateError> {
        binning.validate()?;
        let mut idx = Vec::new();
        for (v, w) in items {
            idx.push((binning.index(v)?, w));
        }
        let total: f64 = idx.iter().map(|p| p.1).sum();
        if idx.is_empty() || total <= 0.0 {
            return Err(EstimateError::EmptySample);
        }
        let first = idx.iter().map(|p| p.0).min().unwrap();
        let last = idx.iter().map(|p| p.0).max().unwrap();
        let mut mass = vec![0.0; (last - first + 1) as usize];
        for (i, w) in idx {
            mass[(i - first) as usize] += w;
        }
        for m in &mut mass {
            *m /= total;
        }
        let mut h = Histogram { binning, kind: HistKind::Pdf, first, mass, samples };
        if kind == HistKind::Ccdf {
            h = h.to_ccdf();
        }
        Ok(h)
    }

    pub fn to_ccdf(&self) -> Histogram {
        if self.kind == HistKind::Ccdf {
            return self.clone();
        }
        let mut acc = 0.0;
        let mut mass = vec![0.0; self.mass.len()];
        for i in (0..mass.len()).rev() {
            acc += self.mass[i];
            mass[i] = acc;
        }
        // the running sum may land a hair off 1 at the minimum
        if let Some(m) = mass.first_mut() {
            *m = 1.0;
        }
        Histogram { kind: HistKind::Ccdf, mass, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.mass.iter().enumerate().map(|(j, &m)| {
            let i = self.first + j as i64;
            (self.binning.low(i), self.binning.high(i), m)
        })
    }

    /// Mass at bin index `i`, zero outside the stored range.
    pub fn at(&self, i: i64) -> f64 {
        if i < self.first {
            return if self.kind == HistKind::Ccdf { 1.0 } else { 0.0 };
        }
        self.mass.get((i - self.first) as usize).copied().unwrap_or(0.0)
    }

    /// Mass divided by bin width, for plotting log-binned pdfs.
    pub fn density(&self) -> Vec<f64> {
        self.bins().map(|(lo, hi, m)| m / (hi - lo)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,mass\n");
        for (lo, hi, m) in self.bins() {
            writeln!(out, "{lo},{hi},{m}").unwrap();
        }
        out
    }

    fn index_range(&self, other: &Histogram) -> std::ops::Range<i64> {
        let lo = self.first.min(other.first);
        let hi = (self.first + self.len() as i64).max(other.first + other.len() as i64);
        lo..hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Total variation, `sum |a - b| / 2`.
    Tv,
    /// Pearson chi-square of `a` (counts) against `b` (expected probabilities).
    ChiSquare,
    /// Largest gap between the two cumulative distributions.
    Ks,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub p_value: Option<f64>,
    pub degrees_of_freedom: Option<usize>,
}

/// Minimum expected count per chi-square cell; smaller neighbors are merged.
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

pub fn distribution_distance(a: &Histogram, b: &Histogram, kind: DistanceKind) -> Result<Distance, EstimateError> {
    if a.binning != b.binning || a.kind != HistKind::Pdf || b.kind != HistKind::Pdf {
        return Err(EstimateError::IncompatibleBinning);
    }
    let range = a.index_range(b);
    let plain = |value| Distance { value, p_value: None, degrees_of_freedom: None };
    match kind {
        DistanceKind::Tv => Ok(plain(range.map(|i| (a.at(i) - b.at(i)).abs()).sum::<f64>() / 2.0)),
        DistanceKind::Ks => {
            let (mut ca, mut cb, mut d) = (0.0f64, 0.0f64, 0.0f64);
            for i in range {
                ca += a.at(i);
                cb += b.at(i);
                d = d.max((ca - cb).abs());
            }
            Ok(plain(d))
        }
        DistanceKind::ChiSquare => {
            let n = a.samples as f64;
            let cells: Vec<(f64, f64)> = range.map(|i| (a.at(i) * n, b.at(i) * n)).collect();
            chi_square(&cells)
        }
    }
}

/// Chi-square over `(observed, expected)` cells, merging adjacent cells until
/// each group expects at least [`CHI_SQUARE_MIN_EXPECTED`]. A short tail
/// group is folded into the previous one.
pub fn chi_square(cells: &[(f64, f64)]) -> Result<Distance, EstimateError> {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut cur = (0.0, 0.0);
    for &(o, e) in cells {
        cur.0 += o;
        cur.1 += e;
        if cur.1 >= CHI_SQUARE_MIN_EXPECTED {
            groups.push(cur);
            cur = (0.0, 0.0);
        }
    }
    if cur.0 > 0.0 || cur.1 > 0.0 {
        match groups.last_mut() {
            Some(g) => {
                g.0 += cur.0;
                g.1 += cur.1;
            }
            None => groups.push(cur),
        }
    }
    if groups.len() < 2 {
        return Err(EstimateError::InvalidArgument("chi-square needs at least two cells after merging".into()));
    }
    let stat: f64 = groups.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let df = groups.len() - 1;
    let p = statrs::function::gamma::gamma_ur(df as f64 / 2.0, stat / 2.0);
    Ok(Distance { value: stat, p_value: Some(p), degrees_of_freedom: Some(df) })
}
