use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use super::{
    checkpoints as even_checkpoints, geweke_parts, gelman_rubin_r, DiagnosticsError, MetricKind, MetricSeries,
    GEWEKE_FRAC_A, GEWEKE_FRAC_B,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Every chain's `|z|` must be at most this.
    pub geweke: f64,
    /// `R` must be strictly below this.
    pub gelman_rubin: f64,
    pub safety_factor: usize,
    pub frac_a: f64,
    pub frac_b: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { geweke: 1.0, gelman_rubin: 1.02, safety_factor: 2, frac_a: GEWEKE_FRAC_A, frac_b: GEWEKE_FRAC_B }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurnIn {
    /// All tests hold from `checkpoint` onward; `burn_in = checkpoint * safety_factor`.
    Converged { checkpoint: usize, burn_in: usize },
    NotConverged,
}

impl BurnIn {
    pub fn iterations(self) -> Option<usize> {
        match self {
            BurnIn::Converged { burn_in, .. } => Some(burn_in),
            BurnIn::NotConverged => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricDiagnostics {
    pub metric: MetricKind,
    /// Constant across every chain; no test was run.
    pub skipped: bool,
    /// `(chain_id, z at each checkpoint)`. `None` where the statistic is
    /// undefined, which counts as not converged.
    pub geweke: Vec<(u32, Vec<Option<f64>>)>,
    pub gelman_rubin: Vec<Option<f64>>,
    /// First checkpoint from which the test holds through the last one.
    pub geweke_converged: Option<usize>,
    pub gelman_rubin_converged: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub thresholds: Thresholds,
    pub checkpoints: Vec<usize>,
    pub metrics: Vec<MetricDiagnostics>,
    pub burn_in: BurnIn,
}

/// Start index of the final run of `true` values, or `None` if the last is `false`.
fn settled(flags: &[bool]) -> Option<usize> {
    if !*flags.last()? {
        return None;
    }
    Some(flags.iter().rposition(|f| !f).map_or(0, |i| i + 1))
}

/// z on a prefix, with the undefined cases resolved: two constant windows
/// with equal means give 0, otherwise `None`.
fn prefix_z(x: &[f64], th: &Thresholds) -> Option<f64> {
    let (ma, mb, d) = geweke_parts(x, th.frac_a, th.frac_b).ok()?;
    if d > 0.0 {
        Some((ma - mb) / d)
    } else if ma == mb {
        Some(0.0)
    } else {
        None
    }
}

/// Declares the burn-in from per-chain metric series.
///
/// At each of `count` evenly spaced checkpoints every test is evaluated on
/// the prefixes up to it: Geweke on every chain of every metric and
/// Gelman-Rubin across chains for every metric. A test converges at the
/// first checkpoint from which it keeps holding; the declared checkpoint is
/// the latest of these, scaled by the safety factor. Metrics that are
/// constant across all chains are skipped with a warning.
pub fn detect_burn_in(
    series: &[MetricSeries],
    thresholds: Thresholds,
    count: usize,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    if count == 0 {
        return Err(DiagnosticsError::NoCheckpoints);
    }
    if series.is_empty() {
        return Err(DiagnosticsError::NoMetrics);
    }
    let mut by_metric: BTreeMap<MetricKind, Vec<&MetricSeries>> = BTreeMap::new();
    for s in series {
        by_metric.entry(s.metric).or_default().push(s);
    }
    let n = series[0].values.len();
    if series.iter().any(|s| s.values.len() != n) {
        return Err(DiagnosticsError::UnequalLengths);
    }
    for chains in by_metric.values() {
        if chains.len() < 2 {
            return Err(DiagnosticsError::TooFewChains { got: chains.len(), min: 2 });
        }
    }
    let cps = even_checkpoints(n, count);
    if cps.is_empty() {
        return Err(DiagnosticsError::TooShort { len: n, min: 1 });
    }

    let mut metrics = Vec::with_capacity(by_metric.len());
    for (metric, mut chains) in by_metric {
        chains.sort_by_key(|s| s.chain_id);
        let first = chains[0].values[0];
        if chains.iter().all(|s| s.values.iter().all(|&v| v == first)) {
            log::warn!("metric {metric} is constant across all chains; skipped");
            metrics.push(MetricDiagnostics {
                metric,
                skipped: true,
                geweke: Vec::new(),
                gelman_rubin: Vec::new(),
                geweke_converged: Some(cps[0]),
                gelman_rubin_converged: Some(cps[0]),
            });
            continue;
        }
        let geweke: Vec<(u32, Vec<Option<f64>>)> = chains
            .par_iter()
            .map(|s| (s.chain_id, cps.iter().map(|&t| prefix_z(&s.values[..t], &thresholds)).collect()))
            .collect();
        let gelman_rubin: Vec<Option<f64>> = cps
            .par_iter()
            .map(|&t| {
                let prefixes: Vec<&[f64]> = chains.iter().map(|s| &s.values[..t]).collect();
                gelman_rubin_r(&prefixes).ok()
            })
            .collect();
        let z_flags: Vec<bool> = (0..cps.len())
            .map(|j| geweke.iter().all(|(_, zs)| zs[j].is_some_and(|z| z.abs() <= thresholds.geweke)))
            .collect();
        let r_flags: Vec<bool> =
            gelman_rubin.iter().map(|r| r.is_some_and(|r| r < thresholds.gelman_rubin)).collect();
        metrics.push(MetricDiagnostics {
            metric,
            skipped: false,
            geweke,
            gelman_rubin,
            geweke_converged: settled(&z_flags).map(|j| cps[j]),
            gelman_rubin_converged: settled(&r_flags).map(|j| cps[j]),
        });
    }

    let points: Option<Vec<usize>> =
        metrics.iter().flat_map(|m| [m.geweke_converged, m.gelman_rubin_converged]).collect();
    let burn_in = match points.and_then(|p| p.into_iter().max()) {
        Some(checkpoint) => BurnIn::Converged { checkpoint, burn_in: checkpoint * thresholds.safety_factor },
        None => BurnIn::NotConverged,
    };
    Ok(DiagnosticsReport { thresholds, checkpoints: cps, metrics, burn_in })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

fn point(v: Option<usize>) -> String {
    v.map_or_else(|| "never".to_string(), |v| v.to_string())
}

impl DiagnosticsReport {
    /// The metric whose slowest test converged last, if any converged.
    pub fn slowest_metric(&self) -> Option<MetricKind> {
        self.metrics
            .iter()
            .filter(|m| !m.skipped)
            .max_by_key(|m| {
                let never = |p: Option<usize>| p.unwrap_or(usize::MAX);
                never(m.geweke_converged).max(never(m.gelman_rubin_converged))
            })
            .map(|m| m.metric)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let th = &self.thresholds;
        let cps: Vec<String> = self.checkpoints.iter().map(usize::to_string).collect();
        let mut out = String::new();
        writeln!(out, "# convergence diagnostics")?;
        writeln!(out, "geweke_bound = {}", th.geweke)?;
        writeln!(out, "geweke_windows = {} {}", th.frac_a, th.frac_b)?;
        writeln!(out, "gelman_rubin_threshold = {}", th.gelman_rubin)?;
        writeln!(out, "safety_factor = {}", th.safety_factor)?;
        writeln!(out, "checkpoints = {}", cps.join(" "))?;
        for m in &self.metrics {
            writeln!(out)?;
            if m.skipped {
                writeln!(out, "[geweke metric={}] skipped: constant across all chains", m.metric)?;
                continue;
            }
            writeln!(out, "[geweke metric={}]", m.metric)?;
            writeln!(out, "chain {}", cps.join(" "))?;
            for (chain, zs) in &m.geweke {
                let row: Vec<String> = zs.iter().map(|&z| cell(z)).collect();
                writeln!(out, "{chain} {}", row.join(" "))?;
            }
        }
        writeln!(out)?;
        writeln!(out, "[gelman_rubin]")?;
        writeln!(out, "metric {}", cps.join(" "))?;
        for m in self.metrics.iter().filter(|m| !m.skipped) {
            let row: Vec<String> = m.gelman_rubin.iter().map(|&r| cell(r)).collect();
            writeln!(out, "{} {}", m.metric, row.join(" "))?;
        }
        writeln!(out)?;
        writeln!(out, "[convergence]")?;
        writeln!(out, "metric geweke gelman_rubin")?;
        for m in &self.metrics {
            writeln!(out, "{} {} {}", m.metric, point(m.geweke_converged), point(m.gelman_rubin_converged))?;
        }
        match self.burn_in {
            BurnIn::Converged { checkpoint, burn_in } => {
                writeln!(out, "burn_in = {burn_in}")?;
                writeln!(out, "converged_at = {checkpoint}")?;
            }
            BurnIn::NotConverged => writeln!(out, "burn_in = not_converged")?,
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn iid(chains: u32, n: usize, seed: u64) -> Vec<MetricSeries> {
        (0..chains)
            .map(|c| {
                let mut rng = seeded(seed * 1000 + c as u64);
                MetricSeries {
                    chain_id: c,
                    metric: MetricKind::Degree,
                    values: (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
                }
            })
            .collect()
    }

    #[test]
    fn settled_runs() {
        assert_eq!(settled(&[true, true]), Some(0));
        assert_eq!(settled(&[true, false, true, true]), Some(2));
        assert_eq!(settled(&[true, false]), None);
        assert_eq!(settled(&[]), None);
    }

    #[test]
    fn stationary_chains_converge_early() {
        for seed in 0..10 {
            let r = detect_burn_in(&iid(28, 10_000, seed), Thresholds::default(), 20).unwrap();
            let first = r.checkpoints[0];
            let b = r.burn_in.iterations().expect("converged");
            assert!(b <= 2 * first, "seed {seed}: burn-in {b}");
        }
    }

    #[test]
    fn one_trending_chain_blocks_convergence() {
        let mut s = iid(28, 5000, 3);
        s[17].values = (0..5000).map(|t| t as f64 / 100.0).collect();
        let r = detect_burn_in(&s, Thresholds::default(), 20).unwrap();
        assert_eq!(r.burn_in, BurnIn::NotConverged);
        assert!(r.to_text().contains("burn_in = not_converged"));
    }

    #[test]
    fn constant_metric_skipped() {
        let mut s = iid(4, 1000, 1);
        s.extend((0..4).map(|c| MetricSeries { chain_id: c, metric: MetricKind::Region, values: vec![2.0; 1000] }));
        let r = detect_burn_in(&s, Thresholds::default(), 10).unwrap();
        let region = r.metrics.iter().find(|m| m.metric == MetricKind::Region).unwrap();
        assert!(region.skipped);
        assert!(r.burn_in.iterations().is_some());
    }

    #[test]
    fn slow_metric_drives_burn_in() {
        // metric that starts away from its stationary mean in half the chains
        let n = 10_000;
        let mut s = iid(8, n, 5);
        for c in 0..8u32 {
            let mut rng = seeded(77 + c as u64);
            let values = (0..n)
                .map(|t| {
                    let off = if c % 2 == 0 && t < 400 { 2.0 } else { 0.0 };
                    off + rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            s.push(MetricSeries { chain_id: c, metric: MetricKind::Membership(1), values });
        }
        let degree_only = detect_burn_in(&s[..8], Thresholds::default(), 50).unwrap();
        let both = detect_burn_in(&s, Thresholds::default(), 50).unwrap();
        let (a, b) = (degree_only.burn_in.iterations().unwrap(), both.burn_in.iterations().unwrap());
        assert!(b > a, "{b} vs {a}");
        assert_eq!(both.slowest_metric(), Some(MetricKind::Membership(1)));
    }

    #[test]
    fn report_layout() {
        let r = detect_burn_in(&iid(3, 200, 9), Thresholds::default(), 4).unwrap();
        let text = r.to_text();
        assert!(text.contains("checkpoints = 50 100 150 200"));
        assert!(text.contains("[geweke metric=degree]\nchain 50 100 150 200\n0 "));
        assert!(text.contains("[gelman_rubin]\nmetric 50 100 150 200\ndegree "));
    }

    #[test]
    fn input_errors() {
        let s = iid(1, 100, 0);
        assert_eq!(
            detect_burn_in(&s, Thresholds::default(), 5).unwrap_err(),
            DiagnosticsError::TooFewChains { got: 1, min: 2 }
        );
        assert_eq!(detect_burn_in(&[], Thresholds::default(), 5).unwrap_err(), DiagnosticsError::NoMetrics);
        assert_eq!(detect_burn_in(&iid(2, 100, 0), Thresholds::default(), 0).unwrap_err(), DiagnosticsError::NoCheckpoints);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn loosening_thresholds_never_delays(seed in 0u64..1000, drift in 0.0f64..3.0, gz in 0.2f64..1.0, gr in 1.001f64..1.05) {
            let mut s = iid(4, 2000, seed);
            for (i, c) in s.iter_mut().enumerate() {
                for (t, v) in c.values.iter_mut().enumerate() {
                    if i % 2 == 0 && t < 600 {
                        *v += drift;
                    }
                }
            }
            let tight = Thresholds { geweke: gz, gelman_rubin: gr, ..Thresholds::default() };
            let loose = Thresholds { geweke: gz * 1.5, gelman_rubin: gr + 0.02, ..Thresholds::default() };
            let a = detect_burn_in(&s, tight, 20).unwrap().burn_in.iterations().unwrap_or(usize::MAX);
            let b = detect_burn_in(&s, loose, 20).unwrap().burn_in.iterations().unwrap_or(usize::MAX);
            prop_assert!(b <= a);
        }
    }
}
