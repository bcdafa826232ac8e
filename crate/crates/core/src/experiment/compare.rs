use std::fmt::Write as _;

use super::Tolerances;
use crate::estimators::{distribution_distance, DistanceKind, EstimateReport};

/// One cell of the comparison table. Missing estimates leave the numbers
/// `None` and `pass` undecided.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: &'static str,
    pub method: String,
    pub estimate: Option<f64>,
    pub truth: Option<f64>,
    pub distance: Option<f64>,
    pub distance_kind: &'static str,
    pub tolerance: f64,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

impl Comparison {
    pub fn row(&self, method: &str, metric: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method == method && r.metric == metric)
    }

    /// Every decided row of `method` passed.
    pub fn passes(&self, method: &str) -> bool {
        self.rows.iter().filter(|r| r.method == method).all(|r| r.pass != Some(false))
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let mut s = String::from("metric,method,estimate,truth,distance,distance_kind,tolerance,pass\n");
        for r in &self.rows {
            let pass = match r.pass {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "absent",
            };
            writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.metric,
                r.method,
                opt(r.estimate),
                opt(r.truth),
                opt(r.distance),
                r.distance_kind,
                r.tolerance,
                pass
            )
            .unwrap();
        }
        s
    }
}

/// Scores each method's estimates against the ground truth, metric by metric.
pub fn compare_methods(reports: &[EstimateReport], truth: &EstimateReport, tol: &Tolerances) -> Comparison {
    let mut rows = Vec::new();
    for r in reports {
        let mut push = |metric, estimate, truth_v, distance: Option<f64>, distance_kind, tolerance: f64| {
            rows.push(ComparisonRow {
                metric,
                method: r.label.clone(),
                estimate,
                truth: truth_v,
                distance,
                distance_kind,
                tolerance,
                pass: distance.map(|d| d <= tolerance),
            })
        };
        let dist = |kind| distribution_distance(&r.degree_pdf, &truth.degree_pdf, kind).ok().map(|d| d.value);
        push("degree_pdf", None, None, dist(DistanceKind::Tv), "tv", tol.degree_tv);
        push("degree_cdf", None, None, dist(DistanceKind::Ks), "ks", tol.degree_ks);
        let (e, t) = (r.mean_degree.value, truth.mean_degree.value);
        push("mean_degree", Some(e), Some(t), Some(rel(e, t)), "relative", tol.mean_degree);
        let (e, t) = (r.median_degree.value, truth.median_degree.value);
        push("median_degree", Some(e), Some(t), Some(rel(e, t)), "relative", tol.median_degree);
        let region_err = truth
            .regions
            .keys()
            .chain(r.regions.keys())
            .map(|k| (r.regions.get(k).unwrap_or(&0.0) - truth.regions.get(k).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max);
        push("region_mass", None, None, Some(region_err), "max_abs", tol.region_mass);
        let cdf_gap = (r.userid_grid == truth.userid_grid).then(|| {
            r.userid_cdf.iter().zip(&truth.userid_cdf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        });
        push("userid_cdf", None, None, cdf_gap, "ks_grid", tol.userid_cdf);
        let (e, t) = (r.privacy.global.pa, truth.privacy.global.pa);
        push("privacy_awareness", Some(e), Some(t), Some((e - t).abs()), "abs", tol.privacy);
        let e = r.clustering.as_ref().map(|c| c.global);
        let t = truth.clustering.as_ref().map(|c| c.global);
        push("clustering", e, t, e.zip(t).map(|(e, t)| (e - t).abs()), "abs", tol.clustering);
        let e = r.assortativity.map(|a| a.value);
        let t = truth.assortativity.map(|a| a.value);
        push("assortativity", e, t, e.zip(t).map(|(e, t)| (e - t).abs()), "abs", tol.assortativity);
    }
    Comparison { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{truth_report, EstimateOptions};
    use crate::graph::{gen_synthetic, plant_attributes, AttributePlantSpec, SyntheticModel};

    #[test]
    fn truth_against_itself_is_exact() {
        let g = gen_synthetic(SyntheticModel::BarabasiAlbert { n: 500, m: 3 }, 3, true).unwrap();
        let (g, _) = plant_attributes(&g, &AttributePlantSpec::default(), 4).unwrap();
        let truth = truth_report(&g, &EstimateOptions::default()).unwrap();
        let mut same = truth.clone();
        same.label = "copy".into();
        let c = compare_methods(&[same], &truth, &Tolerances::default());
        assert!(c.rows.iter().all(|r| r.distance == Some(0.0)));
        assert!(c.passes("copy"));
        let csv = c.to_csv();
        assert!(csv.starts_with("metric,method,estimate,truth,distance,distance_kind,tolerance,pass\n"));
        assert_eq!(csv.lines().count(), 1 + c.rows.len());
    }

    #[test]
    fn missing_estimates_are_absent() {
        let g = gen_synthetic(SyntheticModel::BarabasiAlbert { n: 300, m: 2 }, 3, true).unwrap();
        let truth = truth_report(&g, &EstimateOptions::default()).unwrap();
        let mut est = truth.clone();
        est.label = "x".into();
        est.clustering = None;
        let c = compare_methods(&[est], &truth, &Tolerances::default());
        assert_eq!(c.row("x", "clustering").unwrap().pass, None);
        assert!(c.to_csv().contains("clustering,x,,"));
        assert!(c.passes("x"));
    }
}
