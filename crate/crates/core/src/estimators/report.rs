use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    assortativity, clustering, degree_distribution, graph_assortativity, graph_clustering, mean_degree,
    median_degree, powerlaw_exponent, privacy_awareness, region_mass, uniform_grid, userid_cdf, Binning,
    ClusteringEstimate, EstimateError, HistKind, Histogram, PrivacyAwareness,
};
use crate::crawl::{observe, EgoNet, NodeObservation};
use crate::graph::SocialGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateOptions {
    /// Binning used for the degree pdf compared against the truth.
    pub degree_binning: Binning,
    /// Binning of the plot-oriented degree pdf.
    pub plot_binning: Binning,
    pub pa_binning: Binning,
    pub userid_grid_points: usize,
    pub id_space: u64,
    pub powerlaw_k_min: f64,
    /// Splits the power-law fit into two regimes when set.
    pub powerlaw_boundary: Option<f64>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            degree_binning: Binning::Unit,
            plot_binning: Binning::LOG10,
            pa_binning: Binning::Log { base: 10.0, bins_per_decade: 2 },
            userid_grid_points: 100,
            id_space: 1 << 32,
            powerlaw_k_min: 1.0,
            powerlaw_boundary: None,
        }
    }
}

/// An estimate together with the number of observations behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub label: String,
    pub sample_size: usize,
    pub degree_pdf: Histogram,
    pub degree_ccdf: Histogram,
    pub degree_pdf_plot: Histogram,
    pub mean_degree: Scalar,
    pub median_degree: Scalar,
    pub regions: BTreeMap<u16, f64>,
    pub userid_grid: Vec<f64>,
    pub userid_cdf: Vec<f64>,
    /// One exponent, or low and high regime exponents with a boundary.
    pub powerlaw: Vec<Scalar>,
    pub clustering: Option<ClusteringEstimate>,
    pub assortativity: Option<Scalar>,
    pub privacy: PrivacyAwareness,
}

fn fit_powerlaw(samples: &[NodeObservation], opts: &EstimateOptions) -> Vec<Scalar> {
    let ks: Vec<f64> = samples.iter().map(|o| o.degree as f64).collect();
    let fit = |vals: &[f64], k_min: f64| {
        let n = vals.iter().filter(|&&k| k >= k_min).count();
        powerlaw_exponent(vals, k_min).ok().map(|value| Scalar { value, n })
    };
    match opts.powerlaw_boundary {
        None => fit(&ks, opts.powerlaw_k_min).into_iter().collect(),
        Some(b) => {
            let low: Vec<f64> = ks.iter().copied().filter(|&k| k < b).collect();
            fit(&low, opts.powerlaw_k_min).into_iter().chain(fit(&ks, b)).collect()
        }
    }
}

impl EstimateReport {
    /// Every estimate computable from `samples`, plus clustering and
    /// assortativity when ego networks are given.
    pub fn compute(
        label: &str,
        samples: &[NodeObservation],
        egonets: &[EgoNet],
        opts: &EstimateOptions,
    ) -> Result<Self, EstimateError> {
        let n = samples.len();
        let grid = uniform_grid(opts.id_space, opts.userid_grid_points);
        Ok(Self {
            label: label.to_string(),
            sample_size: n,
            degree_pdf: degree_distribution(samples, HistKind::Pdf, opts.degree_binning)?,
            degree_ccdf: degree_distribution(samples, HistKind::Ccdf, opts.degree_binning)?,
            degree_pdf_plot: degree_distribution(samples, HistKind::Pdf, opts.plot_binning)?,
            mean_degree: Scalar { value: mean_degree(samples)?, n },
            median_degree: Scalar { value: median_degree(samples)?, n },
            regions: region_mass(samples),
            userid_cdf: userid_cdf(samples, &grid),
            userid_grid: grid,
            powerlaw: fit_powerlaw(samples, opts),
            clustering: if egonets.is_empty() { None } else { clustering(egonets).ok() },
            assortativity: if egonets.is_empty() {
                None
            } else {
                assortativity(egonets).ok().map(|value| Scalar { value, n: egonets.len() })
            },
            privacy: privacy_awareness(samples, egonets, opts.pa_binning)?,
        })
    }

    /// Structured text with every scalar estimate; curves go to [`Self::csv_files`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        writeln!(w, "label = \"{}\"", self.label).unwrap();
        writeln!(w, "sample_size = {}", self.sample_size).unwrap();
        writeln!(w, "\n[degree]").unwrap();
        writeln!(w, "mean = {}\nmean_n = {}", self.mean_degree.value, self.mean_degree.n).unwrap();
        writeln!(w, "median = {}\nmedian_n = {}", self.median_degree.value, self.median_degree.n).unwrap();
        for (i, p) in self.powerlaw.iter().enumerate() {
            writeln!(w, "powerlaw_alpha_{i} = {}\npowerlaw_n_{i} = {}", p.value, p.n).unwrap();
        }
        writeln!(w, "\n[regions]").unwrap();
        for (r, m) in &self.regions {
            writeln!(w, "region_{r} = {m}").unwrap();
        }
        writeln!(w, "\n[structure]").unwrap();
        match &self.clustering {
            Some(c) => writeln!(w, "clustering = {}\nclustering_egos = {}\nclustering_skipped = {}", c.global, c.egos, c.skipped),
            None => writeln!(w, "clustering = \"absent\""),
        }
        .unwrap();
        match &self.assortativity {
            Some(a) => writeln!(w, "assortativity = {}\nassortativity_n = {}", a.value, a.n),
            None => writeln!(w, "assortativity = \"absent\""),
        }
        .unwrap();
        writeln!(w, "\n[privacy]").unwrap();
        writeln!(w, "pa = {}\npa_n = {}", self.privacy.global.pa, self.privacy.global.count).unwrap();
        for (r, c) in &self.privacy.by_region {
            writeln!(w, "pa_region_{r} = {}\npa_region_{r}_n = {}", c.pa, c.count).unwrap();
        }
        out
    }

    /// `(file name, contents)` for every curve, all with `bin_low,bin_high,mass` columns.
    pub fn csv_files(&self) -> Vec<(String, String)> {
        let table = |rows: &mut dyn Iterator<Item = (f64, f64, f64)>| {
            let mut s = String::from("bin_low,bin_high,mass\n");
            for (lo, hi, m) in rows {
                writeln!(s, "{lo},{hi},{m}").unwrap();
            }
            s
        };
        let mut files = vec![
            ("degree_pdf.csv".to_string(), self.degree_pdf.to_csv()),
            ("degree_ccdf.csv".to_string(), self.degree_ccdf.to_csv()),
            ("degree_pdf_log.csv".to_string(), self.degree_pdf_plot.to_csv()),
            (
                "region_mass.csv".to_string(),
                table(&mut self.regions.iter().map(|(&r, &m)| (r as f64, r as f64 + 1.0, m))),
            ),
            (
                "userid_cdf.csv".to_string(),
                table(&mut self.userid_grid.iter().enumerate().map(|(j, &g)| {
                    let lo = if j == 0 { 0.0 } else { self.userid_grid[j - 1] };
                    (lo, g, self.userid_cdf[j])
                })),
            ),
            (
                "pa_by_degree.csv".to_string(),
                table(&mut self.privacy.by_degree.iter().map(|b| (b.low, b.high, b.cell.pa))),
            ),
            (
                "pa_by_neighbor_pa.csv".to_string(),
                table(&mut self.privacy.by_neighbor_pa.iter().map(|b| (b.low, b.high, b.cell.pa))),
            ),
        ];
        if let Some(c) = &self.clustering {
            files.push((
                "clustering_by_degree.csv".to_string(),
                table(&mut c.curve.iter().map(|p| (p.k_low as f64, p.k_high as f64, p.clustering))),
            ));
        }
        files
    }
}

/// The same estimates over the whole population a crawler can sample: every
/// node with friends and a visible friend list, each once. Clustering and
/// assortativity use the full graph.
pub fn truth_report(g: &SocialGraph, opts: &EstimateOptions) -> Result<EstimateReport, EstimateError> {
    let population: Vec<NodeObservation> = g
        .nodes()
        .filter(|&v| g.is_crawlable(v))
        .map(|v| observe(g, v))
        .collect();
    let mut r = EstimateReport::compute("truth", &population, &[], opts)?;
    r.clustering = graph_clustering(g).ok();
    r.assortativity = graph_assortativity(g).ok().map(|value| Scalar { value, n: g.edge_count() });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::{CacheMode, Frontend};
    use crate::graph::{gen_synthetic, plant_attributes, AttributePlantSpec, SyntheticModel};

    #[test]
    fn report_on_full_population_matches_truth() {
        let g = gen_synthetic(SyntheticModel::BarabasiAlbert { n: 300, m: 3 }, 1, true).unwrap();
        let (g, _) = plant_attributes(&g, &AttributePlantSpec::default(), 2).unwrap();
        let opts = EstimateOptions::default();
        let truth = truth_report(&g, &opts).unwrap();
        let fe = Frontend::new(&g, CacheMode::Shared);
        let nets: Vec<EgoNet> = g.nodes().map(|v| fe.collect_egonet(v).unwrap()).collect();
        let samples: Vec<NodeObservation> = nets.iter().map(|e| *e.ego_observation()).collect();
        let est = EstimateReport::compute("all", &samples, &nets, &opts).unwrap();
        assert_eq!(est.degree_pdf, truth.degree_pdf);
        assert_eq!(est.regions, truth.regions);
        assert_eq!(est.userid_cdf, truth.userid_cdf);
        assert!((est.clustering.as_ref().unwrap().global - truth.clustering.as_ref().unwrap().global).abs() < 1e-12);
        assert!((est.assortativity.unwrap().value - truth.assortativity.unwrap().value).abs() < 1e-12);
        assert!(est.to_text().contains("[privacy]\npa = "));
        let names: Vec<String> = est.csv_files().into_iter().map(|f| f.0).collect();
        assert!(names.contains(&"clustering_by_degree.csv".to_string()));
        assert!(est.csv_files().iter().all(|(_, c)| c.starts_with("bin_low,bin_high,mass\n")));
    }

    #[test]
    fn two_regime_powerlaw() {
        let g = gen_synthetic(SyntheticModel::BarabasiAlbert { n: 2000, m: 3 }, 1, true).unwrap();
        let opts = EstimateOptions { powerlaw_k_min: 3.0, powerlaw_boundary: Some(20.0), ..Default::default() };
        let r = truth_report(&g, &opts).unwrap();
        assert_eq!(r.powerlaw.len(), 2);
        assert!(r.to_text().contains("powerlaw_alpha_1 = "));
    }
}
