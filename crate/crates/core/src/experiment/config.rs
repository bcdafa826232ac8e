use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::diagnostics::{MetricKind, Thresholds};
use crate::estimators::{Binning, EstimateOptions};
use crate::graph::{AttributePlantSpec, PaFunction, RegionModel, SyntheticModel, UserIdMode};
use crate::samplers::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    ErdosRenyi,
    BarabasiAlbert,
    WattsStrogatz,
    TwoCommunity,
    /// Edge list (and optional attribute file) on disk.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub source: GraphSource,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub k: usize,
    pub beta: f64,
    pub n_per: usize,
    pub p_in: f64,
    pub bridges: usize,
    pub seed: u64,
    pub largest_component: bool,
    pub edges: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            source: GraphSource::BarabasiAlbert,
            n: 10_000,
            m: 5,
            p: 0.01,
            k: 10,
            beta: 0.1,
            n_per: 500,
            p_in: 0.05,
            bridges: 10,
            seed: 1,
            largest_component: true,
            edges: None,
            attributes: None,
        }
    }
}

impl GraphConfig {
    pub fn model(&self) -> Option<SyntheticModel> {
        Some(match self.source {
            GraphSource::ErdosRenyi => SyntheticModel::ErdosRenyi { n: self.n, p: self.p },
            GraphSource::BarabasiAlbert => SyntheticModel::BarabasiAlbert { n: self.n, m: self.m },
            GraphSource::WattsStrogatz => SyntheticModel::WattsStrogatz { n: self.n, k: self.k, beta: self.beta },
            GraphSource::TwoCommunity => {
                SyntheticModel::TwoCommunity { n_per: self.n_per, p_in: self.p_in, bridges: self.bridges }
            }
            GraphSource::File => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    None,
    Explicit,
    Blocks,
    Zipf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaKind {
    Constant,
    LogLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserIdKind {
    Uniform,
    DegreeAnticorrelated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    /// When false, attributes come from the attribute file (or stay default).
    pub enabled: bool,
    pub seed: u64,
    pub regions: RegionKind,
    pub region_fractions: Vec<f64>,
    pub zipf_regions: u16,
    pub zipf_exponent: f64,
    pub unaffiliated: f64,
    pub pa: PaKind,
    pub pa_constant: f64,
    pub pa_intercept: f64,
    pub pa_slope: f64,
    pub pa_max: f64,
    pub hidden_friends: f64,
    pub user_ids: UserIdKind,
    pub id_space: u64,
    pub id_noise: f64,
}

/// One valid id per 22 probes on the default graph size.
pub const DEFAULT_ID_SPACE: u64 = 22 * 10_000;

impl Default for PlantConfig {
    fn default() -> Self {
        Self { id_space: DEFAULT_ID_SPACE, ..Self::from_spec(&AttributePlantSpec::default(), 2) }
    }
}

impl PlantConfig {
    pub fn from_spec(spec: &AttributePlantSpec, seed: u64) -> Self {
        let mut c = Self {
            enabled: true,
            seed,
            regions: RegionKind::None,
            region_fractions: Vec::new(),
            zipf_regions: 10,
            zipf_exponent: 1.0,
            unaffiliated: 0.62,
            pa: PaKind::Constant,
            pa_constant: 0.0,
            pa_intercept: 0.3,
            pa_slope: -0.05,
            pa_max: 0.3,
            hidden_friends: spec.hidden_friends,
            user_ids: UserIdKind::Uniform,
            id_space: spec.user_ids.space(),
            id_noise: 0.5,
        };
        match &spec.regions {
            RegionModel::None => {}
            RegionModel::Explicit { fractions } => {
                c.regions = RegionKind::Explicit;
                c.region_fractions = fractions.clone();
            }
            RegionModel::Blocks { fractions } => {
                c.regions = RegionKind::Blocks;
                c.region_fractions = fractions.clone();
            }
            RegionModel::Zipf { regions, exponent, unaffiliated } => {
                c.regions = RegionKind::Zipf;
                (c.zipf_regions, c.zipf_exponent, c.unaffiliated) = (*regions, *exponent, *unaffiliated);
            }
        }
        match spec.pa {
            PaFunction::Constant { p } => c.pa_constant = p,
            PaFunction::LogLinear { intercept, slope, max } => {
                c.pa = PaKind::LogLinear;
                (c.pa_intercept, c.pa_slope, c.pa_max) = (intercept, slope, max);
            }
        }
        if let UserIdMode::DegreeAnticorrelated { noise, .. } = spec.user_ids {
            c.user_ids = UserIdKind::DegreeAnticorrelated;
            c.id_noise = noise;
        }
        c
    }

    pub fn spec(&self) -> AttributePlantSpec {
        let fractions = self.region_fractions.clone();
        AttributePlantSpec {
            regions: match self.regions {
                RegionKind::None => RegionModel::None,
                RegionKind::Explicit => RegionModel::Explicit { fractions },
                RegionKind::Blocks => RegionModel::Blocks { fractions },
                RegionKind::Zipf => RegionModel::Zipf {
                    regions: self.zipf_regions,
                    exponent: self.zipf_exponent,
                    unaffiliated: self.unaffiliated,
                },
            },
            pa: match self.pa {
                PaKind::Constant => PaFunction::Constant { p: self.pa_constant },
                PaKind::LogLinear => {
                    PaFunction::LogLinear { intercept: self.pa_intercept, slope: self.pa_slope, max: self.pa_max }
                }
            },
            hidden_friends: self.hidden_friends,
            user_ids: match self.user_ids {
                UserIdKind::Uniform => UserIdMode::UniformSparse { space: self.id_space },
                UserIdKind::DegreeAnticorrelated => {
                    UserIdMode::DegreeAnticorrelated { space: self.id_space, noise: self.id_noise }
                }
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub master_seed: u64,
    pub methods: Vec<Method>,
    /// Number of seeds, i.e. chains per crawl method.
    pub chains: usize,
    pub budget: usize,
    pub cache: bool,
    pub parallel: bool,
    /// Accepted UNI samples; defaults to `chains * budget`.
    pub uni_target: Option<usize>,
    pub write_traces: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            master_seed: 7,
            methods: Method::ALL.to_vec(),
            chains: 28,
            budget: 10_000,
            cache: true,
            parallel: true,
            uni_target: None,
            write_traces: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub geweke: f64,
    pub gelman_rubin: f64,
    pub safety_factor: usize,
    pub frac_a: f64,
    pub frac_b: f64,
    pub checkpoints: usize,
    /// Any of `degree`, `user_id`, `region_id`.
    pub metrics: Vec<String>,
    /// Regions whose membership indicator is monitored.
    pub membership: Vec<u16>,
    /// Skips detection and discards this many iterations per chain.
    pub burn_in: Option<usize>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            geweke: t.geweke,
            gelman_rubin: t.gelman_rubin,
            safety_factor: t.safety_factor,
            frac_a: t.frac_a,
            frac_b: t.frac_b,
            checkpoints: 50,
            metrics: vec!["degree".into(), "user_id".into()],
            membership: vec![1],
            burn_in: None,
        }
    }
}

impl DiagnosticsConfig {
    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            geweke: self.geweke,
            gelman_rubin: self.gelman_rubin,
            safety_factor: self.safety_factor,
            frac_a: self.frac_a,
            frac_b: self.frac_b,
        }
    }

    pub fn metric_kinds(&self) -> Result<Vec<MetricKind>, ExperimentError> {
        let mut out: Vec<MetricKind> =
            self.metrics.iter().map(|m| m.parse()).collect::<Result<_, String>>().map_err(ExperimentError::Config)?;
        out.extend(self.membership.iter().map(|&r| MetricKind::Membership(r)));
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningKind {
    Unit,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatesConfig {
    pub degree_binning: BinningKind,
    pub bins_per_decade: u32,
    pub pa_bins_per_decade: u32,
    pub userid_grid: usize,
    pub powerlaw_k_min: f64,
    pub powerlaw_boundary: Option<f64>,
    /// Ego networks collected per method from the post-burn-in sample.
    pub egonets: usize,
}

impl Default for EstimatesConfig {
    fn default() -> Self {
        Self {
            degree_binning: BinningKind::Unit,
            bins_per_decade: 10,
            pa_bins_per_decade: 2,
            userid_grid: 100,
            powerlaw_k_min: 1.0,
            powerlaw_boundary: None,
            egonets: 200,
        }
    }
}

impl EstimatesConfig {
    pub fn options(&self, id_space: u64) -> EstimateOptions {
        let log = |b| Binning::Log { base: 10.0, bins_per_decade: b };
        EstimateOptions {
            degree_binning: match self.degree_binning {
                BinningKind::Unit => Binning::Unit,
                BinningKind::Log => log(self.bins_per_decade),
            },
            plot_binning: log(self.bins_per_decade),
            pa_binning: log(self.pa_bins_per_decade),
            userid_grid_points: self.userid_grid,
            id_space,
            powerlaw_k_min: self.powerlaw_k_min,
            powerlaw_boundary: self.powerlaw_boundary,
        }
    }
}

/// Pass/fail bounds for the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Total variation between degree pdfs.
    pub degree_tv: f64,
    /// Kolmogorov-Smirnov distance between degree distributions.
    pub degree_ks: f64,
    /// Relative error of the mean degree.
    pub mean_degree: f64,
    /// Relative error of the median degree.
    pub median_degree: f64,
    /// Largest absolute error over regions.
    pub region_mass: f64,
    /// Largest gap between user-id cdfs on the grid.
    pub userid_cdf: f64,
    /// Absolute error of global privacy awareness.
    pub privacy: f64,
    /// Absolute error of the average clustering coefficient.
    pub clustering: f64,
    /// Absolute error of the assortativity coefficient.
    pub assortativity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degree_tv: 0.05,
            degree_ks: 0.05,
            mean_degree: 0.05,
            median_degree: 0.1,
            region_mass: 0.02,
            userid_cdf: 0.05,
            privacy: 0.02,
            clustering: 0.05,
            assortativity: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("osnwalk-out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphConfig,
    pub plant: PlantConfig,
    pub sampling: SamplingConfig,
    pub diagnostics: DiagnosticsConfig,
    pub estimates: EstimatesConfig,
    pub compare: Tolerances,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let c: Self = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        let s = &self.sampling;
        if s.budget == 0 {
            return bad("sampling.budget must be at least 1".into());
        }
        if s.chains == 0 {
            return bad("sampling.chains must be at least 1".into());
        }
        if s.methods.is_empty() {
            return bad("sampling.methods is empty".into());
        }
        if s.uni_target == Some(0) {
            return bad("sampling.uni_target must be at least 1".into());
        }
        if self.diagnostics.checkpoints == 0 {
            return bad("diagnostics.checkpoints must be at least 1".into());
        }
        self.diagnostics.metric_kinds()?;
        if self.graph.source == GraphSource::File {
            let Some(edges) = &self.graph.edges else {
                return bad("graph.source = \"file\" needs graph.edges".into());
            };
            for p in std::iter::once(edges).chain(&self.graph.attributes) {
                if !p.exists() {
                    return bad(format!("file not found: {}", p.display()));
                }
            }
        }
        Ok(())
    }
}
