//! End-to-end experiment: generate or load a graph, plant attributes, crawl
//! with every configured method, diagnose, estimate and compare against the
//! ground truth. Everything lands in one output directory:
//!
//! ```text
//! config.toml            configuration used (output.dir written as ".")
//! ground_truth.toml      planted parameters and realized masses
//! graph/edges.txt        edge list
//! graph/attributes.txt   token user_id region privacy
//! seeds.txt              one seed token per chain
//! truth/                 estimates over the whole crawlable population
//! <method>/trace.txt     trace dump (uni: samples.txt)
//! <method>/cost.toml     request, cache and byte counts
//! <method>/cost_chains.csv
//! <method>/diagnostics.txt   rw and mhrw only
//! <method>/estimates.toml plus one CSV per curve
//! comparison.csv         method x metric distances to the truth
//! summary.toml           status and burn-in per method
//! ```

mod compare;
mod config;

pub use compare::{compare_methods, Comparison, ComparisonRow};
pub use config::{
    BinningKind, DiagnosticsConfig, EstimatesConfig, ExperimentConfig, GraphConfig, GraphSource, OutputConfig,
    PaKind, PlantConfig, RegionKind, SamplingConfig, Tolerances, UserIdKind,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::crawl::{CacheMode, CostLedger, EgoNet, Frontend, NodeObservation};
use crate::diagnostics::{detect_burn_in, metric_series, BurnIn, MetricSeries};
use crate::estimators::{truth_report, EstimateReport};
use crate::graph::{gen_synthetic, load_attributes, load_edge_list, plant_attributes, write_attributes, write_edge_list, SocialGraph};
use crate::rng::{family, StreamFamily};
use crate::samplers::{
    run_parallel_chains, select_seeds, subsample_trace, uni_sample, write_trace_dump, ChainSet, Execution, Method,
};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            ExperimentError::Stage { .. } => 2,
        }
    }
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> ExperimentError {
    move |e| ExperimentError::Stage { stage, message: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    /// Some walk never met the convergence thresholds; its estimates use the
    /// second half of every chain.
    NotConverged,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::NotConverged => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub burn_in: usize,
    /// `None` for methods without diagnostics or when the burn-in was given.
    pub detected: Option<BurnIn>,
    pub samples: usize,
    pub crawl_cost: CostLedger,
    pub egonet_cost: CostLedger,
    pub report: EstimateReport,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub out_dir: PathBuf,
    pub runs: Vec<MethodRun>,
    pub truth: EstimateReport,
    pub comparison: Comparison,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(stage("output"))?;
    }
    fs::write(path, contents).map_err(|e| ExperimentError::Stage { stage: "output", message: format!("{}: {e}", path.display()) })
}

fn write_report(dir: &Path, r: &EstimateReport) -> Result<(), ExperimentError> {
    write(&dir.join("estimates.toml"), r.to_text())?;
    for (name, body) in r.csv_files() {
        write(&dir.join(name), body)?;
    }
    Ok(())
}

fn cost_text(crawl: &CostLedger, egonets: &CostLedger) -> String {
    let mut s = String::new();
    for (name, c) in [("crawl", crawl), ("egonets", egonets)] {
        writeln!(s, "[{name}]").unwrap();
        writeln!(s, "fetches = {}", c.fetches).unwrap();
        writeln!(s, "probes = {}", c.probes).unwrap();
        writeln!(s, "cache_hits = {}", c.cache_hits).unwrap();
        writeln!(s, "downloads = {}", c.downloads()).unwrap();
        writeln!(s, "simulated_bytes = {}\n", c.simulated_bytes).unwrap();
    }
    s
}

fn chain_costs_csv(set: &ChainSet) -> String {
    let mut s = String::from("chain,fetches,cache_hits,downloads,simulated_bytes\n");
    for (i, c) in set.chain_costs.iter().enumerate() {
        writeln!(s, "{i},{},{},{},{}", c.fetches, c.cache_hits, c.downloads(), c.simulated_bytes).unwrap();
    }
    s
}

/// Builds the graph the experiment runs on, with its attributes.
pub fn build_graph(cfg: &ExperimentConfig) -> Result<(SocialGraph, Option<crate::graph::GroundTruth>), ExperimentError> {
    let g = match cfg.graph.model() {
        Some(model) => gen_synthetic(model, cfg.graph.seed, cfg.graph.largest_component).map_err(stage("generate"))?,
        None => {
            let edges = cfg.graph.edges.as_ref().ok_or_else(|| ExperimentError::Config("graph.edges missing".into()))?;
            let g = load_edge_list(edges).map_err(stage("load"))?;
            match &cfg.graph.attributes {
                Some(a) => load_attributes(a, g).map_err(stage("load"))?,
                None => g,
            }
        }
    };
    if !cfg.plant.enabled {
        return Ok((g, None));
    }
    let (g, truth) = plant_attributes(&g, &cfg.plant.spec(), cfg.plant.seed).map_err(stage("plant"))?;
    Ok((g, Some(truth)))
}

fn id_space(cfg: &ExperimentConfig, g: &SocialGraph) -> u64 {
    if cfg.plant.enabled {
        cfg.plant.id_space
    } else {
        let max = g.attributes().iter().map(|a| a.user_id as u64).max().unwrap_or(0);
        (max + 1).next_power_of_two().min(1 << 32)
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    g: &'a SocialGraph,
    out: &'a Path,
    seeds: &'a [crate::graph::NodeId],
}

fn collect_egonets(fe: &Frontend<'_>, egos: impl Iterator<Item = crate::graph::NodeId>) -> Result<Vec<EgoNet>, ExperimentError> {
    egos.map(|v| fe.collect_egonet(v).map_err(stage("egonets"))).collect()
}

fn run_chain_method(ctx: &Ctx<'_>, method: Method, status: &mut RunStatus) -> Result<MethodRun, ExperimentError> {
    let (cfg, g) = (ctx.cfg, ctx.g);
    let s = &cfg.sampling;
    let dir = ctx.out.join(method.name());
    let cache = if s.cache { CacheMode::Shared } else { CacheMode::Disabled };
    let exec = if s.parallel { Execution::Parallel } else { Execution::Sequential };
    let fe = Frontend::new(g, cache);
    log::info!("{method}: {} chains x {} iterations", ctx.seeds.len(), s.budget);
    let set = run_parallel_chains(&fe, method, ctx.seeds, s.budget, s.master_seed, exec).map_err(stage("sample"))?;
    let crawl_cost = fe.ledger();
    if s.write_traces {
        let mut buf = Vec::new();
        write_trace_dump(&set.traces, g, &mut buf).map_err(stage("output"))?;
        write(&dir.join("trace.txt"), buf)?;
    }

    let mut detected = None;
    let burn_in = match (method, cfg.diagnostics.burn_in) {
        (Method::Bfs, _) => 0,
        (_, Some(b)) => b,
        (_, None) => {
            let mut series: Vec<MetricSeries> = Vec::new();
            for kind in cfg.diagnostics.metric_kinds()? {
                series.extend(set.traces.iter().map(|t| metric_series(t, &set.catalog, kind)));
            }
            let report = if set.traces.len() >= 2 {
                let r = detect_burn_in(&series, cfg.diagnostics.thresholds(), cfg.diagnostics.checkpoints)
                    .map_err(stage("diagnose"))?;
                write(&dir.join("diagnostics.txt"), r.to_text())?;
                r.burn_in
            } else {
                log::warn!("{method}: one chain, Gelman-Rubin needs two; no burn-in detection");
                BurnIn::NotConverged
            };
            detected = Some(report);
            match report.iterations() {
                Some(b) if b < s.budget => b,
                _ => {
                    log::warn!("{method}: not converged within the budget; using the second half of each chain");
                    *status = RunStatus::NotConverged;
                    s.budget / 2
                }
            }
        }
    };
    let burn_in = burn_in.min(s.budget - 1);
    let samples = set.pooled_observations(burn_in);

    let before = fe.ledger();
    let egonets = if cfg.estimates.egonets > 0 {
        let available: usize = set.traces.iter().map(|t| t.len().saturating_sub(burn_in)).sum();
        let mut rng = StreamFamily::new(s.master_seed, family::SUBSAMPLE).split(method.stream_family());
        let picks = subsample_trace(&set, burn_in, cfg.estimates.egonets.min(available), &mut rng)
            .map_err(stage("egonets"))?;
        collect_egonets(&fe, picks.iter().map(|p| p.node))?
    } else {
        Vec::new()
    };
    let egonet_cost = fe.ledger().since(&before);

    write(&dir.join("cost.toml"), cost_text(&crawl_cost, &egonet_cost))?;
    write(&dir.join("cost_chains.csv"), chain_costs_csv(&set))?;
    let opts = cfg.estimates.options(id_space(cfg, g));
    let report = EstimateReport::compute(method.name(), &samples, &egonets, &opts).map_err(stage("estimate"))?;
    write_report(&dir, &report)?;
    Ok(MethodRun { method, burn_in, detected, samples: samples.len(), crawl_cost, egonet_cost, report })
}

fn run_uni(ctx: &Ctx<'_>) -> Result<MethodRun, ExperimentError> {
    let (cfg, g) = (ctx.cfg, ctx.g);
    let s = &cfg.sampling;
    let dir = ctx.out.join("uni");
    let fe = Frontend::new(g, if s.cache { CacheMode::Shared } else { CacheMode::Disabled });
    let target = s.uni_target.unwrap_or(s.chains * s.budget);
    let space = id_space(cfg, g);
    log::info!("uni: {target} accepted ids from a space of {space}");
    let mut rng = StreamFamily::new(s.master_seed, family::UNI).split(0);
    let sample = uni_sample(&fe, target, space, &mut rng).map_err(stage("sample"))?;
    let crawl_cost = fe.ledger();
    if s.write_traces {
        let mut body = String::from("# user_id node\n");
        for o in &sample.nodes {
            writeln!(body, "{} {}", o.user_id, g.token(o.node)).unwrap();
        }
        write(&dir.join("samples.txt"), body)?;
    }
    let before = fe.ledger();
    let egonets = collect_egonets(&fe, sample.nodes.iter().take(cfg.estimates.egonets).map(|o| o.node))?;
    let egonet_cost = fe.ledger().since(&before);
    let mut cost = cost_text(&crawl_cost, &egonet_cost);
    writeln!(
        cost,
        "[probes]\naccepted = {}\nnonexistent = {}\nisolated = {}\nhidden = {}\nprobes_per_accept = {}",
        sample.nodes.len(),
        sample.nonexistent,
        sample.isolated,
        sample.hidden,
        sample.probes_per_accept()
    )
    .unwrap();
    write(&dir.join("cost.toml"), cost)?;
    let opts = cfg.estimates.options(space);
    let report = EstimateReport::compute("uni", &sample.nodes, &egonets, &opts).map_err(stage("estimate"))?;
    write_report(&dir, &report)?;
    Ok(MethodRun {
        method: Method::Uni,
        burn_in: 0,
        detected: None,
        samples: sample.nodes.len(),
        crawl_cost,
        egonet_cost,
        report,
    })
}

fn summary_text(status: RunStatus, runs: &[MethodRun]) -> String {
    let mut s = String::new();
    let st = match status {
        RunStatus::Ok => "ok",
        RunStatus::NotConverged => "not_converged",
    };
    writeln!(s, "status = \"{st}\"").unwrap();
    for r in runs {
        writeln!(s, "\n[{}]", r.method).unwrap();
        writeln!(s, "burn_in = {}", r.burn_in).unwrap();
        match r.detected {
            Some(BurnIn::Converged { checkpoint, burn_in }) => {
                writeln!(s, "converged_at = {checkpoint}\ndeclared_burn_in = {burn_in}").unwrap()
            }
            Some(BurnIn::NotConverged) => writeln!(s, "converged_at = \"never\"").unwrap(),
            None => {}
        }
        writeln!(s, "samples = {}", r.samples).unwrap();
        writeln!(s, "downloads = {}", r.crawl_cost.downloads() + r.egonet_cost.downloads()).unwrap();
        writeln!(s, "simulated_bytes = {}", r.crawl_cost.simulated_bytes + r.egonet_cost.simulated_bytes).unwrap();
    }
    s
}

/// Runs the whole pipeline and writes the report tree under `cfg.output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    cfg.validate()?;
    let out = cfg.output.dir.clone();
    fs::create_dir_all(&out).map_err(stage("output"))?;
    let mut recorded = cfg.clone();
    recorded.output.dir = PathBuf::from(".");
    write(&out.join("config.toml"), recorded.emit())?;

    let (g, ground) = build_graph(cfg)?;
    log::info!("graph: {} nodes, {} edges", g.node_count(), g.edge_count());
    if let Some(t) = &ground {
        write(&out.join("ground_truth.toml"), t.to_toml())?;
    }
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf).map_err(stage("output"))?;
    write(&out.join("graph/edges.txt"), &buf)?;
    buf.clear();
    write_attributes(&g, &mut buf).map_err(stage("output"))?;
    write(&out.join("graph/attributes.txt"), &buf)?;

    let seeds = select_seeds(&g, cfg.sampling.chains, cfg.sampling.master_seed).map_err(stage("seeds"))?;
    let mut seed_text = String::new();
    for v in &seeds {
        writeln!(seed_text, "{}", g.token(*v)).unwrap();
    }
    write(&out.join("seeds.txt"), seed_text)?;

    let ctx = Ctx { cfg, g: &g, out: &out, seeds: &seeds };
    let mut status = RunStatus::Ok;
    let mut runs = Vec::new();
    let mut done = BTreeMap::new();
    for &method in &cfg.sampling.methods {
        if done.insert(method, ()).is_some() {
            continue;
        }
        let run = match method {
            Method::Uni => run_uni(&ctx)?,
            m => run_chain_method(&ctx, m, &mut status)?,
        };
        runs.push(run);
    }

    let opts = cfg.estimates.options(id_space(cfg, &g));
    let truth = truth_report(&g, &opts).map_err(stage("estimate"))?;
    write_report(&out.join("truth"), &truth)?;
    let reports: Vec<EstimateReport> = runs.iter().map(|r| r.report.clone()).collect();
    let comparison = compare_methods(&reports, &truth, &cfg.compare);
    write(&out.join("comparison.csv"), comparison.to_csv())?;
    write(&out.join("summary.toml"), summary_text(status, &runs))?;
    Ok(RunOutcome { status, out_dir: out, runs, truth, comparison })
}

/// Observations of a sequence of nodes read straight off the graph.
pub fn observations(g: &SocialGraph, nodes: &[crate::graph::NodeId]) -> Vec<NodeObservation> {
    nodes.iter().map(|&v| crate::crawl::observe(g, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.graph.source = GraphSource::ErdosRenyi;
        c.graph.n = 100;
        c.graph.p = 0.08;
        c.sampling.methods = vec![Method::Mhrw];
        c.sampling.chains = 1;
        c.sampling.budget = 1000;
        c.estimates.egonets = 10;
        c.output.dir = dir.to_path_buf();
        c
    }

    #[test]
    fn minimal_run_writes_every_section() {
        let tmp = tempfile::tempdir().unwrap();
        let out = run_experiment(&minimal(tmp.path())).unwrap();
        for f in [
            "config.toml",
            "ground_truth.toml",
            "graph/edges.txt",
            "graph/attributes.txt",
            "seeds.txt",
            "truth/estimates.toml",
            "mhrw/trace.txt",
            "mhrw/cost.toml",
            "mhrw/estimates.toml",
            "mhrw/degree_pdf.csv",
            "comparison.csv",
            "summary.toml",
        ] {
            assert!(tmp.path().join(f).exists(), "{f} missing");
        }
        // one chain cannot run Gelman-Rubin
        assert_eq!(out.status, RunStatus::NotConverged);
        assert_eq!(out.status.exit_code(), 3);
        assert_eq!(out.runs[0].burn_in, 500);
    }

    #[test]
    fn config_error_exit_code() {
        let tmp = tempfile::tempdir().unwrap();
        let mut c = minimal(tmp.path());
        c.sampling.budget = 0;
        let e = run_experiment(&c).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn stage_failure_keeps_partial_output() {
        let tmp = tempfile::tempdir().unwrap();
        let mut c = minimal(tmp.path());
        c.sampling.chains = 10_000;
        let e = run_experiment(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("seeds: "));
        assert!(tmp.path().join("graph/edges.txt").exists());
    }
}
