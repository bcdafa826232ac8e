use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use osnwalk::crawl::{observe, CacheMode, EgoNet, Frontend};
use osnwalk::diagnostics::{detect_burn_in, metric_series, BurnIn, MetricKind, MetricSeries, Thresholds};
use osnwalk::estimators::{truth_report, EstimateOptions, EstimateReport};
use osnwalk::experiment::{compare_methods, run_experiment, ExperimentConfig, ExperimentError, GraphSource, Tolerances};
use osnwalk::graph::{load_attributes, load_edge_list, write_attributes, write_edge_list, NodeId, SocialGraph};
use osnwalk::rng::{family, StreamFamily};
use osnwalk::samplers::{
    read_trace_dump, run_parallel_chains, select_seeds, subsample_trace, uni_sample, write_trace_dump, Catalog,
    ChainSet, Execution, Method, WalkTrace,
};

#[derive(Parser)]
#[command(name = "osnwalk", version, about = "Crawl and sample simulated social graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph with planted attributes.
    Generate(GenerateArgs),
    /// Crawl a graph with one method and write the trace.
    Sample(SampleArgs),
    /// Convergence diagnostics and burn-in for a trace.
    Diagnose(DiagnoseArgs),
    /// Estimates from a trace after burn-in.
    Estimate(EstimateArgs),
    /// Compare several traces against the graph's ground truth.
    Compare(CompareArgs),
    /// Run the full pipeline from a config file.
    Run(RunArgs),
    /// Collect ego networks around post-burn-in trace positions.
    Egonets(EgonetArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list, one `a b` pair per line.
    #[arg(long)]
    edges: PathBuf,
    /// Attribute file, `token user_id region QQQQ` per line.
    #[arg(long)]
    attributes: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Config whose [graph] and [plant] sections are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Fraction of nodes that hide their friend list.
    #[arg(long)]
    hidden_friends: Option<f64>,
    /// Give low user ids to high-degree nodes.
    #[arg(long)]
    anticorrelated_ids: bool,
    /// Size of the user id space ids are drawn from.
    #[arg(long)]
    id_space: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModelArg {
    Er,
    Ba,
    Ws,
    TwoCommunity,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    method: Method,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 28)]
    chains: usize,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Accepted samples for uni.
    #[arg(long, default_value_t = 10_000)]
    target: usize,
    /// Id space probed by uni; defaults to the next power of two above the largest id.
    #[arg(long)]
    id_space: Option<u64>,
    /// Charge every request as a download.
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value = "mhrw")]
    method: Method,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: TraceArgs,
    #[arg(long, default_value_t = 50)]
    checkpoints: usize,
    /// Comma-separated: degree, user_id, region_id, membership:<region>.
    #[arg(long, default_value = "degree,user_id,membership:1", value_delimiter = ',')]
    metrics: Vec<MetricKind>,
    #[arg(long, default_value_t = 1.0)]
    geweke: f64,
    #[arg(long, default_value_t = 1.02)]
    gelman_rubin: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: TraceArgs,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    /// Ego networks to collect from the post-burn-in sample (needs --seed).
    #[arg(long, default_value_t = 0)]
    egonets: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// `method=path`, repeatable.
    #[arg(long = "trace", required = true)]
    traces: Vec<String>,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides sampling.master_seed.
    #[arg(long)]
    seed: u64,
    /// Overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EgonetArgs {
    #[command(flatten)]
    input: TraceArgs,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Bad input the user can fix: exit code 1.
#[derive(Debug)]
struct ConfigError(String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

struct NotConverged;

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn load_graph(a: &GraphArgs) -> Result<SocialGraph> {
    for p in std::iter::once(&a.edges).chain(&a.attributes) {
        if !p.exists() {
            return Err(config_err(format!("file not found: {}", p.display())));
        }
    }
    let g = load_edge_list(&a.edges).with_context(|| format!("loading {}", a.edges.display()))?;
    Ok(match &a.attributes {
        Some(p) => load_attributes(p, g).with_context(|| format!("loading {}", p.display()))?,
        None => g,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn default_id_space(g: &SocialGraph) -> u64 {
    let max = g.attributes().iter().map(|a| a.user_id as u64).max().unwrap_or(0);
    (max + 1).next_power_of_two().min(1 << 32)
}

/// Uni sample files hold `user_id token` lines.
fn read_uni_samples(path: &Path, g: &SocialGraph) -> Result<Vec<NodeId>> {
    let index = g.token_index();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let token = body.split_whitespace().nth(1).with_context(|| format!("line {}: expected `user_id node`", i + 1))?;
        out.push(*index.get(token).with_context(|| format!("line {}: unknown node `{token}`", i + 1))?);
    }
    Ok(out)
}

struct LoadedTrace {
    traces: Vec<WalkTrace>,
    /// Uni samples when the method is uni.
    nodes: Vec<NodeId>,
}

fn load_trace(input: &TraceArgs, g: &SocialGraph) -> Result<LoadedTrace> {
    if !input.trace.exists() {
        return Err(config_err(format!("file not found: {}", input.trace.display())));
    }
    if input.method == Method::Uni {
        return Ok(LoadedTrace { traces: Vec::new(), nodes: read_uni_samples(&input.trace, g)? });
    }
    let reader = BufReader::new(File::open(&input.trace)?);
    let traces = read_trace_dump(reader, g, input.method)?;
    Ok(LoadedTrace { traces, nodes: Vec::new() })
}

fn catalog_for(g: &SocialGraph, traces: &[WalkTrace]) -> Catalog {
    let mut c = Catalog::default();
    for t in traces {
        for &v in &t.nodes {
            c.insert(observe(g, v));
        }
    }
    c
}

fn post_burn_in(loaded: &LoadedTrace, burn_in: usize) -> Vec<NodeId> {
    if loaded.traces.is_empty() {
        return loaded.nodes.clone();
    }
    loaded.traces.iter().flat_map(|t| t.nodes.iter().skip(burn_in).copied()).collect()
}

fn chain_set(loaded: &LoadedTrace, method: Method) -> ChainSet {
    let budget = loaded.traces.iter().map(WalkTrace::len).max().unwrap_or(0);
    ChainSet {
        method,
        budget,
        master_seed: 0,
        cache: CacheMode::Shared,
        traces: loaded.traces.clone(),
        catalog: Catalog::default(),
        chain_costs: Vec::new(),
        total_cost: Default::default(),
    }
}

fn pick_egos(loaded: &LoadedTrace, method: Method, burn_in: usize, count: usize, seed: u64) -> Result<Vec<NodeId>> {
    let mut rng = StreamFamily::new(seed, family::SUBSAMPLE).split(0);
    if loaded.traces.is_empty() {
        let n = count.min(loaded.nodes.len());
        return Ok(rand::seq::index::sample(&mut rng, loaded.nodes.len(), n).into_iter().map(|i| loaded.nodes[i]).collect());
    }
    let set = chain_set(loaded, method);
    let available: usize = set.traces.iter().map(|t| t.len().saturating_sub(burn_in)).sum();
    Ok(subsample_trace(&set, burn_in, count.min(available), &mut rng)?.into_iter().map(|p| p.node).collect())
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| config_err(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = a.model {
        cfg.graph.source = match m {
            ModelArg::Er => GraphSource::ErdosRenyi,
            ModelArg::Ba => GraphSource::BarabasiAlbert,
            ModelArg::Ws => GraphSource::WattsStrogatz,
            ModelArg::TwoCommunity => GraphSource::TwoCommunity,
        };
    }
    if let Some(n) = a.n {
        cfg.graph.n = n;
        cfg.graph.n_per = n / 2;
    }
    cfg.graph.m = a.m.unwrap_or(cfg.graph.m);
    cfg.graph.p = a.p.unwrap_or(cfg.graph.p);
    cfg.graph.k = a.k.unwrap_or(cfg.graph.k);
    cfg.graph.beta = a.beta.unwrap_or(cfg.graph.beta);
    cfg.plant.hidden_friends = a.hidden_friends.unwrap_or(cfg.plant.hidden_friends);
    if a.anticorrelated_ids {
        cfg.plant.user_ids = osnwalk::experiment::UserIdKind::DegreeAnticorrelated;
    }
    cfg.plant.id_space = a.id_space.unwrap_or(cfg.plant.id_space);
    cfg.graph.seed = a.seed;
    cfg.plant.seed = a.seed.wrapping_add(1);
    if cfg.graph.source == GraphSource::File {
        bail!(config_err("generate needs a synthetic model"));
    }
    let (g, truth) = osnwalk::experiment::build_graph(&cfg)?;
    fs::create_dir_all(&a.out)?;
    write_edge_list(&g, create(&a.out.join("edges.txt"))?)?;
    write_attributes(&g, create(&a.out.join("attributes.txt"))?)?;
    if let Some(t) = truth {
        fs::write(a.out.join("ground_truth.toml"), t.to_toml())?;
    }
    println!("nodes {} edges {}", g.node_count(), g.edge_count());
    Ok(())
}

fn sample(a: SampleArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let cache = if a.no_cache { CacheMode::Disabled } else { CacheMode::Shared };
    let fe = Frontend::new(&g, cache);
    let mut w = create(&a.out)?;
    if a.method == Method::Uni {
        let space = a.id_space.unwrap_or_else(|| default_id_space(&g));
        let mut rng = StreamFamily::new(a.seed, family::UNI).split(0);
        let s = uni_sample(&fe, a.target, space, &mut rng)?;
        writeln!(w, "# user_id node")?;
        for o in &s.nodes {
            writeln!(w, "{} {}", o.user_id, g.token(o.node))?;
        }
        println!("accepted {} of {} probes ({:.2} probes per accept)", s.nodes.len(), s.probes, s.probes_per_accept());
    } else {
        let seeds = select_seeds(&g, a.chains, a.seed)?;
        let set = run_parallel_chains(&fe, a.method, &seeds, a.budget, a.seed, Execution::Parallel)?;
        write_trace_dump(&set.traces, &g, &mut w)?;
        if matches!(a.method, Method::Mhrw) {
            println!("acceptance rate {:.4}", set.acceptance_rate());
        }
        println!("backtracks {}", set.backtracks());
    }
    w.flush()?;
    println!("{}", fe.ledger());
    Ok(())
}

fn diagnose(a: DiagnoseArgs) -> Result<Option<NotConverged>> {
    let g = load_graph(&a.input.graph)?;
    if a.input.method == Method::Uni {
        return Err(config_err("uni samples are independent; nothing to diagnose"));
    }
    let loaded = load_trace(&a.input, &g)?;
    let catalog = catalog_for(&g, &loaded.traces);
    let mut series: Vec<MetricSeries> = Vec::new();
    for &kind in &a.metrics {
        series.extend(loaded.traces.iter().map(|t| metric_series(t, &catalog, kind)));
    }
    let th = Thresholds { geweke: a.geweke, gelman_rubin: a.gelman_rubin, ..Thresholds::default() };
    let report = detect_burn_in(&series, th, a.checkpoints)?;
    match &a.out {
        Some(p) => fs::write(p, report.to_text())?,
        None => print!("{report}"),
    }
    Ok(matches!(report.burn_in, BurnIn::NotConverged).then_some(NotConverged))
}

fn estimate_report(g: &SocialGraph, loaded: &LoadedTrace, method: Method, burn_in: usize, egos: &[EgoNet]) -> Result<EstimateReport> {
    let nodes = post_burn_in(loaded, burn_in);
    let samples: Vec<_> = nodes.iter().map(|&v| observe(g, v)).collect();
    let opts = EstimateOptions { id_space: default_id_space(g), ..EstimateOptions::default() };
    Ok(EstimateReport::compute(method.name(), &samples, egos, &opts)?)
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let g = load_graph(&a.input.graph)?;
    let loaded = load_trace(&a.input, &g)?;
    let egos = if a.egonets > 0 {
        let seed = a.seed.ok_or_else(|| config_err("--egonets needs --seed"))?;
        let fe = Frontend::new(&g, CacheMode::Shared);
        pick_egos(&loaded, a.input.method, a.burn_in, a.egonets, seed)?
            .into_iter()
            .map(|v| fe.collect_egonet(v))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let r = estimate_report(&g, &loaded, a.input.method, a.burn_in, &egos)?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("estimates.toml"), r.to_text())?;
    for (name, body) in r.csv_files() {
        fs::write(a.out.join(name), body)?;
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let mut reports = Vec::new();
    for spec in &a.traces {
        let (m, path) = spec.split_once('=').ok_or_else(|| config_err(format!("--trace expects method=path, got `{spec}`")))?;
        let method: Method = m.parse().map_err(config_err)?;
        let input = TraceArgs {
            graph: GraphArgs { edges: a.graph.edges.clone(), attributes: a.graph.attributes.clone() },
            trace: PathBuf::from(path),
            method,
        };
        let loaded = load_trace(&input, &g)?;
        let burn_in = if method == Method::Uni || method == Method::Bfs { 0 } else { a.burn_in };
        reports.push(estimate_report(&g, &loaded, method, burn_in, &[])?);
    }
    let opts = EstimateOptions { id_space: default_id_space(&g), ..EstimateOptions::default() };
    let truth = truth_report(&g, &opts)?;
    let table = compare_methods(&reports, &truth, &Tolerances::default()).to_csv();
    match &a.out {
        Some(p) => fs::write(p, table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn egonets(a: EgonetArgs) -> Result<()> {
    let g = load_graph(&a.input.graph)?;
    let loaded = load_trace(&a.input, &g)?;
    let fe = Frontend::new(&g, CacheMode::Shared);
    let mut w = create(&a.out)?;
    writeln!(w, "# ego <token> <degree>, then one `a b` line per edge")?;
    for v in pick_egos(&loaded, a.input.method, a.burn_in, a.count, a.seed)? {
        let e = fe.collect_egonet(v)?;
        writeln!(w, "ego {} {}", g.token(e.ego), e.ego_degree)?;
        for (x, y) in &e.edges {
            writeln!(w, "{} {}", g.token(*x), g.token(*y))?;
        }
    }
    w.flush()?;
    println!("{}", fe.ledger());
    Ok(())
}

fn run(a: RunArgs) -> Result<Option<NotConverged>> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    cfg.sampling.master_seed = a.seed;
    if let Some(out) = a.out {
        cfg.output.dir = out;
    }
    let outcome = run_experiment(&cfg)?;
    print!("{}", outcome.comparison.to_csv());
    Ok((outcome.status.exit_code() == 3).then_some(NotConverged))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 1;
    }
    match e.downcast_ref::<ExperimentError>() {
        Some(x) => x.exit_code() as u8,
        None => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a).map(|_| None),
        Command::Sample(a) => sample(a).map(|_| None),
        Command::Diagnose(a) => diagnose(a),
        Command::Estimate(a) => estimate(a).map(|_| None),
        Command::Compare(a) => compare(a).map(|_| None),
        Command::Run(a) => run(a),
        Command::Egonets(a) => egonets(a).map(|_| None),
    };
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(NotConverged)) => {
            eprintln!("not converged");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
