//! Subcommands of the `critnode` binary.

pub mod config;
pub mod report;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use critnode::baselines::{run_baseline, BaselineKind};
use critnode::dismantle::{one_shot, AncCurve, FitnessMode, RemovalList};
use critnode::dsl::{parse, Evaluator, MetricCache, ScoreExpr};
use critnode::engine::{export_telemetry, records_to_jsonl, run_with_observer, RunResult};
use critnode::graph::{generate_ba, load_edge_list, write_edge_list, Graph};
use critnode::variation::{
    HttpChatClient, LlmOperator, MockOperator, OperatorKind, PromptTemplates, SecretString, VariationOperator,
    API_KEY_ENV,
};

use config::RunConfig;
use report::{CompareReport, GraphStats};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or input files.
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "critnode",
    version,
    about = "Evolve node-scoring functions for network dismantling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a scoring function on a graph.
    Evolve(EvolveArgs),
    /// Dismantle a graph with one method and report its ANC.
    Dismantle(DismantleArgs),
    /// Rank several methods on one graph by ANC.
    Compare(CompareArgs),
    /// Write a Barabási-Albert edge list.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Anc,
    Terminal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OperatorArg {
    Llm,
    Mock,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub operator: Option<OperatorArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub capacity: Option<usize>,
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, value_enum)]
    pub fitness_mode: Option<ModeArg>,
    #[arg(long)]
    pub budget_secs: Option<f64>,
    #[arg(long)]
    pub no_manual_init: bool,
    #[arg(long)]
    pub no_population_mgmt: bool,
    #[arg(long)]
    pub single_epoch: bool,
    /// Directory with replacement prompt templates.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Log every endpoint request and reply under the run directory.
    #[arg(long)]
    pub transcripts: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dc,
    Corehd,
    Wn,
    Expr,
}

#[derive(Debug, Args)]
pub struct DismantleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// File holding a scoring expression (e.g. a run's best.dsl).
    #[arg(long)]
    pub expr_file: Option<PathBuf>,
    /// Scoring expression given inline.
    #[arg(long, conflicts_with = "expr_file")]
    pub expr: Option<String>,
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,
    /// Tie-break seed for corehd.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "critnode-dismantle")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated baselines.
    #[arg(long, value_delimiter = ',', default_value = "dc,corehd,wn")]
    pub methods: Vec<String>,
    /// Adds an `evolved` row scored with this expression.
    #[arg(long)]
    pub expr_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,
    /// Seeds averaged over for randomized baselines.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value = "critnode-compare")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output edge list.
    #[arg(long, default_value = "ba.txt")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve(a) => evolve(a),
        Command::Dismantle(a) => dismantle(a),
        Command::Compare(a) => compare(a),
        Command::Synth(a) => synth(a),
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open graph {}: {e}", path.display())))?;
    let g = load_edge_list(BufReader::new(file)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if g.edge_count() == 0 {
        return Err(CliError::Usage(format!("{} has no edges", path.display())));
    }
    Ok(g)
}

fn check_fraction(f: f64) -> Result<(), CliError> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--fraction must lie in (0, 1), got {f}")))
    }
}

fn read_expr(path: &Path) -> Result<ScoreExpr, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read expression {}: {e}", path.display())))?;
    parse(text.trim()).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_templates(dir: &Path) -> Result<PromptTemplates, CliError> {
    let read = |name: &str| {
        std::fs::read_to_string(dir.join(name))
            .map_err(|e| CliError::Usage(format!("cannot read template {}: {e}", dir.join(name).display())))
    };
    let t = PromptTemplates {
        crossover: read("crossover.txt")?,
        mutation: read("mutation.txt")?,
        format: read("format.txt")?,
    };
    t.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(t)
}

/// Applies command-line overrides on top of the (possibly file-based)
/// configuration.
pub fn resolve_evolve_config(a: &EvolveArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ev = &mut cfg.evolution;
    if let Some(g) = &a.graph {
        cfg.graph = Some(g.clone());
    }
    if let Some(o) = &a.out {
        cfg.output_dir = o.clone();
    }
    if let Some(op) = a.operator {
        ev.operator = match op {
            OperatorArg::Llm => OperatorKind::Llm,
            OperatorArg::Mock => OperatorKind::Mock,
        };
    }
    if let Some(s) = a.seed {
        ev.master_seed = s;
    }
    if let Some(t) = a.epochs {
        ev.epochs = t;
    }
    if let Some(m) = a.mutation_rate {
        ev.mutation_rate = m;
    }
    if let Some(t) = a.tau {
        ev.similarity_threshold = t;
    }
    if let Some(c) = a.capacity {
        ev.population_capacity = c;
    }
    if let Some(f) = a.fraction {
        ev.removal_fraction = f;
    }
    if let Some(m) = a.fitness_mode {
        ev.fitness_mode = match m {
            ModeArg::Anc => FitnessMode::Anc,
            ModeArg::Terminal => FitnessMode::Terminal,
        };
    }
    if let Some(b) = a.budget_secs {
        ev.budget_secs = Some(b);
    }
    ev.ablation.no_manual_init |= a.no_manual_init;
    ev.ablation.no_population_mgmt |= a.no_population_mgmt;
    ev.ablation.single_epoch |= a.single_epoch;
    if let Some(t) = &a.templates {
        cfg.templates_dir = Some(t.clone());
    }
    if a.transcripts {
        cfg.llm.transcripts_dir = Some(cfg.output_dir.join("transcripts"));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn evolve(a: EvolveArgs) -> Result<(), CliError> {
    let mut cfg = resolve_evolve_config(&a)?;
    let graph_path = cfg
        .graph
        .clone()
        .ok_or_else(|| CliError::Usage("--graph is required".into()))?;
    let templates = match &cfg.templates_dir {
        Some(d) => load_templates(d)?,
        None => PromptTemplates::default(),
    };
    // fail fast, before any compute or network traffic
    let key =
        match cfg.evolution.operator {
            OperatorKind::Llm => Some(SecretString::from_env().ok_or_else(|| {
                CliError::Usage(format!("--operator llm needs the {API_KEY_ENV} environment variable"))
            })?),
            OperatorKind::Mock => None,
        };
    let g = load_graph(&graph_path)?;
    let out = cfg.output_dir.clone();
    create_dir(&out)?;
    cfg.write(&out)?;

    let max_offspring = cfg.evolution.max_offspring;
    let op: Box<dyn VariationOperator> = match key {
        Some(key) => {
            cfg.llm.api_key = key;
            Box::new(LlmOperator::new(
                HttpChatClient::new(&cfg.llm),
                cfg.llm.clone(),
                templates,
                max_offspring,
            ))
        }
        None => Box::new(MockOperator { max_offspring }),
    };

    let log_path = out.join("run.jsonl");
    let log = File::create(&log_path).map_err(|e| runtime(format!("cannot write {}: {e}", log_path.display())))?;
    let mut log = BufWriter::new(log);
    let mut log_err = None;
    let result = run_with_observer(&g, &cfg.evolution, op.as_ref(), |rec| {
        let line = records_to_jsonl(std::slice::from_ref(rec));
        if let Err(e) = log.write_all(line.as_bytes()).and_then(|_| log.flush()) {
            log_err.get_or_insert(e);
        }
        eprintln!(
            "epoch {:>4}: {} populations, {} generated, best {:.5}",
            rec.epoch,
            rec.populations.len(),
            rec.counts.generated,
            rec.best.fitness
        );
    });
    if let Some(e) = log_err {
        return Err(runtime(format!("cannot write {}: {e}", log_path.display())));
    }
    let result = result.map_err(runtime)?;
    write_run_outputs(&out, &result)?;
    println!("best fitness {:.5} (ANC-based c_f)", result.best.fitness);
    println!("{}", result.best.expr);
    Ok(())
}

fn write_run_outputs(out: &Path, r: &RunResult) -> Result<(), CliError> {
    write_file(&out.join("best.dsl"), format!("{}\n", r.best.expr))?;
    let t = export_telemetry(&r.records);
    write_file(&out.join("telemetry_size.csv"), t.size)?;
    write_file(&out.join("telemetry_mean_fitness.csv"), t.mean_fitness)?;
    write_file(&out.join("telemetry_max_fitness.csv"), t.max_fitness)?;
    let snapshot = serde_json::to_string_pretty(&r.populations.snapshot()).expect("snapshot serializes");
    write_file(&out.join("populations.json"), snapshot + "\n")?;
    let mut rejected = String::new();
    for (epoch, rej) in &r.rejections {
        let line = serde_json::json!({ "epoch": epoch, "raw": rej.raw, "reason": rej.reason });
        rejected.push_str(&line.to_string());
        rejected.push('\n');
    }
    write_file(&out.join("rejections.jsonl"), rejected)
}

fn expr_curve(g: &Graph, e: &ScoreExpr, fraction: f64) -> Result<(RemovalList, AncCurve), CliError> {
    let cache = MetricCache::new();
    one_shot(&Evaluator::new(g, &cache), e, fraction).map_err(runtime)
}

fn baseline_kind(m: MethodArg) -> Option<BaselineKind> {
    match m {
        MethodArg::Dc => Some(BaselineKind::Dc),
        MethodArg::Corehd => Some(BaselineKind::CoreHd),
        MethodArg::Wn => Some(BaselineKind::Wn),
        MethodArg::Expr => None,
    }
}

fn dismantle(a: DismantleArgs) -> Result<(), CliError> {
    check_fraction(a.fraction)?;
    let expr = match (a.method, &a.expr_file, &a.expr) {
        (MethodArg::Expr, Some(p), _) => Some(read_expr(p)?),
        (MethodArg::Expr, None, Some(t)) => Some(parse(t).map_err(|e| CliError::Usage(format!("--expr: {e}")))?),
        (MethodArg::Expr, None, None) => {
            return Err(CliError::Usage("--method expr needs --expr-file or --expr".into()))
        }
        _ => None,
    };
    let g = load_graph(&a.graph)?;
    let (removal, curve) = match (baseline_kind(a.method), &expr) {
        (Some(kind), _) => run_baseline(kind, a.seed, &g, a.fraction).map_err(runtime)?,
        (None, Some(e)) => expr_curve(&g, e, a.fraction)?,
        (None, None) => unreachable!("expression checked above"),
    };
    create_dir(&a.out)?;
    let config = serde_json::json!({
        "command": "dismantle",
        "graph": a.graph,
        "method": format!("{:?}", a.method).to_lowercase(),
        "expr": expr.as_ref().map(|e| e.to_string()),
        "fraction": a.fraction,
        "seed": a.seed,
        "output_dir": a.out,
    });
    write_file(
        &a.out.join("config.json"),
        serde_json::to_string_pretty(&config).expect("json") + "\n",
    )?;
    write_file(&a.out.join("removal.txt"), removal.to_label_lines(&g))?;
    write_file(&a.out.join("anc.csv"), curve.to_csv())?;
    println!("ANC {:.5}", curve.value());
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), CliError> {
    check_fraction(a.fraction)?;
    if a.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let methods: Vec<String> = a
        .methods
        .iter()
        .map(|m| m.trim().to_string())
        .filter(|m| !m.is_empty())
        .collect();
    if methods.is_empty() && a.expr_file.is_none() {
        return Err(CliError::Usage("no methods to compare".into()));
    }
    let kinds: Vec<BaselineKind> = methods
        .iter()
        .map(|m| m.parse().map_err(CliError::Usage))
        .collect::<Result<_, _>>()?;
    let expr = a.expr_file.as_deref().map(read_expr).transpose()?;
    let g = load_graph(&a.graph)?;

    let mut results = Vec::new();
    for kind in &kinds {
        let seeds = if kind.is_randomized() { a.seeds } else { 1 };
        let mut total = 0.0;
        for seed in 0..seeds {
            total += run_baseline(*kind, seed, &g, a.fraction).map_err(runtime)?.1.value();
        }
        results.push((kind.name().to_string(), total / seeds as f64));
    }
    if let Some(e) = &expr {
        results.push(("evolved".to_string(), expr_curve(&g, e, a.fraction)?.1.value()));
    }
    let report = CompareReport::new(
        GraphStats {
            nodes: g.node_count(),
            edges: g.edge_count(),
        },
        a.fraction,
        results,
    );

    create_dir(&a.out)?;
    let config = serde_json::json!({
        "command": "compare",
        "graph": a.graph,
        "methods": kinds,
        "expr": expr.as_ref().map(|e| e.to_string()),
        "fraction": a.fraction,
        "seeds": a.seeds,
        "output_dir": a.out,
    });
    write_file(
        &a.out.join("config.json"),
        serde_json::to_string_pretty(&config).expect("json") + "\n",
    )?;
    let table = report.to_table();
    write_file(&a.out.join("report.txt"), &table)?;
    write_file(
        &a.out.join("report.json"),
        serde_json::to_string_pretty(&report).expect("json") + "\n",
    )?;
    print!("{table}");
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    if a.n <= a.m || a.m == 0 {
        return Err(CliError::Usage(format!(
            "need n > m >= 1, got n = {}, m = {}",
            a.n, a.m
        )));
    }
    let g = generate_ba(a.n, a.m, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf = Vec::new();
    writeln!(buf, "# Barabasi-Albert n={} m={} seed={}", a.n, a.m, a.seed).expect("in-memory write");
    write_edge_list(&g, &mut buf).map_err(runtime)?;
    write_file(&a.out, buf)?;
    let config = serde_json::json!({ "command": "synth", "n": a.n, "m": a.m, "seed": a.seed, "out": a.out });
    let mut config_path = a.out.clone().into_os_string();
    config_path.push(".config.json");
    write_file(
        Path::new(&config_path),
        serde_json::to_string_pretty(&config).expect("json") + "\n",
    )?;
    println!(
        "wrote {} nodes, {} edges to {}",
        g.node_count(),
        g.edge_count(),
        a.out.display()
    );
    Ok(())
}
