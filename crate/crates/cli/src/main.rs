//! `abcweight` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcweight::adapt::{optimize_weights, prior_reference, scan_line, WeightObjectiveContext};
use abcweight::divergence::Estimator;
use abcweight::harness::{
    build_problem, compute_metrics, consistency_study, observe, repeat_seed, reproduce_table1, reproduce_table2,
    run_experiment, summarize_rows, table1_repeat, table2_repeat, write_dataset_csv, write_table_csv, Metrics, Scale,
    TableRow,
};
use abcweight::rng::{self, Purpose};
use abcweight::smc::simulate_pool;
use abcweight::{ExperimentConfig, Method, ModelId, Particle, Population, SampleSet};
use clap::{Args, Parser, Subcommand};
use log::info;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] abcweight::Error),

    #[error("{0}")]
    Usage(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "abcweight", version, about = "ABC-SMC with adaptively weighted summary statistics")]
struct Cli {
    /// Experiment config (TOML); overrides any preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for run artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PresetArg {
    /// Shipped preset used when no --config is given.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the observed dataset at the config's true parameters.
    Simulate {
        #[arg(long)]
        model: ModelId,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one inference and write its artifacts to --out-dir.
    Infer {
        #[command(flatten)]
        preset: PresetArg,
        #[arg(long)]
        method: Option<Method>,
    },
    /// Recompute metrics for the final generation of a run directory.
    Metrics {
        #[arg(long)]
        run: PathBuf,
    },
    /// Adaptive against uniform weights at equal compute.
    Table1(TableArgs),
    /// Adaptive against the baseline weighting methods.
    Table2(TableArgs),
    /// Objective along a random line through the optimized weights.
    ScanLine {
        #[command(flatten)]
        preset: PresetArg,
        #[arg(long, default_value_t = 1e-4)]
        radius: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Final adaptive weights over repeated runs on one dataset.
    WeightsConsistency {
        #[command(flatten)]
        preset: PresetArg,
        #[arg(long, default_value_t = 10)]
        runs: usize,
    },
    /// Hellinger estimate between two headerless CSV sample matrices.
    Divergence {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, default_value = "desk")]
    scale: Scale,
    /// Models to run (default: all four).
    #[arg(long, value_delimiter = ',')]
    models: Vec<ModelId>,
    /// Replications per model (default: the preset's count).
    #[arg(long)]
    repeats: Option<usize>,
}

fn load_config(cli: &Cli, preset: Option<&str>, fallback: &str) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, preset) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config and --preset are mutually exclusive".into())),
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, name) => ExperimentConfig::preset(name.unwrap_or(fallback))?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    cli.out_dir.as_deref().ok_or_else(|| CliError::Usage("this command needs --out-dir".into()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

fn print_metrics(m: &Metrics) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(m).map_err(abcweight::Error::from)?);
    Ok(())
}

fn simulate(cli: &Cli, model: ModelId, out: &Path) -> Result<()> {
    let cfg = load_config(cli, None, model.as_str())?;
    if cfg.model.id != model {
        return Err(CliError::Usage(format!("--model {model} does not match the config's model {}", cfg.model.id)));
    }
    write_dataset_csv(out, &observe(&cfg)?)?;
    info!("wrote {}", out.display());
    Ok(())
}

fn infer(cli: &Cli, preset: Option<&str>, method: Option<Method>) -> Result<()> {
    let mut cfg = load_config(cli, preset, "toy-desk")?;
    if let Some(m) = method {
        cfg.method = m;
    }
    let dir = out_dir(cli)?;
    let run = run_experiment(&cfg, dir)?;
    info!("wrote {}", run.dir.display());
    print_metrics(&run.metrics)
}

fn last_generation(dir: &Path) -> Result<(usize, PathBuf)> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let g = name.strip_prefix("particles_gen")?.strip_suffix(".csv")?.parse().ok()?;
            Some((g, e.path()))
        })
        .max_by_key(|(g, _)| *g)
        .ok_or_else(|| CliError::Usage(format!("no particles_gen*.csv in {}", dir.display())))
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv { path: path.to_path_buf(), source }
}

fn read_population(path: &Path, generation: usize, dim: usize) -> Result<Population> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let mut particles = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error(path))?;
        let field = |i: usize| -> Result<f64> {
            record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                CliError::Usage(format!("{}: bad field {i} in row {}", path.display(), particles.len() + 1))
            })
        };
        let theta = (1..=dim).map(field).collect::<Result<Vec<f64>>>()?;
        particles.push(Particle {
            log10_theta: theta.iter().map(|t| t.log10()).collect(),
            theta,
            v: field(dim + 1)?,
            ln_raw_weight: 0.0,
            summary: None,
            distance: field(dim + 2)?,
        });
    }
    Ok(Population::new(generation, particles))
}

fn metrics(cli: &Cli, run: &Path) -> Result<()> {
    let mut cfg = ExperimentConfig::load(run.join("config.toml"))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let prior = cfg.prior_spec()?;
    let (generation, path) = last_generation(run)?;
    let pop = read_population(&path, generation, prior.dim())?;
    let mut r = rng::stream(cfg.seed, Purpose::Metric, 0, 0);
    let m = compute_metrics(&pop, &prior, &cfg.theta_star, cfg.metrics.n_ref, cfg.estimator.k, &mut r)?;
    print_metrics(&m)
}

fn table(cli: &Cli, which: u8, args: &TableArgs) -> Result<()> {
    let dir = out_dir(cli)?;
    let root = cli.seed.unwrap_or(0);
    let rows: Vec<TableRow> = if cli.config.is_some() {
        let base = load_config(cli, None, "")?;
        let mut rows = Vec::new();
        for r in 0..args.repeats.unwrap_or(base.repeats) {
            let cfg = ExperimentConfig { seed: repeat_seed(base.seed, r), ..base.clone() };
            rows.extend(if which == 1 { table1_repeat(&cfg, r)? } else { table2_repeat(&cfg, r)? });
        }
        rows
    } else {
        let models = if args.models.is_empty() { ModelId::ALL.to_vec() } else { args.models.clone() };
        if which == 1 {
            reproduce_table1(args.scale, &models, args.repeats, root)?
        } else {
            reproduce_table2(args.scale, &models, args.repeats, root)?
        }
    };
    ensure_dir(dir)?;
    let summary = summarize_rows(&rows);
    write_table_csv(&dir.join(format!("table{which}.csv")), &rows)?;
    write_table_csv(&dir.join(format!("table{which}_summary.csv")), &summary)?;
    println!("{:<14} {:<12} {:>8} {:>10} {:>10} {:>10}", "model", "column", "N", "hellinger", "mean_bias", "mode_bias");
    for r in &summary {
        println!(
            "{:<14} {:<12} {:>8} {:>10.4} {:>10.4} {:>10.4}",
            r.model.as_str(),
            r.label,
            r.n_sims,
            r.hellinger,
            r.mean_bias,
            r.mode_bias
        );
    }
    Ok(())
}

fn scan(cli: &Cli, preset: Option<&str>, radius: f64, points: usize) -> Result<()> {
    let cfg = load_config(cli, preset, "toy-figure")?;
    let problem = build_problem(&cfg)?;
    let settings = cfg.smc_settings()?;
    let pool = simulate_pool(&problem, &settings, 1, None)?;
    let m = cfg.accepted()?;
    let xi = prior_reference(&problem.prior, m, cfg.seed, 1)?;
    let ctx = WeightObjectiveContext::from_pool(&pool, xi, m, cfg.estimator.estimator())?;
    let mut r = rng::stream(cfg.seed, Purpose::Scan, 0, 0);
    let best = optimize_weights(&ctx, &cfg.optimizer, None, None, &mut r)?;
    let line = scan_line(&best.weights, &ctx, radius, points, &mut r)?;
    let dir = out_dir(cli)?;
    ensure_dir(dir)?;
    let path = dir.join("scan_line.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_error(&path))?;
    w.write_record(["r", "L"]).map_err(csv_error(&path))?;
    for p in &line {
        let value = p.value.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([p.r.to_string(), value]).map_err(csv_error(&path))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
    println!("L(w*) = {:.6} at w* = {:?}", best.value, best.weights.as_slice());
    Ok(())
}

fn consistency(cli: &Cli, preset: Option<&str>, runs: usize) -> Result<()> {
    let cfg = load_config(cli, preset, "death-desk")?;
    let report = consistency_study(&cfg, runs)?;
    let dir = out_dir(cli)?;
    ensure_dir(dir)?;
    report.write_csv(&dir.join("weights_consistency.csv"))?;
    println!("largest mean-centered weight: w_{}", report.argmax_centered() + 1);
    Ok(())
}

fn read_matrix(path: &Path) -> Result<SampleSet> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path).map_err(csv_error(path))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error(path))?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Usage(format!("{}: row {}: {e}", path.display(), rows.len() + 1)))?;
        rows.push(row);
    }
    Ok(SampleSet::from_rows(&rows)?)
}

fn divergence(x: &Path, y: &Path, k: usize) -> Result<()> {
    let x = read_matrix(x)?;
    let y = read_matrix(y)?;
    println!("{:.6}", Estimator::new(k).hellinger(&x, &y)?.value);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Simulate { model, out } => simulate(cli, *model, out),
        Command::Infer { preset, method } => infer(cli, preset.preset.as_deref(), *method),
        Command::Metrics { run } => metrics(cli, run),
        Command::Table1(args) => table(cli, 1, args),
        Command::Table2(args) => table(cli, 2, args),
        Command::ScanLine { preset, radius, points } => scan(cli, preset.preset.as_deref(), *radius, *points),
        Command::WeightsConsistency { preset, runs } => consistency(cli, preset.preset.as_deref(), *runs),
        Command::Divergence { x, y, k } => divergence(x, y, *k),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
